//! Ground-truth satisfiability: an exhaustive truth table for small formulas
//! and a deterministic DPLL for the larger split-chain instances.
//!
//! Also holds the semantic predicates used to state the derivation rules:
//! an assignment is *blocked* by a clause when it falsifies it, and `c`
//! implies `d` when every assignment blocked by `d` is blocked by `c`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cnf::{Assignment, Clause, CnfError, Formula, VariableId};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("{vars} variables exceed the truth-table cap of {cap}")]
    TooManyVariables { vars: usize, cap: usize },
    #[error("DPLL step budget of {budget} exhausted")]
    BudgetExceeded { budget: u64 },
    #[error(transparent)]
    Cnf(#[from] CnfError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Sat,
    Unsat,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    TruthTable,
    Dpll,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct OracleStats {
    pub decisions: u64,
    pub propagations: u64,
    pub pure_literals: u64,
    /// Assignments enumerated by the truth table.
    pub assignments_checked: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OracleVerdict {
    pub status: Status,
    pub model: Option<Assignment>,
    pub method: Method,
    pub stats: OracleStats,
}

impl OracleVerdict {
    pub fn is_sat(&self) -> bool {
        self.status == Status::Sat
    }

    pub fn is_unsat(&self) -> bool {
        self.status == Status::Unsat
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct OracleConfig {
    /// Largest variable count the truth table will enumerate.
    pub truth_table_cap: usize,
    /// Decisions plus propagations DPLL may spend.
    pub dpll_budget: u64,
    pub method: Method,
}

impl Default for OracleConfig {
    fn default() -> Self {
        OracleConfig {
            truth_table_cap: 26,
            dpll_budget: 50_000_000,
            method: Method::Dpll,
        }
    }
}

impl OracleConfig {
    pub fn solve(&self, formula: &Formula) -> Result<OracleVerdict, OracleError> {
        match self.method {
            Method::TruthTable => brute_force_sat_with_cap(formula, self.truth_table_cap),
            Method::Dpll => dpll_sat_with_budget(formula, self.dpll_budget),
        }
    }

    /// `formula ∧ ¬clause` is unsatisfiable.
    pub fn entails(&self, formula: &Formula, clause: &Clause) -> Result<bool, OracleError> {
        let mut query = formula.clone();
        for &l in clause.literals() {
            query.push(Clause::from_literals([l.negated()]));
        }
        if self.method == Method::TruthTable {
            let vars = query.num_variables();
            if vars > self.truth_table_cap {
                return Err(OracleError::TooManyVariables {
                    vars,
                    cap: self.truth_table_cap,
                });
            }
        }
        Ok(self.solve(&query)?.is_unsat())
    }
}

/// Exhaustive truth table with the default cap of 26 variables.
pub fn brute_force_sat(formula: &Formula) -> Result<OracleVerdict, OracleError> {
    brute_force_sat_with_cap(formula, OracleConfig::default().truth_table_cap)
}

/// Enumerates assignments in lexicographic order (variables ascending,
/// false before true) and returns the first model found.
pub fn brute_force_sat_with_cap(formula: &Formula, cap: usize) -> Result<OracleVerdict, OracleError> {
    let vars: Vec<VariableId> = formula.variables().into_iter().collect();
    let n = vars.len();
    if n > cap || n > 63 {
        return Err(OracleError::TooManyVariables { vars: n, cap });
    }
    // Variable i maps to bit n-1-i so counting upward walks the assignments
    // in lexicographic order.
    let bit = |var: VariableId| -> u64 {
        let i = vars.binary_search(&var).expect("variable of formula");
        1u64 << (n - 1 - i)
    };
    let masks: Vec<(u64, u64)> = formula
        .clauses()
        .iter()
        .map(|c| {
            c.literals().iter().fold((0, 0), |(pos, neg), l| {
                if l.is_positive() {
                    (pos | bit(l.variable()), neg)
                } else {
                    (pos, neg | bit(l.variable()))
                }
            })
        })
        .collect();

    let mut stats = OracleStats::default();
    let total = 1u64 << n;
    for bits in 0..total {
        stats.assignments_checked += 1;
        let sat = masks.iter().all(|&(pos, neg)| bits & pos != 0 || !bits & neg != 0);
        if sat {
            let model = vars
                .iter()
                .enumerate()
                .map(|(i, &v)| (v, bits >> (n - 1 - i) & 1 == 1))
                .collect();
            return Ok(OracleVerdict {
                status: Status::Sat,
                model: Some(model),
                method: Method::TruthTable,
                stats,
            });
        }
    }
    Ok(OracleVerdict {
        status: Status::Unsat,
        model: None,
        method: Method::TruthTable,
        stats,
    })
}

pub fn dpll_sat(formula: &Formula) -> Result<OracleVerdict, OracleError> {
    dpll_sat_with_budget(formula, OracleConfig::default().dpll_budget)
}

/// DPLL with unit propagation and pure-literal elimination. Branches on the
/// smallest unassigned variable, trying true first.
pub fn dpll_sat_with_budget(formula: &Formula, budget: u64) -> Result<OracleVerdict, OracleError> {
    let mut solver = Dpll::new(formula, budget);
    let sat = solver.search()?;
    let model = sat.then(|| {
        // Variables left free by pure-literal elimination or satisfied
        // clauses default to false.
        formula
            .variables()
            .into_iter()
            .map(|v| (v, solver.values[v.get() as usize].unwrap_or(false)))
            .collect::<Assignment>()
    });
    if let Some(m) = &model {
        debug_assert!(formula.evaluate(m).unwrap_or(false));
    }
    Ok(OracleVerdict {
        status: if sat { Status::Sat } else { Status::Unsat },
        model,
        method: Method::Dpll,
        stats: solver.stats,
    })
}

struct Dpll<'a> {
    clauses: &'a [Clause],
    vars: Vec<VariableId>,
    values: Vec<Option<bool>>,
    trail: Vec<VariableId>,
    stats: OracleStats,
    budget: u64,
}

enum ClauseState {
    Satisfied,
    Falsified,
    Unit(crate::cnf::Literal),
    Open,
}

impl<'a> Dpll<'a> {
    fn new(formula: &'a Formula, budget: u64) -> Self {
        let max = formula.max_variable().map_or(0, |v| v.get() as usize);
        Dpll {
            clauses: formula.clauses(),
            vars: formula.variables().into_iter().collect(),
            values: vec![None; max + 1],
            trail: Vec::new(),
            stats: OracleStats::default(),
            budget,
        }
    }

    fn spend(&mut self) -> Result<(), OracleError> {
        if self.stats.decisions + self.stats.propagations + self.stats.pure_literals >= self.budget {
            Err(OracleError::BudgetExceeded {
                budget: self.budget,
            })
        } else {
            Ok(())
        }
    }

    fn assign(&mut self, var: VariableId, value: bool) {
        self.values[var.get() as usize] = Some(value);
        self.trail.push(var);
    }

    fn backtrack(&mut self, mark: usize) {
        for v in self.trail.drain(mark..) {
            self.values[v.get() as usize] = None;
        }
    }

    fn state(&self, clause: &Clause) -> ClauseState {
        let mut unassigned = None;
        let mut open = 0;
        for &l in clause.literals() {
            match self.values[l.variable().get() as usize] {
                Some(v) if l.eval(v) => return ClauseState::Satisfied,
                Some(_) => {}
                None => {
                    open += 1;
                    unassigned = Some(l);
                }
            }
        }
        match (open, unassigned) {
            (0, _) => ClauseState::Falsified,
            (1, Some(l)) => ClauseState::Unit(l),
            _ => ClauseState::Open,
        }
    }

    /// Unit propagation then pure-literal elimination, to a fixpoint.
    /// Returns false on conflict.
    fn simplify(&mut self) -> Result<bool, OracleError> {
        loop {
            let mut changed = false;
            for c in self.clauses {
                match self.state(c) {
                    ClauseState::Falsified => return Ok(false),
                    ClauseState::Unit(l) => {
                        self.spend()?;
                        self.stats.propagations += 1;
                        self.assign(l.variable(), l.is_positive());
                        changed = true;
                    }
                    _ => {}
                }
            }
            if changed {
                continue;
            }
            // Polarity seen per variable among unsatisfied clauses: bit 0
            // positive, bit 1 negative.
            let mut seen = vec![0u8; self.values.len()];
            for c in self.clauses {
                if matches!(self.state(c), ClauseState::Open) {
                    for &l in c.literals() {
                        if self.values[l.variable().get() as usize].is_none() {
                            seen[l.variable().get() as usize] |= if l.is_positive() { 1 } else { 2 };
                        }
                    }
                }
            }
            for (i, &s) in seen.iter().enumerate() {
                if s == 1 || s == 2 {
                    self.spend()?;
                    self.stats.pure_literals += 1;
                    self.assign(VariableId::of(i as u32), s == 1);
                    changed = true;
                }
            }
            if !changed {
                return Ok(true);
            }
        }
    }

    fn search(&mut self) -> Result<bool, OracleError> {
        let mark = self.trail.len();
        if !self.simplify()? {
            self.backtrack(mark);
            return Ok(false);
        }
        if self.clauses.iter().all(|c| matches!(self.state(c), ClauseState::Satisfied)) {
            return Ok(true);
        }
        let var = *self
            .vars
            .iter()
            .find(|v| self.values[v.get() as usize].is_none())
            .expect("an open clause has an unassigned variable");
        for value in [true, false] {
            self.spend()?;
            self.stats.decisions += 1;
            let branch = self.trail.len();
            self.assign(var, value);
            if self.search()? {
                return Ok(true);
            }
            self.backtrack(branch);
        }
        self.backtrack(mark);
        Ok(false)
    }
}

/// True iff every literal of `clause` is false under `assignment`.
pub fn blocks(clause: &Clause, assignment: &Assignment) -> Result<bool, CnfError> {
    Ok(!clause.evaluate(assignment)?)
}

/// Whether every assignment blocked by `d` is also blocked by `c`, checked
/// over the variables of both clauses.
pub fn clause_implies(c: &Clause, d: &Clause) -> bool {
    // An assignment blocks `d` only if it falsifies all of d's literals, so
    // that part is fixed; enumerate the rest of c's variables.
    let mut base = Assignment::new();
    for &l in d.literals() {
        base.set(l.variable(), !l.is_positive());
    }
    let extra: Vec<VariableId> = c.variables().filter(|&v| !d.mentions(v)).collect();
    let mut a = base;
    let mut implied = true;
    enumerate(&extra, &mut a, &mut |a| {
        implied = blocks(c, a).expect("all of c's variables are assigned");
        implied
    });
    implied
}

/// Visits every assignment of `vars` layered onto `a`; stops when `visit`
/// returns false.
fn enumerate(vars: &[VariableId], a: &mut Assignment, visit: &mut dyn FnMut(&Assignment) -> bool) -> bool {
    match vars.split_first() {
        None => visit(a),
        Some((&v, rest)) => {
            for value in [false, true] {
                a.set(v, value);
                if !enumerate(rest, a, visit) {
                    return false;
                }
            }
            true
        }
    }
}

/// Whether `formula` semantically entails `clause`, via DPLL on
/// `formula ∧ ¬clause`.
pub fn entails(formula: &Formula, clause: &Clause) -> Result<bool, OracleError> {
    OracleConfig::default().entails(formula, clause)
}
