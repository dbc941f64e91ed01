//! The bounded saturation procedure.
//!
//! Each outer iteration resolves every ordered pair of clauses present at the
//! start of the iteration, expands every clause up to the length bound, and
//! collects the new clauses in a temporary buffer. The buffer is inserted
//! only after the full pass, so a clause derived in iteration `i` is first
//! used as a parent in iteration `i + 1`. After insertion the unit clauses
//! are scanned for a complementary pair. The procedure stops with
//! [`Verdict::Unsat`] on such a pair, or with [`Verdict::ClaimedSat`] once an
//! iteration inserts nothing.
//!
//! Resolvents longer than the bound are counted and dropped, as are
//! tautological resolvents. Empty resolvents (from two complementary units)
//! are not stored either; the unit scan reports that contradiction.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cnf::{count_bound, Canonical, Clause, Formula, VariableId};
use crate::rules::{for_each_expansion, resolve};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EngineError {
    #[error("input clause {clause} is longer than the length bound {bound}")]
    InputClauseTooLong { clause: Clause, bound: usize },
    #[error("input contains the empty clause")]
    EmptyInputClause,
    #[error("length bound must be at least 1 unless running unbounded")]
    InvalidBound,
    #[error("iteration cap of {0} exceeded; the clause-count bound guarantees termination before it")]
    MaxIterationsExceeded(u64),
    #[error("clause budget of {limit} exceeded ({reached} clauses)")]
    BudgetExceeded { limit: u64, reached: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EngineConfig {
    /// Longest clause processed or stored.
    pub length_bound: usize,
    /// Ignore `length_bound` entirely.
    pub unbounded: bool,
    /// Defaults to `count_bound(n, length_bound) + 2`.
    pub max_iterations: Option<u64>,
    /// Keep a per-iteration record in the report.
    pub trace: bool,
    /// Most clauses the database (plus the pending buffer) may hold.
    pub max_clauses: u64,
}

impl Default for EngineConfig {
    fn default() -> Self {
        EngineConfig {
            length_bound: 3,
            unbounded: false,
            max_iterations: None,
            trace: false,
            max_clauses: 1 << 24,
        }
    }
}

impl EngineConfig {
    pub fn unbounded() -> Self {
        EngineConfig {
            unbounded: true,
            ..Self::default()
        }
    }

    pub fn with_bound(length_bound: usize) -> Self {
        EngineConfig {
            length_bound,
            ..Self::default()
        }
    }

    pub fn traced(mut self) -> Self {
        self.trace = true;
        self
    }
}

/// How a clause entered the database. Parent indices refer to
/// [`ClauseDb::get`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Origin {
    Input,
    Resolved {
        iteration: u32,
        parents: (usize, usize),
        pivot: VariableId,
    },
    Expanded {
        iteration: u32,
        parent: usize,
    },
}

impl Origin {
    /// Iteration that produced the clause; 0 for input clauses.
    pub fn iteration(&self) -> u32 {
        match *self {
            Origin::Input => 0,
            Origin::Resolved { iteration, .. } | Origin::Expanded { iteration, .. } => iteration,
        }
    }

    pub fn parents(&self) -> Vec<usize> {
        match *self {
            Origin::Input => vec![],
            Origin::Resolved { parents: (a, b), .. } => vec![a, b],
            Origin::Expanded { parent, .. } => vec![parent],
        }
    }
}

/// Deduplicating clause store, in insertion order, with a length index and
/// an origin tag per clause.
#[derive(Debug, Clone, Default)]
pub struct ClauseDb {
    clauses: Vec<Clause>,
    origins: Vec<Origin>,
    index: HashMap<Clause, usize>,
    by_len: BTreeMap<usize, Vec<usize>>,
}

impl ClauseDb {
    pub fn new() -> Self {
        Self::default()
    }

    /// Returns false if the clause was already present.
    pub fn insert(&mut self, clause: Clause, origin: Origin) -> bool {
        if self.index.contains_key(&clause) {
            return false;
        }
        let i = self.clauses.len();
        self.by_len.entry(clause.len()).or_default().push(i);
        self.index.insert(clause.clone(), i);
        self.clauses.push(clause);
        self.origins.push(origin);
        true
    }

    pub fn contains(&self, clause: &Clause) -> bool {
        self.index.contains_key(clause)
    }

    pub fn position(&self, clause: &Clause) -> Option<usize> {
        self.index.get(clause).copied()
    }

    pub fn get(&self, i: usize) -> &Clause {
        &self.clauses[i]
    }

    pub fn origin(&self, i: usize) -> Origin {
        self.origins[i]
    }

    pub fn len(&self) -> usize {
        self.clauses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.clauses.is_empty()
    }

    pub fn clauses(&self) -> &[Clause] {
        &self.clauses
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Clause, Origin)> + '_ {
        self.clauses.iter().zip(self.origins.iter().copied())
    }

    /// Clauses of exactly `len` literals, in insertion order.
    pub fn of_length(&self, len: usize) -> impl Iterator<Item = &Clause> + '_ {
        self.by_len
            .get(&len)
            .into_iter()
            .flatten()
            .map(move |&i| &self.clauses[i])
    }

    pub fn count_by_length(&self) -> BTreeMap<usize, usize> {
        self.by_len.iter().map(|(&k, v)| (k, v.len())).collect()
    }

    pub fn to_formula(&self) -> Formula {
        Formula::new(self.clauses.clone())
    }
}

/// Smallest variable `v` with both `(v)` and `(¬v)` stored.
pub fn find_unit_contradiction(db: &ClauseDb) -> Option<VariableId> {
    let mut positive = BTreeSet::new();
    let mut negative = BTreeSet::new();
    for c in db.of_length(1) {
        let l = c.literals()[0];
        if l.is_positive() {
            positive.insert(l.variable());
        } else {
            negative.insert(l.variable());
        }
    }
    positive.intersection(&negative).next().copied()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    /// No contradiction found at the fixpoint. Not trustworthy.
    ClaimedSat,
    Unsat,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub iteration: u32,
    pub pairs_examined: u64,
    pub resolvents_collected: u64,
    pub expansions_collected: u64,
    pub inserted: u64,
    pub discarded_long: u64,
    pub discarded_tautologies: u64,
    pub discarded_empty: u64,
    pub db_size: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SolveReport {
    pub verdict: Verdict,
    pub iterations: u32,
    pub added_per_iteration: Vec<u64>,
    pub discarded_long: u64,
    pub discarded_tautologies: u64,
    pub discarded_empty: u64,
    pub final_db_size: u64,
    pub contradiction_variable: Option<VariableId>,
    pub elapsed: Duration,
    /// Present when the config asked for a trace.
    pub trace: Option<Vec<IterationRecord>>,
}

impl SolveReport {
    /// Equality ignoring `elapsed`.
    pub fn same_outcome(&self, other: &SolveReport) -> bool {
        SolveReport {
            elapsed: Duration::ZERO,
            ..self.clone()
        } == SolveReport {
            elapsed: Duration::ZERO,
            ..other.clone()
        }
    }
}

/// Single-owner engine state. Use [`solve`] unless the database or
/// individual iterations need inspecting.
#[derive(Debug, Clone)]
pub struct Engine {
    db: ClauseDb,
    config: EngineConfig,
    universe: BTreeSet<VariableId>,
    iteration: u32,
    max_iterations: u64,
    records: Vec<IterationRecord>,
}

impl Engine {
    /// Expansion universe is the formula's own variables.
    pub fn new(formula: &Formula, config: EngineConfig) -> Result<Self, EngineError> {
        Self::with_universe(formula, config, formula.variables())
    }

    pub fn with_universe(
        formula: &Formula,
        config: EngineConfig,
        universe: BTreeSet<VariableId>,
    ) -> Result<Self, EngineError> {
        if !config.unbounded && config.length_bound == 0 {
            return Err(EngineError::InvalidBound);
        }
        let mut db = ClauseDb::new();
        for c in formula.clauses() {
            if c.is_empty() {
                return Err(EngineError::EmptyInputClause);
            }
            if !config.unbounded && c.len() > config.length_bound {
                return Err(EngineError::InputClauseTooLong {
                    clause: c.clone(),
                    bound: config.length_bound,
                });
            }
            db.insert(c.clone(), Origin::Input);
        }
        let mut universe = universe;
        universe.extend(formula.variables());
        let n = universe.len() as u64;
        let cap = if config.unbounded { n } else { config.length_bound as u64 };
        let max_iterations = config.max_iterations.unwrap_or_else(|| {
            count_bound(n, cap)
                .ok()
                .and_then(|b| u64::try_from(b).ok())
                .map_or(u64::MAX, |b| b.saturating_add(2))
        });
        Ok(Engine {
            db,
            config,
            universe,
            iteration: 0,
            max_iterations,
            records: Vec::new(),
        })
    }

    pub fn db(&self) -> &ClauseDb {
        &self.db
    }

    pub fn universe(&self) -> &BTreeSet<VariableId> {
        &self.universe
    }

    pub fn iterations(&self) -> u32 {
        self.iteration
    }

    pub fn records(&self) -> &[IterationRecord] {
        &self.records
    }

    fn cap(&self) -> usize {
        if self.config.unbounded {
            self.universe.len()
        } else {
            self.config.length_bound
        }
    }

    fn check_budget(&self, pending: usize) -> Result<(), EngineError> {
        let reached = (self.db.len() + pending) as u64;
        if reached > self.config.max_clauses {
            Err(EngineError::BudgetExceeded {
                limit: self.config.max_clauses,
                reached,
            })
        } else {
            Ok(())
        }
    }

    /// One outer pass. Only clauses present when the pass starts take part.
    pub fn run_iteration(&mut self) -> Result<IterationRecord, EngineError> {
        self.iteration += 1;
        let iteration = self.iteration;
        let cap = self.cap();
        let start = self.db.len();
        let mut rec = IterationRecord {
            iteration,
            ..IterationRecord::default()
        };
        let mut pending: Vec<(Clause, Origin)> = Vec::new();
        let mut pending_set: HashSet<Clause> = HashSet::new();

        for ci in 0..start {
            let c = self.db.get(ci);
            if c.len() > cap {
                continue;
            }
            for di in 0..start {
                let d = self.db.get(di);
                if d.len() > cap {
                    continue;
                }
                rec.pairs_examined += 1;
                for r in resolve(c, d) {
                    match r.clause {
                        Canonical::Tautology => rec.discarded_tautologies += 1,
                        Canonical::Clause(e) if e.is_empty() => rec.discarded_empty += 1,
                        Canonical::Clause(e) if e.len() > cap => rec.discarded_long += 1,
                        Canonical::Clause(e) => {
                            if !self.db.contains(&e) && pending_set.insert(e.clone()) {
                                rec.resolvents_collected += 1;
                                pending.push((
                                    e,
                                    Origin::Resolved {
                                        iteration,
                                        parents: (ci, di),
                                        pivot: r.pivot,
                                    },
                                ));
                            }
                        }
                    }
                }
            }

            let mut over_budget = None;
            for_each_expansion(c, cap, &self.universe, |e| {
                if !self.db.contains(e) && pending_set.insert(e.clone()) {
                    rec.expansions_collected += 1;
                    pending.push((e.clone(), Origin::Expanded { iteration, parent: ci }));
                    if let Err(err) = self.check_budget(pending.len()) {
                        over_budget = Some(err);
                        return false;
                    }
                }
                true
            });
            if let Some(err) = over_budget {
                return Err(err);
            }
            self.check_budget(pending.len())?;
        }

        for (clause, origin) in pending {
            if self.db.insert(clause, origin) {
                rec.inserted += 1;
            }
        }
        rec.db_size = self.db.len() as u64;
        self.records.push(rec.clone());
        Ok(rec)
    }

    /// Runs to a verdict.
    pub fn solve(&mut self) -> Result<SolveReport, EngineError> {
        let started = Instant::now();
        loop {
            if u64::from(self.iteration) >= self.max_iterations {
                return Err(EngineError::MaxIterationsExceeded(self.max_iterations));
            }
            let rec = self.run_iteration()?;
            if let Some(var) = find_unit_contradiction(&self.db) {
                return Ok(self.report(Verdict::Unsat, Some(var), started.elapsed()));
            }
            if rec.inserted == 0 {
                return Ok(self.report(Verdict::ClaimedSat, None, started.elapsed()));
            }
        }
    }

    fn report(&self, verdict: Verdict, var: Option<VariableId>, elapsed: Duration) -> SolveReport {
        let sum = |f: fn(&IterationRecord) -> u64| self.records.iter().map(f).sum();
        SolveReport {
            verdict,
            iterations: self.iteration,
            added_per_iteration: self.records.iter().map(|r| r.inserted).collect(),
            discarded_long: sum(|r| r.discarded_long),
            discarded_tautologies: sum(|r| r.discarded_tautologies),
            discarded_empty: sum(|r| r.discarded_empty),
            final_db_size: self.db.len() as u64,
            contradiction_variable: var,
            elapsed,
            trace: self.config.trace.then(|| self.records.clone()),
        }
    }

    /// Counts, without storing them, the expansions step 1.b would generate
    /// for stored clause `index`, bucketed by length. Fails once the count
    /// passes the clause budget.
    pub fn expansion_profile(&self, index: usize) -> Result<Vec<u64>, EngineError> {
        let cap = self.cap();
        let mut by_len = vec![0u64; cap + 1];
        let mut total = 0u64;
        let completed = for_each_expansion(self.db.get(index), cap, &self.universe, |e| {
            by_len[e.len()] += 1;
            total += 1;
            total <= self.config.max_clauses
        });
        if !completed {
            return Err(EngineError::BudgetExceeded {
                limit: self.config.max_clauses,
                reached: total,
            });
        }
        Ok(by_len)
    }
}

/// Runs the engine on `formula` to a verdict.
pub fn solve(formula: &Formula, config: &EngineConfig) -> Result<SolveReport, EngineError> {
    Engine::new(&formula.normalized(), *config)?.solve()
}

/// Expansion counts for `(x1)` when the engine runs without a length bound
/// on `x1 ∧ x2 ∧ … ∧ xn`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlowupReport {
    pub n: u32,
    /// `by_length[k]` is the number of expansions with `k` literals.
    pub by_length: Vec<u64>,
    /// Full-length clauses over `x1..xn` containing `x1`: the expansions of
    /// length `n`, or `(x1)` itself when `n = 1`. Always `2^(n-1)`.
    pub full_length: u64,
    pub total: u64,
}

pub fn blowup_demo(n: u32) -> Result<BlowupReport, EngineError> {
    blowup_demo_with_budget(n, EngineConfig::default().max_clauses)
}

pub fn blowup_demo_with_budget(n: u32, max_clauses: u64) -> Result<BlowupReport, EngineError> {
    assert!(n >= 1, "blowup needs at least one variable");
    let formula: Formula = (1..=n).map(|i| Clause::from_literals([VariableId::of(i).positive()])).collect();
    let config = EngineConfig {
        max_clauses,
        ..EngineConfig::unbounded()
    };
    let engine = Engine::new(&formula, config)?;
    let by_length = engine.expansion_profile(0)?;
    Ok(BlowupReport {
        n,
        full_length: if n == 1 { 1 } else { by_length[n as usize] },
        total: by_length.iter().sum(),
        by_length,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(l: &[i64]) -> Clause {
        Clause::from_dimacs(l)
    }

    #[test]
    fn complementary_units_unsat_in_one_iteration() {
        let r = solve(&Formula::from_dimacs(&[&[1], &[-1]]), &EngineConfig::default()).unwrap();
        assert_eq!(r.verdict, Verdict::Unsat);
        assert_eq!(r.contradiction_variable, Some(VariableId::of(1)));
        assert_eq!(r.iterations, 1);
        assert_eq!(r.discarded_empty, 2);
    }

    #[test]
    fn complete_3cnf_is_refuted() {
        let f: Formula = (0..8u32)
            .map(|m| Clause::from_literals((0..3).map(|j| crate::cnf::Literal::new(VariableId::of(j + 1), m >> j & 1 == 0))))
            .collect();
        let r = solve(&f, &EngineConfig::default()).unwrap();
        assert_eq!(r.verdict, Verdict::Unsat);
    }

    #[test]
    fn lone_3_clause_inserts_nothing() {
        let f = Formula::from_dimacs(&[&[1, 2, 3]]);
        let mut e = Engine::new(&f, EngineConfig::default()).unwrap();
        assert_eq!(e.run_iteration().unwrap().inserted, 0);
    }

    #[test]
    fn shared_pair_resolves_to_length_three() {
        // a = 1, b = 2, x1 = 3, x2 = 4
        let f = Formula::from_dimacs(&[&[1, 2, 3], &[1, -2, 4]]);
        let mut e = Engine::new(&f, EngineConfig::default()).unwrap();
        assert_eq!(e.run_iteration().unwrap().inserted, 1);
        assert!(e.db().contains(&c(&[1, 3, 4])));
    }

    #[test]
    fn unit_expands_over_universe() {
        let f = Formula::from_dimacs(&[&[1]]);
        let three = (1..=3).map(VariableId::of).collect();
        let mut e = Engine::with_universe(&f, EngineConfig::default(), three).unwrap();
        assert_eq!(e.run_iteration().unwrap().inserted, 8);

        let four = (1..=4).map(VariableId::of).collect();
        let mut e = Engine::with_universe(&f, EngineConfig::default(), four).unwrap();
        assert_eq!(e.run_iteration().unwrap().inserted, 18);
    }

    #[test]
    fn unit_contradiction_examples() {
        let mut db = ClauseDb::new();
        for cl in [c(&[5]), c(&[-5]), c(&[6])] {
            db.insert(cl, Origin::Input);
        }
        assert_eq!(find_unit_contradiction(&db), Some(VariableId::of(5)));

        let mut db = ClauseDb::new();
        db.insert(c(&[5]), Origin::Input);
        db.insert(c(&[5, 6]), Origin::Input);
        assert_eq!(find_unit_contradiction(&db), None);

        let mut db = ClauseDb::new();
        for cl in [c(&[3]), c(&[-3]), c(&[1]), c(&[-1])] {
            db.insert(cl, Origin::Input);
        }
        assert_eq!(find_unit_contradiction(&db), Some(VariableId::of(1)));
    }

    #[test]
    fn rejects_long_input_clause() {
        let f = Formula::from_dimacs(&[&[1, 2, 3, 4]]);
        assert!(matches!(
            solve(&f, &EngineConfig::default()),
            Err(EngineError::InputClauseTooLong { bound: 3, .. })
        ));
        assert!(solve(&f, &EngineConfig::unbounded()).is_ok());
    }

    #[test]
    fn rejects_zero_bound_and_empty_clause() {
        let f = Formula::from_dimacs(&[&[1]]);
        assert_eq!(solve(&f, &EngineConfig::with_bound(0)).unwrap_err(), EngineError::InvalidBound);
        let f = Formula::new(vec![Clause::empty()]);
        assert_eq!(solve(&f, &EngineConfig::default()).unwrap_err(), EngineError::EmptyInputClause);
    }

    #[test]
    fn iteration_cap_is_reported() {
        let f = Formula::from_dimacs(&[&[1], &[2, 3]]);
        let cfg = EngineConfig {
            max_iterations: Some(1),
            ..EngineConfig::default()
        };
        assert_eq!(solve(&f, &cfg).unwrap_err(), EngineError::MaxIterationsExceeded(1));
    }

    #[test]
    fn empty_formula_claimed_sat() {
        let r = solve(&Formula::default(), &EngineConfig::default()).unwrap();
        assert_eq!(r.verdict, Verdict::ClaimedSat);
        assert_eq!(r.added_per_iteration, vec![0]);
    }

    #[test]
    fn trace_is_optional() {
        let f = Formula::from_dimacs(&[&[1, 2], &[-1, 3]]);
        assert!(solve(&f, &EngineConfig::default()).unwrap().trace.is_none());
        let r = solve(&f, &EngineConfig::default().traced()).unwrap();
        assert_eq!(r.trace.unwrap().len() as u32, r.iterations);
    }

    #[test]
    fn blowup_small_cases() {
        let r = blowup_demo(1).unwrap();
        assert_eq!((r.full_length, r.total), (1, 0));
        let r = blowup_demo(4).unwrap();
        assert_eq!(r.full_length, 8);
        assert_eq!(r.total, 26); // 3^3 - 1
        assert_eq!(blowup_demo(10).unwrap().full_length, 512);
    }

    #[test]
    fn blowup_respects_budget() {
        assert!(matches!(
            blowup_demo_with_budget(8, 100),
            Err(EngineError::BudgetExceeded { limit: 100, .. })
        ));
    }

    #[test]
    fn unbounded_budget_stops_saturation() {
        let f: Formula = (1..=8).map(|i| c(&[i])).collect();
        let cfg = EngineConfig {
            max_clauses: 200,
            ..EngineConfig::unbounded()
        };
        assert!(matches!(solve(&f, &cfg), Err(EngineError::BudgetExceeded { .. })));
    }
}
