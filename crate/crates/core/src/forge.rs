//! Constructions that break the bounded procedure.
//!
//! * Three clause scenarios where a target clause is derivable from short
//!   premises, but only through an intermediate clause at the length bound
//!   `k`. A saturation capped at `k - 1` never reaches the target.
//! * The split transform, which turns a uniform width-`w` formula into an
//!   equisatisfiable width-`w/2 + 1` formula by cutting every clause in half
//!   and linking the halves with a fresh variable in opposite polarities.
//!   Starting from width `2^k + 2` and splitting `k` times lands on 3-CNF.
//! * Generators for unsatisfiable uniform-width formulas to feed the split.

use std::collections::{BTreeSet, HashSet};
use std::fmt;

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cnf::{Canonical, Clause, Formula, Literal, VariableId};
use crate::engine::{ClauseDb, Origin};
use crate::oracle::{OracleConfig, OracleError};
use crate::rules::{expand, for_each_expansion, resolve};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ForgeError {
    #[error("the k >= 4 family needs k >= 4, got {0}")]
    BoundTooSmall(usize),
    #[error("split needs an even width of at least 4, got {0}")]
    BadWidth(usize),
    #[error("split needs clauses of uniform width")]
    NonUniformWidth,
    #[error("cannot split a formula with no clauses")]
    NoClauses,
    #[error("width {actual} does not match b_{k} = {expected}")]
    WidthMismatch { k: u32, expected: u64, actual: usize },
    #[error("b_{0} overflows")]
    Overflow(u32),
    #[error("width {0} exceeds the generator budget")]
    WidthBudget(u32),
    #[error("clause width {width} exceeds variable count {vars}")]
    WidthExceedsVariables { width: usize, vars: usize },
    #[error("no unsatisfiable formula after {attempts} attempts")]
    AttemptsExhausted { attempts: u32 },
    #[error(transparent)]
    Oracle(#[from] OracleError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum LemmaKind {
    /// Two premises resolve to an intermediate of length `k`, which resolves
    /// with a third premise to the target.
    ChainOfThree,
    /// Two intermediates of length `k`, each from a pair of premises,
    /// resolve to the target.
    TwoIntermediates,
    /// One intermediate by resolution and one by expansion of a premise.
    ResolutionAndExpansion,
}

impl LemmaKind {
    /// Short id used on the command line and in reports.
    pub fn id(self) -> &'static str {
        match self {
            LemmaKind::ChainOfThree => "511",
            LemmaKind::TwoIntermediates => "517",
            LemmaKind::ResolutionAndExpansion => "518",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RuleSet {
    pub resolution: bool,
    pub expansion: bool,
}

impl RuleSet {
    pub const RESOLUTION: RuleSet = RuleSet {
        resolution: true,
        expansion: false,
    };
    pub const BOTH: RuleSet = RuleSet {
        resolution: true,
        expansion: true,
    };
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Step {
    Resolve {
        left: String,
        right: String,
        pivot: VariableId,
    },
    Expand {
        base: String,
        added: Literal,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NamedClause {
    pub name: String,
    pub clause: Clause,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChainClause {
    pub name: String,
    pub clause: Clause,
    pub step: Step,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LemmaScenario {
    pub kind: LemmaKind,
    pub k: usize,
    pub premises: Vec<NamedClause>,
    /// Derivations in order; the last one produces the target.
    pub chain: Vec<ChainClause>,
    pub target: Clause,
    pub rules: RuleSet,
}

impl LemmaScenario {
    pub fn clause(&self, name: &str) -> Option<&Clause> {
        self.premises
            .iter()
            .map(|p| (&p.name, &p.clause))
            .chain(self.chain.iter().map(|c| (&c.name, &c.clause)))
            .find(|(n, _)| *n == name)
            .map(|(_, c)| c)
    }

    pub fn premise_clauses(&self) -> Vec<Clause> {
        self.premises.iter().map(|p| p.clause.clone()).collect()
    }
}

fn a(i: u32) -> Literal {
    VariableId::of(i).positive()
}

fn not_a(i: u32) -> Literal {
    VariableId::of(i).negative()
}

fn named(name: &str, lits: impl IntoIterator<Item = Literal>) -> NamedClause {
    NamedClause {
        name: name.into(),
        clause: Clause::from_literals(lits),
    }
}

fn resolved(name: &str, lits: impl IntoIterator<Item = Literal>, left: &str, right: &str, pivot: u32) -> ChainClause {
    ChainClause {
        name: name.into(),
        clause: Clause::from_literals(lits),
        step: Step::Resolve {
            left: left.into(),
            right: right.into(),
            pivot: VariableId::of(pivot),
        },
    }
}

/// The `k >= 4` family: `A = (a1 … a(k-1))`, `B = (¬a1 a4 … a(k+1))`,
/// `C = (¬a1 ¬a2 a4 … ak)`; `E = A ⊗a1 B` has length `k` and the target
/// `D = C ⊗a2 E` has length `k` too.
pub fn lemma511_instance(k: usize) -> Result<LemmaScenario, ForgeError> {
    if k < 4 {
        return Err(ForgeError::BoundTooSmall(k));
    }
    let k32 = k as u32;
    let premises = vec![
        named("A", (1..k32).map(a)),
        named("B", std::iter::once(not_a(1)).chain((4..=k32 + 1).map(a))),
        named("C", [not_a(1), not_a(2)].into_iter().chain((4..=k32).map(a))),
    ];
    let e = resolved("E", (2..=k32 + 1).map(a), "A", "B", 1);
    let d = resolved("D", std::iter::once(not_a(1)).chain((3..=k32 + 1).map(a)), "C", "E", 2);
    Ok(LemmaScenario {
        kind: LemmaKind::ChainOfThree,
        k,
        target: d.clause.clone(),
        premises,
        chain: vec![e, d],
        rules: RuleSet::RESOLUTION,
    })
}

/// Fixed `k = 4` scenario with two length-4 intermediates `E`, `F` that
/// resolve to the length-3 target `G`.
pub fn lemma517_instance() -> LemmaScenario {
    let premises = vec![
        named("A", [a(1), a(2), a(5)]),
        named("B", [a(3), a(4), not_a(5)]),
        named("C", [not_a(1), a(2), a(6)]),
        named("D", [a(3), a(4), not_a(6)]),
    ];
    let e = resolved("E", [a(1), a(2), a(3), a(4)], "A", "B", 5);
    let f = resolved("F", [not_a(1), a(2), a(3), a(4)], "C", "D", 6);
    let g = resolved("G", [a(2), a(3), a(4)], "E", "F", 1);
    LemmaScenario {
        kind: LemmaKind::TwoIntermediates,
        k: 4,
        target: g.clause.clone(),
        premises,
        chain: vec![e, f, g],
        rules: RuleSet::RESOLUTION,
    }
}

/// Fixed `k = 4` scenario where one intermediate comes from expanding the
/// premise `C` by `a2`.
pub fn lemma518_instance() -> LemmaScenario {
    let premises = vec![
        named("A", [a(1), a(2), a(5)]),
        named("B", [a(3), a(4), not_a(5)]),
        named("C", [not_a(1), a(3), a(4)]),
    ];
    let d = resolved("D", [a(1), a(2), a(3), a(4)], "A", "B", 5);
    let e = ChainClause {
        name: "E".into(),
        clause: Clause::from_literals([not_a(1), a(2), a(3), a(4)]),
        step: Step::Expand {
            base: "C".into(),
            added: a(2),
        },
    };
    let f = resolved("F", [a(2), a(3), a(4)], "D", "E", 1);
    LemmaScenario {
        kind: LemmaKind::ResolutionAndExpansion,
        k: 4,
        target: f.clause.clone(),
        premises,
        chain: vec![d, e, f],
        rules: RuleSet::BOTH,
    }
}

/// Least fixpoint of `rules` over `seed`, using and keeping only clauses of
/// at most `max_len` literals. Tautologies are never stored; the empty
/// clause is.
pub fn bounded_closure(
    seed: &[Clause],
    max_len: usize,
    rules: RuleSet,
    universe: &BTreeSet<VariableId>,
) -> ClauseDb {
    let mut db = ClauseDb::new();
    for c in seed {
        db.insert(c.clone(), Origin::Input);
    }
    let mut round = 0u32;
    // `processed` clauses have been paired with every earlier clause.
    let mut processed = 0;
    while processed < db.len() {
        round += 1;
        let end = db.len();
        let mut fresh: Vec<(Clause, Origin)> = Vec::new();
        let mut fresh_set = HashSet::new();
        let mut offer = |db: &ClauseDb, clause: Clause, origin: Origin| {
            if clause.len() <= max_len && !db.contains(&clause) && fresh_set.insert(clause.clone()) {
                fresh.push((clause, origin));
            }
        };
        for i in processed..end {
            if rules.resolution {
                for j in 0..end {
                    for r in resolve(db.get(i), db.get(j)) {
                        if let Canonical::Clause(c) = r.clause {
                            let origin = Origin::Resolved {
                                iteration: round,
                                parents: (i, j),
                                pivot: r.pivot,
                            };
                            offer(&db, c, origin);
                        }
                    }
                }
            }
            if rules.expansion {
                for_each_expansion(db.get(i), max_len, universe, |e| {
                    offer(&db, e.clone(), Origin::Expanded { iteration: round, parent: i });
                    true
                });
            }
        }
        processed = end;
        for (c, o) in fresh {
            db.insert(c, o);
        }
    }
    db
}

/// One derivation step on the way to a clause in a closure.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WitnessStep {
    pub clause: Clause,
    pub origin: Origin,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CheckReport {
    pub kind: LemmaKind,
    pub k: usize,
    pub hypotheses_ok: bool,
    pub bounded_closure_size: usize,
    pub target_in_bounded_closure: bool,
    pub target_in_relaxed_closure: bool,
    /// Derivation of the target in the closure capped at `k`, premises first.
    pub witness_chain: Vec<WitnessStep>,
}

impl CheckReport {
    /// The scenario refutes the claim that the target is reachable below
    /// the bound.
    pub fn confirmed(&self) -> bool {
        self.hypotheses_ok && !self.target_in_bounded_closure && self.target_in_relaxed_closure
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ScenarioError {
    #[error("step {step} does not derive {name}: {reason}")]
    StepFailed {
        step: usize,
        name: String,
        reason: String,
    },
}

fn replay_step(s: &LemmaScenario, index: usize, step: &ChainClause) -> Result<(), ScenarioError> {
    let fail = |reason: String| ScenarioError::StepFailed {
        step: index,
        name: step.name.clone(),
        reason,
    };
    let lookup = |name: &str| s.clause(name).cloned().ok_or_else(|| fail(format!("unknown clause {name}")));
    match &step.step {
        Step::Resolve { left, right, pivot } => {
            let (l, r) = (lookup(left)?, lookup(right)?);
            let on_pivot = resolve(&l, &r).into_iter().find(|res| res.pivot == *pivot);
            match on_pivot {
                Some(res) if res.clause == Canonical::Clause(step.clause.clone()) => Ok(()),
                Some(res) => Err(fail(format!("resolvent on {pivot} is {:?}", res.clause))),
                None => Err(fail(format!("{left} and {right} do not clash on {pivot}"))),
            }
        }
        Step::Expand { base, added } => {
            let b = lookup(base)?;
            let (p, n) = expand(&b, added.variable()).map_err(|e| fail(e.to_string()))?;
            let got = if added.is_positive() { p } else { n };
            if got == step.clause {
                Ok(())
            } else {
                Err(fail(format!("expansion gives {got}")))
            }
        }
    }
}

/// Length shape the lemma's hypotheses ask for.
fn lengths_ok(s: &LemmaScenario) -> bool {
    let k = s.k;
    let premises = s.premises.iter().all(|p| p.clause.len() < k);
    let (last, intermediates) = s.chain.split_last().expect("nonempty chain");
    let intermediates = intermediates.iter().all(|c| c.clause.len() == k);
    let target = last.clause == s.target && (s.target.len() == k || s.target.len() + 1 == k);
    premises && intermediates && target
}

/// Replays the chain, then saturates the premises at `k - 1` and at `k`.
pub fn check_scenario(s: &LemmaScenario) -> Result<CheckReport, ScenarioError> {
    for (i, step) in s.chain.iter().enumerate() {
        replay_step(s, i, step)?;
    }
    let seed = s.premise_clauses();
    let universe: BTreeSet<VariableId> = seed.iter().flat_map(|c| c.variables()).collect();
    let bounded = bounded_closure(&seed, s.k - 1, s.rules, &universe);
    let relaxed = bounded_closure(&seed, s.k, s.rules, &universe);
    Ok(CheckReport {
        kind: s.kind,
        k: s.k,
        hypotheses_ok: lengths_ok(s),
        bounded_closure_size: bounded.len(),
        target_in_bounded_closure: bounded.contains(&s.target),
        target_in_relaxed_closure: relaxed.contains(&s.target),
        witness_chain: relaxed.position(&s.target).map(|i| witness(&relaxed, i)).unwrap_or_default(),
    })
}

/// Every clause the derivation of `db[i]` depends on, in database order.
pub fn witness(db: &ClauseDb, i: usize) -> Vec<WitnessStep> {
    let mut needed = BTreeSet::new();
    let mut stack = vec![i];
    while let Some(j) = stack.pop() {
        if needed.insert(j) {
            stack.extend(db.origin(j).parents());
        }
    }
    needed
        .into_iter()
        .map(|j| WitnessStep {
            clause: db.get(j).clone(),
            origin: db.origin(j),
        })
        .collect()
}

/// `b_n = 2^n + 2`, the widths that split down to exactly 3.
pub fn b_sequence(n: u32) -> Result<u64, ForgeError> {
    1u64.checked_shl(n)
        .filter(|_| n < 64)
        .and_then(|p| p.checked_add(2))
        .ok_or(ForgeError::Overflow(n))
}

/// `b_0 = 3`, `b_n = 2 (b_(n-1) - 1)`.
pub fn b_sequence_recurrence(n: u32) -> Result<u64, ForgeError> {
    (0..n).try_fold(3u64, |b, _| (b - 1).checked_mul(2).ok_or(ForgeError::Overflow(n)))
}

/// Bookkeeping for one split: which variables are original and which fresh
/// variable links which pair of output clauses.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitMetadata {
    pub input_width: usize,
    pub output_width: usize,
    pub original_variables: BTreeSet<VariableId>,
    /// One per input clause, in input order.
    pub fresh_variables: Vec<VariableId>,
    /// Output indices of the (positive-half, negative-half) clauses for each
    /// fresh variable.
    pub halves: Vec<(usize, usize)>,
}

impl SplitMetadata {
    pub fn is_fresh(&self, var: VariableId) -> bool {
        self.fresh_variables.binary_search(&var).is_ok()
    }

    /// Literals over original variables appearing in `formula`.
    pub fn original_terms(&self, formula: &Formula) -> BTreeSet<Literal> {
        self.terms(formula, false)
    }

    /// The fresh literals, both polarities as they occur.
    pub fn fresh_terms(&self, formula: &Formula) -> BTreeSet<Literal> {
        self.terms(formula, true)
    }

    fn terms(&self, formula: &Formula, fresh: bool) -> BTreeSet<Literal> {
        formula
            .clauses()
            .iter()
            .flat_map(|c| c.literals().iter().copied())
            .filter(|l| self.is_fresh(l.variable()) == fresh)
            .collect()
    }
}

/// Splits each width-`w` clause into its first `w/2` literals plus a fresh
/// `x_i`, and its last `w/2` literals plus `¬x_i`. Halves follow canonical
/// literal order; fresh ids start after the largest id in `phi`.
pub fn split_once(phi: &Formula) -> Result<(Formula, SplitMetadata), ForgeError> {
    if phi.is_empty() {
        return Err(ForgeError::NoClauses);
    }
    let w = phi.uniform_width().ok_or(ForgeError::NonUniformWidth)?;
    if w < 4 || w % 2 != 0 {
        return Err(ForgeError::BadWidth(w));
    }
    let first_fresh = phi.max_variable().expect("nonempty clauses").get() + 1;
    let mut out = Vec::with_capacity(phi.len() * 2);
    let mut fresh_variables = Vec::with_capacity(phi.len());
    let mut halves = Vec::with_capacity(phi.len());
    for (id, clause) in (first_fresh..).zip(phi.clauses()) {
        let x = VariableId::of(id);
        let (first, last) = clause.literals().split_at(w / 2);
        halves.push((out.len(), out.len() + 1));
        out.push(Clause::from_literals(first.iter().copied().chain([x.positive()])));
        out.push(Clause::from_literals(last.iter().copied().chain([x.negative()])));
        fresh_variables.push(x);
    }
    let meta = SplitMetadata {
        input_width: w,
        output_width: w / 2 + 1,
        original_variables: phi.variables(),
        fresh_variables,
        halves,
    };
    Ok((Formula::new(out), meta))
}

/// Applies [`split_once`] `k` times to a width-`b_k` formula, landing on
/// width 3.
pub fn split_to_3cnf(phi: &Formula, k: u32) -> Result<(Formula, Vec<SplitMetadata>), ForgeError> {
    let expected = b_sequence(k)?;
    let actual = phi.uniform_width().ok_or(ForgeError::NonUniformWidth)?;
    if actual as u64 != expected {
        return Err(ForgeError::WidthMismatch { k, expected, actual });
    }
    let mut current = phi.clone();
    let mut metas = Vec::with_capacity(k as usize);
    for _ in 0..k {
        let (next, meta) = split_once(&current)?;
        current = next;
        metas.push(meta);
    }
    Ok((current, metas))
}

/// Widest complete formula the generator will build (2^20 clauses).
pub const COMPLETE_WIDTH_LIMIT: u32 = 20;

/// All `2^w` sign patterns over `w` consecutive variables starting at
/// `first_var`. Unsatisfiable: each assignment falsifies the clause with the
/// opposite signs. Pattern `m` negates variable `j` when bit `w-1-j` of `m`
/// is set, so the all-positive clause comes first.
pub fn complete_unsat_cnf(w: u32, first_var: VariableId) -> Result<Formula, ForgeError> {
    if w > COMPLETE_WIDTH_LIMIT {
        return Err(ForgeError::WidthBudget(w));
    }
    let base = first_var.get();
    Ok((0..1u32 << w)
        .map(|m| {
            Clause::from_literals(
                (0..w).map(|j| Literal::new(VariableId::of(base + j), m >> (w - 1 - j) & 1 == 0)),
            )
        })
        .collect())
}

/// Draws uniform width-`w` formulas over variables `1..=n_vars` until the
/// oracle certifies one unsatisfiable. Deterministic for a given seed.
/// Repeated clauses are dropped by normalization, so the result may hold
/// fewer than `n_clauses` clauses.
pub fn random_unsat_kcnf(
    w: usize,
    n_vars: usize,
    n_clauses: usize,
    seed: u64,
    max_attempts: u32,
    oracle: &OracleConfig,
) -> Result<Formula, ForgeError> {
    if w > n_vars {
        return Err(ForgeError::WidthExceedsVariables { width: w, vars: n_vars });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..max_attempts {
        let f = random_kcnf_with(&mut rng, w, n_vars, n_clauses);
        if oracle.solve(&f)?.is_unsat() {
            return Ok(f);
        }
    }
    Err(ForgeError::AttemptsExhausted {
        attempts: max_attempts,
    })
}

/// A uniform width-`w` formula: each clause picks `w` distinct variables and
/// random signs. Normalized, so repeated clauses collapse.
pub fn random_kcnf(w: usize, n_vars: usize, n_clauses: usize, seed: u64) -> Result<Formula, ForgeError> {
    if w > n_vars {
        return Err(ForgeError::WidthExceedsVariables { width: w, vars: n_vars });
    }
    Ok(random_kcnf_with(&mut ChaCha8Rng::seed_from_u64(seed), w, n_vars, n_clauses))
}

fn random_kcnf_with<R: Rng>(rng: &mut R, w: usize, n_vars: usize, n_clauses: usize) -> Formula {
    let clauses: Vec<Clause> = (0..n_clauses)
        .map(|_| {
            Clause::from_literals(
                sample(rng, n_vars, w)
                    .into_iter()
                    .map(|i| Literal::new(VariableId::of(i as u32 + 1), rng.gen_bool(0.5)))
                    .collect::<Vec<_>>(),
            )
        })
        .collect();
    Formula::new(clauses).normalized()
}

impl fmt::Display for CheckReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{:>4}  k={:<3} hypotheses={:<5} closure(<k)={:<4} target<k={:<5} target<=k={:<5} {}",
            self.kind.id(),
            self.k,
            self.hypotheses_ok,
            self.bounded_closure_size,
            self.target_in_bounded_closure,
            self.target_in_relaxed_closure,
            if self.confirmed() { "CONFIRMED" } else { "NOT CONFIRMED" }
        )
    }
}
