//! Literals, clauses, formulas and assignments.
//!
//! A [`Clause`] is always canonical: its literals are sorted by variable id
//! and no variable occurs twice. Anything that would violate that (repeated
//! literals, complementary pairs) is resolved by [`canonicalize_clause`]
//! before a `Clause` value exists.

use std::collections::{BTreeSet, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CnfError {
    #[error("variable ids are 1-based; got 0")]
    ZeroVariable,
    #[error("empty clause not allowed here")]
    EmptyClause,
    #[error("assignment does not cover variable {0}")]
    Unassigned(VariableId),
    #[error("clause count bound overflows for n = {n}, max_len = {max_len}")]
    Overflow { n: u64, max_len: u64 },
}

/// A propositional variable. Ids are 1-based, as in DIMACS.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct VariableId(u32);

impl VariableId {
    pub fn new(id: u32) -> Result<Self, CnfError> {
        if id == 0 {
            Err(CnfError::ZeroVariable)
        } else {
            Ok(VariableId(id))
        }
    }

    /// Panics on 0. Meant for literals in tests and constructions where the
    /// id is known to be valid.
    pub fn of(id: u32) -> Self {
        Self::new(id).expect("variable ids are 1-based")
    }

    pub fn get(self) -> u32 {
        self.0
    }

    pub fn positive(self) -> Literal {
        Literal::new(self, true)
    }

    pub fn negative(self) -> Literal {
        Literal::new(self, false)
    }
}

impl fmt::Display for VariableId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "x{}", self.0)
    }
}

/// A variable together with a polarity.
///
/// Ordering is by variable first; within one canonical clause no two
/// literals share a variable, so polarity never decides the order there.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Literal {
    variable: VariableId,
    positive: bool,
}

impl Literal {
    pub fn new(variable: VariableId, positive: bool) -> Self {
        Literal { variable, positive }
    }

    /// Builds a literal from a signed DIMACS integer.
    pub fn from_dimacs(value: i64) -> Result<Self, CnfError> {
        let id = u32::try_from(value.unsigned_abs()).map_err(|_| CnfError::ZeroVariable)?;
        Ok(Literal::new(VariableId::new(id)?, value > 0))
    }

    pub fn to_dimacs(self) -> i64 {
        let v = i64::from(self.variable.0);
        if self.positive {
            v
        } else {
            -v
        }
    }

    pub fn variable(self) -> VariableId {
        self.variable
    }

    pub fn is_positive(self) -> bool {
        self.positive
    }

    pub fn negated(self) -> Self {
        Literal::new(self.variable, !self.positive)
    }

    /// Truth value under `value` for the literal's variable.
    pub fn eval(self, value: bool) -> bool {
        value == self.positive
    }
}

impl std::ops::Not for Literal {
    type Output = Literal;

    fn not(self) -> Literal {
        self.negated()
    }
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.positive {
            write!(f, "{}", self.variable)
        } else {
            write!(f, "¬{}", self.variable)
        }
    }
}

/// A canonical disjunction of literals.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Clause {
    literals: Vec<Literal>,
}

/// Result of canonicalizing a raw literal sequence.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Canonical {
    Clause(Clause),
    /// Both polarities of some variable were present.
    Tautology,
}

impl Canonical {
    pub fn clause(&self) -> Option<&Clause> {
        match self {
            Canonical::Clause(c) => Some(c),
            Canonical::Tautology => None,
        }
    }

    pub fn into_clause(self) -> Option<Clause> {
        match self {
            Canonical::Clause(c) => Some(c),
            Canonical::Tautology => None,
        }
    }

    pub fn is_tautology(&self) -> bool {
        matches!(self, Canonical::Tautology)
    }
}

/// Collapses duplicate literals and sorts by variable. Returns
/// [`Canonical::Tautology`] when a variable occurs in both polarities.
///
/// An empty input is an error unless `allow_empty` is set.
pub fn canonicalize_clause<I>(raw: I, allow_empty: bool) -> Result<Canonical, CnfError>
where
    I: IntoIterator<Item = Literal>,
{
    let mut literals: Vec<Literal> = raw.into_iter().collect();
    if literals.is_empty() && !allow_empty {
        return Err(CnfError::EmptyClause);
    }
    literals.sort_unstable();
    literals.dedup();
    if literals.windows(2).any(|w| w[0].variable == w[1].variable) {
        return Ok(Canonical::Tautology);
    }
    Ok(Canonical::Clause(Clause { literals }))
}

impl Clause {
    /// The empty clause. Only resolution of complementary units produces it.
    pub fn empty() -> Self {
        Clause {
            literals: Vec::new(),
        }
    }

    /// Convenience constructor that panics on tautologies and empty input.
    pub fn from_literals<I: IntoIterator<Item = Literal>>(raw: I) -> Self {
        match canonicalize_clause(raw, false) {
            Ok(Canonical::Clause(c)) => c,
            Ok(Canonical::Tautology) => panic!("tautological clause"),
            Err(e) => panic!("{e}"),
        }
    }

    /// Builds a clause from signed DIMACS integers; panics on bad input.
    pub fn from_dimacs(raw: &[i64]) -> Self {
        Self::from_literals(raw.iter().map(|&l| Literal::from_dimacs(l).expect("nonzero literal")))
    }

    pub fn literals(&self) -> &[Literal] {
        &self.literals
    }

    pub fn len(&self) -> usize {
        self.literals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.literals.is_empty()
    }

    pub fn is_unit(&self) -> bool {
        self.literals.len() == 1
    }

    pub fn variables(&self) -> impl Iterator<Item = VariableId> + '_ {
        self.literals.iter().map(|l| l.variable)
    }

    pub fn contains(&self, literal: Literal) -> bool {
        self.literals.binary_search(&literal).is_ok()
    }

    /// The literal on `var`, if the clause mentions it.
    pub fn literal_on(&self, var: VariableId) -> Option<Literal> {
        self.literals
            .binary_search_by_key(&var, |l| l.variable)
            .ok()
            .map(|i| self.literals[i])
    }

    pub fn mentions(&self, var: VariableId) -> bool {
        self.literal_on(var).is_some()
    }

    /// Literal-set inclusion.
    pub fn is_subset_of(&self, other: &Clause) -> bool {
        self.literals.iter().all(|&l| other.contains(l))
    }

    /// Adds a literal on a variable the clause does not mention.
    pub(crate) fn with_literal(&self, literal: Literal) -> Clause {
        debug_assert!(!self.mentions(literal.variable));
        let at = self.literals.partition_point(|l| l.variable < literal.variable);
        let mut literals = Vec::with_capacity(self.literals.len() + 1);
        literals.extend_from_slice(&self.literals[..at]);
        literals.push(literal);
        literals.extend_from_slice(&self.literals[at..]);
        Clause { literals }
    }

    pub fn evaluate(&self, assignment: &Assignment) -> Result<bool, CnfError> {
        let mut value = false;
        for &l in &self.literals {
            let v = assignment.get(l.variable).ok_or(CnfError::Unassigned(l.variable))?;
            value |= l.eval(v);
        }
        Ok(value)
    }

    pub fn to_dimacs(&self) -> Vec<i64> {
        self.literals.iter().map(|l| l.to_dimacs()).collect()
    }
}

impl fmt::Display for Clause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.literals.is_empty() {
            return f.write_str("□");
        }
        f.write_str("(")?;
        for (i, l) in self.literals.iter().enumerate() {
            if i > 0 {
                f.write_str(" ∨ ")?;
            }
            write!(f, "{l}")?;
        }
        f.write_str(")")
    }
}

/// A conjunction of canonical clauses.
///
/// Clause order is preserved as given. [`Formula::normalized`] drops repeated
/// clauses, keeping the first occurrence.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Formula {
    clauses: Vec<Clause>,
}

/// Bookkeeping from [`normalize`].
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Normalized {
    pub formula: Formula,
    pub tautologies_dropped: usize,
    pub duplicate_clauses_dropped: usize,
    pub duplicate_literals_collapsed: usize,
}

impl Normalized {
    /// True when normalization changed anything.
    pub fn changed(&self) -> bool {
        self.tautologies_dropped + self.duplicate_clauses_dropped + self.duplicate_literals_collapsed
            > 0
    }
}

/// Canonicalizes every raw clause, drops tautologies and repeated clauses.
pub fn normalize<I, C>(raw: I) -> Result<Normalized, CnfError>
where
    I: IntoIterator<Item = C>,
    C: IntoIterator<Item = Literal>,
{
    let mut out = Normalized::default();
    let mut seen = HashSet::new();
    for raw_clause in raw {
        let lits: Vec<Literal> = raw_clause.into_iter().collect();
        let raw_len = lits.len();
        match canonicalize_clause(lits, false)? {
            Canonical::Tautology => out.tautologies_dropped += 1,
            Canonical::Clause(c) => {
                out.duplicate_literals_collapsed += raw_len - c.len();
                if seen.insert(c.clone()) {
                    out.formula.clauses.push(c);
                } else {
                    out.duplicate_clauses_dropped += 1;
                }
            }
        }
    }
    Ok(out)
}

impl Formula {
    pub fn new(clauses: Vec<Clause>) -> Self {
        Formula { clauses }
    }

    /// Parses a list of signed DIMACS clauses and normalizes them. Panics on
    /// zero literals or empty clauses.
    pub fn from_dimacs(raw: &[&[i64]]) -> Self {
        normalize(raw.iter().map(|c| {
            c.iter()
                .map(|&l| Literal::from_dimacs(l).expect("nonzero literal"))
                .collect::<Vec<_>>()
        }))
        .expect("nonempty clauses")
        .formula
    }

    pub fn clauses(&self) -> &[Clause] {
        &self.clauses
    }

    pub fn into_clauses(self) -> Vec<Clause> {
        self.clauses
    }

    pub fn len(&self) -> usize {
        self.clauses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.clauses.is_empty()
    }

    /// Distinct variables, ascending.
    pub fn variables(&self) -> BTreeSet<VariableId> {
        self.clauses.iter().flat_map(|c| c.variables()).collect()
    }

    /// Count of distinct variables referenced. Ids need not be contiguous.
    pub fn num_variables(&self) -> usize {
        self.variables().len()
    }

    pub fn max_variable(&self) -> Option<VariableId> {
        self.clauses.iter().flat_map(|c| c.variables()).max()
    }

    /// Common clause length, if every clause has the same one.
    pub fn uniform_width(&self) -> Option<usize> {
        let first = self.clauses.first()?.len();
        self.clauses.iter().all(|c| c.len() == first).then_some(first)
    }

    pub fn max_clause_len(&self) -> usize {
        self.clauses.iter().map(Clause::len).max().unwrap_or(0)
    }

    pub fn normalized(&self) -> Formula {
        let mut seen = HashSet::new();
        Formula {
            clauses: self
                .clauses
                .iter()
                .filter(|c| seen.insert((*c).clone()))
                .cloned()
                .collect(),
        }
    }

    pub fn is_normalized(&self) -> bool {
        let mut seen = HashSet::new();
        self.clauses.iter().all(|c| seen.insert(c))
    }

    pub fn push(&mut self, clause: Clause) {
        self.clauses.push(clause);
    }

    pub fn evaluate(&self, assignment: &Assignment) -> Result<bool, CnfError> {
        let mut value = true;
        for c in &self.clauses {
            value &= c.evaluate(assignment)?;
        }
        Ok(value)
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.clauses.is_empty() {
            return f.write_str("⊤");
        }
        for (i, c) in self.clauses.iter().enumerate() {
            if i > 0 {
                f.write_str(" ∧ ")?;
            }
            write!(f, "{c}")?;
        }
        Ok(())
    }
}

impl FromIterator<Clause> for Formula {
    fn from_iter<T: IntoIterator<Item = Clause>>(iter: T) -> Self {
        Formula::new(iter.into_iter().collect())
    }
}

/// A (possibly partial) truth assignment, indexed by variable id.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Assignment {
    values: Vec<Option<bool>>,
}

impl Assignment {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn set(&mut self, var: VariableId, value: bool) {
        let i = var.0 as usize;
        if self.values.len() <= i {
            self.values.resize(i + 1, None);
        }
        self.values[i] = Some(value);
    }

    pub fn with(mut self, var: VariableId, value: bool) -> Self {
        self.set(var, value);
        self
    }

    pub fn unset(&mut self, var: VariableId) {
        if let Some(slot) = self.values.get_mut(var.0 as usize) {
            *slot = None;
        }
    }

    pub fn get(&self, var: VariableId) -> Option<bool> {
        self.values.get(var.0 as usize).copied().flatten()
    }

    /// Assigned variables in ascending order.
    pub fn iter(&self) -> impl Iterator<Item = (VariableId, bool)> + '_ {
        self.values
            .iter()
            .enumerate()
            .filter_map(|(i, v)| v.map(|v| (VariableId(i as u32), v)))
    }

    pub fn len(&self) -> usize {
        self.values.iter().filter(|v| v.is_some()).count()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn is_complete_for(&self, formula: &Formula) -> bool {
        formula.variables().into_iter().all(|v| self.get(v).is_some())
    }

    pub fn first_missing(&self, formula: &Formula) -> Option<VariableId> {
        formula.variables().into_iter().find(|&v| self.get(v).is_none())
    }
}

impl FromIterator<(VariableId, bool)> for Assignment {
    fn from_iter<T: IntoIterator<Item = (VariableId, bool)>>(iter: T) -> Self {
        let mut a = Assignment::new();
        for (v, b) in iter {
            a.set(v, b);
        }
        a
    }
}

/// Number of distinct non-tautological clauses of length 1..=`max_len`
/// over `n` variables: Σ C(n,k)·2^k.
pub fn count_bound(n: u64, max_len: u64) -> Result<u128, CnfError> {
    let overflow = CnfError::Overflow { n, max_len };
    let mut total: u128 = 0;
    let mut binom: u128 = 1; // C(n, 0)
    for k in 1..=max_len.min(n) {
        binom = binom
            .checked_mul(u128::from(n - k + 1))
            .ok_or_else(|| overflow.clone())?
            / u128::from(k);
        let pow = 1u128.checked_shl(k as u32).filter(|_| k < 128).ok_or_else(|| overflow.clone())?;
        let term = binom.checked_mul(pow).ok_or_else(|| overflow.clone())?;
        total = total.checked_add(term).ok_or_else(|| overflow.clone())?;
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lit(v: i64) -> Literal {
        Literal::from_dimacs(v).unwrap()
    }

    fn raw(c: &[i64]) -> Vec<Literal> {
        c.iter().map(|&l| lit(l)).collect()
    }

    #[test]
    fn canonicalize_collapses_duplicates() {
        let c = canonicalize_clause(raw(&[1, 1, 2]), false).unwrap();
        assert_eq!(c, Canonical::Clause(Clause::from_dimacs(&[1, 2])));
        assert_eq!(c.clause().unwrap().len(), 2);
    }

    #[test]
    fn canonicalize_detects_tautology() {
        assert_eq!(canonicalize_clause(raw(&[1, -1, 2]), false).unwrap(), Canonical::Tautology);
    }

    #[test]
    fn canonicalize_sorts() {
        let c = canonicalize_clause(raw(&[2, 1]), false).unwrap().into_clause().unwrap();
        assert_eq!(c.to_dimacs(), vec![1, 2]);
        assert_eq!(c, Clause::from_dimacs(&[1, 2]));
    }

    #[test]
    fn canonicalize_empty_needs_flag() {
        assert_eq!(canonicalize_clause(vec![], false), Err(CnfError::EmptyClause));
        assert_eq!(
            canonicalize_clause(vec![], true).unwrap(),
            Canonical::Clause(Clause::empty())
        );
    }

    #[test]
    fn normalize_examples() {
        let n = normalize(vec![raw(&[1, 2]), raw(&[2, 1])]).unwrap();
        assert_eq!(n.formula, Formula::new(vec![Clause::from_dimacs(&[1, 2])]));
        assert_eq!(n.duplicate_clauses_dropped, 1);

        let empty = normalize(Vec::<Vec<Literal>>::new()).unwrap();
        assert!(empty.formula.is_empty());
        assert!(!empty.changed());

        let n = normalize(vec![raw(&[1, -1, 2]), raw(&[2])]).unwrap();
        assert_eq!(n.formula, Formula::new(vec![Clause::from_dimacs(&[2])]));
        assert_eq!(n.tautologies_dropped, 1);
    }

    #[test]
    fn num_variables_counts_distinct_ids() {
        let f = Formula::from_dimacs(&[&[1, 7], &[-7, 20]]);
        assert_eq!(f.num_variables(), 3);
        assert_eq!(f.max_variable(), Some(VariableId::of(20)));
    }

    #[test]
    fn count_bound_examples() {
        assert_eq!(count_bound(1, 3).unwrap(), 2);
        assert_eq!(count_bound(3, 3).unwrap(), 26);
        assert_eq!(count_bound(4, 3).unwrap(), 64);
        assert_eq!(count_bound(0, 3).unwrap(), 0);
        assert_eq!(count_bound(5, 0).unwrap(), 0);
        // all lengths: 3^n - 1
        assert_eq!(count_bound(10, 10).unwrap(), 3u128.pow(10) - 1);
        assert!(count_bound(200, 200).is_err());
    }

    #[test]
    fn evaluate_examples() {
        let c = Clause::from_dimacs(&[1, 2]);
        let a = Assignment::new().with(VariableId::of(1), false).with(VariableId::of(2), true);
        assert!(c.evaluate(&a).unwrap());

        let f = Formula::from_dimacs(&[&[1], &[-1]]);
        for v in [false, true] {
            assert!(!f.evaluate(&Assignment::new().with(VariableId::of(1), v)).unwrap());
        }

        assert!(Formula::default().evaluate(&Assignment::new()).unwrap());
    }

    #[test]
    fn evaluate_reports_missing_variable() {
        let c = Clause::from_dimacs(&[1, -3]);
        let a = Assignment::new().with(VariableId::of(1), false);
        assert_eq!(c.evaluate(&a), Err(CnfError::Unassigned(VariableId::of(3))));
    }

    #[test]
    fn zero_variable_rejected() {
        assert_eq!(VariableId::new(0), Err(CnfError::ZeroVariable));
        assert_eq!(Literal::from_dimacs(0), Err(CnfError::ZeroVariable));
    }
}
