//! Expansion and resolution, the two derivation rules the bounded engine
//! uses, plus the resolvent length bounds.

use std::collections::BTreeSet;

use thiserror::Error;

use crate::cnf::{Canonical, Clause, Literal, VariableId};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RuleError {
    #[error("{var} already occurs in {clause}")]
    VariablePresent { clause: Clause, var: VariableId },
}

/// One resolution step on a single pivot.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Resolvent {
    /// `Canonical::Tautology` when another complementary pair survives.
    pub clause: Canonical,
    pub pivot: VariableId,
    pub parents: (Clause, Clause),
}

/// Appends `var` to `clause` in both polarities.
pub fn expand(clause: &Clause, var: VariableId) -> Result<(Clause, Clause), RuleError> {
    if clause.mentions(var) {
        return Err(RuleError::VariablePresent {
            clause: clause.clone(),
            var,
        });
    }
    Ok((
        clause.with_literal(var.positive()),
        clause.with_literal(var.negative()),
    ))
}

/// Calls `visit` for every strict superset of `clause` reachable by repeated
/// expansion with variables from `universe`, up to `max_len` literals.
///
/// Each superset is visited exactly once. Nothing is stored, so this is the
/// way to count expansions that would not fit in memory. Returning `false`
/// from `visit` stops the walk; the function then returns `false`.
pub fn for_each_expansion<F>(
    clause: &Clause,
    max_len: usize,
    universe: &BTreeSet<VariableId>,
    mut visit: F,
) -> bool
where
    F: FnMut(&Clause) -> bool,
{
    let free: Vec<VariableId> = universe.iter().copied().filter(|&v| !clause.mentions(v)).collect();
    fn walk<F: FnMut(&Clause) -> bool>(
        current: &Clause,
        free: &[VariableId],
        max_len: usize,
        visit: &mut F,
    ) -> bool {
        if current.len() >= max_len {
            return true;
        }
        // Only extend with variables after the last one added, so every
        // superset is produced once.
        for (i, &v) in free.iter().enumerate() {
            for lit in [v.positive(), v.negative()] {
                let next = current.with_literal(lit);
                if !visit(&next) || !walk(&next, &free[i + 1..], max_len, visit) {
                    return false;
                }
            }
        }
        true
    }
    walk(clause, &free, max_len, &mut visit)
}

/// Every clause obtainable from `clause` by expansion with variables from
/// `universe`, of length at most `max_len`. The base clause is excluded.
pub fn expansions_up_to(
    clause: &Clause,
    max_len: usize,
    universe: &BTreeSet<VariableId>,
) -> BTreeSet<Clause> {
    let mut out = BTreeSet::new();
    for_each_expansion(clause, max_len, universe, |c| {
        out.insert(c.clone());
        true
    });
    out
}

/// Variables occurring positively in one clause and negatively in the other.
pub fn clashing_variables(c: &Clause, d: &Clause) -> Vec<VariableId> {
    c.literals()
        .iter()
        .filter(|l| d.contains(l.negated()))
        .map(|l| l.variable())
        .collect()
}

/// Resolves `c` and `d` on every clashing variable, one resolvent per pivot.
pub fn resolve(c: &Clause, d: &Clause) -> Vec<Resolvent> {
    clashing_variables(c, d)
        .into_iter()
        .map(|pivot| Resolvent {
            clause: resolve_on(c, d, pivot),
            pivot,
            parents: (c.clone(), d.clone()),
        })
        .collect()
}

/// Union of the parents' literals minus those on `pivot`, duplicates merged.
pub fn resolve_on(c: &Clause, d: &Clause, pivot: VariableId) -> Canonical {
    let lits: Vec<Literal> = c
        .literals()
        .iter()
        .chain(d.literals())
        .copied()
        .filter(|l| l.variable() != pivot)
        .collect();
    crate::cnf::canonicalize_clause(lits, true).expect("empty resolvents are allowed")
}

/// Shortest and longest possible resolvent of clauses of lengths `k`, `m`.
pub fn resolvent_length_bounds(k: usize, m: usize) -> (usize, usize) {
    assert!(k >= 1 && m >= 1, "clause lengths must be positive");
    (k.max(m) - 1, k + m - 2)
}
