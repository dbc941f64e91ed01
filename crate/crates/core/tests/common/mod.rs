#![allow(dead_code)]

use boundsat::cnf::{Assignment, Clause, Formula, Literal, VariableId};
use proptest::prelude::*;

/// Every complete assignment over `vars`, by plain counting.
pub fn all_assignments(vars: &[VariableId]) -> impl Iterator<Item = Assignment> + '_ {
    (0u64..1 << vars.len()).map(move |bits| {
        vars.iter()
            .enumerate()
            .map(|(i, &v)| (v, bits >> i & 1 == 1))
            .collect()
    })
}

/// Truth-table satisfiability, written independently of the crate's oracle.
pub fn truth_table_sat(f: &Formula) -> bool {
    let vars: Vec<VariableId> = f.variables().into_iter().collect();
    let sat = all_assignments(&vars).any(|a| f.evaluate(&a).unwrap());
    sat
}

/// Whether every model of `f` over `vars(f) ∪ vars(c)` satisfies `c`.
pub fn truth_table_entails(f: &Formula, c: &Clause) -> bool {
    let mut vars: Vec<VariableId> = f.variables().into_iter().chain(c.variables()).collect();
    vars.sort();
    vars.dedup();
    let entailed = all_assignments(&vars).all(|a| !f.evaluate(&a).unwrap() || c.evaluate(&a).unwrap());
    entailed
}

pub fn literal(max_var: u32) -> impl Strategy<Value = Literal> {
    (1..=max_var, any::<bool>()).prop_map(|(v, p)| Literal::new(VariableId::of(v), p))
}

/// Raw literal lists, possibly with repeats and complementary pairs.
pub fn raw_clause(max_var: u32, max_len: usize) -> impl Strategy<Value = Vec<Literal>> {
    prop::collection::vec(literal(max_var), 1..=max_len)
}

/// Canonical, non-tautological clauses.
pub fn clause(max_var: u32, max_len: usize) -> impl Strategy<Value = Clause> {
    prop::collection::btree_map(1..=max_var, any::<bool>(), 1..=max_len).prop_map(|m| {
        Clause::from_literals(m.into_iter().map(|(v, p)| Literal::new(VariableId::of(v), p)))
    })
}

pub fn formula(max_var: u32, max_len: usize, max_clauses: usize) -> impl Strategy<Value = Formula> {
    prop::collection::vec(clause(max_var, max_len), 0..=max_clauses).prop_map(|cs| Formula::new(cs).normalized())
}
