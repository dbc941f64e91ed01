mod common;

use boundsat::cnf::{count_bound, Canonical, Clause, Formula, VariableId};
use boundsat::engine::{self, Engine, EngineConfig, Origin, Verdict};
use boundsat::oracle::{brute_force_sat, dpll_sat, entails, Status};
use boundsat::rules::resolve;
use common::*;
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn oracles_agree(f in formula(14, 4, 60)) {
        let brute = brute_force_sat(&f).unwrap();
        let dpll = dpll_sat(&f).unwrap();
        prop_assert_eq!(brute.status, dpll.status);
        for v in [&brute, &dpll] {
            if let Some(m) = &v.model {
                prop_assert!(m.is_complete_for(&f));
                prop_assert!(f.evaluate(m).unwrap());
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn truth_table_agrees_with_independent_enumeration(f in formula(10, 3, 40)) {
        prop_assert_eq!(brute_force_sat(&f).unwrap().status == Status::Sat, truth_table_sat(&f));
    }

    #[test]
    fn resolvents_of_formula_clauses_are_entailed(f in formula(12, 3, 20)) {
        for c in f.clauses() {
            for d in f.clauses() {
                for r in resolve(c, d) {
                    if let Canonical::Clause(e) = r.clause {
                        prop_assert!(entails(&f, &e).unwrap());
                    }
                }
            }
        }
    }

    #[test]
    fn engine_database_is_sound(f in formula(9, 3, 25)) {
        let mut engine = Engine::new(&f, EngineConfig::default()).unwrap();
        let report = engine.solve().unwrap();
        for c in engine.db().clauses() {
            prop_assert!(truth_table_entails(&f, c), "{} not entailed by {}", c, f);
        }
        if report.verdict == Verdict::Unsat {
            prop_assert!(!truth_table_sat(&f));
            prop_assert!(report.contradiction_variable.is_some());
        }
    }

    #[test]
    fn engine_respects_size_and_iteration_bounds(f in formula(10, 3, 30)) {
        let report = engine::solve(&f, &EngineConfig::default()).unwrap();
        let n = f.num_variables() as u64;
        let bound = count_bound(n, 3).unwrap() as u64;
        prop_assert!(report.final_db_size <= bound);
        prop_assert!(u64::from(report.iterations) <= bound + 1);
        if report.verdict == Verdict::ClaimedSat {
            prop_assert_eq!(report.added_per_iteration.last(), Some(&0));
        }
        // strictly growing on every iteration but the last
        let (_, body) = report.added_per_iteration.split_last().unwrap();
        prop_assert!(body.iter().all(|&a| a > 0));
    }

    #[test]
    fn engine_is_deterministic(f in formula(8, 3, 20)) {
        let cfg = EngineConfig::default().traced();
        let a = engine::solve(&f, &cfg).unwrap();
        let b = engine::solve(&f, &cfg).unwrap();
        prop_assert!(a.same_outcome(&b));
    }

    #[test]
    fn new_clauses_wait_one_iteration(f in formula(8, 3, 20)) {
        let mut engine = Engine::new(&f, EngineConfig::default()).unwrap();
        engine.solve().unwrap();
        let db = engine.db();
        for (_, origin) in db.iter() {
            for p in origin.parents() {
                prop_assert!(db.origin(p).iteration() < origin.iteration());
            }
        }
    }
}

#[test]
fn unbounded_engine_stores_full_length_expansions() {
    let f: Formula = (1..=4).map(|i| Clause::from_dimacs(&[i])).collect();
    let mut engine = Engine::new(&f, EngineConfig::unbounded()).unwrap();
    engine.run_iteration().unwrap();
    let x1 = VariableId::of(1).positive();
    let full_from_x1 = engine
        .db()
        .of_length(4)
        .filter(|c| c.contains(x1))
        .count();
    assert_eq!(full_from_x1, 8);
    let report = engine.solve().unwrap();
    assert_eq!(report.verdict, Verdict::ClaimedSat);
}

#[test]
fn expanded_clauses_record_their_parent() {
    let f = Formula::from_dimacs(&[&[1], &[2, 3]]);
    let mut engine = Engine::new(&f, EngineConfig::default()).unwrap();
    engine.run_iteration().unwrap();
    let db = engine.db();
    let i = db.position(&Clause::from_dimacs(&[1, -2])).unwrap();
    assert_eq!(db.origin(i), Origin::Expanded { iteration: 1, parent: 0 });
}
