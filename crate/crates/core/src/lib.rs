//! Bounded-width resolution and expansion saturation over CNF, with the
//! tools to show where it goes wrong.
//!
//! The [`engine`] runs a saturation procedure that only ever keeps clauses of
//! at most three literals and declares a formula satisfiable once nothing new
//! can be derived. The procedure is sound when it says UNSAT, but its SAT
//! answers are not trustworthy: [`forge`] builds infinitely many
//! unsatisfiable 3-CNF formulas on which it reaches a fixpoint without a
//! contradiction, and [`oracle`] certifies the true answer.
//!
//! ```
//! use boundsat::cnf::VariableId;
//! use boundsat::engine::{self, EngineConfig, Verdict};
//! use boundsat::forge::{complete_unsat_cnf, split_once};
//! use boundsat::oracle::dpll_sat;
//!
//! let phi = complete_unsat_cnf(4, VariableId::of(1)).unwrap();
//! let (phi3, _) = split_once(&phi).unwrap();
//!
//! let report = engine::solve(&phi3, &EngineConfig::default()).unwrap();
//! assert_eq!(report.verdict, Verdict::ClaimedSat);
//! assert!(dpll_sat(&phi3).unwrap().is_unsat());
//! ```

pub mod cnf;
pub mod dimacs;
pub mod engine;
pub mod forge;
pub mod harness;
pub mod oracle;
pub mod rules;

pub use cnf::{Assignment, Clause, Formula, Literal, VariableId};
pub use engine::{solve, EngineConfig, SolveReport, Verdict};

// The book's snippets run as doctests of these empty modules.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/cnf.md")]
    mod cnf {}
    #[doc = include_str!("../../../book/src/rules.md")]
    mod rules {}
    #[doc = include_str!("../../../book/src/engine.md")]
    mod engine {}
    #[doc = include_str!("../../../book/src/oracle.md")]
    mod oracle {}
    #[doc = include_str!("../../../book/src/counterexamples.md")]
    mod counterexamples {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
