//! Differential runs: the bounded engine against the oracle, one record per
//! instance.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cnf::{Formula, VariableId};
use crate::engine::{self, EngineConfig, EngineError, SolveReport, Verdict};
use crate::forge::{self, ForgeError, SplitMetadata};
use crate::oracle::{Method, OracleConfig, OracleError, OracleStats, Status};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error(transparent)]
    Forge(#[from] ForgeError),
    #[error("file instances are read by the caller, not generated")]
    NotGenerated,
}

/// Instance families the harness knows how to build.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Generator {
    /// All sign patterns over `b_k` variables, split `k` times to 3-CNF.
    CompleteSplit { k: u32 },
    /// A random uniform width-`b_k` formula certified unsatisfiable, split
    /// `k` times.
    RandomUnsatSplit {
        k: u32,
        vars: usize,
        clauses: usize,
        seed: u64,
    },
    /// Random uniform-width formula, satisfiable or not.
    Random {
        width: usize,
        vars: usize,
        clauses: usize,
        seed: u64,
    },
    /// Read from a file; the harness never builds these itself.
    File { path: String },
}

/// A generated formula plus the split bookkeeping, if any.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Instance {
    pub formula: Formula,
    pub splits: Vec<SplitMetadata>,
}

impl Generator {
    pub fn build(&self, oracle: &OracleConfig) -> Result<Instance, HarnessError> {
        match *self {
            Generator::CompleteSplit { k } => {
                let w = forge::b_sequence(k)?;
                let w = u32::try_from(w).map_err(|_| ForgeError::Overflow(k))?;
                let phi = forge::complete_unsat_cnf(w, VariableId::of(1))?;
                let (formula, splits) = forge::split_to_3cnf(&phi, k)?;
                Ok(Instance { formula, splits })
            }
            Generator::RandomUnsatSplit { k, vars, clauses, seed } => {
                let w = forge::b_sequence(k)? as usize;
                let phi = forge::random_unsat_kcnf(w, vars, clauses, seed, 100_000, oracle)?;
                let (formula, splits) = forge::split_to_3cnf(&phi, k)?;
                Ok(Instance { formula, splits })
            }
            Generator::Random {
                width,
                vars,
                clauses,
                seed,
            } => Ok(Instance {
                formula: forge::random_kcnf(width, vars, clauses, seed)?,
                splits: vec![],
            }),
            Generator::File { .. } => Err(HarnessError::NotGenerated),
        }
    }
}

/// Outcome of one engine-versus-oracle comparison.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscrepancyReport {
    pub instance_id: String,
    pub generator: Generator,
    pub clauses: usize,
    pub variables: usize,
    pub engine_verdict: Verdict,
    /// `None` when the oracle ran out of budget.
    pub oracle_verdict: Option<Status>,
    pub oracle_method: Method,
    pub oracle_stats: Option<OracleStats>,
    /// Engine claimed SAT on an unsatisfiable instance.
    pub mismatch: bool,
    /// Engine said UNSAT on a satisfiable instance. Never expected.
    pub fatal: bool,
    pub inconclusive: bool,
    pub engine_report: SolveReport,
}

/// Runs both sides on `formula`. The engine always keeps its iteration
/// trace so mismatches can be inspected.
pub fn diff_instance(
    instance_id: impl Into<String>,
    generator: Generator,
    formula: &Formula,
    engine_config: &EngineConfig,
    oracle: &OracleConfig,
) -> Result<DiscrepancyReport, EngineError> {
    let engine_report = engine::solve(formula, &engine_config.traced())?;
    let oracle_result = match oracle.solve(formula) {
        Ok(v) => Some(v),
        Err(OracleError::BudgetExceeded { .. }) | Err(OracleError::TooManyVariables { .. }) => None,
        Err(OracleError::Cnf(e)) => panic!("oracle rejected a well-formed formula: {e}"),
    };
    let oracle_verdict = oracle_result.as_ref().map(|v| v.status);
    let engine_verdict = engine_report.verdict;
    Ok(DiscrepancyReport {
        instance_id: instance_id.into(),
        generator,
        clauses: formula.len(),
        variables: formula.num_variables(),
        engine_verdict,
        oracle_verdict,
        oracle_method: oracle.method,
        oracle_stats: oracle_result.map(|v| v.stats),
        mismatch: engine_verdict == Verdict::ClaimedSat && oracle_verdict == Some(Status::Unsat),
        fatal: engine_verdict == Verdict::Unsat && oracle_verdict == Some(Status::Sat),
        inconclusive: oracle_verdict.is_none(),
        engine_report,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn complete_split_mismatches() {
        let g = Generator::CompleteSplit { k: 1 };
        let inst = g.build(&OracleConfig::default()).unwrap();
        let r = diff_instance("c4", g, &inst.formula, &EngineConfig::default(), &OracleConfig::default()).unwrap();
        assert!(r.mismatch);
        assert!(!r.fatal);
        assert!(r.engine_report.trace.is_some());
    }

    #[test]
    fn budget_makes_inconclusive() {
        let g = Generator::CompleteSplit { k: 1 };
        let inst = g.build(&OracleConfig::default()).unwrap();
        let oracle = OracleConfig {
            dpll_budget: 3,
            ..OracleConfig::default()
        };
        let r = diff_instance("c4", g, &inst.formula, &EngineConfig::default(), &oracle).unwrap();
        assert!(r.inconclusive);
        assert!(!r.mismatch && !r.fatal);
    }

    #[test]
    fn report_serializes_as_one_line() {
        let f = Formula::from_dimacs(&[&[1], &[-1]]);
        let r = diff_instance(
            "units",
            Generator::File { path: "x.cnf".into() },
            &f,
            &EngineConfig::default(),
            &OracleConfig::default(),
        )
        .unwrap();
        let line = serde_json::to_string(&r).unwrap();
        assert!(!line.contains('\n'));
        assert!(line.contains("\"engine_verdict\":\"unsat\""));
    }
}
