mod manifest;

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use boundsat::cnf::{Formula, VariableId};
use boundsat::dimacs::{emit_dimacs_with_comments, parse_dimacs_detailed, DimacsError};
use boundsat::engine::{self, blowup_demo_with_budget, EngineConfig, EngineError, Verdict};
use boundsat::forge::{self, check_scenario, CheckReport, ForgeError, ScenarioError, SplitMetadata};
use boundsat::harness::{diff_instance, DiscrepancyReport, Generator, HarnessError};
use boundsat::oracle::{Method, OracleConfig, OracleError, Status};
use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use manifest::{ConfigSnapshot, RunManifest};

const EXIT_CLAIMED_SAT: u8 = 10;
const EXIT_UNSAT: u8 = 20;
const EXIT_ERROR: u8 = 1;
/// A diff found a soundness failure, or a lemma scenario did not confirm.
const EXIT_CHECK_FAILED: u8 = 2;

#[derive(Debug, Parser)]
#[command(name = "boundsat", version, about = "Bounded resolution/expansion saturation versus a reference SAT oracle")]
struct Cli {
    #[command(flatten)]
    global: GlobalOpts,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct GlobalOpts {
    /// Seed for every random generator; instance i of a batch uses seed + i.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Longest clause the engine processes or stores.
    #[arg(long, global = true, default_value_t = 3)]
    bound: usize,
    /// Drop the length bound. Memory grows exponentially.
    #[arg(long, global = true)]
    unbounded: bool,
    /// Cap on outer iterations; defaults to the clause-count bound plus two.
    #[arg(long, global = true)]
    max_iterations: Option<u64>,
    #[arg(long, global = true, value_enum, default_value_t = OracleChoice::Dpll)]
    oracle: OracleChoice,
    /// Write one JSON record per line here, plus a `.manifest.json` sidecar.
    #[arg(long, global = true)]
    report: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum OracleChoice {
    Brute,
    Dpll,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run the bounded engine on a DIMACS file. Exits 10 (claimed sat) or 20 (unsat).
    Solve { input: PathBuf },
    /// Run the reference oracle on a DIMACS file. Exits 10 (sat) or 20 (unsat).
    Oracle { input: PathBuf },
    /// Compare engine and oracle on generated or given instances.
    Diff {
        #[command(subcommand)]
        source: DiffSource,
    },
    /// Write a generated formula as DIMACS plus a `.meta.json` sidecar.
    Gen {
        #[command(subcommand)]
        kind: GenKind,
    },
    /// Check the lemma counterexample scenarios.
    LemmaCheck {
        #[arg(long, value_enum)]
        lemma: LemmaChoice,
        /// Clause width for the 511 family; at least 4.
        #[arg(long)]
        k: Option<usize>,
    },
    /// Count expansions of (x1) over x1..xn without a length bound.
    Blowup {
        #[arg(long)]
        n: u32,
        /// Stop once one expansion pass exceeds this many clauses.
        #[arg(long, default_value_t = 1 << 24)]
        max_clauses: u64,
    },
}

#[derive(Debug, Subcommand)]
enum DiffSource {
    /// The complete formula over b_k variables, split k times.
    Complete {
        #[arg(long)]
        k: u32,
    },
    /// Random uniform-width formulas.
    Random {
        #[arg(long, default_value_t = 3)]
        width: usize,
        #[arg(long)]
        vars: usize,
        #[arg(long)]
        clauses: usize,
        #[arg(long, default_value_t = 1)]
        count: u64,
    },
    /// Random width-b_k formulas certified unsatisfiable, split k times.
    RandomUnsat {
        #[arg(long)]
        k: u32,
        #[arg(long)]
        vars: usize,
        #[arg(long)]
        clauses: usize,
        #[arg(long, default_value_t = 1)]
        count: u64,
    },
    /// DIMACS files.
    Files {
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
    },
}

#[derive(Debug, Subcommand)]
enum GenKind {
    /// All 2^w sign patterns over w variables.
    Complete {
        #[arg(long)]
        width: u32,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// A random uniform-width formula the oracle certifies unsatisfiable.
    RandomUnsat {
        #[arg(long)]
        width: usize,
        #[arg(long)]
        vars: usize,
        #[arg(long)]
        clauses: usize,
        #[arg(long, default_value_t = 100_000)]
        attempts: u32,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Split a width-b_k base formula k times down to width 3.
    SplitChain {
        #[arg(long)]
        k: u32,
        /// `complete<w>` or a DIMACS path.
        #[arg(long)]
        base: String,
        #[arg(short, long)]
        output: PathBuf,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum LemmaChoice {
    #[value(name = "511")]
    L511,
    #[value(name = "517")]
    L517,
    #[value(name = "518")]
    L518,
    All,
}

#[derive(Debug, Error)]
enum CliError {
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("{path}: {source}")]
    Dimacs { path: String, source: DimacsError },
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error(transparent)]
    Forge(#[from] ForgeError),
    #[error(transparent)]
    Harness(#[from] HarnessError),
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error("{0}")]
    Usage(String),
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| CliError::Io {
        path: path.display().to_string(),
        source,
    }
}

/// JSONL record sink. A no-op without `--report`.
struct Reporter {
    path: Option<PathBuf>,
    out: Option<BufWriter<File>>,
}

impl Reporter {
    fn open(path: Option<&Path>) -> Result<Self, CliError> {
        let out = match path {
            Some(p) => Some(BufWriter::new(File::create(p).map_err(io_err(p))?)),
            None => None,
        };
        Ok(Reporter {
            path: path.map(Path::to_path_buf),
            out,
        })
    }

    fn record<T: Serialize>(&mut self, value: &T) -> Result<(), CliError> {
        if let (Some(out), Some(path)) = (self.out.as_mut(), self.path.as_ref()) {
            serde_json::to_writer(&mut *out, value)?;
            out.write_all(b"\n").map_err(io_err(path))?;
        }
        Ok(())
    }

    fn finish(mut self, manifest: &mut RunManifest) -> Result<(), CliError> {
        manifest.finish();
        if let (Some(mut out), Some(path)) = (self.out.take(), self.path.take()) {
            out.flush().map_err(io_err(&path))?;
            let sidecar = sidecar_path(&path, "manifest.json");
            let text = serde_json::to_string_pretty(manifest)?;
            std::fs::write(&sidecar, text + "\n").map_err(io_err(&sidecar))?;
        }
        Ok(())
    }
}

fn sidecar_path(path: &Path, suffix: &str) -> PathBuf {
    let mut name = path.as_os_str().to_owned();
    name.push(".");
    name.push(suffix);
    PathBuf::from(name)
}

struct Context {
    seed: u64,
    engine: EngineConfig,
    oracle: OracleConfig,
    manifest: RunManifest,
}

impl Context {
    fn new(g: &GlobalOpts) -> Self {
        let engine = EngineConfig {
            length_bound: g.bound,
            unbounded: g.unbounded,
            max_iterations: g.max_iterations,
            ..EngineConfig::default()
        };
        let oracle = OracleConfig {
            method: match g.oracle {
                OracleChoice::Brute => Method::TruthTable,
                OracleChoice::Dpll => Method::Dpll,
            },
            ..OracleConfig::default()
        };
        let manifest = RunManifest::start(ConfigSnapshot {
            seed: g.seed,
            engine,
            oracle,
        });
        Context {
            seed: g.seed,
            engine,
            oracle,
            manifest,
        }
    }

    /// Reads and parses a DIMACS file, printing parse warnings to stderr.
    fn read_formula(&mut self, path: &Path) -> Result<Formula, CliError> {
        let bytes = std::fs::read(path).map_err(io_err(path))?;
        let shown = path.display().to_string();
        self.manifest.add_input(&shown, &bytes);
        let text = String::from_utf8_lossy(&bytes);
        let parsed = parse_dimacs_detailed(&text).map_err(|source| CliError::Dimacs {
            path: shown.clone(),
            source,
        })?;
        for w in &parsed.warnings {
            eprintln!("warning: {shown}: {w}");
        }
        if parsed.normalization_changed() {
            eprintln!(
                "note: {shown}: normalized ({} tautologies, {} duplicate clauses, {} repeated literals dropped)",
                parsed.tautologies_dropped, parsed.duplicate_clauses_dropped, parsed.duplicate_literals_collapsed
            );
        }
        Ok(parsed.formula)
    }
}

#[derive(Serialize)]
struct SolveRecord<'a> {
    instance_id: &'a str,
    report: &'a engine::SolveReport,
}

fn cmd_solve(ctx: &mut Context, input: &Path, reporter: &mut Reporter) -> Result<u8, CliError> {
    let formula = ctx.read_formula(input)?;
    let report = engine::solve(&formula, &ctx.engine)?;
    println!(
        "{}: {} after {} iterations, {} clauses stored, {:?}",
        input.display(),
        match report.verdict {
            Verdict::ClaimedSat => "claimed_sat",
            Verdict::Unsat => "unsat",
        },
        report.iterations,
        report.final_db_size,
        report.elapsed
    );
    if let Some(v) = report.contradiction_variable {
        println!("unit contradiction on {v}");
    }
    reporter.record(&SolveRecord {
        instance_id: &input.display().to_string(),
        report: &report,
    })?;
    Ok(match report.verdict {
        Verdict::ClaimedSat => EXIT_CLAIMED_SAT,
        Verdict::Unsat => EXIT_UNSAT,
    })
}

#[derive(Serialize)]
struct OracleRecord<'a> {
    instance_id: &'a str,
    verdict: &'a boundsat::oracle::OracleVerdict,
}

fn cmd_oracle(ctx: &mut Context, input: &Path, reporter: &mut Reporter) -> Result<u8, CliError> {
    let formula = ctx.read_formula(input)?;
    let verdict = ctx.oracle.solve(&formula)?;
    let status = match verdict.status {
        Status::Sat => "sat",
        Status::Unsat => "unsat",
    };
    println!("{}: {status} ({:?})", input.display(), verdict.method);
    if let Some(model) = &verdict.model {
        let lits: Vec<String> = model
            .iter()
            .map(|(v, b)| if b { v.get().to_string() } else { format!("-{}", v.get()) })
            .collect();
        println!("v {} 0", lits.join(" "));
    }
    reporter.record(&OracleRecord {
        instance_id: &input.display().to_string(),
        verdict: &verdict,
    })?;
    Ok(if verdict.is_sat() { EXIT_CLAIMED_SAT } else { EXIT_UNSAT })
}

fn cmd_diff(ctx: &mut Context, source: &DiffSource, reporter: &mut Reporter) -> Result<u8, CliError> {
    let mut jobs: Vec<(String, Generator, Formula)> = vec![];
    match *source {
        DiffSource::Complete { k } => {
            let g = Generator::CompleteSplit { k };
            let inst = g.build(&ctx.oracle)?;
            jobs.push((format!("complete-k{k}"), g, inst.formula));
        }
        DiffSource::Random {
            width,
            vars,
            clauses,
            count,
        } => {
            for i in 0..count {
                let seed = ctx.seed.wrapping_add(i);
                let g = Generator::Random {
                    width,
                    vars,
                    clauses,
                    seed,
                };
                let inst = g.build(&ctx.oracle)?;
                jobs.push((format!("random-{seed}"), g, inst.formula));
            }
        }
        DiffSource::RandomUnsat { k, vars, clauses, count } => {
            for i in 0..count {
                let seed = ctx.seed.wrapping_add(i);
                let g = Generator::RandomUnsatSplit { k, vars, clauses, seed };
                let inst = g.build(&ctx.oracle)?;
                jobs.push((format!("random-unsat-k{k}-{seed}"), g, inst.formula));
            }
        }
        DiffSource::Files { ref inputs } => {
            for path in inputs {
                let formula = ctx.read_formula(path)?;
                let shown = path.display().to_string();
                jobs.push((shown.clone(), Generator::File { path: shown }, formula));
            }
        }
    }
    let engine_config = ctx.engine;
    let oracle = ctx.oracle;
    // collect() on an indexed parallel iterator keeps instance order
    let results: Vec<Result<DiscrepancyReport, EngineError>> = jobs
        .into_par_iter()
        .map(|(id, g, f)| diff_instance(id, g, &f, &engine_config, &oracle))
        .collect();
    let (mut mismatches, mut fatal, mut inconclusive, mut total) = (0, 0, 0, 0);
    for r in results {
        let r = r?;
        total += 1;
        let oracle_shown = match r.oracle_verdict {
            Some(Status::Sat) => "sat",
            Some(Status::Unsat) => "unsat",
            None => "inconclusive",
        };
        let flag = if r.fatal {
            "  FATAL: engine unsat on a satisfiable instance"
        } else if r.mismatch {
            "  mismatch"
        } else {
            ""
        };
        println!(
            "{}: {} clauses, {} variables, engine {}, oracle {oracle_shown}{flag}",
            r.instance_id,
            r.clauses,
            r.variables,
            match r.engine_verdict {
                Verdict::ClaimedSat => "claimed_sat",
                Verdict::Unsat => "unsat",
            }
        );
        mismatches += usize::from(r.mismatch);
        fatal += usize::from(r.fatal);
        inconclusive += usize::from(r.inconclusive);
        reporter.record(&r)?;
    }
    println!("{total} instances: {mismatches} mismatches, {fatal} fatal, {inconclusive} inconclusive");
    Ok(if fatal > 0 { EXIT_CHECK_FAILED } else { 0 })
}

#[derive(Serialize)]
struct GenMeta<'a> {
    generator: serde_json::Value,
    clauses: usize,
    variables: usize,
    width: Option<usize>,
    splits: &'a [SplitMetadata],
    manifest: &'a RunManifest,
}

fn cmd_gen(ctx: &mut Context, kind: &GenKind) -> Result<u8, CliError> {
    let (formula, splits, generator, output) = match kind {
        GenKind::Complete { width, output } => {
            let f = forge::complete_unsat_cnf(*width, VariableId::of(1))?;
            (f, vec![], serde_json::json!({"kind": "complete", "width": width}), output)
        }
        GenKind::RandomUnsat {
            width,
            vars,
            clauses,
            attempts,
            output,
        } => {
            let f = forge::random_unsat_kcnf(*width, *vars, *clauses, ctx.seed, *attempts, &ctx.oracle)?;
            let g = serde_json::json!({
                "kind": "random_unsat", "width": width, "vars": vars,
                "clauses": clauses, "seed": ctx.seed, "attempts": attempts,
            });
            (f, vec![], g, output)
        }
        GenKind::SplitChain { k, base, output } => {
            let phi = match base.strip_prefix("complete").map(str::parse::<u32>) {
                Some(Ok(w)) => forge::complete_unsat_cnf(w, VariableId::of(1))?,
                Some(Err(_)) if base.starts_with("complete") => {
                    return Err(CliError::Usage(format!("bad base `{base}`: expected complete<width>")))
                }
                _ => ctx.read_formula(Path::new(base))?,
            };
            let (f, splits) = forge::split_to_3cnf(&phi, *k)?;
            (f, splits, serde_json::json!({"kind": "split_chain", "k": k, "base": base}), output)
        }
    };
    let mut comments = vec![format!("generator {generator}")];
    for (i, m) in splits.iter().enumerate() {
        if let (Some(first), Some(last)) = (m.fresh_variables.first(), m.fresh_variables.last()) {
            comments.push(format!(
                "split {}: width {} -> {}, fresh variables {}..={}",
                i + 1,
                m.input_width,
                m.output_width,
                first.get(),
                last.get()
            ));
        }
    }
    let text = emit_dimacs_with_comments(&formula, &comments);
    std::fs::write(output, &text).map_err(io_err(output))?;
    ctx.manifest.finish();
    let meta = GenMeta {
        generator,
        clauses: formula.len(),
        variables: formula.num_variables(),
        width: formula.uniform_width(),
        splits: &splits,
        manifest: &ctx.manifest,
    };
    let meta_path = sidecar_path(output, "meta.json");
    std::fs::write(&meta_path, serde_json::to_string_pretty(&meta)? + "\n").map_err(io_err(&meta_path))?;
    println!(
        "wrote {} ({} clauses, {} variables, sha256 {})",
        output.display(),
        formula.len(),
        formula.num_variables(),
        manifest::sha256_hex(text.as_bytes())
    );
    Ok(0)
}

fn cmd_lemma_check(which: LemmaChoice, k: Option<usize>, reporter: &mut Reporter) -> Result<u8, CliError> {
    if let Some(k) = k {
        if k < 4 {
            return Err(CliError::Usage(format!("--k must be at least 4, got {k}")));
        }
    }
    let mut scenarios = vec![];
    match which {
        LemmaChoice::L511 => scenarios.push(forge::lemma511_instance(k.unwrap_or(4))?),
        LemmaChoice::L517 => scenarios.push(forge::lemma517_instance()),
        LemmaChoice::L518 => scenarios.push(forge::lemma518_instance()),
        LemmaChoice::All => {
            for k in 4..=10 {
                scenarios.push(forge::lemma511_instance(k)?);
            }
            scenarios.push(forge::lemma517_instance());
            scenarios.push(forge::lemma518_instance());
        }
    }
    let reports: Vec<CheckReport> = scenarios.iter().map(check_scenario).collect::<Result<_, _>>()?;
    let mut unconfirmed = 0;
    for r in &reports {
        println!("{r}");
        unconfirmed += usize::from(!r.confirmed());
        reporter.record(r)?;
    }
    Ok(if unconfirmed > 0 { EXIT_CHECK_FAILED } else { 0 })
}

fn cmd_blowup(n: u32, max_clauses: u64, reporter: &mut Reporter) -> Result<u8, CliError> {
    if n == 0 {
        return Err(CliError::Usage("--n must be at least 1".into()));
    }
    println!("{:>4} {:>14} {:>16}", "n", "full-length", "all expansions");
    for m in 1..=n {
        match blowup_demo_with_budget(m, max_clauses) {
            Ok(r) => {
                println!("{:>4} {:>14} {:>16}", m, r.by_length[m as usize], r.total);
                reporter.record(&r)?;
            }
            Err(e) => {
                eprintln!("n = {m}: {e}; table above is partial");
                return Err(e.into());
            }
        }
    }
    Ok(0)
}

fn run(cli: Cli) -> Result<u8, CliError> {
    let mut ctx = Context::new(&cli.global);
    let mut reporter = Reporter::open(cli.global.report.as_deref())?;
    let code = match &cli.command {
        Command::Solve { input } => cmd_solve(&mut ctx, input, &mut reporter),
        Command::Oracle { input } => cmd_oracle(&mut ctx, input, &mut reporter),
        Command::Diff { source } => cmd_diff(&mut ctx, source, &mut reporter),
        Command::Gen { kind } => cmd_gen(&mut ctx, kind),
        Command::LemmaCheck { lemma, k } => cmd_lemma_check(*lemma, *k, &mut reporter),
        Command::Blowup { n, max_clauses } => cmd_blowup(*n, *max_clauses, &mut reporter),
    };
    // the manifest goes out even when the command failed partway
    reporter.finish(&mut ctx.manifest)?;
    code
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_ERROR } else { 0 });
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_ERROR)
        }
    }
}
