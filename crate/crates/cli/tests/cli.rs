use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn boundsat(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_boundsat"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn jsonl(path: &Path) -> Vec<serde_json::Value> {
    std::fs::read_to_string(path)
        .unwrap()
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect()
}

#[test]
fn solve_exit_codes() {
    let dir = TempDir::new().unwrap();
    std::fs::write(dir.path().join("units.cnf"), "p cnf 1 2\n1 0\n-1 0\n").unwrap();
    std::fs::write(dir.path().join("wide.cnf"), "p cnf 4 1\n1 2 3 4 0\n").unwrap();
    assert_eq!(code(&boundsat(dir.path(), &["solve", "units.cnf"])), 20);
    let wide = boundsat(dir.path(), &["solve", "wide.cnf"]);
    assert_eq!(code(&wide), 1);
    assert!(String::from_utf8_lossy(&wide.stderr).contains("longer than the length bound"));
    assert_eq!(code(&boundsat(dir.path(), &["solve", "wide.cnf", "--unbounded"])), 10);
    assert_eq!(code(&boundsat(dir.path(), &["solve", "missing.cnf"])), 1);
}

#[test]
fn split_complete_formula_is_claimed_sat_but_unsat() {
    let dir = TempDir::new().unwrap();
    let gen = boundsat(dir.path(), &["gen", "split-chain", "--k", "1", "--base", "complete4", "-o", "phi.cnf"]);
    assert_eq!(code(&gen), 0);
    assert_eq!(code(&boundsat(dir.path(), &["solve", "phi.cnf"])), 10);
    assert_eq!(code(&boundsat(dir.path(), &["oracle", "phi.cnf"])), 20);
    assert_eq!(code(&boundsat(dir.path(), &["oracle", "phi.cnf", "--oracle", "brute"])), 20);
}

#[test]
fn gen_writes_dimacs_and_sidecar() {
    let dir = TempDir::new().unwrap();
    assert_eq!(code(&boundsat(dir.path(), &["gen", "complete", "--width", "4", "-o", "c4.cnf"])), 0);
    let text = std::fs::read_to_string(dir.path().join("c4.cnf")).unwrap();
    assert!(text.contains("p cnf 4 16\n"));
    assert_eq!(text.lines().filter(|l| l.ends_with(" 0")).count(), 16);

    let out = boundsat(dir.path(), &["gen", "split-chain", "--k", "2", "--base", "complete6", "-o", "p6.cnf"]);
    assert_eq!(code(&out), 0);
    let meta: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("p6.cnf.meta.json")).unwrap()).unwrap();
    assert_eq!(meta["clauses"], 256);
    assert_eq!(meta["variables"], 198);
    assert_eq!(meta["width"], 3);
    assert_eq!(meta["splits"].as_array().unwrap().len(), 2);
    assert_eq!(meta["splits"][0]["fresh_variables"][0], 7);
    assert_eq!(meta["manifest"]["tool"], "boundsat");

    let ru = boundsat(
        dir.path(),
        &["gen", "random-unsat", "--width", "4", "--vars", "6", "--clauses", "40", "--seed", "1", "-o", "ru.cnf"],
    );
    assert_eq!(code(&ru), 0);
    assert_eq!(code(&boundsat(dir.path(), &["oracle", "ru.cnf"])), 20);
}

#[test]
fn gen_is_replayable() {
    let dir = TempDir::new().unwrap();
    let args = ["gen", "random-unsat", "--width", "4", "--vars", "6", "--clauses", "40", "--seed", "3"];
    for out in ["a.cnf", "b.cnf"] {
        let mut v = args.to_vec();
        v.extend(["-o", out]);
        assert_eq!(code(&boundsat(dir.path(), &v)), 0);
    }
    let a = std::fs::read(dir.path().join("a.cnf")).unwrap();
    let b = std::fs::read(dir.path().join("b.cnf")).unwrap();
    assert_eq!(a, b);
}

#[test]
fn gen_surfaces_forge_errors() {
    let dir = TempDir::new().unwrap();
    let out = boundsat(dir.path(), &["gen", "split-chain", "--k", "2", "--base", "complete4", "-o", "x.cnf"]);
    assert_eq!(code(&out), 1);
    assert!(String::from_utf8_lossy(&out.stderr).contains("does not match b_2"));
}

#[test]
fn diff_reports_mismatch_with_trace() {
    let dir = TempDir::new().unwrap();
    let out = boundsat(dir.path(), &["diff", "complete", "--k", "1", "--report", "d.jsonl"]);
    assert_eq!(code(&out), 0);
    assert!(stdout(&out).contains("1 mismatches, 0 fatal"));
    let records = jsonl(&dir.path().join("d.jsonl"));
    assert_eq!(records.len(), 1);
    let r = &records[0];
    assert_eq!(r["mismatch"], true);
    assert_eq!(r["engine_verdict"], "claimed_sat");
    assert_eq!(r["oracle_verdict"], "unsat");
    assert_eq!(r["oracle_method"], "dpll");
    assert!(r["engine_report"]["trace"].as_array().is_some_and(|t| t.len() == 2));
    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("d.jsonl.manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["config"]["engine"]["length_bound"], 3);
}

#[test]
fn diff_random_batch_is_ordered_and_never_fatal() {
    let dir = TempDir::new().unwrap();
    let args = [
        "diff", "random", "--vars", "8", "--clauses", "20", "--count", "12", "--seed", "7", "--report", "r.jsonl",
    ];
    assert_eq!(code(&boundsat(dir.path(), &args)), 0);
    let first = jsonl(&dir.path().join("r.jsonl"));
    let ids: Vec<String> = first.iter().map(|r| r["instance_id"].as_str().unwrap().to_string()).collect();
    let expected: Vec<String> = (7..19).map(|s| format!("random-{s}")).collect();
    assert_eq!(ids, expected);
    assert!(first.iter().all(|r| r["fatal"] == false));

    // same flags, same records apart from timings
    assert_eq!(code(&boundsat(dir.path(), &args)), 0);
    let strip = |mut v: serde_json::Value| {
        v["engine_report"]["elapsed"] = serde_json::Value::Null;
        v
    };
    let second = jsonl(&dir.path().join("r.jsonl"));
    assert_eq!(
        first.into_iter().map(strip).collect::<Vec<_>>(),
        second.into_iter().map(strip).collect::<Vec<_>>()
    );
}

#[test]
fn diff_files_records_input_digest() {
    let dir = TempDir::new().unwrap();
    std::fs::write(dir.path().join("f.cnf"), "p cnf 2 2\n1 -2 0\n2 0\n").unwrap();
    let out = boundsat(dir.path(), &["diff", "files", "f.cnf", "--report", "f.jsonl"]);
    assert_eq!(code(&out), 0);
    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("f.jsonl.manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["inputs"][0]["path"], "f.cnf");
    assert_eq!(manifest["inputs"][0]["sha256"].as_str().unwrap().len(), 64);
}

#[test]
fn lemma_check_variants() {
    let dir = TempDir::new().unwrap();
    let one = boundsat(dir.path(), &["lemma-check", "--lemma", "511", "--k", "4"]);
    assert_eq!(code(&one), 0);
    assert!(stdout(&one).contains("CONFIRMED"));
    let all = boundsat(dir.path(), &["lemma-check", "--lemma", "all", "--report", "l.jsonl"]);
    assert_eq!(code(&all), 0);
    assert_eq!(stdout(&all).matches("CONFIRMED").count(), 9);
    assert_eq!(jsonl(&dir.path().join("l.jsonl")).len(), 9);
    assert_eq!(code(&boundsat(dir.path(), &["lemma-check", "--lemma", "511", "--k", "3"])), 1);
    assert_eq!(code(&boundsat(dir.path(), &["lemma-check", "--lemma", "512"])), 1);
}

#[test]
fn blowup_table_and_budget() {
    let dir = TempDir::new().unwrap();
    let out = boundsat(dir.path(), &["blowup", "--n", "12"]);
    assert_eq!(code(&out), 0);
    let rows: Vec<Vec<u64>> = stdout(&out)
        .lines()
        .skip(1)
        .map(|l| l.split_whitespace().map(|x| x.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows[0][..2], [1, 0]);
    assert_eq!(rows[3][..2], [4, 8]);
    assert_eq!(rows[11][..2], [12, 2048]);

    let partial = boundsat(dir.path(), &["blowup", "--n", "12", "--max-clauses", "100"]);
    assert_eq!(code(&partial), 1);
    assert_eq!(stdout(&partial).lines().count(), 6); // header plus n = 1..5
    assert!(String::from_utf8_lossy(&partial.stderr).contains("partial"));
}

#[test]
fn parse_warnings_keep_exit_status() {
    let dir = TempDir::new().unwrap();
    std::fs::write(dir.path().join("over.cnf"), "p cnf 1 1\n1 2 0\n").unwrap();
    let out = boundsat(dir.path(), &["solve", "over.cnf"]);
    assert_eq!(code(&out), 10);
    assert!(String::from_utf8_lossy(&out.stderr).contains("warning"));
    std::fs::write(dir.path().join("bad.cnf"), "p cnf 1 1\n1 x 0\n").unwrap();
    assert_eq!(code(&boundsat(dir.path(), &["solve", "bad.cnf"])), 1);
}

#[test]
fn argument_errors_exit_one() {
    let dir = TempDir::new().unwrap();
    assert_eq!(code(&boundsat(dir.path(), &["--bogus"])), 1);
    assert_eq!(code(&boundsat(dir.path(), &[])), 1);
    assert_eq!(code(&boundsat(dir.path(), &["--help"])), 0);
}
