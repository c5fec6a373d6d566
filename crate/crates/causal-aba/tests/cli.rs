//! End-to-end tests of the compiled binary: exit codes, output files,
//! golden formats, and determinism across seeds and worker counts.

use std::path::{Path, PathBuf};
use std::process::Command;

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_causal-aba")
}

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../fixtures")
        .join(name)
}

/// Runs the binary with `args` (plus env pairs) and returns
/// (exit code, stdout, stderr).
fn run_env(args: &[&str], env: &[(&str, &str)]) -> (i32, String, String) {
    let mut cmd = Command::new(bin());
    cmd.args(args);
    for (k, v) in env {
        cmd.env(k, v);
    }
    let out = cmd.output().expect("binary runs");
    (
        out.status.code().expect("binary exits normally"),
        String::from_utf8_lossy(&out.stdout).into_owned(),
        String::from_utf8_lossy(&out.stderr).into_owned(),
    )
}

fn run(args: &[&str]) -> (i32, String, String) {
    run_env(args, &[])
}

fn read(path: &Path) -> String {
    std::fs::read_to_string(path).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

#[test]
fn help_lists_every_subcommand_and_exits_zero() {
    let (code, stdout, _) = run(&["--help"]);
    assert_eq!(code, 0);
    for sub in ["discover", "simulate", "eval", "bench", "aba"] {
        assert!(stdout.contains(sub), "--help must mention {sub}");
    }
    let (code, stdout, _) = run(&["discover", "--help"]);
    assert_eq!(code, 0);
    for flag in ["--data", "--graph", "--alpha", "--method", "--out"] {
        assert!(stdout.contains(flag), "discover --help must mention {flag}");
    }
}

#[test]
fn usage_and_validation_errors_exit_one_not_two() {
    // unknown flag (clap-level)
    let (code, _, _) = run(&["discover", "--no-such-flag"]);
    assert_eq!(code, 1);
    // no subcommand at all
    let (code, _, _) = run(&[]);
    assert_eq!(code, 1);
    // two input sources (config-level)
    let (code, _, err) = run(&["discover", "--data", "a.csv", "--graph", "b.edges"]);
    assert_eq!(code, 1);
    assert!(err.contains("input error"), "stderr: {err}");
    // alpha out of range
    let (code, _, err) = run(&["discover", "--data", "a.csv", "--alpha", "1.5"]);
    assert_eq!(code, 1);
    assert!(err.contains("alpha"), "stderr: {err}");
    // simulate with both sources
    let (code, _, _) = run(&["simulate", "--bif", "x.bif", "--random-dag", "4"]);
    assert_eq!(code, 1);
    // bench mixing source kinds
    let (code, _, _) = run(&["bench", "--bif", "x.bif", "--random-dag", "4"]);
    assert_eq!(code, 1);
}

#[test]
fn missing_input_files_exit_one_with_the_path_named() {
    let (code, _, err) = run(&["discover", "--data", "/no/such/file.csv"]);
    assert_eq!(code, 1);
    assert!(err.contains("/no/such/file.csv"), "stderr: {err}");

    let (code, _, err) = run(&["eval", "--truth", "/no/t.edges", "--estimate", "/no/e.edges"]);
    assert_eq!(code, 1);
    assert!(err.contains("/no/t.edges"), "stderr: {err}");
}

#[test]
fn simulate_from_a_network_is_seed_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let bif = fixture("cancer.bif");
    let bif = bif.to_str().unwrap();
    let out_a = dir.path().join("a");
    let out_b = dir.path().join("b");
    let out_c = dir.path().join("c");

    for (out, seed) in [(&out_a, "1"), (&out_b, "1"), (&out_c, "2")] {
        let (code, _, err) = run(&[
            "simulate", "--bif", bif, "--n", "80", "--seed", seed,
            "--out", out.to_str().unwrap(),
        ]);
        assert_eq!(code, 0, "stderr: {err}");
    }

    let a = read(&out_a.join("data.csv"));
    assert_eq!(a, read(&out_b.join("data.csv")), "same seed, same bytes");
    assert_ne!(a, read(&out_c.join("data.csv")), "different seed, different sample");
    // the network's structure does not depend on the seed
    assert_eq!(
        read(&out_a.join("truth.edges")),
        read(&out_c.join("truth.edges"))
    );
    // 80 rows plus a header, 5 variables
    assert_eq!(a.lines().count(), 81);
    assert_eq!(a.lines().next().unwrap().split(',').count(), 5);
}

#[test]
fn simulate_random_dag_writes_data_and_truth_of_the_right_shape() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("sim");
    let (code, _, err) = run(&[
        "simulate", "--random-dag", "6", "--edges", "6", "--n", "40",
        "--seed", "3", "--out", out.to_str().unwrap(),
    ]);
    assert_eq!(code, 0, "stderr: {err}");

    let csv = read(&out.join("data.csv"));
    assert_eq!(csv.lines().count(), 41);
    assert_eq!(csv.lines().next().unwrap(), "x0,x1,x2,x3,x4,x5");

    let truth = read(&out.join("truth.edges"));
    assert!(truth.starts_with("vars:"), "edge list declares its variables");
    assert_eq!(truth.matches("->").count(), 6, "six directed edges:\n{truth}");
}

/// The full loop: simulate, discover three ways, eval the oracle run.
#[test]
fn discover_writes_the_documented_files_per_method() {
    let dir = tempfile::tempdir().unwrap();
    let sim = dir.path().join("sim");
    let (code, _, err) = run(&[
        "simulate", "--random-dag", "4", "--edges", "4", "--n", "2000",
        "--seed", "7", "--out", sim.to_str().unwrap(),
    ]);
    assert_eq!(code, 0, "stderr: {err}");
    let data = sim.join("data.csv");
    let data = data.to_str().unwrap();

    // abapc: facts, point estimate, class estimate, log
    let out = dir.path().join("abapc");
    let (code, _, err) = run(&[
        "discover", "--data", data, "--method", "abapc",
        "--out", out.to_str().unwrap(),
    ]);
    assert_eq!(code, 0, "stderr: {err}");
    for f in ["facts.tsv", "selected.edges", "selected.cpdag", "run.json"] {
        assert!(out.join(f).exists(), "abapc must write {f}");
    }
    let log: serde_json::Value = serde_json::from_str(&read(&out.join("run.json"))).unwrap();
    assert_eq!(log["command"], "discover");
    assert_eq!(log["method"], "abapc");
    assert_eq!(log["d"], 4);
    assert_eq!(log["solver_mode"], "hard");
    assert!(log["detail"]["tests_performed"].as_u64().unwrap() > 0);
    assert!(log["detail"]["run"]["selected"].is_array());

    // mpc: no point estimate, only the class
    let out = dir.path().join("mpc");
    let (code, _, err) = run(&[
        "discover", "--data", data, "--method", "mpc",
        "--out", out.to_str().unwrap(),
    ]);
    assert_eq!(code, 0, "stderr: {err}");
    assert!(!out.join("selected.edges").exists(), "the baseline yields no DAG");
    for f in ["facts.tsv", "selected.cpdag", "run.json"] {
        assert!(out.join(f).exists(), "mpc must write {f}");
    }
    let log: serde_json::Value = serde_json::from_str(&read(&out.join("run.json"))).unwrap();
    assert!(log["detail"]["estimate"]["directed"].is_array());

    // random: a reproducible baseline DAG, no facts
    let out_r1 = dir.path().join("rand1");
    let out_r2 = dir.path().join("rand2");
    for out in [&out_r1, &out_r2] {
        let (code, _, err) = run(&[
            "discover", "--data", data, "--method", "random", "--seed", "11",
            "--out", out.to_str().unwrap(),
        ]);
        assert_eq!(code, 0, "stderr: {err}");
        assert!(!out.join("facts.tsv").exists(), "the random baseline tests nothing");
        assert!(out.join("selected.edges").exists());
    }
    assert_eq!(
        read(&out_r1.join("selected.edges")),
        read(&out_r2.join("selected.edges")),
        "same seed, same baseline graph"
    );
}

#[test]
fn oracle_discovery_recovers_the_equivalence_class_exactly() {
    let dir = tempfile::tempdir().unwrap();
    let sim = dir.path().join("sim");
    let (code, _, err) = run(&[
        "simulate", "--random-dag", "5", "--edges", "5", "--n", "10",
        "--seed", "41", "--out", sim.to_str().unwrap(),
    ]);
    assert_eq!(code, 0, "stderr: {err}");
    let truth = sim.join("truth.edges");

    let out = dir.path().join("oracle");
    let (code, _, err) = run(&[
        "discover", "--method", "oracle", "--graph", truth.to_str().unwrap(),
        "--out", out.to_str().unwrap(),
    ]);
    assert_eq!(code, 0, "stderr: {err}");

    let (code, stdout, err) = run(&[
        "eval",
        "--truth", truth.to_str().unwrap(),
        "--estimate", out.join("selected.cpdag").to_str().unwrap(),
        "--method", "oracle",
        "--out", dir.path().join("eval").to_str().unwrap(),
    ]);
    assert_eq!(code, 0, "stderr: {err}");
    let row: serde_json::Value = serde_json::from_str(&stdout).unwrap();
    assert_eq!(row["shd"], 0, "oracle answers must pin the class: {row}");
    assert_eq!(row["sid_low"], 0);
    assert_eq!(row["f1"], 1.0);
    assert_eq!(row["method"], "oracle");
    // the same row lands in metrics.json
    let saved: serde_json::Value =
        serde_json::from_str(&read(&dir.path().join("eval").join("metrics.json"))).unwrap();
    assert_eq!(saved, row);
}

#[test]
fn eval_of_identical_graphs_reports_zero_distance_everywhere() {
    let dir = tempfile::tempdir().unwrap();
    let edges = dir.path().join("g.edges");
    std::fs::write(&edges, "vars: a, b, c\na -> b\nc -> b\n").unwrap();
    let (code, stdout, err) = run(&[
        "eval", "--truth", edges.to_str().unwrap(),
        "--estimate", edges.to_str().unwrap(),
        "--dataset", "identity",
        "--out", dir.path().to_str().unwrap(),
    ]);
    assert_eq!(code, 0, "stderr: {err}");
    let row: serde_json::Value = serde_json::from_str(&stdout).unwrap();
    assert_eq!(row["dataset"], "identity");
    assert_eq!(row["shd"], 0);
    assert_eq!(row["nshd"], 0.0);
    assert_eq!(row["sid_high"], 0);
    assert_eq!(row["nsid_high"], 0.0);
    assert_eq!(row["precision"], 1.0);
    assert_eq!(row["recall"], 1.0);
    assert_eq!(row["f1"], 1.0);
}

#[test]
fn eval_rejects_a_cyclic_or_undirected_truth() {
    let dir = tempfile::tempdir().unwrap();
    let truth = dir.path().join("t.edges");
    let est = dir.path().join("e.edges");
    std::fs::write(&truth, "vars: a, b\na -- b\n").unwrap();
    std::fs::write(&est, "vars: a, b\na -> b\n").unwrap();
    let (code, _, err) = run(&[
        "eval", "--truth", truth.to_str().unwrap(),
        "--estimate", est.to_str().unwrap(),
        "--out", dir.path().to_str().unwrap(),
    ]);
    assert_eq!(code, 1);
    assert!(err.contains("truth must be a DAG"), "stderr: {err}");
}

/// A small full grid: row counts, canonical order, stable aggregation,
/// the chart, and byte-level determinism across worker counts
/// (modulo wall-clock fields).
#[test]
fn bench_grid_is_complete_sorted_and_worker_count_invariant() {
    let dir = tempfile::tempdir().unwrap();
    let out1 = dir.path().join("w1");
    let out2 = dir.path().join("w2");
    for (out, workers) in [(&out1, "1"), (&out2, "2")] {
        let (code, _, err) = run_env(
            &[
                "bench", "--random-dag", "4", "--edges", "3", "--seeds", "2",
                "--n", "1500", "--methods", "abapc,mpc,random", "--svg",
                "--out", out.to_str().unwrap(),
            ],
            &[("CAUSAL_ABA_WORKERS", workers)],
        );
        assert_eq!(code, 0, "stderr: {err}");
    }

    let strip_clock = |line: &str| {
        let mut v: serde_json::Value = serde_json::from_str(line).unwrap();
        v.as_object_mut().unwrap().remove("elapsed_s");
        v
    };
    let rows1: Vec<serde_json::Value> =
        read(&out1.join("rows.jsonl")).lines().map(strip_clock).collect();
    let rows2: Vec<serde_json::Value> =
        read(&out2.join("rows.jsonl")).lines().map(strip_clock).collect();
    assert_eq!(rows1.len(), 6, "3 methods x 2 seeds");
    assert_eq!(rows1, rows2, "worker count must not change results");

    // canonical (dataset, method, seed) order
    let keys: Vec<(String, String, u64)> = rows1
        .iter()
        .map(|r| {
            (
                r["dataset"].as_str().unwrap().to_string(),
                r["method"].as_str().unwrap().to_string(),
                r["seed"].as_u64().unwrap(),
            )
        })
        .collect();
    let mut sorted = keys.clone();
    sorted.sort();
    assert_eq!(keys, sorted);
    assert_eq!(keys[0].0, "sem-d4");
    assert_eq!(keys[0].1, "abapc");

    let summary: serde_json::Value =
        serde_json::from_str(&read(&out1.join("summary.json"))).unwrap();
    let groups = summary.as_array().unwrap();
    assert_eq!(groups.len(), 3, "one group per method");
    for g in groups {
        assert_eq!(g["seeds"], 2);
        assert!(g["metrics"]["nsid_high"]["mean"].is_f64());
        assert!(g["metrics"]["nsid_high"]["std"].is_f64());
    }
    assert_eq!(
        read(&out1.join("summary.json")),
        read(&out2.join("summary.json")),
        "aggregates carry no wall-clock and must match exactly"
    );

    let svg = read(&out1.join("chart.svg"));
    assert!(svg.starts_with("<svg "), "chart must be a static svg");
    assert!(svg.contains("sem-d4"));
}

#[test]
fn aba_enumerate_prints_extensions_one_per_line() {
    let dir = tempfile::tempdir().unwrap();
    let fw = dir.path().join("fw.txt");
    std::fs::write(&fw, "contrary(a)=ca\ncontrary(b)=cb\ncb <- a\n").unwrap();

    let (code, stdout, stderr) = run(&[
        "aba", "enumerate", "--framework", fw.to_str().unwrap(),
        "--semantics", "stable",
    ]);
    assert_eq!(code, 0, "stderr: {stderr}");
    assert_eq!(stdout, "{a}\n", "the sole stable extension");
    assert!(stderr.contains("1 stable extension(s)"), "stderr: {stderr}");

    // the empty set is conflict-free, so the listing grows under a
    // weaker semantics
    let (code, stdout, _) = run(&[
        "aba", "enumerate", "--framework", fw.to_str().unwrap(),
        "--semantics", "conflict-free",
    ]);
    assert_eq!(code, 0);
    assert!(stdout.lines().count() > 1);
    assert!(stdout.lines().any(|l| l == "{}"));

    let (code, _, err) = run(&[
        "aba", "enumerate", "--framework", fw.to_str().unwrap(),
        "--semantics", "no-such-semantics",
    ]);
    assert_eq!(code, 1);
    assert!(err.contains("input error"), "stderr: {err}");
}
