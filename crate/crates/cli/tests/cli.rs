use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use mig_core::harness::synth::{generate_pool, SyntheticPoolSpec};

fn mig(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mig"))
        .args(args)
        .current_dir(dir)
        .env_remove("MIG_THREADS")
        .env_remove("RUST_LOG")
        .output()
        .expect("binary runs")
}

fn ok(dir: &Path, args: &[&str]) -> String {
    let out = mig(dir, args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

const THREE_POINTS: &str = r#"{"id":"d1","labels":["L1"],"quality":1.0,"text":"first"}
{"id":"d2","labels":["L1"],"quality":1.0,"text":"second"}
{"id":"d3","labels":["L2"],"quality":0.8,"text":"third"}
"#;

fn three_point_dir() -> tempfile::TempDir {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("pool.jsonl"), THREE_POINTS).unwrap();
    std::fs::write(dir.path().join("emb.txt"), "2 2\n1 0\n0 1\n").unwrap();
    dir
}

fn synthetic_dir(n: usize, k: usize, seed: u64) -> (tempfile::TempDir, PathBuf) {
    let dir = tempfile::tempdir().unwrap();
    let syn = generate_pool(&SyntheticPoolSpec::new(n, k, seed)).unwrap();
    syn.write_to_dir(dir.path()).unwrap();
    let graph = dir.path().join("graph.mig");
    ok(dir.path(), &["build-graph", "--pool", "pool.jsonl", "--embeddings", "labels.emb", "-o", "graph.mig"]);
    (dir, graph)
}

#[test]
fn build_graph_defaults_are_recorded() {
    let dir = three_point_dir();
    let out = ok(dir.path(), &["build-graph", "--pool", "pool.jsonl", "--embeddings", "emb.txt", "-o", "g.mig"]);
    assert!(out.contains("labels 2\nedges 0\n"), "{out}");
    let art = std::fs::read_to_string(dir.path().join("g.mig")).unwrap();
    assert!(art.starts_with("mig-graph 1\n"));
    assert!(art.contains("\nthreshold 0.9\nalpha 1\n"));
}

#[test]
fn threshold_above_one_is_rejected() {
    let dir = three_point_dir();
    let out = mig(
        dir.path(),
        &["build-graph", "--pool", "pool.jsonl", "--embeddings", "emb.txt", "-o", "g.mig", "--threshold", "1.01"],
    );
    assert_eq!(code(&out), 2);
    assert!(!dir.path().join("g.mig").exists());
}

#[test]
fn rebuild_is_byte_identical() {
    let (dir, graph) = synthetic_dir(500, 50, 1);
    let first = std::fs::read(&graph).unwrap();
    ok(dir.path(), &["build-graph", "--pool", "pool.jsonl", "--embeddings", "labels.emb", "-o", "again.mig"]);
    assert_eq!(first, std::fs::read(dir.path().join("again.mig")).unwrap());
}

#[test]
fn select_writes_payloads_in_selection_order() {
    let dir = three_point_dir();
    ok(dir.path(), &["build-graph", "--pool", "pool.jsonl", "--embeddings", "emb.txt", "-o", "g.mig"]);
    let out = ok(dir.path(), &["select", "--pool", "pool.jsonl", "--graph", "g.mig", "-n", "2", "-o", "sel.jsonl"]);
    assert!(out.contains("E(D) 1.8365"), "{out}");
    let sel = std::fs::read_to_string(dir.path().join("sel.jsonl")).unwrap();
    let lines: Vec<&str> = THREE_POINTS.lines().collect();
    assert_eq!(sel, format!("{}\n{}\n", lines[0], lines[2]));

    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("sel.jsonl.report.json")).unwrap()).unwrap();
    assert_eq!(report["selected_ids"], serde_json::json!(["d1", "d3"]));
    assert_eq!(report["config"]["budget"], 2);
    assert_eq!(report["config"]["alpha"], 1.0);
    assert_eq!(report["config"]["threshold"], 0.9);
    assert_eq!(report["config"]["info_function"], "power:0.8");
    assert!((report["selection"]["final_info"].as_f64().unwrap() - 1.8365).abs() < 1e-4);
}

#[test]
fn zero_budget_is_rejected() {
    let dir = three_point_dir();
    ok(dir.path(), &["build-graph", "--pool", "pool.jsonl", "--embeddings", "emb.txt", "-o", "g.mig"]);
    let out = mig(dir.path(), &["select", "--pool", "pool.jsonl", "--graph", "g.mig", "-n", "0", "-o", "sel.jsonl"]);
    assert_eq!(code(&out), 2);
    let out = mig(dir.path(), &["select", "--pool", "pool.jsonl", "--graph", "g.mig", "-n", "4", "-o", "sel.jsonl"]);
    assert_eq!(code(&out), 2);
}

#[test]
fn reruns_produce_identical_selections() {
    let (dir, _) = synthetic_dir(2000, 100, 2);
    for name in ["a.jsonl", "b.jsonl"] {
        ok(dir.path(), &["select", "--pool", "pool.jsonl", "--graph", "graph.mig", "-n", "200", "-o", name]);
    }
    let a = std::fs::read(dir.path().join("a.jsonl")).unwrap();
    assert_eq!(a, std::fs::read(dir.path().join("b.jsonl")).unwrap());
    ok(dir.path(), &["--threads", "1", "select", "--pool", "pool.jsonl", "--graph", "graph.mig", "-n", "200", "-o", "c.jsonl"]);
    assert_eq!(a, std::fs::read(dir.path().join("c.jsonl")).unwrap());
}

#[test]
fn larger_budget_writes_every_record() {
    let (dir, _) = synthetic_dir(50_000, 500, 3);
    ok(dir.path(), &["select", "--pool", "pool.jsonl", "--graph", "graph.mig", "-n", "5000", "-o", "sel.jsonl"]);
    let sel = std::fs::read_to_string(dir.path().join("sel.jsonl")).unwrap();
    assert_eq!(sel.lines().count(), 5000);
    let ids: std::collections::HashSet<&str> = sel.lines().collect();
    assert_eq!(ids.len(), 5000);
}

#[test]
fn mismatched_pool_needs_force() {
    let dir = three_point_dir();
    ok(dir.path(), &["build-graph", "--pool", "pool.jsonl", "--embeddings", "emb.txt", "-o", "g.mig"]);
    std::fs::write(dir.path().join("other.jsonl"), "{\"id\":\"x\",\"labels\":[\"L2\"],\"quality\":1}\n").unwrap();
    let out = mig(dir.path(), &["select", "--pool", "other.jsonl", "--graph", "g.mig", "-n", "1", "-o", "s.jsonl"]);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("--force"));
    ok(dir.path(), &["select", "--pool", "other.jsonl", "--graph", "g.mig", "-n", "1", "-o", "s.jsonl", "--force"]);
}

#[test]
fn wrong_artifact_version_is_rejected() {
    let dir = three_point_dir();
    ok(dir.path(), &["build-graph", "--pool", "pool.jsonl", "--embeddings", "emb.txt", "-o", "g.mig"]);
    let art = std::fs::read_to_string(dir.path().join("g.mig")).unwrap();
    std::fs::write(dir.path().join("g2.mig"), art.replacen("mig-graph 1", "mig-graph 2", 1)).unwrap();
    let out = mig(dir.path(), &["select", "--pool", "pool.jsonl", "--graph", "g2.mig", "-n", "1", "-o", "s.jsonl"]);
    assert_eq!(code(&out), 2);
}

#[test]
fn exit_codes_distinguish_io() {
    let dir = three_point_dir();
    let out = mig(dir.path(), &["stats", "--pool", "missing.jsonl"]);
    assert_eq!(code(&out), 3);
    std::fs::write(dir.path().join("bad.jsonl"), "{not json}\n").unwrap();
    let out = mig(dir.path(), &["stats", "--pool", "bad.jsonl"]);
    assert_eq!(code(&out), 2);
    let out = mig(dir.path(), &["select", "-n", "1"]);
    assert_eq!(code(&out), 2);
}

#[test]
fn stats_histogram_and_coverage() {
    let dir = three_point_dir();
    let out = ok(dir.path(), &["stats", "--pool", "pool.jsonl", "--selection", "pool.jsonl"]);
    assert!(out.contains("coverage 100.00%"), "{out}");
    assert!(out.contains("  L1  2\n  L2  1\n"), "{out}");

    std::fs::write(dir.path().join("disjoint.jsonl"), "{\"id\":\"z\",\"labels\":[\"L9\"],\"quality\":1}\n").unwrap();
    let out = ok(dir.path(), &["stats", "--pool", "pool.jsonl", "--selection", "disjoint.jsonl", "--json"]);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["selection"]["coverage"], 0.0);
    assert_eq!(v["histogram"], serde_json::json!([["L1", 2], ["L2", 1]]));
}

#[test]
fn score_matches_selection_report() {
    let dir = three_point_dir();
    ok(dir.path(), &["build-graph", "--pool", "pool.jsonl", "--embeddings", "emb.txt", "-o", "g.mig"]);
    let out = ok(dir.path(), &["score", "--graph", "g.mig", "--pool", "pool.jsonl", "--json"]);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    let expected = 2f64.powf(0.8) + 0.8f64.powf(0.8);
    assert!((v["info"].as_f64().unwrap() - expected).abs() < 1e-12);
    let out = ok(dir.path(), &["score", "--graph", "g.mig", "--pool", "pool.jsonl", "--info-function", "linear", "--json"]);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert!((v["info"].as_f64().unwrap() - 2.8).abs() < 1e-12);
}

#[test]
fn config_file_then_flags() {
    let (dir, _) = synthetic_dir(300, 30, 4);
    std::fs::write(
        dir.path().join("run.toml"),
        "pool = \"pool.jsonl\"\nembeddings = \"labels.emb\"\nthreshold = 0.85\nalpha = 0.5\n",
    )
    .unwrap();
    ok(dir.path(), &["--config", "run.toml", "build-graph", "-o", "from_file.mig"]);
    let art = std::fs::read_to_string(dir.path().join("from_file.mig")).unwrap();
    assert!(art.contains("\nthreshold 0.85\nalpha 0.5\n"), "{art}");
    ok(dir.path(), &["--config", "run.toml", "--threshold", "0.95", "build-graph", "-o", "flag.mig"]);
    let art = std::fs::read_to_string(dir.path().join("flag.mig")).unwrap();
    assert!(art.contains("\nthreshold 0.95\nalpha 0.5\n"));

    std::fs::write(dir.path().join("bad.toml"), "budget = \"many\"\n").unwrap();
    let out = mig(dir.path(), &["--config", "bad.toml", "stats", "--pool", "pool.jsonl"]);
    assert_eq!(code(&out), 2);
}

#[test]
fn thread_count_from_environment() {
    let dir = three_point_dir();
    let out = Command::new(env!("CARGO_BIN_EXE_mig"))
        .args(["stats", "--pool", "pool.jsonl"])
        .current_dir(dir.path())
        .env("MIG_THREADS", "0")
        .output()
        .unwrap();
    assert_eq!(code(&out), 2);
    let out = Command::new(env!("CARGO_BIN_EXE_mig"))
        .args(["stats", "--pool", "pool.jsonl"])
        .current_dir(dir.path())
        .env("MIG_THREADS", "2")
        .output()
        .unwrap();
    assert!(out.status.success());
}

#[test]
fn normalization_writes_remap_table() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("pool.jsonl"),
        concat!(
            "{\"id\":\"a\",\"labels\":[\"math\",\"rare\"],\"quality\":1}\n",
            "{\"id\":\"b\",\"labels\":[\"math\",\"maths\"],\"quality\":1}\n",
            "{\"id\":\"c\",\"labels\":[\"maths\",\"code\"],\"quality\":1}\n",
            "{\"id\":\"d\",\"labels\":[\"code\"],\"quality\":1}\n",
        ),
    )
    .unwrap();
    std::fs::write(dir.path().join("emb.txt"), "4 2\n1 0\n0 1\n0.99 0.05\n0.1 1\n").unwrap();
    std::fs::write(dir.path().join("emb.txt.labels"), "math\nrare\nmaths\ncode\n").unwrap();
    ok(
        dir.path(),
        &[
            "build-graph", "--pool", "pool.jsonl", "--embeddings", "emb.txt", "-o", "g.mig",
            "--min-freq", "2", "--merge-sim", "0.95", "--remap-out", "remap.tsv",
        ],
    );
    let table = std::fs::read_to_string(dir.path().join("remap.tsv")).unwrap();
    assert_eq!(table, "math\tmath\nrare\tDROPPED\nmaths\tmath\ncode\tcode\n");
    let out = ok(dir.path(), &["select", "--pool", "pool.jsonl", "--graph", "g.mig", "-n", "2", "-o", "s.jsonl"]);
    assert!(out.contains("selected 2 of 4"), "{out}");
}

#[test]
fn baseline_reports_rows_and_csv() {
    let (dir, _) = synthetic_dir(400, 40, 5);
    let out = ok(
        dir.path(),
        &[
            "baseline", "--pool", "pool.jsonl", "--graph", "graph.mig", "-n", "40",
            "--methods", "mig,random,quality,facility-location", "--point-embeddings", "points.emb", "--csv", "cmp.csv",
        ],
    );
    assert_eq!(out.lines().count(), 6, "{out}");
    let csv = std::fs::read_to_string(dir.path().join("cmp.csv")).unwrap();
    assert!(csv.starts_with("method,selected,info,coverage,mean_quality,wall_secs,completed\n"));
    assert_eq!(csv.lines().count(), 5);
    let out = mig(dir.path(), &["baseline", "--pool", "pool.jsonl", "--graph", "graph.mig", "-n", "4", "--methods", "facility-location"]);
    assert_eq!(code(&out), 2);
}
