//! Black-box CLI tests: exit codes, document shapes, format sniffing, and
//! byte-level determinism of the metrics document.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn sage() -> Command {
    Command::new(env!("CARGO_BIN_EXE_sage"))
}

fn write_graph(dir: &Path, name: &str, body: &str) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, body).unwrap();
    path
}

fn small_graph(dir: &Path) -> PathBuf {
    write_graph(
        dir,
        "small.el",
        "# tiny demo\n0 1\n0 2\n0 3\n1 0\n2 0\n3 4\n4 0\n2 3\n",
    )
}

fn stdout_str(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr_str(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

/// Parse the metrics doc and zero the wall-time field, the one value the
/// determinism contract excludes.
fn normalized_doc(raw: &str) -> serde_json::Value {
    let mut doc: serde_json::Value = serde_json::from_str(raw).unwrap();
    doc["metrics"]["wall_time_ms"] = serde_json::json!(0.0);
    doc
}

#[test]
fn run_pagerank_happy_path() {
    let dir = tempfile::tempdir().unwrap();
    let graph = small_graph(dir.path());
    let metrics = dir.path().join("metrics.json");
    let out = sage()
        .args(["run", "--graph"])
        .arg(&graph)
        .args(["--algorithm", "pagerank", "--t2", "1e-6", "--workers", "2"])
        .arg("--metrics-out")
        .arg(&metrics)
        .output()
        .unwrap();
    assert!(out.status.success(), "stderr: {}", stderr_str(&out));
    assert!(stderr_str(&out).contains("converged"));

    let doc: serde_json::Value = serde_json::from_str(&stdout_str(&out)).unwrap();
    assert_eq!(doc["config"]["algorithm"], "pagerank");
    assert_eq!(doc["metrics"]["converged"], true);
    assert!(!doc["per_iteration_psd_sum"].as_array().unwrap().is_empty());

    let file_doc: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&metrics).unwrap()).unwrap();
    assert_eq!(doc, file_doc);
}

#[test]
fn sssp_without_source_exits_2_and_names_the_flag() {
    let dir = tempfile::tempdir().unwrap();
    let graph = small_graph(dir.path());
    let out = sage()
        .args(["run", "--graph"])
        .arg(&graph)
        .args(["--algorithm", "sssp"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr_str(&out).contains("--source"), "{}", stderr_str(&out));
}

#[test]
fn sssp_with_default_source_flag_runs() {
    let dir = tempfile::tempdir().unwrap();
    let graph = small_graph(dir.path());
    let out = sage()
        .args(["run", "--graph"])
        .arg(&graph)
        .args(["--algorithm", "sssp", "--allow-default-source", "--workers", "2"])
        .output()
        .unwrap();
    assert!(out.status.success(), "stderr: {}", stderr_str(&out));
    let doc: serde_json::Value = serde_json::from_str(&stdout_str(&out)).unwrap();
    assert_eq!(doc["config"]["source"], 0);
}

#[test]
fn unknown_flag_exits_2() {
    let out = sage().args(["run", "--no-such-flag"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn out_of_range_alpha_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let graph = small_graph(dir.path());
    let out = sage()
        .args(["run", "--graph"])
        .arg(&graph)
        .args(["--algorithm", "pagerank", "--alpha", "0.3"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr_str(&out).contains("alpha"));
}

#[test]
fn missing_graph_file_exits_1() {
    let out = sage()
        .args([
            "run",
            "--graph",
            "/nonexistent/never.el",
            "--algorithm",
            "pagerank",
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn malformed_edge_list_exits_1_with_line_number() {
    let dir = tempfile::tempdir().unwrap();
    let graph = write_graph(dir.path(), "bad.el", "0 1\n0 x\n");
    let out = sage()
        .args(["run", "--graph"])
        .arg(&graph)
        .args(["--algorithm", "pagerank"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr_str(&out).contains("line 2"), "{}", stderr_str(&out));
}

#[test]
fn metrics_document_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let graph = small_graph(dir.path());
    let args = |out: &Path| {
        let mut cmd = sage();
        cmd.args(["run", "--graph"])
            .arg(&graph)
            .args([
                "--algorithm",
                "pagerank",
                "--workers",
                "3",
                "--seed",
                "7",
                "--vertices-per-block",
                "2",
            ])
            .arg("--metrics-out")
            .arg(out);
        cmd
    };
    let m1 = dir.path().join("m1.json");
    let m2 = dir.path().join("m2.json");
    assert!(args(&m1).output().unwrap().status.success());
    assert!(args(&m2).output().unwrap().status.success());
    let a = normalized_doc(&std::fs::read_to_string(&m1).unwrap());
    let b = normalized_doc(&std::fs::read_to_string(&m2).unwrap());
    assert_eq!(
        serde_json::to_string(&a).unwrap(),
        serde_json::to_string(&b).unwrap()
    );
}

#[test]
fn convert_then_run_binary_matches_text_run() {
    let dir = tempfile::tempdir().unwrap();
    let text = small_graph(dir.path());
    let binary = dir.path().join("small.sage");
    let out = sage()
        .args(["convert", "--input"])
        .arg(&text)
        .arg("--output")
        .arg(&binary)
        .output()
        .unwrap();
    assert!(out.status.success(), "stderr: {}", stderr_str(&out));
    assert_eq!(&std::fs::read(&binary).unwrap()[..5], b"SAGE1");

    let run_on = |path: &Path| {
        let out = sage()
            .args(["run", "--graph"])
            .arg(path)
            .args(["--algorithm", "cc", "--workers", "2", "--seed", "5"])
            .output()
            .unwrap();
        assert!(out.status.success());
        normalized_doc(&stdout_str(&out))
    };
    let from_text = run_on(&text);
    let from_binary = run_on(&binary);
    // Same run, different file paths: compare everything but the config echo.
    assert_eq!(from_text["metrics"], from_binary["metrics"]);
    assert_eq!(
        from_text["per_iteration_psd_sum"],
        from_binary["per_iteration_psd_sum"]
    );
}

#[test]
fn bench_compare_emits_valid_csv_row() {
    let dir = tempfile::tempdir().unwrap();
    let graph = small_graph(dir.path());
    let csv = dir.path().join("bench.csv");
    let out = sage()
        .args(["bench-compare", "--graph"])
        .arg(&graph)
        .args(["--algorithm", "pagerank", "--workers", "2"])
        .arg("--csv-out")
        .arg(&csv)
        .output()
        .unwrap();
    assert!(out.status.success(), "stderr: {}", stderr_str(&out));
    let stdout = stdout_str(&out);
    let mut lines = stdout.lines();
    assert!(lines.next().unwrap().starts_with("algorithm,mode_a,mode_b"));
    let row = lines.next().unwrap();
    assert!(row.starts_with("pagerank,structure-aware,static-baseline,"));
    assert!(row.ends_with(",VALID"), "{row}");
    assert!(std::fs::read_to_string(&csv).unwrap().contains(row));
}

#[test]
fn partition_stats_dumps_block_table() {
    let dir = tempfile::tempdir().unwrap();
    let graph = small_graph(dir.path());
    let out = sage()
        .args(["partition-stats", "--graph"])
        .arg(&graph)
        .args(["--vertices-per-block", "2", "--t1-override", "4.0"])
        .output()
        .unwrap();
    assert!(out.status.success(), "stderr: {}", stderr_str(&out));
    let stdout = stdout_str(&out);
    let mut lines = stdout.lines();
    assert_eq!(lines.next().unwrap(), "id,kind,vertex_count,edge_weight,psd");
    let body: Vec<&str> = lines.collect();
    assert!(!body.is_empty());
    for row in &body {
        let kind = row.split(',').nth(1).unwrap();
        assert!(["hot", "cold", "dead"].contains(&kind), "{row}");
    }
}

#[test]
fn worker_env_override_applies_only_without_flag() {
    let dir = tempfile::tempdir().unwrap();
    let graph = small_graph(dir.path());
    let out = sage()
        .env("SAGE_WORKERS", "3")
        .args(["run", "--graph"])
        .arg(&graph)
        .args(["--algorithm", "pagerank"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let doc: serde_json::Value = serde_json::from_str(&stdout_str(&out)).unwrap();
    assert_eq!(doc["config"]["workers"], 3);

    let out = sage()
        .env("SAGE_WORKERS", "3")
        .args(["run", "--graph"])
        .arg(&graph)
        .args(["--algorithm", "pagerank", "--workers", "2"])
        .output()
        .unwrap();
    let doc: serde_json::Value = serde_json::from_str(&stdout_str(&out)).unwrap();
    assert_eq!(doc["config"]["workers"], 2);
}

#[test]
fn static_baseline_mode_runs() {
    let dir = tempfile::tempdir().unwrap();
    let graph = small_graph(dir.path());
    let out = sage()
        .args(["run", "--graph"])
        .arg(&graph)
        .args([
            "--algorithm",
            "bfs",
            "--source",
            "0",
            "--mode",
            "static-baseline",
            "--workers",
            "2",
        ])
        .output()
        .unwrap();
    assert!(out.status.success(), "stderr: {}", stderr_str(&out));
    let doc: serde_json::Value = serde_json::from_str(&stdout_str(&out)).unwrap();
    assert_eq!(doc["metrics"]["mode"], "static-baseline");
}

#[test]
fn forced_barrier_with_sssp_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let graph = small_graph(dir.path());
    let out = sage()
        .args(["run", "--graph"])
        .arg(&graph)
        .args([
            "--algorithm",
            "sssp",
            "--source",
            "0",
            "--repartition",
            "barrier",
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr_str(&out).contains("monotone"), "{}", stderr_str(&out));
}

#[test]
fn unconverged_run_still_exits_0() {
    let dir = tempfile::tempdir().unwrap();
    let graph = small_graph(dir.path());
    let out = sage()
        .args(["run", "--graph"])
        .arg(&graph)
        .args([
            "--algorithm",
            "pagerank",
            "--max-iterations",
            "2",
            "--workers",
            "2",
        ])
        .output()
        .unwrap();
    assert!(out.status.success());
    assert!(stderr_str(&out).contains("unconverged"));
    let doc: serde_json::Value = serde_json::from_str(&stdout_str(&out)).unwrap();
    assert_eq!(doc["metrics"]["converged"], false);
}
