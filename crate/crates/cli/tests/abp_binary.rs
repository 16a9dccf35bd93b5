use std::path::Path;
use std::process::{Command, Output};

fn abp(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_abp")).args(args).output().unwrap()
}

fn write_config(dir: &Path, body: &str) -> String {
    let path = dir.join("run.json");
    std::fs::write(&path, body).unwrap();
    path.to_str().unwrap().to_string()
}

fn csv_rows(path: &Path) -> Vec<Vec<String>> {
    let mut reader = csv::Reader::from_path(path).unwrap();
    reader
        .records()
        .map(|r| r.unwrap().iter().map(String::from).collect())
        .collect()
}

#[test]
fn config_errors_exit_with_one() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), r#"{"benchmark":"NOPE"}"#);
    let out = abp(&["solve", "--config", &cfg]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("unknown benchmark"));

    let cfg = write_config(tmp.path(), r#"{"benchmark":"ZDT1","solver":{"nu":0.3}}"#);
    let out = abp(&["solve", "--config", &cfg]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("solver.nu"));

    assert_eq!(abp(&["solve"]).status.code(), Some(1));
    assert_eq!(abp(&["--help"]).status.code(), Some(0));
}

#[test]
fn single_ray_solve_writes_single_rows() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), r#"{"benchmark":"CVX1","rays":1}"#);
    let out_dir = tmp.path().join("out");
    let out = abp(&["solve", "--config", &cfg, "--out", out_dir.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));

    let header = csv::Reader::from_path(out_dir.join("solutions.csv"))
        .unwrap()
        .headers()
        .unwrap()
        .clone();
    assert_eq!(
        header.iter().collect::<Vec<_>>(),
        ["ray_index", "r1", "r2", "x1", "y1", "y2", "in_Q", "in_Qplus", "phi", "G"]
    );
    let rows = csv_rows(&out_dir.join("solutions.csv"));
    assert_eq!(rows.len(), 1);
    assert_eq!(rows[0][1], "5.0000000000000000e-1");
    assert_eq!(csv_rows(&out_dir.join("ground_truth.csv")).len(), 1);

    let metrics: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out_dir.join("metrics.json")).unwrap()).unwrap();
    assert_eq!(metrics["rays"], 1);
    assert_eq!(metrics["metrics"]["med_pairs"], 1);
    assert!(metrics.get("wall_clock_ms").is_none());
    assert!(!out_dir.join("trace.jsonl").exists());
}

#[test]
fn default_cvx1_solve_meets_the_error_bound() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), r#"{"benchmark":"CVX1"}"#);
    let out_dir = tmp.path().join("out");
    let out = abp(&["solve", "--config", &cfg, "--out", out_dir.to_str().unwrap(), "--trace", "--timing"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(csv_rows(&out_dir.join("solutions.csv")).len(), 50);

    let metrics: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out_dir.join("metrics.json")).unwrap()).unwrap();
    assert!(metrics["metrics"]["med"].as_f64().unwrap() <= 0.01);
    assert!(metrics["wall_clock_ms"].is_u64());
    assert_eq!(metrics["failures"].as_array().unwrap().len(), 0);

    // Median merit across rays at each recorded iteration; over the last
    // 10% of iterations the later half must not sit above the earlier half.
    let mut by_k: std::collections::BTreeMap<u64, Vec<f64>> = Default::default();
    for line in std::fs::read_to_string(out_dir.join("trace.jsonl")).unwrap().lines() {
        let v: serde_json::Value = serde_json::from_str(line).unwrap();
        by_k.entry(v["k"].as_u64().unwrap()).or_default().push(v["phi"].as_f64().unwrap());
    }
    let median = |v: &mut Vec<f64>| {
        v.sort_by(f64::total_cmp);
        v[v.len() / 2]
    };
    let column: Vec<f64> = by_k.values_mut().map(median).collect();
    let tail = &column[column.len() * 9 / 10..];
    let (early, late) = tail.split_at(tail.len() / 2);
    assert!(median(&mut late.to_vec()) <= median(&mut early.to_vec()));
}

#[test]
fn metrics_command_reproduces_solve_metrics() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), r#"{"benchmark":"CVX2","rays":8,"solver":{"max_iters":4000}}"#);
    let out_dir = tmp.path().join("out");
    let dir = out_dir.to_str().unwrap();
    assert!(abp(&["solve", "--config", &cfg, "--out", dir]).status.success());
    assert!(abp(&["metrics", "--config", &cfg, "--out", dir]).status.success());
    let solve: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out_dir.join("metrics.json")).unwrap()).unwrap();
    let again: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out_dir.join("metrics_recomputed.json")).unwrap()).unwrap();
    assert_eq!(solve["metrics"], again);
}

#[test]
fn sweep_and_gap_commands_write_their_tables() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        r#"{"benchmark":"CVX2","rays":10,"ray_counts":[3],"solver":{"max_iters":2000}}"#,
    );
    let out_dir = tmp.path().join("out");
    let dir = out_dir.to_str().unwrap();
    assert!(abp(&["sweep-rays", "--config", &cfg, "--out", dir, "--threads", "1"]).status.success());
    let rows = csv_rows(&out_dir.join("sweep.csv"));
    assert_eq!(rows.len(), 1);
    assert_eq!(rows[0][0], "3");

    assert!(abp(&["verify-gap", "--config", &cfg, "--out", dir]).status.success());
    let gap: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out_dir.join("gap.json")).unwrap()).unwrap();
    assert_eq!(gap["rays"].as_array().unwrap().len(), 10);

    assert!(abp(&["ground-truth", "--config", &cfg, "--out", dir]).status.success());
    assert_eq!(csv_rows(&out_dir.join("ground_truth.csv")).len(), 10);
}
