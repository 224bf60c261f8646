//! The `sparse-coint` binary end to end.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_sparse-coint"));
    cmd.env_remove("SPARSE_COINT_OUTPUT_DIR");
    cmd
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn sim_config(dir: &Path, name: &str, body: &str) -> String {
    let path = dir.join(name);
    fs::write(&path, body).unwrap();
    path.to_str().unwrap().to_string()
}

fn simulate(dir: &Path, rho: f64, seed: u64) -> String {
    let cfg = sim_config(
        dir,
        &format!("sim_{rho}_{seed}.cfg"),
        &format!("n = 500\np = 10\nrho = {rho}\nbeta_active = strong\nseed = {seed}\n"),
    );
    let out = dir.join(format!("data_{rho}_{seed}.csv"));
    let o = run(&["simulate", &cfg, "--output", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    out.to_str().unwrap().to_string()
}

#[test]
fn simulate_writes_csv_and_sidecar() {
    let dir = tempfile::tempdir().unwrap();
    let data = simulate(dir.path(), 0.0, 4);
    let text = fs::read_to_string(&data).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 501);
    assert!(lines.iter().all(|l| l.split(',').count() == 11));
    let meta = fs::read_to_string(format!("{data}.meta")).unwrap();
    assert!(meta.contains("true_active = 1, 2, 3, 4, 5"));
}

#[test]
fn simulate_is_byte_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = sim_config(dir.path(), "s.cfg", "n = 200\np = 20\nrho = 0.5\nbeta_active = weak\nseed = 9\n");
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for out in [&a, &b] {
        assert_eq!(run(&["simulate", &cfg, "--output", out.to_str().unwrap()]).status.code(), Some(0));
    }
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
}

#[test]
fn simulate_uses_output_dir_env() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = sim_config(dir.path(), "s.cfg", "n = 50\np = 6\nrho = 0\nbeta_active = 1, 1\n");
    let target = dir.path().join("env_out");
    let o = bin()
        .args(["simulate", &cfg])
        .env("SPARSE_COINT_OUTPUT_DIR", &target)
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0));
    assert!(target.join("dataset.csv").exists());
}

#[test]
fn invalid_rho_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = sim_config(dir.path(), "bad.cfg", "n = 500\np = 10\nrho = 1.5\nbeta_active = strong\n");
    let o = run(&["simulate", &cfg, "--output", dir.path().join("x.csv").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("`rho`"));
}

#[test]
fn detect_reports_cointegration() {
    let dir = tempfile::tempdir().unwrap();
    let data = simulate(dir.path(), 0.0, 4);
    let o = run(&["detect", &data, "--timings"]);
    assert_eq!(o.status.code(), Some(0));
    let record: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(record["verdict"], "Cointegrated");
    let selected: Vec<u64> = record["selected_covariates"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_u64().unwrap())
        .collect();
    assert!((1..=5).all(|j| selected.contains(&j)), "{selected:?}");
    assert!(record["timings_seconds"]["lambda_selection"].is_number());
}

#[test]
fn detect_options_are_applied() {
    let dir = tempfile::tempdir().unwrap();
    let data = simulate(dir.path(), 0.0, 5);
    let o = run(&[
        "detect", &data, "--gamma", "2", "--grid-scale", "2", "--residual-mode", "direct", "--kmax", "4",
        "--penalty", "sqrt",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let record: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(record["residual_mode"], "direct");
    assert_eq!(record["fit"]["gamma"], 2.0);
    assert!(record["ic"]["k_hat"].as_u64().unwrap() <= 4);
}

#[test]
fn detect_flags_spurious_regressions_in_most_seeds() {
    let dir = tempfile::tempdir().unwrap();
    let spurious = (0..50)
        .filter(|&seed| {
            let data = simulate(dir.path(), 1.0, 100 + seed);
            run(&["detect", &data]).status.code() == Some(3)
        })
        .count();
    assert!(spurious > 25, "exit 3 in {spurious} of 50 seeds");
}

#[test]
fn malformed_csv_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.csv");
    fs::write(&path, "y,x1,x2\n1,2,3\n4,five,6\n").unwrap();
    let o = run(&["detect", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("line 3, column 2"), "{err}");
}

#[test]
fn unknown_flag_is_rejected() {
    let o = run(&["montecarlo", "grid.cfg", "--fast"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn montecarlo_one_cell_creates_output_dir() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = sim_config(
        dir.path(),
        "grid.cfg",
        "# one cell\nn_values = 200\np_values = 10\nrho_values = 0\ngamma_values = 1\npresets = strong\nreplications = 5\n",
    );
    let out = dir.path().join("nested/results");
    let o = run(&["montecarlo", &cfg, "--output", out.to_str().unwrap(), "--jobs", "2"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(String::from_utf8_lossy(&o.stderr).contains("[1/1]"));
    let table = fs::read_to_string(out.join("table1_strong.csv")).unwrap();
    assert_eq!(table.lines().count(), 2);
    for f in ["table3_coefficients.csv", "table4_detection.csv", "manifest.txt", "timings.csv"] {
        assert!(out.join(f).exists(), "{f}");
    }
    let manifest = fs::read_to_string(out.join("manifest.txt")).unwrap();
    assert!(manifest.contains("replications = 5") && manifest.contains("version = "));
}

#[test]
fn montecarlo_rejects_bad_grid() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = sim_config(dir.path(), "grid.cfg", "n_values = 200\nreplications = 0\n");
    let o = run(&["montecarlo", &cfg, "--output", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("replications"));
}
