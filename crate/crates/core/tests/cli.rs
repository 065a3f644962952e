use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use twisted_passage::io::load_trajectory_csv;

fn run(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_twisted-passage"))
        .args(args)
        .current_dir(dir)
        .env_remove("TWISTED_PASSAGE_WORKERS")
        .output()
        .unwrap()
}

fn stdout_json(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&out.stdout)))
}

#[test]
fn simulate_writes_trajectory_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(dir.path(), &["simulate", "--lambda", "5", "--eta", "-4.6e-4", "--n", "4", "--out", "traj.csv"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let summary = stdout_json(&out);
    assert!((summary["p_asymptotic"].as_f64().unwrap() - 0.533).abs() < 5e-3);
    assert_eq!(summary["crossings"], serde_json::json!([0.0]));

    let sidecar: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("traj.summary.json")).unwrap()).unwrap();
    assert_eq!(sidecar, summary);
    let samples = load_trajectory_csv(&dir.path().join("traj.csv")).unwrap();
    assert_eq!(samples.first().unwrap().tau, -40.0);
    assert_eq!(samples.last().unwrap().tau, 40.0);

    // identical inputs give byte-identical files, and plotting reads them back
    let again = run(dir.path(), &["simulate", "--lambda", "5", "--eta", "-4.6e-4", "--n", "4", "--out", "again.csv"]);
    assert!(again.status.success());
    assert_eq!(fs::read(dir.path().join("traj.csv")).unwrap(), fs::read(dir.path().join("again.csv")).unwrap());
    let plot = run(dir.path(), &["plot", "--input", "traj.csv", "--out", "traj.svg", "--title", "quartic"]);
    assert!(plot.status.success());
    assert!(fs::read_to_string(dir.path().join("traj.svg")).unwrap().starts_with("<svg"));
}

#[test]
fn config_file_with_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("run.toml"), "[pulse]\nlambda = 5.0\neta = 0.05\nn = 3\n").unwrap();
    let out = run(dir.path(), &["--config", "run.toml", "simulate", "--eta", "0.02"]);
    assert!(out.status.success());
    let p = stdout_json(&out)["p_asymptotic"].as_f64().unwrap();
    assert!((p - 0.997).abs() < 3e-3, "{p}");

    fs::write(dir.path().join("bad.toml"), "[pulse]\nlambda = = 5\n").unwrap();
    let out = run(dir.path(), &["--config", "bad.toml", "simulate"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 2, column 10"));
}

#[test]
fn sweep_with_quadratic_reference() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(dir.path(), &["sweep", "--lambda", "10", "--n", "2", "--eta", "-0.5,0,2.5", "--oracle", "quadratic", "-o", "t.csv"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8_lossy(&out.stderr).contains("max |P - P_exact|"));
    let table = fs::read_to_string(dir.path().join("t.csv")).unwrap();
    let mut lines = table.lines();
    let header = lines.next().unwrap();
    assert!(header.starts_with("eta,P,fidelity,fault_tolerant,n_crossings,crossing_locations"));
    assert!(header.ends_with("P_exact,deviation,error"));
    assert_eq!(table.lines().count(), 4);

    let empty = run(dir.path(), &["sweep", "--lambda", "5", "--n", "3", "--eta-range", "0", "1", "0"]);
    assert_eq!(empty.status.code(), Some(1));
    let cubic = run(dir.path(), &["sweep", "--lambda", "5", "--n", "3", "--eta", "0.02", "--oracle", "quadratic"]);
    assert_eq!(cubic.status.code(), Some(1));
}

#[test]
fn failed_rows_are_numerical_failures() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(dir.path(), &["sweep", "--lambda", "10", "--n", "2", "--eta", "0,1", "--format", "json"]);
    assert_eq!(out.status.code(), Some(2));
    let rows = stdout_json(&out)["rows"].as_array().unwrap().clone();
    assert!(rows[0]["probability"].is_f64());
    assert!(rows[1]["error"].as_str().unwrap().contains("window"));
}

#[test]
fn quench_search() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(dir.path(), &["--workers", "2", "quench", "--lambda", "5", "--n", "4", "--bracket", "3.9e-3", "4.1e-3"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let r = stdout_json(&out);
    assert!((r["eta_star"].as_f64().unwrap() - 4.0e-3).abs() < 5e-5);
    assert!(r["p_star"].as_f64().unwrap() <= 1e-4);
    assert_eq!(r["fault_tolerant"], true);

    let monotone = run(dir.path(), &["quench", "--lambda", "3", "--n", "2", "--bracket", "-1", "-0.5"]);
    assert_eq!(monotone.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&monotone.stderr).contains("no interior minimum"));
}

#[test]
fn conversions() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(
        dir.path(),
        &["convert", "--to-experiment", "--lambda", "5", "--eta", "4.0e-3", "--n", "4", "--omega1", "4000", "--f", "0.1"],
    );
    assert!(out.status.success());
    let r = stdout_json(&out);
    assert_eq!(r["T"], 2e-3);
    assert_eq!(r["A"], 4e4);

    let out = run(dir.path(), &["convert", "--to-dimensionless", "--A", "4e4", "--omega1", "4000", "--T", "2e-3"]);
    assert!(out.status.success());
    assert_eq!(stdout_json(&out)["lambda"], 5.0);

    let out = run(
        dir.path(),
        &["convert", "--round-trip", "--lambda", "0.5", "--eta", "-6.45e-3", "--n", "4", "--omega1", "4000", "--f", "0.05"],
    );
    assert!(out.status.success());

    let narrow = run(dir.path(), &["convert", "--to-experiment", "--lambda", "5", "--n", "3", "--omega1", "4000", "--f", "0.3"]);
    assert_eq!(narrow.status.code(), Some(1));
}

#[test]
fn levels_and_usage_errors() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(dir.path(), &["levels", "--omega-c", "500", "--omega-t", "100", "--J", "10"]);
    assert!(out.status.success());
    let r = stdout_json(&out);
    assert_eq!(r["omega_plus"], 100.0 + std::f64::consts::PI * 10.0);

    let bad = run(dir.path(), &["levels", "--omega-c", "50", "--omega-t", "100", "--J", "10"]);
    assert_eq!(bad.status.code(), Some(1));
    assert_eq!(run(dir.path(), &["simulate"]).status.code(), Some(1));
    assert_eq!(run(dir.path(), &["frobnicate"]).status.code(), Some(1));
    assert_eq!(run(dir.path(), &["--help"]).status.code(), Some(0));
    assert_eq!(run(dir.path(), &["--version"]).status.code(), Some(0));

    let empty = dir.path().join("empty.csv");
    fs::write(&empty, "tau,re_S,im_S,re_I,im_I,P\n").unwrap();
    let plot = run(dir.path(), &["plot", "--input", "empty.csv", "--out", "x.svg"]);
    assert_eq!(plot.status.code(), Some(1));
}

#[test]
fn validate_reports_every_check() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(dir.path(), &["validate", "--out", "report.json"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stdout));
    let text = String::from_utf8_lossy(&out.stdout);
    assert_eq!(text.lines().filter(|l| l.starts_with("PASS")).count(), 8);
    let report: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join("report.json")).unwrap()).unwrap();
    assert_eq!(report["strict"], false);

    let strict = run(dir.path(), &["validate", "--strict"]);
    assert!(String::from_utf8_lossy(&strict.stdout).contains("margin"));
    assert!(matches!(strict.status.code(), Some(0 | 2)));
}
