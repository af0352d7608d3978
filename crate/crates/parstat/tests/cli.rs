//! End-to-end runs of the `parstat` binary.

use std::path::Path;
use std::process::{Command, Output};

use parstat::RunReport;

fn parstat(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_parstat"))
        .args(args)
        .env_remove("PARSTAT_WORKERS")
        .output()
        .expect("binary runs")
}

fn report(out: &Output) -> RunReport {
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("report parses")
}

fn gen(dir: &Path, extra: &[&str]) -> String {
    let dir_s = dir.display().to_string();
    let mut args = vec!["gen", "--out", &dir_s];
    args.extend_from_slice(extra);
    let out = parstat(&args);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    dir.join("*.csv").display().to_string()
}

fn estimates(r: &RunReport) -> Vec<f64> {
    r.rows.iter().map(|row| row["estimate"].as_f64().unwrap()).collect()
}

#[test]
fn gen_writes_one_file_per_shard() {
    let tmp = tempfile::tempdir().unwrap();
    let out = parstat(&["gen", "--n", "1000", "--dist", "uniform", "--shards", "4", "--out", &tmp.path().display().to_string()]);
    assert!(out.status.success());
    let manifest: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let files = manifest["files"].as_array().unwrap();
    assert_eq!(files.len(), 4);
    for f in files {
        assert_eq!(f["rows"], 250);
        let text = std::fs::read_to_string(f["path"].as_str().unwrap()).unwrap();
        assert_eq!(text.lines().count(), 251);
    }
}

#[test]
fn gen_is_byte_identical_across_runs() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    for dir in [&a, &b] {
        gen(dir.path(), &["--n", "500", "--dist", "normal", "--seed", "9", "--shards", "3"]);
    }
    for name in ["part-00000.csv", "part-00001.csv", "part-00002.csv"] {
        assert_eq!(std::fs::read(a.path().join(name)).unwrap(), std::fs::read(b.path().join(name)).unwrap());
    }
}

#[test]
fn usage_errors_exit_2() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path().display().to_string();
    assert_eq!(parstat(&["gen", "--n", "0", "--out", &dir]).status.code(), Some(2));
    let input = gen(tmp.path(), &["--n", "100"]);
    assert_eq!(parstat(&["quantile", "--input", &input, "--p", "1.5"]).status.code(), Some(2));
    assert_eq!(parstat(&["quantile", "--input", &input, "--p", "0"]).status.code(), Some(2));
}

#[test]
fn missing_input_exits_3() {
    let tmp = tempfile::tempdir().unwrap();
    let pattern = tmp.path().join("none-*.csv").display().to_string();
    let out = parstat(&["quantile", "--input", &pattern, "--p", "0.5"]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn exact_method_on_small_file() {
    let tmp = tempfile::tempdir().unwrap();
    let path = tmp.path().join("x.csv");
    std::fs::write(&path, "value\n1\n2\n3\n4\n").unwrap();
    let r = report(&parstat(&["quantile", "--input", &path.display().to_string(), "--p", "0.5", "--method", "exact", "--column", "value"]));
    assert_eq!(estimates(&r), vec![2.0]);
}

#[test]
fn fourier_and_binning_on_uniform_fixture() {
    let tmp = tempfile::tempdir().unwrap();
    let input = gen(tmp.path(), &["--n", "100000", "--shards", "8"]);
    let fourier = report(&parstat(&["quantile", "--input", &input, "--p", "0.5", "--j", "256", "--method", "fourier"]));
    assert!((estimates(&fourier)[0] - 0.5).abs() <= 2e-3);
    assert!(fourier.rows[0]["derivative_residual"].as_f64().is_some());
    let binning = report(&parstat(&["quantile", "--input", &input, "--p", "0.5", "--method", "binning", "--bins", "1000"]));
    assert!((estimates(&binning)[0] - 0.5).abs() <= 1e-3);
    assert!(binning.rows[0]["bin"].as_u64().is_some());
}

#[test]
fn reports_round_trip_exactly() {
    let tmp = tempfile::tempdir().unwrap();
    let input = gen(tmp.path(), &["--n", "3000", "--dist", "normal"]);
    let out_path = tmp.path().join("report.json");
    let out = parstat(&["quantile", "--input", &input, "--p", "0.1,0.37,0.9", "--j", "64", "--out", &out_path.display().to_string()]);
    assert!(out.status.success());
    let text = std::fs::read_to_string(&out_path).unwrap();
    let parsed: RunReport = serde_json::from_str(&text).unwrap();
    assert_eq!(serde_json::from_str::<RunReport>(&parsed.to_json()).unwrap(), parsed);
}

#[test]
fn workers_do_not_change_results() {
    let tmp = tempfile::tempdir().unwrap();
    let input = gen(tmp.path(), &["--n", "20000", "--shards", "5"]);
    let run = |w: &str| report(&parstat(&["quantile", "--input", &input, "--p", "0.2,0.5,0.8", "--j", "128", "--workers", w])).without_timings();
    assert_eq!(run("1"), run("4"));
    let env = Command::new(env!("CARGO_BIN_EXE_parstat"))
        .args(["quantile", "--input", &input, "--p", "0.2,0.5,0.8", "--j", "128"])
        .env("PARSTAT_WORKERS", "3")
        .output()
        .unwrap();
    assert_eq!(report(&env).without_timings(), run("1"));
}

#[test]
fn lowess_linear_fixture() {
    let tmp = tempfile::tempdir().unwrap();
    let input = gen(tmp.path(), &["--n", "10000", "--shards", "4", "--mu", "linear"]);
    let base = ["lowess", "--input", &input, "--alpha", "0.3", "--degree", "1", "--j", "256", "--eval-grid", "9"];
    let fourier = report(&parstat(&base));
    let mut exact_args = base.to_vec();
    exact_args.push("--exact-h");
    let exact = report(&parstat(&exact_args));
    assert_eq!(fourier.rows.len(), 9);
    for (f, e) in fourier.rows.iter().zip(&exact.rows) {
        let x = f["x"].as_f64().unwrap();
        let (mf, me) = (f["mu_hat"].as_f64().unwrap(), e["mu_hat"].as_f64().unwrap());
        assert!((mf - 2.0 * x).abs() <= 1e-6);
        assert!((mf - me).abs() < 1e-3);
        assert!(f["root_count"].as_u64().unwrap() >= 1);
        assert_eq!(f["beta"].as_array().unwrap().len(), 2);
    }
}

#[test]
fn lowess_tiny_alpha_fails_every_point() {
    let tmp = tempfile::tempdir().unwrap();
    let input = gen(tmp.path(), &["--n", "100", "--mu", "sine"]);
    let out = parstat(&["lowess", "--input", &input, "--alpha", "0.00001", "--degree", "2", "--j", "64", "--eval", "0.3,0.5", "--exact-h"]);
    assert_eq!(out.status.code(), Some(4));
    let r: RunReport = serde_json::from_slice(&out.stdout).unwrap();
    for row in &r.rows {
        assert!(row["error"].as_str().unwrap().contains("degenerate"));
    }
}

#[test]
fn bench_shape_and_tables() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path().join("bench");
    let out = parstat(&[
        "bench", "--n", "5000", "--p-grid", "19", "--j", "64", "--bins", "50", "--workers", "1,2", "--shards", "4",
        "--out", &dir.display().to_string(),
    ]);
    let r = report(&out);
    assert_eq!(r.rows.len(), 2);
    let errors = std::fs::read_to_string(dir.join("errors.csv")).unwrap();
    assert!(errors.starts_with("workers,method,param,p,estimate,exact,abs_error"));
    // 2 worker counts x (fourier + binning) x 19 probabilities
    assert_eq!(errors.lines().count(), 1 + 2 * 2 * 19);
    let cols = |w: &str| -> Vec<String> {
        errors
            .lines()
            .skip(1)
            .filter(|l| l.starts_with(&format!("{w},")))
            .map(|l| l.split_once(',').unwrap().1.to_owned())
            .collect()
    };
    assert_eq!(cols("1"), cols("2"));
    assert!(dir.join("success.csv").exists() && dir.join("timings.csv").exists());
}
