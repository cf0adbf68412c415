use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn mhessian(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mhessian")).args(args).output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn read_json(p: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(p).unwrap()).unwrap()
}

#[test]
fn trace_identity_and_diagonal() {
    let o = mhessian(&["trace", "[[1,0,0],[0,1,0],[0,0,1]]"]);
    assert_eq!(code(&o), 0);
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["traces"], serde_json::json!([1.0, 3.0, 3.0, 1.0]));
    assert_eq!(v["cone"]["member"], Value::Bool(true));

    let o = mhessian(&["trace", "[[1,0,0],[0,2,0],[0,0,3]]", "--m", "2"]);
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!((v["traces"][2].as_f64().unwrap() - 11.0).abs() < 1e-12);
}

#[test]
fn trace_rejects_bad_input() {
    assert_eq!(code(&mhessian(&["trace", "[[1,0"])), 2);
    assert_eq!(code(&mhessian(&["trace", "[[1,0],[0]]"])), 2);
    assert_eq!(code(&mhessian(&["trace", r#"[[1,"a"],["a",1]]"#])), 2);
    assert_eq!(code(&mhessian(&["trace", "[[1,0],[0,1]]", "--m", "3"])), 2);
}

#[test]
fn solve_ball_writes_summary() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = mhessian(&["solve", "--domain", "ball", "--n", "3", "--m", "2", "--l", "0", "--out", out]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let s = read_json(&dir.path().join("summary.json"));
    assert!(s["residual_inf"].as_f64().unwrap() <= 1e-9);
    assert_eq!(s["hessian_integrals"].as_array().unwrap().len(), 3);
    assert_eq!(s["admissibility"]["admissible"], Value::Bool(true));
    let csv = fs::read_to_string(dir.path().join("solution.csv")).unwrap();
    assert!(csv.starts_with("r,w\n"));
    let plot = mhessian(&["plotdata", dir.path().join("solution.json").to_str().unwrap()]);
    assert_eq!(code(&plot), 0);
    assert_eq!(String::from_utf8(plot.stdout).unwrap(), csv);
}

#[test]
fn solve_disc_quotient_recovers_quadratic() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = mhessian(&["solve", "--domain", "disc", "--m", "2", "--l", "1", "--grid", "32", "--out", out]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let s = read_json(&dir.path().join("summary.json"));
    assert!((s["quadratic_coefficient"].as_f64().unwrap() - 2.0).abs() < 1e-6);
    let plot = mhessian(&["plotdata", dir.path().join("solution.json").to_str().unwrap()]);
    let text = String::from_utf8(plot.stdout).unwrap();
    assert!(text.starts_with("r,theta,value\n"));
    assert_eq!(text.lines().count(), 1 + 1 + 32 * 32);
}

#[test]
fn solve_rejects_bad_orders() {
    assert_eq!(code(&mhessian(&["solve", "--domain", "ball", "--n", "2", "--m", "3"])), 2);
    assert_eq!(code(&mhessian(&["solve", "--domain", "disc", "--m", "2", "--l", "2"])), 2);
    assert_eq!(code(&mhessian(&["solve", "--domain", "square"])), 2);
    assert_eq!(code(&mhessian(&["solve", "--tol", "-1"])), 2);
}

#[test]
fn verify_maclaurin_passes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = mhessian(&["verify", "maclaurin", "--samples", "10000", "--seed", "7", "--out", out]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let csv = fs::read_to_string(dir.path().join("reports.csv")).unwrap();
    assert!(csv.starts_with("name,m,l,lhs,rhs,margin,verdict\n"));
    assert!(!csv.contains(",fail"));
    let plot = mhessian(&["plotdata", dir.path().join("reports.json").to_str().unwrap()]);
    assert!(String::from_utf8(plot.stdout).unwrap().starts_with("index,name,m,l,margin,tolerance\n"));
}

#[test]
fn verify_single_check_with_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    let out = dir.path().join("out");
    fs::write(
        &cfg,
        format!(
            r#"{{"schema_version": 1, "domain": "ball", "n": 3, "grid": "64", "samples": 5, "seed": 2, "out": {:?}}}"#,
            out.to_str().unwrap()
        ),
    )
    .unwrap();
    let o = mhessian(&["verify", "anpo", "--config", cfg.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let r = read_json(&out.join("reports.json"));
    let reports = r["reports"].as_array().unwrap();
    assert_eq!(reports.len(), 5 * 6);
    assert!(reports.iter().all(|x| x["name"] == "anpo" && x["verdict"] == "pass"));
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(code(&mhessian(&["verify", "nope"])), 2);
    assert_eq!(code(&mhessian(&["plotdata", "/nonexistent/file.json"])), 2);
    assert_eq!(code(&mhessian(&["bogus"])), 2);
    assert_eq!(code(&mhessian(&["verify", "all", "--config", "/nonexistent.json"])), 2);
}
