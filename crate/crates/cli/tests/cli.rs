//! End-to-end runs of the `laxforge` binary.

use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn laxforge(out: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_laxforge"))
        .args(args)
        .arg("--out")
        .arg(out)
        .env_remove("LAXFORGE_THREADS")
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn report(dir: &Path, stem: &str) -> Value {
    let text = std::fs::read_to_string(dir.join(format!("{stem}.json"))).expect("report written");
    serde_json::from_str(&text).expect("report is json")
}

fn check_names(v: &Value) -> Vec<String> {
    v["checks"].as_array().unwrap().iter().map(|c| c["name"].as_str().unwrap().to_string()).collect()
}

#[test]
fn ybe_on_builtin_passes() {
    let dir = tempfile::tempdir().unwrap();
    let o = laxforge(dir.path(), &["verify", "ybe", "--model", "yangian-gl2", "--samples", "5"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let r = report(dir.path(), "verify-ybe-seed1");
    assert_eq!(r["passed"], Value::Bool(true));
    assert_eq!(r["checks"].as_array().unwrap().len(), 15);
    assert!(dir.path().join("verify-ybe-seed1.csv").exists());
}

#[test]
fn corrupted_model_fails_the_check() {
    let dir = tempfile::tempdir().unwrap();
    // the last diagonal entry of the rational R-matrix is changed
    let model = r#"{"name":"corrupt","site_dim":2,"difference_form":true,"entries":[
        ["1","0","0","0"],
        ["0","(u-v)/(u-v-1)","-1/(u-v-1)","0"],
        ["0","-1/(u-v-1)","(u-v)/(u-v-1)","0"],
        ["0","0","0","(u-v+2)/(u-v-1)"]]}"#;
    let path = dir.path().join("corrupt.json");
    std::fs::write(&path, model).unwrap();
    let o = laxforge(dir.path(), &["verify", "ybe", "--model", path.to_str().unwrap()]);
    assert_eq!(code(&o), 2);
    assert_eq!(report(dir.path(), "verify-ybe-seed1")["passed"], Value::Bool(false));
}

#[test]
fn custom_model_file_matching_builtin_passes() {
    let dir = tempfile::tempdir().unwrap();
    let model = r#"{"name":"xxx","site_dim":2,"difference_form":true,"entries":[
        ["1","0","0","0"],
        ["0","(u-v)/(u-v-1)","-1/(u-v-1)","0"],
        ["0","-1/(u-v-1)","(u-v)/(u-v-1)","0"],
        ["0","0","0","1"]]}"#;
    let path = dir.path().join("xxx.json");
    std::fs::write(&path, model).unwrap();
    let o = laxforge(dir.path(), &["verify", "ybe", "--model", path.to_str().unwrap(), "--samples", "2"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn configuration_errors_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    assert_eq!(code(&laxforge(p, &["charges", "--L", "2", "--k-max", "4"])), 1);
    assert_eq!(code(&laxforge(p, &["charges", "--L", "6", "--family", "boost3", "--order", "2"])), 1);
    assert_eq!(code(&laxforge(p, &["charges", "--L", "3", "--family", "boost3"])), 1);
    assert_eq!(code(&laxforge(p, &["verify", "ybe", "--model", "missing.json"])), 1);
    assert_eq!(code(&laxforge(p, &["verify", "twist", "--family", "boost2"])), 1);
    assert_eq!(code(&laxforge(p, &["verify", "nonsense"])), 1);
    assert_eq!(code(&laxforge(p, &["magnon", "--L", "4", "--N", "3"])), 1);
    assert_eq!(code(&laxforge(p, &["magnon", "--L", "4", "--N", "1", "--u", "x"])), 1);
    assert_eq!(code(&laxforge(p, &["magnon", "--L", "4", "--N", "1", "--model", "yangian-gl3"])), 1);
    let o = Command::new(env!("CARGO_BIN_EXE_laxforge"))
        .args(["verify", "ybe", "--out"])
        .arg(p)
        .env("LAXFORGE_THREADS", "0")
        .output()
        .unwrap();
    assert_eq!(code(&o), 1);
}

#[test]
fn help_exits_zero() {
    let o = Command::new(env!("CARGO_BIN_EXE_laxforge")).arg("--help").output().unwrap();
    assert_eq!(code(&o), 0);
    assert!(String::from_utf8_lossy(&o.stdout).contains("verify"));
}

#[test]
fn twist_boost3_passes_rll_and_ybe() {
    let dir = tempfile::tempdir().unwrap();
    let o = laxforge(dir.path(), &["verify", "twist", "--family", "boost", "--k", "3"]);
    assert_eq!(code(&o), 0);
    let names = check_names(&report(dir.path(), "verify-twist-seed1"));
    assert!(names.iter().any(|n| n.contains("RLL")));
    assert!(names.iter().any(|n| n.contains("YBE")));
}

#[test]
fn undeformed_charge_table() {
    let dir = tempfile::tempdir().unwrap();
    let o = laxforge(dir.path(), &["charges", "--L", "4", "--k-max", "3"]);
    assert_eq!(code(&o), 0);
    let csv = std::fs::read_to_string(dir.path().join("charges-L4-seed1.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "k,L,order,operator_hash,commutation");
    assert_eq!(lines.len(), 3);
    assert!(lines[1].starts_with("2,4,0,") && lines[1].ends_with(",true"));
    let r = report(dir.path(), "charges-L4-seed1");
    assert!(check_names(&r).iter().any(|n| n.contains("[Q2, Q3]")));
    assert!(r["data"]["operators"]["Q3"]["entries"].is_array());
}

#[test]
fn boost3_charges_include_two_loop_verdict() {
    let dir = tempfile::tempdir().unwrap();
    let o = laxforge(dir.path(), &["charges", "--family", "boost3", "--L", "6"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stdout));
    let r = report(dir.path(), "charges-L6-boost3-seed1");
    let c = r["checks"].as_array().unwrap().iter().find(|c| c["name"].as_str().unwrap().contains("two-loop")).unwrap();
    assert_eq!(c["passed"], Value::Bool(true));
}

#[test]
fn magnon_runs() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    assert_eq!(code(&laxforge(p, &["magnon", "--L", "4", "--N", "0"])), 0);
    assert_eq!(code(&laxforge(p, &["magnon", "--L", "4", "--N", "1"])), 0);
    let r = report(p, "magnon-L4-N1-seed1");
    assert!(r["data"]["residual_order1"].as_f64().unwrap() < 1e-12);
    assert_eq!(r["data"]["roots"].as_array().unwrap().len(), 1);
    assert_eq!(code(&laxforge(p, &["magnon", "--L", "5", "--N", "2", "--u", "-2/5", "--precision", "40"])), 0);
    let r = report(p, "magnon-L5-N2-seed1");
    assert_eq!(r["data"]["N"], 2);
    assert!(r["data"]["fitted_g"].is_string());
}

#[test]
fn reports_are_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["verify", "lemmas", "--k", "3", "--seed", "9"];
    assert_eq!(code(&laxforge(&dir.path().join("a"), &args)), 0);
    assert_eq!(code(&laxforge(&dir.path().join("b"), &args)), 0);
    for ext in ["json", "csv"] {
        let a = std::fs::read(dir.path().join("a").join(format!("verify-lemmas-seed9.{ext}"))).unwrap();
        let b = std::fs::read(dir.path().join("b").join(format!("verify-lemmas-seed9.{ext}"))).unwrap();
        assert_eq!(a, b);
    }
    assert_eq!(code(&laxforge(&dir.path().join("c"), &["verify", "lemmas", "--k", "3", "--seed", "10"])), 0);
    let a = std::fs::read(dir.path().join("a/verify-lemmas-seed9.json")).unwrap();
    let c = std::fs::read(dir.path().join("c/verify-lemmas-seed10.json")).unwrap();
    assert_ne!(a, c);
}

#[test]
fn every_suite_passes_on_the_builtin_model() {
    let dir = tempfile::tempdir().unwrap();
    for suite in ["ybe", "sutherland", "coproduct", "lemmas", "conjecture", "twist", "associator"] {
        let o = laxforge(dir.path(), &["verify", suite, "--samples", "2"]);
        assert_eq!(code(&o), 0, "{suite}: {}", String::from_utf8_lossy(&o.stdout));
    }
}
