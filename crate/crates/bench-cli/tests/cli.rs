use std::path::PathBuf;
use std::process::{Command, Output};

fn dcolor(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dcolor")).args(args).output().expect("run dcolor")
}

fn scratch(name: &str) -> PathBuf {
    let d = std::env::temp_dir().join(format!("dcolor-cli-{name}-{}", std::process::id()));
    let _ = std::fs::remove_dir_all(&d);
    d
}

#[test]
fn gen_is_deterministic() {
    let a = dcolor(&["gen", "--gen", "gnp:n=10,p=0.5", "--seed", "1"]);
    let b = dcolor(&["gen", "--gen", "gnp:n=10,p=0.5", "--seed", "1"]);
    assert!(a.status.success());
    assert!(!a.stdout.is_empty());
    assert_eq!(a.stdout, b.stdout);
    let c = dcolor(&["gen", "--gen", "gnp:n=10,p=0.5", "--seed", "2"]);
    assert_ne!(a.stdout, c.stdout);
}

#[test]
fn run_on_a_single_node_succeeds() {
    let dir = scratch("single");
    let out = dcolor(&["run", "--gen", "gnp:n=1,p=0.5", "--seeds", "0..3", "--mode", "congest", "--out", dir.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let jsonl = std::fs::read_to_string(dir.join("runs.jsonl")).unwrap();
    assert_eq!(jsonl.lines().count(), 3);
    for line in jsonl.lines() {
        let v: serde_json::Value = serde_json::from_str(line).unwrap();
        assert_eq!(v["proper"], true);
        assert_eq!(v["schema"], 1);
    }
    let csv = std::fs::read_to_string(dir.join("summary.csv")).unwrap();
    assert_eq!(csv.lines().count(), 2);
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn runs_append_to_jsonl() {
    let dir = scratch("append");
    let d = dir.to_str().unwrap();
    for _ in 0..2 {
        let out = dcolor(&["run", "--gen", "gnp:n={n},p=0.1", "--sizes", "30,40", "--seeds", "0..2", "--mode", "local", "--out", d]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    }
    let jsonl = std::fs::read_to_string(dir.join("runs.jsonl")).unwrap();
    assert_eq!(jsonl.lines().count(), 8);
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn bad_input_is_rejected() {
    assert_eq!(dcolor(&["run", "--gen", "nope:n=3"]).status.code(), Some(2));
    assert!(!dcolor(&["run", "--gen", "gnp:n=3,p=0.1", "--seeds", "5..2"]).status.success());
    assert_eq!(dcolor(&["run", "--gen", "gnp:n=5,p=0.1", "--config", "{\"bogus\":1}"]).status.code(), Some(2));
    assert_eq!(dcolor(&["run", "--spec", "/nonexistent/spec.json"]).status.code(), Some(2));
    assert_eq!(dcolor(&["validate", "--lemma", "no-such-lemma"]).status.code(), Some(2));
    assert!(!dcolor(&["frobnicate"]).status.success());
}

#[test]
fn run_cap_is_enforced() {
    let out = dcolor(&["run", "--gen", "gnp:n=5,p=0.1", "--seeds", "0..50", "--max-runs", "10", "--out", scratch("cap").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("cap"));
}

#[test]
fn validate_uses_frozen_thresholds() {
    let dir = scratch("validate");
    std::fs::create_dir_all(&dir).unwrap();
    let report = dir.join("report.json");
    let out = dcolor(&["validate", "--lemma", "degred", "--seeds", "1..200", "--out", report.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stdout));
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("degred: PASS"), "{text}");
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    let keys: Vec<&str> = v[0]["thresholds"].as_array().unwrap().iter().map(|e| e["key"].as_str().unwrap()).collect();
    assert!(keys.contains(&"degred.max_decolored"));
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn validate_refuses_uncalibrated_thresholds() {
    let dir = scratch("uncal");
    std::fs::create_dir_all(&dir).unwrap();
    let p = dir.join("t.json");
    std::fs::write(&p, r#"{"schema":1,"status":"uncalibrated","entries":[]}"#).unwrap();
    let out = dcolor(&["validate", "--lemma", "min-avg", "--thresholds", p.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("not calibrated"));
    std::fs::remove_dir_all(&dir).unwrap();
}
