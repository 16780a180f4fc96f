use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

const D1: &str = r#"{"nodes":[1,2,3,4],"links":[[1,2],[2,3],[3,4],[4,1]],"W":8,"C":10,
  "demands":[{"id":1,"s":1,"d":3,"b":10}]}"#;

fn otnplan(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_otnplan")).args(args).output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn d1(dir: &Path) -> String {
    let p = dir.join("d1.json");
    std::fs::write(&p, D1).unwrap();
    p.to_str().unwrap().to_string()
}

fn json(p: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(p).unwrap()).unwrap()
}

#[test]
fn single_layer_on_d1() {
    let dir = tempfile::tempdir().unwrap();
    let inst = d1(dir.path());
    let out = dir.path().join("out");
    let o = otnplan(&["run", "--instance", &inst, "--survivability", "single", "--gap", "0", "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let d = json(&out.join("single-sequential.design.json"));
    assert_eq!(d["cost"]["total"].as_f64(), Some(46.0));
    assert_eq!(d["metrics"]["wavelengths"].as_u64(), Some(4));
    for f in ["manifest.json", "verify.json", "verify.txt", "drill.json", "drill.txt", "dot"] {
        assert!(out.join(format!("single-sequential.{f}")).exists(), "{f}");
    }
    assert_eq!(json(&out.join("single-sequential.verify.json")), Value::Array(vec![]));
    let manifest = json(&out.join("single-sequential.manifest.json"));
    assert_eq!(manifest["total_cost"].as_f64(), Some(46.0));
    assert_eq!(manifest["stages"].as_array().unwrap().len(), 3);
}

#[test]
fn brs_and_comparison_tables() {
    let dir = tempfile::tempdir().unwrap();
    let inst = d1(dir.path());
    let out = dir.path().join("out");
    let o = otnplan(&[
        "run", "--instance", &inst, "--compare-all", "--approach", "both", "--gap", "0", "--workers", "2", "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(json(&out.join("brs-sequential.design.json"))["cost"]["total"].as_f64(), Some(29.0));
    assert_eq!(json(&out.join("none-integrated.design.json"))["cost"]["total"].as_f64(), Some(23.0));
    let csv = std::fs::read_to_string(out.join("comparison.csv")).unwrap();
    assert_eq!(csv.lines().count(), 11);
    let approaches = std::fs::read_to_string(out.join("approaches.csv")).unwrap();
    assert_eq!(approaches.lines().count(), 6);
    assert!(out.join("costs.csv").exists() && out.join("comparison.txt").exists());
}

#[test]
fn missing_solver_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let inst = d1(dir.path());
    let o = otnplan(&[
        "run", "--instance", &inst, "--survivability", "none", "--solver", "external", "--solver-cmd",
        "/nonexistent/solver {lp} {sol}", "--out", dir.path().join("out").to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 3, "{}", String::from_utf8_lossy(&o.stdout));
}

#[test]
fn external_solver_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let inst = d1(dir.path());
    let out = dir.path().join("out");
    let o = otnplan(&[
        "run", "--instance", &inst, "--survivability", "brs", "--solver", "external", "--gap", "0", "--keep-artifacts",
        "--out", out.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(json(&out.join("brs-sequential.design.json"))["cost"]["total"].as_f64(), Some(29.0));
    assert!(out.join("artifacts").read_dir().unwrap().next().is_some());
}

#[test]
fn invalid_instances_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, r#"{"nodes":[1,2],"links":[[1,1]],"W":8,"C":10,"demands":[]}"#).unwrap();
    let out = dir.path().join("out");
    let o = otnplan(&["run", "--instance", bad.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 2);
    let o = otnplan(&["run", "--generate", "ring:3:10:1", "--survivability", "single", "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 2);
    let o = otnplan(&["run", "--generate", "torus:5:10:1", "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 2);
    let o = otnplan(&["run", "--instance", dir.path().join("absent.json").to_str().unwrap()]);
    assert_eq!(code(&o), 1);
}

#[test]
fn validate_flags_tampered_designs() {
    let dir = tempfile::tempdir().unwrap();
    let inst = d1(dir.path());
    let out = dir.path().join("out");
    let o = otnplan(&["run", "--instance", &inst, "--survivability", "double", "--gap", "0", "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    let design = out.join("double-sequential.design.json");
    let manifest = out.join("double-sequential.manifest.json");
    let args = |d: &Path| {
        otnplan(&["validate", "--instance", &inst, "--design", d.to_str().unwrap(), "--manifest", manifest.to_str().unwrap()])
    };
    assert_eq!(code(&args(&design)), 0);
    let mut d = json(&design);
    d["cost"]["total"] = Value::from(1.0);
    let tampered = dir.path().join("tampered.json");
    std::fs::write(&tampered, d.to_string()).unwrap();
    let o = args(&tampered);
    assert_eq!(code(&o), 5);
    assert!(String::from_utf8_lossy(&o.stdout).contains("cost"));
}

#[test]
fn dot_export() {
    let dir = tempfile::tempdir().unwrap();
    let inst = d1(dir.path());
    let o = otnplan(&["dot", "--instance", &inst]);
    assert_eq!(code(&o), 0);
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.starts_with("graph otn {"));
    assert_eq!(text.matches(" -- ").count(), 4);
}

#[test]
fn generate_is_deterministic() {
    let a = otnplan(&["generate", "mesh:7:2,4,6:3:6"]);
    let b = otnplan(&["generate", "mesh:7:2,4,6:3:6"]);
    assert_eq!(code(&a), 0);
    assert_eq!(a.stdout, b.stdout);
    let v: Value = serde_json::from_slice(&a.stdout).unwrap();
    assert_eq!(v["demands"].as_array().unwrap().len(), 6);
    assert_eq!(v["W"].as_u64(), Some(32));
}
