use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn scenario(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/scenarios").join(name)
}

fn bridgeland(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bridgeland"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn results(out: &Output) -> Value {
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let report: Value = serde_json::from_slice(&out.stdout).unwrap();
    report["results"].clone()
}

#[test]
fn quiver_dim_on_affine_a1() {
    let s = scenario("affine_a1.json");
    let r = results(&bridgeland(&["quiver", "dim", "--scenario", s.to_str().unwrap()]));
    assert_eq!(r["expected_dim"], 2);
}

#[test]
fn stratum_analyze_w_plus_s() {
    let s = scenario("w_plus_s.json");
    let r = results(&bridgeland(&["stratum", "analyze", "--scenario", s.to_str().unwrap()]));
    assert_eq!(r["verdict"]["verdict"], "totally_semistable_shape");
    assert_eq!(r["verdict"]["leaf"]["pairing"], -1);
}

#[test]
fn inline_vectors_and_pretty_output() {
    let s = scenario("w_plus_s.json");
    let out = bridgeland(&["lattice", "pair", "[1,1]", "s", "--scenario", s.to_str().unwrap(), "--pretty"]);
    assert!(String::from_utf8_lossy(&out.stdout).contains("\n  "));
    assert_eq!(results(&out)["pair"], -1);
}

#[test]
fn out_flag_writes_the_report() {
    let dir = tempfile::tempdir().unwrap();
    let target = dir.path().join("report.json");
    let s = scenario("w_plus_s.json");
    let out = bridgeland(&["lattice", "square", "v", "--scenario", s.to_str().unwrap(), "--out", target.to_str().unwrap()]);
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let report: Value = serde_json::from_str(&std::fs::read_to_string(target).unwrap()).unwrap();
    assert_eq!(report["results"]["square"], 2);
}

#[test]
fn unknown_command_exits_with_two() {
    let s = scenario("affine_a1.json");
    let out = bridgeland(&["quiver", "frobnicate", "--scenario", s.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn missing_scenario_flag_exits_with_two() {
    assert_eq!(bridgeland(&["lattice", "signature"]).status.code(), Some(2));
}

#[test]
fn schema_violation_names_the_path() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    std::fs::write(&path, r#"{"lattice": {"gram": [[2, 0], [0, -2]]}, "vectors": {"v": [1, 2, 3]}}"#).unwrap();
    let out = bridgeland(&["lattice", "signature", "--scenario", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("vectors.v"));
}

#[test]
fn domain_error_exits_with_one() {
    let s = scenario("affine_a1.json");
    let out = bridgeland(&["stratum", "analyze", "--scenario", s.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
}
