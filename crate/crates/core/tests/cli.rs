//! Runs the `boundary-lab` binary end to end.

use std::process::{Command, Output};

fn lab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_boundary-lab")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap().trim().to_string()
}

#[test]
fn exact_queries_on_x() {
    let o = lab(&["gromov", "--space", "X:16", "--x", "alpha:5", "--y", "g3:1", "--z", "base"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), r#"{"value":"3"}"#);
    let o = lab(&["dist", "--space", "X:16", "--from", "g3:0", "--to", "alpha:3"]);
    assert_eq!(stdout(&o), r#"{"distance":"8"}"#);
    let o = lab(&["bproduct", "--space", "X:8", "--eta", "beta", "--zeta", "g5"]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["value"], "5");
    assert_eq!(v["status"], "converged");
}

#[test]
fn csv_table() {
    let o = lab(&["bproduct", "--space", "X:3", "--all", "--format", "csv"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.starts_with("eta,status,value,windows,zeta"), "{text}");
    assert!(text.lines().any(|l| l == "alpha,converged,0,3,beta"), "{text}");
}

#[test]
fn usage_and_parse_errors_exit_2() {
    assert_eq!(lab(&["dist", "--space", "W:3", "--from", "base", "--to", "base"]).status.code(), Some(2));
    assert_eq!(lab(&["dist", "--space", "X:3"]).status.code(), Some(2));
    let fixture = concat!(env!("CARGO_MANIFEST_DIR"), "/tests/fixtures/undeclared.space");
    let o = lab(&["parse", fixture]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("E_UNDECLARED"));
}

#[test]
fn failed_property_exits_1_with_replay() {
    // X to Y is discontinuous at alpha along g_i.
    let args = ["continuity", "--from", "X:10", "--to", "Y:10", "--eta", "alpha", "--sequence", "g3..g10"];
    let o = lab(&args);
    assert_eq!(o.status.code(), Some(1));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert!(v["replay"].as_str().unwrap().ends_with(&args.join(" ")));
    assert_eq!(v["report"]["verdict"], "discontinuous");
}

#[test]
fn output_file() {
    let dir = std::env::temp_dir().join(format!("boundary-lab-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("out.json");
    let o = lab(&["escape", "--space", "X:6", "--alpha", "alpha", "--beta", "beta", "--c", "1", "--out", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert!((v["t"].as_f64().unwrap() - 2.0).abs() < 1e-8);
    std::fs::remove_dir_all(&dir).unwrap();
}
