//! End-to-end tests of the binary: exit codes, determinism, report shape.

use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_contwist"))
}

fn write_temp(name: &str, contents: &str) -> std::path::PathBuf {
    let path = std::env::temp_dir().join(format!("contwist-test-{name}-{}", std::process::id()));
    std::fs::write(&path, contents).unwrap();
    path
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

#[test]
fn scenario_pass_exits_zero() {
    let path = write_temp(
        "quiver",
        r#"{ "kind": "quiver", "payload": { "type": "A", "n": 3 } }"#,
    );
    let out = run(&["run", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["scenario"]["kind"], "quiver");
    assert!(v["report"]["checks"].as_array().unwrap().len() > 1);
}

#[test]
fn failing_check_exits_one() {
    // A degenerate subspace: the nondegeneracy check fails.
    let path = write_temp(
        "degenerate",
        r#"{
            "kind": "bilinear",
            "payload": {
                "field": "Q",
                "gram": [["0", "1"], ["1", "0"]],
                "subspace": [["1"], ["0"]]
            }
        }"#,
    );
    let out = run(&["run", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn malformed_json_exits_two_with_position() {
    let path = write_temp("malformed", "{bad json");
    let out = run(&["run", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("line 1"), "diagnostic should carry a position: {err}");
}

#[test]
fn unknown_kind_exits_two() {
    let path = write_temp("unknown", r#"{ "kind": "nope", "payload": {} }"#);
    let out = run(&["run", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn verify_all_is_deterministic() {
    let a = run(&["verify-all", "--max-n", "3", "--instances", "4", "--seed", "42"]);
    let b = run(&["verify-all", "--max-n", "3", "--instances", "4", "--seed", "42"]);
    assert_eq!(a.status.code(), Some(0), "{}", String::from_utf8_lossy(&a.stderr));
    assert_eq!(a.stdout, b.stdout, "reports must be byte-identical");
}

#[test]
fn demo_and_pretty_output() {
    let out = run(&["demo", "--pretty"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("\n  "), "pretty output is indented");
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert!(v["report"]["checks"].as_array().unwrap().iter().all(|c| c["pass"] == true));
}

#[test]
fn out_flag_writes_file() {
    let target = std::env::temp_dir().join(format!("contwist-out-{}.json", std::process::id()));
    let out = run(&[
        "quiver",
        "--type",
        "A",
        "--n",
        "2",
        "--out",
        target.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&target).unwrap()).unwrap();
    assert_eq!(v["scenario"]["payload"]["n"], 2);
    std::fs::remove_file(target).ok();
}
