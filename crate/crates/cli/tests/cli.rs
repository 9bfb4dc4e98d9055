//! End-to-end runs of the `bigconj` binary: exit codes, reports, CSV.

use std::process::Command;

fn bigconj(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_bigconj")).args(args).output().expect("binary runs")
}

fn report(out: &std::process::Output) -> serde_json::Value {
    serde_json::from_slice(&out.stdout).expect("json on stdout")
}

#[test]
fn bundled_ex44_passes_with_unit_margin() {
    let out = bigconj(&["run", "--scenario", "ex44", "--suite", "ex44"]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out);
    assert_eq!(r["schema_version"], 1);
    assert_eq!(r["verdicts"][0]["verdict"], "pass");
    assert_eq!(r["verdicts"][0]["strict_inequality_margin"], 1.0);
}

#[test]
fn bundled_ex52_gap_reports_three_eighths() {
    let out = bigconj(&["run", "--scenario", "ex52", "--suite", "ex52-gap"]);
    assert_eq!(out.status.code(), Some(0));
    let m = report(&out)["verdicts"][0]["strict_inequality_margin"].as_f64().unwrap();
    assert!((m - 0.375).abs() <= 1e-6);
}

#[test]
fn unreachable_tolerance_is_a_verdict_failure() {
    let out = bigconj(&["verify", "ex44", "--tol", "1e-30"]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("first failing verdict: ex44"), "{err}");
}

#[test]
fn failed_hypothesis_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    std::fs::write(
        &path,
        r#"{"schema_version": 1, "name": "bad",
            "operators": [{"name": "A", "matrix": [[-1, 0], [0, 1]]}],
            "sets": [{"name": "C", "kind": "ball", "center": [0, 0], "radius": 1}],
            "suites": [{"name": "thm43"}]}"#,
    )
    .unwrap();
    let out = bigconj(&["run", "--scenario", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn input_errors_exit_three() {
    assert_eq!(bigconj(&["verify", "thm99"]).status.code(), Some(3));
    assert_eq!(bigconj(&["verify", "ex44", "--tol", "abc"]).status.code(), Some(3));
    assert_eq!(bigconj(&["run", "--scenario", "/no/such/file.json"]).status.code(), Some(3));

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("mismatch.json");
    std::fs::write(
        &path,
        r#"{"schema_version": 1, "name": "mismatch",
            "operators": [{"name": "A", "matrix": [[0, -1], [1, 0]]}],
            "sets": [{"name": "C", "kind": "ball", "center": [0, 0, 0], "radius": 1}],
            "suites": [{"name": "thm43"}]}"#,
    )
    .unwrap();
    let out = bigconj(&["run", "--scenario", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("sets[0]"));
}

#[test]
fn reports_are_byte_identical_across_runs() {
    let a = bigconj(&["verify", "fact41", "--seed", "11"]);
    let b = bigconj(&["verify", "fact41", "--seed", "11"]);
    assert_eq!(a.stdout, b.stdout);
    let c = bigconj(&["verify", "fact41", "--seed", "12"]);
    assert_ne!(a.stdout, c.stdout);
}

#[test]
fn fact51_writes_sweep_csv() {
    let dir = tempfile::tempdir().unwrap();
    let out = bigconj(&["verify", "fact51", "--n", "2", "--n", "4", "--n", "8", "--csv-dir", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let text = std::fs::read_to_string(dir.path().join("fact51_identity_sweep.csv")).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "n,max_abs_error");
    assert_eq!(lines.len(), 4);
}

#[test]
fn out_flag_writes_the_report_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("r.json");
    let out = bigconj(&["verify", "ex52-gap", "--n", "4", "--out", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let r: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap();
    assert_eq!(r["verdicts"][0]["computed_values"]["n"], 4.0);
}
