use std::process::Command;

use serde_json::Value;

fn pulse(args: &[&str]) -> (i32, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_pulse"))
        .args(args)
        .env_remove("PULSE_THREADS")
        .output()
        .expect("binary runs");
    (
        out.status.code().unwrap_or(-1),
        String::from_utf8(out.stdout).unwrap(),
    )
}

#[test]
fn solve_writes_trajectory_json_with_single_event() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("traj.json");
    let (code, _) = pulse(&[
        "solve",
        "--problem",
        "trust-funds",
        "--selection",
        "zero",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    let events = v["events"].as_array().unwrap();
    assert_eq!(events.len(), 1);
    assert!((events[0]["t"].as_f64().unwrap() - 0.25).abs() < 1e-8);
    assert_eq!(v["incomplete"], Value::Bool(false));
}

#[test]
fn solve_csv_ends_at_closed_form_value() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("traj.csv");
    let (code, stdout) = pulse(&[
        "solve",
        "--problem",
        "linear-fixed",
        "--csv",
        csv.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    assert!(stdout.contains("\"events\""));
    let text = std::fs::read_to_string(&csv).unwrap();
    let last = text.lines().last().unwrap();
    let cols: Vec<f64> = last.split(',').map(|c| c.parse().unwrap()).collect();
    assert_eq!(cols[0], 1.0);
    assert!((cols[1] - ((-1.0f64).exp() + (-0.5f64).exp())).abs() < 1e-8);
}

#[test]
fn initial_state_outside_domain_is_a_hypothesis_exit() {
    let (code, _) = pulse(&[
        "solve",
        "--problem",
        "trust-funds",
        "--selection",
        "extreme:-1,-1",
        "--param",
        "y0=[-1,-1]",
    ]);
    assert_eq!(code, 2);
}

#[test]
fn verify_reports_failing_transversality() {
    let (code, stdout) = pulse(&[
        "verify",
        "--problem",
        "broken-transversality",
        "--grid",
        "16",
    ]);
    assert_eq!(code, 1);
    let v: Value = serde_json::from_str(&stdout).unwrap();
    assert_eq!(v["pass"], Value::Bool(false));
    let h3 = v["reports"]
        .as_array()
        .unwrap()
        .iter()
        .find(|r| r["hypothesis"] == "H3")
        .unwrap();
    assert_eq!(h3["pass"], Value::Bool(false));
}

#[test]
fn verify_passes_on_trust_funds() {
    let (code, stdout) = pulse(&["verify", "--problem", "trust-funds", "--grid", "16"]);
    assert_eq!(code, 0);
    let v: Value = serde_json::from_str(&stdout).unwrap();
    assert_eq!(v["pass"], Value::Bool(true));
}

#[test]
fn usage_errors_exit_64() {
    assert_eq!(pulse(&["solve", "--problem", "nope"]).0, 64);
    assert_eq!(
        pulse(&["solve", "--problem", "trust-funds", "--param", "bogus=1"]).0,
        64
    );
    assert_eq!(
        pulse(&[
            "solve",
            "--problem",
            "trust-funds",
            "--selection",
            "sideways"
        ])
        .0,
        64
    );
    assert_eq!(pulse(&["frobnicate"]).0, 64);
}

#[test]
fn funnel_manifest_is_seed_deterministic() {
    let args = [
        "funnel",
        "--problem",
        "fixed-time-m3",
        "--count",
        "4",
        "--seed",
        "11",
    ];
    let (c1, a) = pulse(&args);
    let (c2, b) = pulse(&args);
    assert_eq!((c1, c2), (0, 0));
    assert_eq!(a, b);
    let v: Value = serde_json::from_str(&a).unwrap();
    assert_eq!(v["count"], 4);
}

#[test]
fn cascade_and_contract_run() {
    let (code, out) = pulse(&[
        "cascade",
        "--problem",
        "trust-funds",
        "--levels",
        "4,8",
        "--count",
        "4",
        "--k",
        "2",
    ]);
    assert_eq!(code, 0);
    let v: Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["levels"].as_array().unwrap().len(), 2);
    let (code, out) = pulse(&[
        "contract",
        "--problem",
        "trust-funds",
        "--n",
        "4",
        "--samples",
        "2",
        "--r-steps",
        "8",
    ]);
    assert_eq!(code, 0);
    let v: Value = serde_json::from_str(&out).unwrap();
    assert!(v["start_identity"].as_f64().unwrap() <= 1e-9);
}
