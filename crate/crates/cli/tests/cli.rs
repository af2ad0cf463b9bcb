use std::collections::HashMap;
use std::process::{Command, Output};
use std::time::{Duration, Instant};

use num_complex::Complex64;
use scissorsim_core::protocols::ScissorsReport;
use scissorsim_core::{teleport_qudit, QuditVector, TeleportationReport};
use serde_json::Value;

fn scissorsim(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_scissorsim"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(args: &[&str]) -> String {
    let out = scissorsim(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn json(args: &[&str]) -> Value {
    serde_json::from_str(&stdout(args)).unwrap()
}

fn csv_records(text: &str) -> Vec<HashMap<String, String>> {
    csv::Reader::from_reader(text.as_bytes())
        .deserialize()
        .collect::<Result<_, _>>()
        .unwrap()
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol
}

#[test]
fn scissors_balanced_input_passes_untruncated() {
    let v = json(&["scissors", "--alphas", "0.7071,0.7071", "--eta", "1"]);
    let report: ScissorsReport = serde_json::from_value(v["report"].clone()).unwrap();
    assert!(close(report.success_probability, 0.5, 1e-12));
    let out = report.output_amplitudes.unwrap();
    let h = std::f64::consts::FRAC_1_SQRT_2;
    assert!((out[0] - Complex64::new(h, 0.0)).norm() < 1e-12);
    assert!((out[1] - Complex64::new(h, 0.0)).norm() < 1e-12);
}

#[test]
fn scissors_vacuum_and_truncation() {
    let v = json(&["scissors", "--alphas", "1"]);
    assert!(close(v["report"]["success_probability"].as_f64().unwrap(), 0.5, 1e-12));
    let v = json(&["scissors", "--alphas", "0.7071,0.5477,0.4472"]);
    assert!(close(v["report"]["success_probability"].as_f64().unwrap(), 0.4, 1e-4));
}

#[test]
fn renormalization_warns_and_far_inputs_fail() {
    let out = scissorsim(&["scissors", "--alphas", "0.7071,0.7071"]);
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("renormalized"));
    let out = scissorsim(&["scissors", "--alphas", "0.5,0.5"]);
    assert_eq!(out.status.code(), Some(2));
    let out = scissorsim(&["scissors", "--alphas", "1,nope"]);
    assert_eq!(out.status.code(), Some(2));
    let out = scissorsim(&["scissors", "--alphas", "1", "--eta", "1.5"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn teleport_examples() {
    let v = json(&["teleport", "-d", "3", "--gammas", "random:42", "--eta", "1"]);
    assert!(close(
        v["report"]["success_probability"].as_f64().unwrap(),
        0.125,
        1e-12
    ));
    let v = json(&["teleport", "-d", "2", "--gammas", "1,0", "--eta", "0.5"]);
    assert!(close(
        v["report"]["success_probability"].as_f64().unwrap(),
        0.0625,
        1e-12
    ));
    let v = json(&["teleport", "-d", "1", "--gammas", "1", "--eta", "0.9"]);
    assert!(close(v["report"]["paper_fidelity"].as_f64().unwrap(), 0.91, 1e-12));
}

#[test]
fn teleport_dimension_mismatch_is_a_usage_error() {
    let out = scissorsim(&["teleport", "-d", "3", "--gammas", "1,0", "--eta", "1"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("expected 3 gammas"));
}

#[test]
fn teleport_basis_reaches_unit_fidelity() {
    let v = json(&[
        "teleport-basis",
        "-d",
        "2",
        "--gammas",
        "random:5",
        "--target-species",
        "HG:0,1",
        "--target-species",
        "HG:1,0",
    ]);
    assert!(close(v["report"]["conditional_fidelity"].as_f64().unwrap(), 1.0, 1e-10));
    assert_eq!(v["config"]["target_species"], serde_json::json!(["HG:0,1", "HG:1,0"]));
    let out = scissorsim(&["teleport-basis", "-d", "2", "--gammas", "1,0", "--target-species", "X"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn sweep_rows() {
    let text = stdout(&["sweep-eta", "-d", "2", "--gammas", "random:3", "--eta-range", "0.2,1,5"]);
    assert!(text.starts_with("eta,success,paper_fidelity,conditional_fidelity,false_announcement\n"));
    assert!(!text.contains('\r'));
    let rows = csv_records(&text);
    let etas: Vec<f64> = rows.iter().map(|r| r["eta"].parse().unwrap()).collect();
    assert_eq!(etas.len(), 5);
    assert!(etas.windows(2).all(|w| w[0] < w[1]));
    let success: Vec<f64> = rows.iter().map(|r| r["success"].parse().unwrap()).collect();
    assert!(success.windows(2).all(|w| w[0] <= w[1]));
    let row = rows.iter().find(|r| r["eta"] == "0.8").unwrap();
    assert!(close(row["success"].parse().unwrap(), 0.16, 1e-12));

    let rows = csv_records(&stdout(&[
        "sweep-eta",
        "-d",
        "1",
        "--gammas",
        "1",
        "--eta-range",
        "0,1,11",
    ]));
    let last = rows.last().unwrap();
    assert_eq!(last["eta"], "1.0");
    assert!(close(last["success"].parse().unwrap(), 0.5, 1e-12));
    assert!(close(last["paper_fidelity"].parse().unwrap(), 1.0, 1e-12));
    assert!(close(last["conditional_fidelity"].parse().unwrap(), 1.0, 1e-12));
    // nothing is ever announced without efficiency
    assert_eq!(rows[0]["conditional_fidelity"], "");
}

#[test]
fn single_point_sweep_matches_teleport() {
    let rows = csv_records(&stdout(&[
        "sweep-eta",
        "-d",
        "2",
        "--gammas",
        "random:9",
        "--eta-range",
        "1,1,1",
    ]));
    assert_eq!(rows.len(), 1);
    let v = json(&["teleport", "-d", "2", "--gammas", "random:9", "--eta", "1"]);
    let success: f64 = rows[0]["success"].parse().unwrap();
    assert_eq!(success, v["report"]["success_probability"].as_f64().unwrap());
    let out = scissorsim(&["sweep-eta", "-d", "2", "--gammas", "1,0", "--eta-range", "0,1,1"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn sweep_ignores_thread_count() {
    let args = [
        "sweep-eta",
        "-d",
        "3",
        "--gammas",
        "random:1",
        "--eta-range",
        "0,1,21",
        "--format",
        "json",
    ];
    let run = |threads: &str| {
        let out = Command::new(env!("CARGO_BIN_EXE_scissorsim"))
            .args(args)
            .env("SCISSORSIM_THREADS", threads)
            .output()
            .unwrap();
        assert!(out.status.success());
        out.stdout
    };
    assert_eq!(run("1"), run("4"));
    let out = Command::new(env!("CARGO_BIN_EXE_scissorsim"))
        .args(args)
        .env("SCISSORSIM_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn output_is_deterministic() {
    for format in ["json", "csv", "table"] {
        let args = [
            "teleport",
            "-d",
            "3",
            "--gammas",
            "random:77",
            "--eta",
            "0.7",
            "--format",
            format,
        ];
        assert_eq!(scissorsim(&args).stdout, scissorsim(&args).stdout);
    }
}

#[test]
fn json_round_trips_to_full_precision() {
    let v = json(&["teleport", "-d", "2", "--gammas", "random:21", "--eta", "0.73"]);
    assert_eq!(v["config"]["command"], "teleport");
    assert_eq!(v["config"]["seed"], 21);
    let gammas: Vec<Complex64> = serde_json::from_value(v["config"]["gammas"].clone()).unwrap();
    let parsed: TeleportationReport = serde_json::from_value(v["report"].clone()).unwrap();
    let expected = teleport_qudit(&QuditVector::new(gammas).unwrap(), 2, 0.73).unwrap();
    assert_eq!(parsed, expected);
}

#[test]
fn csv_round_trips_to_full_precision() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("teleport.csv");
    let path_str = path.to_str().unwrap();
    stdout(&[
        "teleport",
        "-d",
        "2",
        "--gammas",
        "random:21",
        "--eta",
        "0.73",
        "--format",
        "csv",
        "--out",
        path_str,
    ]);
    let rows = csv_records(&std::fs::read_to_string(&path).unwrap());
    let v = json(&["teleport", "-d", "2", "--gammas", "random:21", "--eta", "0.73"]);
    let report: TeleportationReport = serde_json::from_value(v["report"].clone()).unwrap();
    let row = &rows[0];
    let get = |k: &str| -> f64 { row[k].parse().unwrap() };
    assert_eq!(get("success_probability"), report.success_probability);
    assert_eq!(get("announcement_probability"), report.announcement_probability);
    assert_eq!(
        get("false_announcement_probability"),
        report.false_announcement_probability
    );
    assert_eq!(get("paper_fidelity"), report.paper_fidelity);
    assert_eq!(Some(get("conditional_fidelity")), report.conditional_fidelity);
    assert_eq!(get("two_photon_event_probability"), report.two_photon_event_probability);
}

#[test]
fn verify_passes_within_a_minute() {
    let start = Instant::now();
    let out = scissorsim(&["verify", "--d-max", "4"]);
    let elapsed = start.elapsed();
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(out.status.success(), "{text}");
    assert_eq!(text.matches("PASS ").count(), 8, "{text}");
    assert!(!text.contains("FAIL"));
    assert!(elapsed < Duration::from_secs(60), "took {elapsed:?}");
}

#[test]
fn verify_catches_injected_sign_error() {
    let out = scissorsim(&["verify", "--d-max", "2", "--trials", "10", "--inject-bs-sign-error"]);
    assert!(!out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let line = text.lines().find(|l| l.contains("transfer-identity")).unwrap();
    assert!(line.starts_with("FAIL"), "{line}");
}
