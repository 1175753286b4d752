//! End-to-end tests of the command-line interface: exit codes, report
//! shapes, determinism, and the DSL error paths.

use std::process::{Command, Output};

fn klein(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_klein"))
        .args(args)
        .output()
        .expect("binary runs")
}

#[test]
fn group_command_verifies_and_exits_zero() {
    let out = klein(&["group", "--json"]);
    assert_eq!(out.status.code(), Some(0));
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["tool"], "klein");
    let entries = report["sections"][0]["entries"].as_array().unwrap();
    let order = entries.iter().find(|e| e["id"] == "group.order").unwrap();
    assert_eq!(order["status"], "verified");
    assert_eq!(order["data"], 168);
}

#[test]
fn markdown_is_the_default_format() {
    let out = klein(&["group"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("| claim | status | detail |"));
    assert!(text.contains("group.order"));
}

#[test]
fn cohomology_reports_the_failed_claim_and_exits_one() {
    let out = klein(&["cohomology", "--json"]);
    assert_eq!(out.status.code(), Some(1), "one claim fails by design");
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let cohomology = report["sections"]
        .as_array()
        .unwrap()
        .iter()
        .find(|s| s["name"] == "cohomology")
        .unwrap();
    let entries = cohomology["entries"].as_array().unwrap();
    let failed = entries
        .iter()
        .find(|e| e["id"] == "cohomology.dp2.full-group")
        .unwrap();
    assert_eq!(failed["status"], "failed");
    assert!(failed["counterexample"].is_object());
    let verdict = entries
        .iter()
        .find(|e| e["id"] == "cohomology.verdict")
        .unwrap();
    assert_eq!(verdict["status"], "verified");
    assert_eq!(verdict["data"]["verdict"], "not stably conjugate");
    // The order-2 class is among the witnesses.
    let witnesses = verdict["data"]["witnesses"].as_array().unwrap();
    assert!(witnesses.iter().any(|w| w.as_str().unwrap().starts_with("o2")));
}

#[test]
fn fibration_accepts_dsl_and_counts_singular_points() {
    let out = klein(&[
        "fibration",
        "--json",
        "--n",
        "2",
        "--alpha",
        "(u)(u)",
        "--beta",
        "(v)(u+v)",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let entries = report["sections"][0]["entries"].as_array().unwrap();
    let sing = entries
        .iter()
        .find(|e| e["id"] == "fibration.singular-points")
        .unwrap();
    assert_eq!(sing["status"], "verified");
    assert_eq!(sing["data"]["count"], 4);
}

#[test]
fn nonlinear_factor_is_a_configuration_error() {
    let out = klein(&["fibration", "--alpha", "u*u + v", "--beta", "v"]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("parse error"), "{err}");
}

#[test]
fn overlapping_zero_sets_are_rejected() {
    let out = klein(&["fibration", "--alpha", "u", "--beta", "2u"]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("overlap"), "{err}");
}

#[test]
fn def_file_is_read() {
    let dir = std::env::temp_dir().join("klein-dsl-test");
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("input.def");
    std::fs::write(&path, "alpha = u; beta = v;").unwrap();
    let out = klein(&["fibration", "--json", "--def", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn reports_are_byte_identical_for_identical_configs() {
    let a = klein(&["group", "--json"]);
    let b = klein(&["group", "--json"]);
    assert_eq!(a.stdout, b.stdout);

    let a = klein(&["chain", "--json", "--samples", "10", "--seed", "3"]);
    let b = klein(&["chain", "--json", "--samples", "10", "--seed", "3"]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn chain_certificates_are_present() {
    let out = klein(&["chain", "--json", "--samples", "12", "--seed", "5"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let entries = report["sections"][0]["entries"].as_array().unwrap();
    for id in [
        "chain.maps",
        "chain.composite",
        "chain.equivariance",
        "chain.roundtrip",
        "chain.negative-control",
    ] {
        let e = entries.iter().find(|e| e["id"] == id).unwrap();
        assert_eq!(e["status"], "verified", "{id}");
    }
}

#[test]
fn out_flag_writes_the_report_file() {
    let dir = std::env::temp_dir().join("klein-out-test");
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("report.json");
    let out = klein(&["group", "--json", "--out", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let text = std::fs::read_to_string(&path).unwrap();
    assert!(serde_json::from_str::<serde_json::Value>(&text).is_ok());
}
