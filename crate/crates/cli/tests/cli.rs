//! End-to-end tests of the command-line interface: flags, config files,
//! output formats, determinism, and exit codes.

use std::fs;
use std::process::{Command, Output};

fn pingpong(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pingpong"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(output: &Output) -> String {
    String::from_utf8(output.stdout.clone()).expect("utf-8 stdout")
}

#[test]
fn exact_improved_prints_the_joint_and_informations() {
    let out = pingpong(&["exact", "--variant", "improved"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("0.500000000000"));
    assert_eq!(text.matches("0.125000000000").count(), 4);
    assert!(text.contains("I_AE (sender/eavesdropper)    = 0.311278124459 bits"));
    assert!(text.contains("QBER                          = 0.250000000000"));
    assert!(text.contains("induced loss                  = 0.000000000000"));
}

#[test]
fn exact_symmetrized_reports_the_reduced_receiver_information() {
    let out = pingpong(&["exact", "--variant", "improved", "--symmetrize"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("I_AB (sender/receiver)        = 0.188721875541 bits"));
    assert!(text.contains("I_AE (sender/eavesdropper)    = 0.311278124459 bits"));
}

#[test]
fn exact_without_attack_is_clean() {
    let out = pingpong(&["exact", "--variant", "none"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("QBER                          = 0.000000000000"));
    assert!(text.contains("detection (two-basis control) = 0.000000000000"));
}

#[test]
fn exact_writes_a_json_report() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("report.json");
    let out = pingpong(&[
        "exact",
        "--variant",
        "improved",
        "--output",
        path.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let json: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(json["variant"], "improved");
    assert_eq!(json["joint"].as_array().unwrap().len(), 5);
    assert!((json["qber"].as_f64().unwrap() - 0.25).abs() < 1e-12);
}

#[test]
fn simulate_is_byte_deterministic_in_the_seed() {
    let args = [
        "simulate",
        "--variant",
        "improved",
        "--symmetrize",
        "--two-basis",
        "--eta",
        "0.8",
        "--rounds",
        "5000",
        "--seed",
        "7",
    ];
    let a = pingpong(&args);
    let b = pingpong(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let c = pingpong(&[
        "simulate", "--variant", "improved", "--rounds", "5000", "--seed", "8",
    ]);
    assert_ne!(a.stdout, c.stdout);
}

#[test]
fn simulate_shows_the_induced_loss_of_the_original_attack() {
    let out = pingpong(&[
        "simulate", "--variant", "wojcik", "--eta", "1", "--rounds", "20000", "--seed", "2",
    ]);
    assert!(out.status.success());
    let text = stdout(&out);
    let line = text
        .lines()
        .find(|l| l.contains("photon found rate"))
        .expect("rate line");
    let value: f64 = line
        .split_whitespace()
        .nth(3)
        .unwrap()
        .parse()
        .expect("parses rate");
    assert!((value - 0.5).abs() < 0.02, "rate {value}");
}

#[test]
fn simulate_two_basis_detection_rate() {
    let out = pingpong(&[
        "simulate",
        "--variant",
        "improved",
        "--two-basis",
        "--control-probability",
        "1.0",
        "--rounds",
        "20000",
        "--seed",
        "3",
    ]);
    assert!(out.status.success());
    let text = stdout(&out);
    let line = text
        .lines()
        .find(|l| l.contains("detection rate"))
        .expect("detection line");
    let value: f64 = line
        .split_whitespace()
        .nth(2)
        .unwrap()
        .parse()
        .expect("parses rate");
    assert!((value - 0.25).abs() < 0.02, "rate {value}");
}

#[test]
fn sweep_writes_the_stable_csv_schema() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("sweep.csv");
    let out = pingpong(&["sweep", "--output", path.to_str().unwrap()]);
    assert!(out.status.success());
    let csv = fs::read_to_string(&path).unwrap();
    let mut lines = csv.lines();
    assert_eq!(
        lines.next().unwrap(),
        "eta,variant,f_star,I_AE_eff,I_AB_eff,induced_loss"
    );
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 101 * 2);
    for row in &rows {
        let fields: Vec<&str> = row.split(',').collect();
        assert_eq!(fields.len(), 6);
        if fields[1] == "improved" {
            assert_eq!(fields[2], "1.000000000000");
            assert_eq!(fields[3], "0.311278124459");
        }
    }
    let wojcik_three_quarters = rows
        .iter()
        .find(|r| r.starts_with("0.750000000000,wojcik"))
        .expect("wojcik row at 0.75");
    assert!(wojcik_three_quarters.contains(",0.500000000000,"));
}

#[test]
fn sweep_csv_is_deterministic() {
    let a = pingpong(&["sweep", "--eta-steps", "11"]);
    let b = pingpong(&["sweep", "--eta-steps", "11"]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn verify_passes_and_reports_the_convention() {
    let out = pingpong(&["verify"]);
    assert!(out.status.success(), "verify must exit 0");
    let text = stdout(&out);
    assert!(text.contains("unitarity W: PASS"));
    assert!(text.contains("convention #2 of 4 selected"));
    assert!(text.contains("62/62 checks passed") || !text.contains("FAIL"));
}

#[test]
fn config_file_is_overridden_by_flags() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("config.json");
    fs::write(
        &path,
        r#"{"variant": "improved", "symmetrize": true, "rounds": 1000}"#,
    )
    .unwrap();
    // File alone.
    let out = pingpong(&["exact", "--config", path.to_str().unwrap()]);
    assert!(out.status.success());
    assert!(stdout(&out).contains("variant: improved"));
    assert!(stdout(&out).contains("symmetrize: true"));
    // Flag wins over file.
    let out = pingpong(&[
        "exact",
        "--config",
        path.to_str().unwrap(),
        "--variant",
        "none",
    ]);
    assert!(out.status.success());
    assert!(stdout(&out).contains("variant: none"));
}

#[test]
fn invalid_configuration_exits_with_code_one() {
    let out = pingpong(&["simulate", "--eta", "1.5"]);
    assert_eq!(out.status.code(), Some(1));
    let out = pingpong(&["exact", "--no-such-flag"]);
    assert_eq!(out.status.code(), Some(1));
    let out = pingpong(&["simulate", "--rounds", "0"]);
    assert_eq!(out.status.code(), Some(1));
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    fs::write(&path, r#"{"unknown_field": 1}"#).unwrap();
    let out = pingpong(&["exact", "--config", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn help_exits_cleanly() {
    let out = pingpong(&["--help"]);
    assert!(out.status.success());
    let out = pingpong(&["simulate", "--help"]);
    assert!(out.status.success());
    assert!(stdout(&out).contains("--eta"));
}

#[test]
fn sweep_rejects_unwritable_output() {
    let out = pingpong(&["sweep", "--output", "/nonexistent-dir/sweep.csv"]);
    assert_eq!(out.status.code(), Some(1));
}
