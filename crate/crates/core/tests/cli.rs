//! End-to-end CLI tests against checked-in golden outputs.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn beamsplit(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_beamsplit"))
        .args(args)
        .output()
        .unwrap()
}

fn golden(name: &str) -> String {
    let path = Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("tests/golden")
        .join(name);
    fs::read_to_string(path).unwrap()
}

fn assert_matches_golden(args: &[&str], name: &str) {
    let out = beamsplit(args);
    assert!(out.status.success(), "{args:?} failed: {out:?}");
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert_eq!(stdout, golden(name), "stdout mismatch for {args:?}");
}

#[test]
fn two_beam_trace_matches_golden() {
    assert_matches_golden(
        &["two-beam", "--t-over-xi", "0.01", "--passes", "60"],
        "two_beam.csv",
    );
}

#[test]
fn grating_trace_matches_golden() {
    assert_matches_golden(
        &["grating", "--a-over-pi", "0.02", "--passes", "120"],
        "grating_aperture.csv",
    );
}

#[test]
fn grating_without_aperture_matches_golden() {
    assert_matches_golden(
        &["grating", "--a-over-pi", "0.02", "--passes", "120", "--no-aperture"],
        "grating_free.csv",
    );
}

#[test]
fn switch_point_matches_golden() {
    assert_matches_golden(&["switch-point", "--a-over-pi", "0.02"], "switch_point.json");
}

#[test]
fn loss_curve_matches_golden() {
    assert_matches_golden(
        &["loss-curve", "--amplitudes", "0.02,0.01"],
        "loss_curve.json",
    );
}

#[test]
fn inelastic_presets_match_goldens() {
    assert_matches_golden(&["inelastic", "--material", "carbon"], "inelastic_carbon.json");
    assert_matches_golden(&["inelastic", "--material", "gold"], "inelastic_gold.json");
}

#[test]
fn materials_survey_matches_golden() {
    assert_matches_golden(&["materials", "--samples", "11"], "materials.json");
}

#[test]
fn vortex_matches_golden() {
    assert_matches_golden(
        &["vortex", "--charge", "1", "--n-max", "200"],
        "vortex.json",
    );
}

#[test]
fn run_subcommand_executes_scenario() {
    let dir = tempfile::tempdir().unwrap();
    let scenario = dir.path().join("scenario.toml");
    fs::write(
        &scenario,
        r#"
[grating]
kind = "sinusoidal"
a_over_pi = 0.02

[aperture]
passed_orders = [0, 1]

[run]
m = 100
n_max = 120
"#,
    )
    .unwrap();
    let out = beamsplit(&["run", "--config", scenario.to_str().unwrap()]);
    assert!(out.status.success(), "{out:?}");
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert_eq!(stdout, golden("grating_aperture.csv"));
}

#[test]
fn out_flag_writes_file_instead_of_stdout() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("trace.csv");
    let out = beamsplit(&[
        "two-beam",
        "--t-over-xi",
        "0.01",
        "--passes",
        "60",
        "--quiet",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{out:?}");
    assert!(out.stdout.is_empty());
    assert!(out.stderr.is_empty());
    assert_eq!(fs::read_to_string(path).unwrap(), golden("two_beam.csv"));
}

#[test]
fn json_format_override_applies_to_traces() {
    let out = beamsplit(&[
        "two-beam",
        "--t-over-xi",
        "0.01",
        "--passes",
        "5",
        "--format",
        "json",
    ]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let parsed: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert!(parsed.get("rows").is_some() || parsed.is_array() || parsed.get("trace").is_some());
}

#[test]
fn usage_errors_exit_with_2() {
    let out = beamsplit(&["two-beam"]); // missing required --t-over-xi
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn validation_errors_exit_with_3() {
    let out = beamsplit(&["inelastic", "--material", "adamantium"]);
    assert_eq!(out.status.code(), Some(3));
    let out = beamsplit(&["two-beam", "--t-over-xi", "0.9"]);
    assert_eq!(out.status.code(), Some(3));
    let out = beamsplit(&["switch-point", "--a-over-pi", "0.02", "--format", "csv"]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn runtime_errors_exit_with_4() {
    // no switch point within the pass budget
    let out = beamsplit(&["switch-point", "--a-over-pi", "0.001", "--n-max", "100"]);
    assert_eq!(out.status.code(), Some(4));
    // missing scenario file
    let out = beamsplit(&["run", "--config", "/nonexistent/scenario.toml"]);
    assert_eq!(out.status.code(), Some(4));
}
