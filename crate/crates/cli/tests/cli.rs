use std::path::Path;
use std::process::{Command, Output};

use bkm_core::geometry::r1_closed_form;
use serde_json::Value;

fn bkm(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bkm"))
        .args(args)
        .env("NO_COLOR", "1")
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn stdout_json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn stderr_error(out: &Output) -> Value {
    let text = String::from_utf8_lossy(&out.stderr);
    let line = text.lines().last().expect("stderr has a line");
    serde_json::from_str(line).expect("error line is JSON")
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn point_single_qubit_matches_closed_form() {
    let out = bkm(&["point", "--model", "closed1", "--h", "1", "--gamma", "1", "--t", "1"]);
    assert_eq!(code(&out), 0);
    let v = stdout_json(&out);
    let r = v["scalar_r"].as_f64().unwrap();
    let expected = r1_closed_form(2f64.sqrt());
    assert!((r - expected).abs() / expected < 1e-10, "{r} vs {expected}");
    assert_eq!(v["quality"], "ok");
    assert_eq!(v["input"]["h"], 1.0);
    assert_eq!(v["gamma"].as_array().unwrap().len(), 4);
}

#[test]
fn point_json_keys_are_sorted() {
    let out = bkm(&["point", "--model", "closed2", "--theta", "0.3", "--x", "0.4"]);
    assert_eq!(code(&out), 0);
    let text = String::from_utf8(out.stdout).unwrap();
    let keys: Vec<&str> = text
        .lines()
        .filter(|l| l.starts_with("  \""))
        .map(|l| l.trim().split('"').nth(1).unwrap())
        .collect();
    let mut sorted = keys.clone();
    sorted.sort();
    assert_eq!(keys, sorted);
}

#[test]
fn degenerate_point_exits_3() {
    let out = bkm(&["point", "--model", "exact", "--n", "1", "--theta", "0", "--x", "1"]);
    assert_eq!(code(&out), 3);
    let err = stderr_error(&out);
    assert_eq!(err["error"], "degenerate_metric");
    assert_eq!(err["exit_code"], 3);
}

#[test]
fn config_errors_exit_2() {
    for args in [
        &["point", "--model", "closed1", "--j", "1", "--t", "1"][..],
        &["point", "--model", "closed2", "--h", "1", "--t", "1"],
        &["curve", "--model", "closed2", "--gamma", "0"],
        &["curve", "--model", "exact"],
        &["curve", "--model", "closed2", "--n", "3"],
        &["curve", "--model", "nope"],
        &["curve"],
        &["point", "--model", "closed2", "--t", "1", "--theta", "1"],
        &["scan", "--model", "closed2", "--gamma", "1"],
        &["scan", "--model", "closed2", "--gammas", "0.5", "--gamma-count", "3"],
        &["curve", "--model", "exact", "--n", "40"],
    ] {
        let out = bkm(args);
        assert_eq!(code(&out), 2, "{args:?}");
        assert_eq!(stderr_error(&out)["exit_code"], 2);
    }
}

#[test]
fn closed1_rejection_points_to_h() {
    let out = bkm(&["curve", "--model", "closed1", "--j", "1"]);
    let msg = stderr_error(&out)["message"].as_str().unwrap().to_string();
    assert!(msg.contains("--h"), "{msg}");
}

#[test]
fn unwritable_output_exits_4() {
    let out = bkm(&["curve", "--model", "closed1", "--points", "5", "--out-csv", "/nonexistent-dir/x.csv"]);
    assert_eq!(code(&out), 4);
    assert_eq!(stderr_error(&out)["error"], "io");
}

#[test]
fn missing_config_file_exits_4() {
    let out = bkm(&["--config", "/nonexistent-dir/c.json", "curve", "--model", "closed1"]);
    assert_eq!(code(&out), 4);
}

#[test]
fn curve_csv_has_header_and_rows() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("c.csv");
    let out = bkm(&["curve", "--model", "closed2", "--gamma", "0.5", "--points", "30", "--out-csv", path_str(&csv)]);
    assert_eq!(code(&out), 0);
    let text = std::fs::read_to_string(&csv).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "T,theta,x,psi,g11,g12,g22,det_g,R1212,R,quality");
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 30);
    assert!(rows.iter().all(|r| r.split(',').count() == 11));
    assert!(rows[0].starts_with("0.05,"));
    assert!(rows[29].starts_with("50,"));
    assert!(String::from_utf8_lossy(&out.stdout).contains("non_monotone"));
}

#[test]
fn curve_to_stdout_keeps_summary_on_stderr() {
    let out = bkm(&["curve", "--model", "closed1", "--points", "5"]);
    assert_eq!(code(&out), 0);
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().count(), 6);
    assert!(String::from_utf8_lossy(&out.stderr).contains("monotone_decreasing"));
}

#[test]
fn curve_svg_and_json() {
    let dir = tempfile::tempdir().unwrap();
    let svg = dir.path().join("c.svg");
    let json = dir.path().join("c.json");
    let out = bkm(&[
        "curve", "--model", "closed3", "--points", "60",
        "--out-csv", path_str(&dir.path().join("c.csv")),
        "--out-svg", path_str(&svg),
        "--out-json", path_str(&json),
    ]);
    assert_eq!(code(&out), 0);
    let text = std::fs::read_to_string(&svg).unwrap();
    assert!(text.starts_with("<svg") || text.starts_with("<?xml"));
    assert!(text.trim_end().ends_with("</svg>"));
    assert!(text.contains("<polyline"));
    assert_eq!(text.matches('<').count(), text.matches('>').count());
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&json).unwrap()).unwrap();
    assert_eq!(v["verdict"]["classification"], "non_monotone");
    assert_eq!(v["points"], 60);
}

#[test]
fn log_y_svg_renders() {
    let dir = tempfile::tempdir().unwrap();
    let svg = dir.path().join("c.svg");
    let out = bkm(&[
        "curve", "--model", "thermo", "--points", "40", "--log-y",
        "--out-csv", path_str(&dir.path().join("c.csv")),
        "--out-svg", path_str(&svg),
    ]);
    assert_eq!(code(&out), 0);
    assert!(std::fs::read_to_string(&svg).unwrap().contains("<polyline"));
}

#[test]
fn scan_reports_each_gamma() {
    let out = bkm(&["scan", "--model", "closed2", "--gammas", "0.2,1.5", "--points", "200"]);
    assert_eq!(code(&out), 0);
    let rows = stdout_json(&out);
    let rows = rows.as_array().unwrap();
    assert_eq!(rows.len(), 2);
    assert_eq!(rows[0]["gamma"], 0.2);
    assert_eq!(rows[0]["classification"], "non_monotone");
    assert!(rows[0]["min_r"].as_f64().unwrap() < 0.0);
    assert_eq!(rows[1]["classification"], "monotone_decreasing");
}

#[test]
fn config_file_is_overridden_by_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    std::fs::write(&cfg, r#"{"model": "closed2", "gamma": 0.2, "points": 12}"#).unwrap();
    let from_file = bkm(&["--config", path_str(&cfg), "curve"]);
    assert_eq!(code(&from_file), 0);
    assert_eq!(String::from_utf8_lossy(&from_file.stdout).lines().count(), 13);
    assert!(String::from_utf8_lossy(&from_file.stderr).contains("Γ=0.2"));

    let flagged = bkm(&["--config", path_str(&cfg), "curve", "--gamma", "2", "--points", "7"]);
    assert_eq!(code(&flagged), 0);
    assert_eq!(String::from_utf8_lossy(&flagged.stdout).lines().count(), 8);
    assert!(String::from_utf8_lossy(&flagged.stderr).contains("Γ=2"));
}

#[test]
fn config_file_rejects_unknown_keys() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    std::fs::write(&cfg, r#"{"model": "closed2", "temperature": 1}"#).unwrap();
    let out = bkm(&["--config", path_str(&cfg), "curve"]);
    assert_eq!(code(&out), 2);
    assert!(stderr_error(&out)["message"].as_str().unwrap().contains("temperature"));
}

#[test]
fn exact_point_dumps_spectrum() {
    let out = bkm(&["point", "--model", "exact", "--n", "2", "--theta", "0.5", "--x", "0.5", "--dump-spectrum"]);
    assert_eq!(code(&out), 0);
    let text = String::from_utf8(out.stdout).unwrap();
    let csv = &text[text.find("index,eigenvalue").unwrap()..];
    assert_eq!(csv.lines().count(), 5);
}

#[test]
fn validate_without_color_has_no_escapes() {
    let out = bkm(&["validate"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stdout));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(!text.contains('\x1b'));
    for k in 1..=11 {
        assert!(text.contains(&format!("PASS [{k}]")), "criterion {k}");
    }
    assert!(text.contains("ln 6") && text.contains("ln 8"));
}

#[test]
fn validate_with_tight_fd_tolerance_fails() {
    let out = bkm(&["validate", "--fd-tol", "1e-12"]);
    assert_eq!(code(&out), 1);
    assert!(String::from_utf8_lossy(&out.stdout).contains("FAIL [fd]"));
}

#[test]
fn help_exits_0() {
    assert_eq!(code(&bkm(&["--help"])), 0);
    assert_eq!(code(&bkm(&["curve", "--help"])), 0);
}
