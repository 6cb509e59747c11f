use std::path::Path;
use std::process::{Command, Output};

fn cdlab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cdlab")).args(args).output().unwrap()
}

fn run_in(dir: &Path, args: &[&str]) -> Output {
    let mut all: Vec<&str> = args.to_vec();
    all.extend(["--out-dir", dir.to_str().unwrap()]);
    cdlab(&all)
}

fn read(p: impl AsRef<Path>) -> String {
    std::fs::read_to_string(p).unwrap()
}

#[test]
fn boundary_layer_writes_commented_csv() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_in(dir.path(), &["boundary-layer"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let text = read(dir.path().join("boundary_layer.csv"));
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("# "));
    assert_eq!(lines.next().unwrap(), "alpha,integral,h12_00_norm");
    assert_eq!(lines.count(), 6);
    assert!(dir.path().join("boundary_layer.gp").exists());
}

#[test]
fn reruns_are_byte_identical() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let cfg = a.path().join("cfg.json");
    std::fs::write(&cfg, r#"{"alphas": [0.1, 0.001], "cells": [8, 16]}"#).unwrap();
    let c = cfg.to_str().unwrap();
    for d in [a.path(), b.path()] {
        let out = run_in(d, &["parabolic", "--config", c]);
        assert_eq!(out.status.code(), Some(0));
    }
    for f in ["parabolic.csv", "parabolic.json"] {
        assert_eq!(read(a.path().join(f)), read(b.path().join(f)));
    }
    assert!(read(a.path().join("parabolic.csv")).lines().nth(1) == Some("alpha,tau,sigma,ratio"));
}

#[test]
fn flags_override_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    std::fs::write(&cfg, r#"{"experiment": "solve", "alpha": 0.01, "nx": 40}"#).unwrap();
    let out = run_in(dir.path(), &["solve", "--config", cfg.to_str().unwrap(), "--nx", "8"]);
    assert_eq!(out.status.code(), Some(0));
    let text = read(dir.path().join("solution.csv"));
    assert!(text.contains("alpha=0.01") && text.contains("nx=8"));
    assert_eq!(text.lines().filter(|l| !l.starts_with('#')).count(), 1 + 9);
}

#[test]
fn unknown_experiment_is_a_usage_error() {
    let out = cdlab(&["figure9"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("possible values"));
}

#[test]
fn malformed_config_names_the_line() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.json");
    std::fs::write(&cfg, "{\n  \"alpha\": 0.1,\n  \"nx\": \"many\"\n}").unwrap();
    let out = run_in(dir.path(), &["solve", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("line 3"), "{err}");
}

#[test]
fn invalid_parameters_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_in(dir.path(), &["solve", "--alpha", "-1"]);
    assert_eq!(out.status.code(), Some(2));
    let out = run_in(dir.path(), &["solve", "--method", "supg"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn props_emit_reports() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    std::fs::write(&cfg, r#"{"ids": ["P3.7-Phi", "PA.4"]}"#).unwrap();
    let out = run_in(dir.path(), &["props", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    let v: serde_json::Value = serde_json::from_str(&read(dir.path().join("props/PA.4.json"))).unwrap();
    for key in ["id", "params", "measured", "claimed_law", "fitted_constant", "slope", "pass"] {
        assert!(v.get(key).is_some(), "{key}");
    }
    let all: serde_json::Value = serde_json::from_str(&read(dir.path().join("props.json"))).unwrap();
    assert_eq!(all.as_array().unwrap().len(), 2);
}

#[test]
fn unknown_proposition_lists_supported_ids() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    std::fs::write(&cfg, r#"{"ids": ["P9.9"]}"#).unwrap();
    let out = run_in(dir.path(), &["props", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("P3.1"));
}

#[test]
fn failed_checks_exit_with_one() {
    let dir = tempfile::tempdir().unwrap();
    // A two-point sweep with a huge alpha range breaks the log-scaled spread bound.
    let cfg = dir.path().join("cfg.json");
    std::fs::write(&cfg, r#"{"alphas": [0.5, 1e-9], "samples": 2}"#).unwrap();
    let out = run_in(dir.path(), &["infsup", "--config", cfg.to_str().unwrap(), "--nx", "16"]);
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert_eq!(out.status.code(), Some(1), "{stdout}");
    assert!(stdout.contains("FAIL log_scaled_spread_le_3"));
}
