// Copyright 2026 The seccalc Authors
// SPDX-License-Identifier: Apache-2.0

use std::path::Path;
use std::process::{Command, Output};

fn seccalc(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_seccalc"))
        .args(args)
        .current_dir(dir)
        .env_remove("SECCALC_THREADS")
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn missing_matrix_file_exits_with_two() {
    let tmp = tempfile::tempdir().unwrap();
    let o = seccalc(&["calc", "--method", "d", "--fn", "resolvent:1", "--matrix", "nope.json"], tmp.path());
    assert_eq!(o.status.code(), Some(2));
    let err: serde_json::Value = serde_json::from_slice(&o.stderr).unwrap();
    assert_eq!(err["error"]["kind"], "missing_file");

    std::fs::write(tmp.path().join("cfg.json"), r#"{"suites": ["cayley"], "matrices": ["gone.mtx"]}"#).unwrap();
    let o = seccalc(&["run", "cfg.json"], tmp.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(!tmp.path().join("seccalc-out").exists());
}

#[test]
fn configuration_errors_exit_with_three() {
    let tmp = tempfile::tempdir().unwrap();
    std::fs::write(tmp.path().join("a.json"), r#"{"suites": ["nonsense"]}"#).unwrap();
    assert_eq!(seccalc(&["run", "a.json"], tmp.path()).status.code(), Some(3));
    std::fs::write(tmp.path().join("b.json"), r#"{"suits": []}"#).unwrap();
    assert_eq!(seccalc(&["run", "b.json"], tmp.path()).status.code(), Some(3));
    let o = seccalc(&["norm", "--fn", "no_such_function"], tmp.path());
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn empty_run_writes_an_empty_summary() {
    let tmp = tempfile::tempdir().unwrap();
    std::fs::write(tmp.path().join("cfg.json"), r#"{"suites": [], "output_dir": "out"}"#).unwrap();
    let o = seccalc(&["run", "cfg.json"], tmp.path());
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let s: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(tmp.path().join("out/summary.json")).unwrap()).unwrap();
    assert!(s["suites"].as_array().unwrap().is_empty());
}

#[test]
fn norm_output_is_deterministic_and_fully_precise() {
    let tmp = tempfile::tempdir().unwrap();
    let args = ["norm", "--fn", "resolvent:1", "--space", "ds", "--s", "1"];
    let a = seccalc(&args, tmp.path());
    let b = seccalc(&args, tmp.path());
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let v: serde_json::Value = serde_json::from_str(&stdout(&a)).unwrap();
    let x = v["value"].as_f64().unwrap();
    assert!((x - std::f64::consts::PI * std::f64::consts::LN_2).abs() < 1e-7);
    let keys: Vec<&str> = v.as_object().unwrap().keys().map(String::as_str).collect();
    assert_eq!(keys, ["fn", "space", "s", "value", "est_abs_err", "nodes_used", "truncated", "divergent", "diagnostic"]);
    let text = stdout(&a);
    let line = text.lines().find(|l| l.contains("\"value\"")).unwrap();
    let mantissa = line.split(':').nth(1).unwrap().trim().trim_end_matches(',').split('e').next().unwrap();
    assert_eq!(mantissa.chars().filter(char::is_ascii_digit).count(), 17, "{line}");
}

#[test]
fn threads_flag_and_environment_agree() {
    let tmp = tempfile::tempdir().unwrap();
    let args = ["reproduce", "--fn", "arccot", "--z", "1,0.5", "--z", "2,-1"];
    let mut flag = vec!["--threads", "2"];
    flag.extend_from_slice(&args);
    let a = seccalc(&flag, tmp.path());
    let b = Command::new(env!("CARGO_BIN_EXE_seccalc")).args(args).current_dir(tmp.path()).env("SECCALC_THREADS", "2").output().unwrap();
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn calc_reads_json_matrix_and_writes_report() {
    let tmp = tempfile::tempdir().unwrap();
    std::fs::write(tmp.path().join("a.json"), "[[[1,0],[0,0]],[[0,0],[4,0]]]").unwrap();
    let o = seccalc(&["calc", "--method", "d", "--fn", "resolvent:1", "--matrix", "a.json", "--report", "r/out.json"], tmp.path());
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(tmp.path().join("r/out.json")).unwrap()).unwrap();
    assert!(v.get("result").is_some(), "{v}");
}
