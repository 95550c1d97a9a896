mod common;

use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

use sresim::report::strip_measurements;

fn sresim(args: &[&str], env: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_sresim"));
    cmd.args(args).current_dir(common::models_dir());
    cmd.env_remove("SRESIM_MAX_ITERATIONS").env_remove("SRESIM_DELTA_CYCLE_LIMIT");
    for (k, v) in env {
        cmd.env(k, v);
    }
    cmd.output().expect("binary runs")
}

fn report(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| panic!("{e}\nstdout: {}\nstderr: {}", String::from_utf8_lossy(&out.stdout), String::from_utf8_lossy(&out.stderr)))
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_string_lossy().into_owned()
}

#[test]
fn report_has_schema_fields() {
    let out = sresim(&["validate", "fl.sre", "ptl8.sre", "ptl4.sre", "props.sre", "jobs.sre"], &[]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let r = report(&out);
    for key in ["schema", "tool", "command", "inputs", "outcome", "verdicts", "counterexamples", "errors", "timing", "memory"] {
        assert!(r.get(key).is_some(), "missing {key}");
    }
    assert_eq!(r["schema"], 1);
    assert_eq!(r["command"], "validate");
    assert_eq!(r["outcome"], "ok");
    for key in ["parse_ms", "simulate_ms", "abstract_ms", "match_ms", "total_ms"] {
        assert!(r["timing"][key].is_number(), "timing.{key}");
    }
}

#[test]
fn equivalence_exit_codes_and_determinism() {
    let ok = sresim(&["equiv", "jobs.sre", "--job", "ptl8_vs_ptl4_single"], &[]);
    assert_eq!(ok.status.code(), Some(0), "{}", String::from_utf8_lossy(&ok.stderr));
    assert_eq!(report(&ok)["verdicts"][0]["overall"], "Equivalent");

    let runs: Vec<Value> = (0..2)
        .map(|_| {
            let out = sresim(&["equiv", "jobs.sre", "--job", "fl_vs_ptl8_b1_single"], &[]);
            assert_eq!(out.status.code(), Some(1));
            let mut r = report(&out);
            strip_measurements(&mut r);
            r
        })
        .collect();
    assert_eq!(runs[0], runs[1]);
    let v = &runs[0]["verdicts"][0];
    assert_eq!(v["overall"], "NotEquivalent");
    assert_eq!(v["diagnosis"]["root_blocks"], serde_json::json!(["punct"]));
}

#[test]
fn property_check_reports_counterexample() {
    let holds = sresim(&["check", "ptl8.sre", "props.sre", "--property", "P1", "--scenarios", "single"], &[]);
    assert_eq!(holds.status.code(), Some(0), "{}", String::from_utf8_lossy(&holds.stderr));

    let fails = sresim(&["check", "ptl8.sre", "props.sre", "--property", "P1", "--scenarios", "single", "--bug", "B2"], &[]);
    assert_eq!(fails.status.code(), Some(1));
    let r = report(&fails);
    assert_eq!(r["outcome"], "negative");
    assert_eq!(r["counterexamples"][0]["property"], "P1");
    assert_eq!(r["verdicts"][0]["replay_reproduces"], true);
}

#[test]
fn limits_and_errors_have_distinct_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let osc = write(dir.path(), "osc.sre", "system osc { vars X; outputs X; init X(0) = False; eq X(n) = not(X(n)); }\n");
    let out = sresim(&["simulate", &osc, "--mode", "numerical"], &[]);
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(report(&out)["outcome"], "limit");

    let out = sresim(&["equiv", "jobs.sre", "--job", "ptl8_vs_ptl4_single"], &[("SRESIM_MAX_ITERATIONS", "1")]);
    assert_eq!(out.status.code(), Some(3));

    let out = sresim(&["simulate", "fl.sre"], &[("SRESIM_DELTA_CYCLE_LIMIT", "zero")]);
    assert_eq!(out.status.code(), Some(2));

    let bad = write(dir.path(), "bad.sre", "system s { vars X; eq X(n) = IF(X(n-1), True); }\n");
    let out = sresim(&["validate", &bad], &[]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("IF expects 3 arguments"));

    let out = sresim(&["validate", "no_such_file.sre"], &[]);
    assert_eq!(out.status.code(), Some(2));

    let out = sresim(&["frobnicate"], &[]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn simulate_binds_inputs() {
    let out = sresim(
        &["simulate", "fl.sre", "--mode", "numerical", "--scenario", "mode_0", "--set", "DATA=[True, False, False, False, False, False, False, False]"],
        &[],
    );
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let r = report(&out);
    let frames = r["verdicts"][0]["frames"].as_array().unwrap();
    assert!(frames.last().unwrap()["values"]["output.out"].as_str().unwrap().starts_with('['));
}

#[test]
fn export_matches_bundled_models() {
    let dir = tempfile::tempdir().unwrap();
    let target = dir.path().join("models");
    let out = sresim(&["export", target.to_str().unwrap()], &[]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    for entry in std::fs::read_dir(common::models_dir()).unwrap() {
        let p = entry.unwrap().path();
        let name = p.file_name().unwrap();
        assert_eq!(std::fs::read_to_string(&p).unwrap(), std::fs::read_to_string(target.join(name)).unwrap(), "{name:?}");
    }
}
