use std::fs;
use std::process::Command;

use robust_irl::config::{Controller, ScenarioConfig};
use robust_irl::episode::{run_episode, summarize};
use robust_irl::series::{read_csv, write_csv};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_robust-irl"))
}

const GOLDEN_HEAD: &str = include_str!("golden_fasting_seed42_head.csv");

#[test]
fn golden_first_rows() {
    let r = run_episode(&ScenarioConfig::fasting());
    let mut buf = Vec::new();
    write_csv(&mut buf, &r.rows[..10]).unwrap();
    assert_eq!(String::from_utf8(buf).unwrap(), GOLDEN_HEAD);
    // the commands stay negative here, so glucose decays freely
    for row in &r.rows[..10] {
        assert!(row.u_command < 0.0 && row.chi == 0.0);
        let exact = 290.0 * (-0.2 * row.t_min).exp();
        assert!(((row.g_mgdl - exact) / exact).abs() < 1e-9);
    }
}

#[test]
fn summary_recomputes_from_csv() {
    for cfg in [ScenarioConfig::fasting(), ScenarioConfig { controller: Controller::Optimal, ..ScenarioConfig::fasting() }] {
        let r = run_episode(&cfg);
        let mut buf = Vec::new();
        write_csv(&mut buf, &r.rows).unwrap();
        let rows = read_csv(&buf[..]).unwrap();
        assert_eq!(rows.len(), r.rows.len());
        assert_eq!(summarize(&rows, &cfg, r.metrics.unstable_flag), r.metrics);
    }
}

#[test]
fn lint_accepts_shipped_configs() {
    for name in ["fasting.json", "meals.json"] {
        let path = concat!(env!("CARGO_MANIFEST_DIR"), "/../../configs/").to_string() + name;
        let out = bin().args(["lint-config", "--config", &path]).output().unwrap();
        assert_eq!(out.status.code(), Some(0), "{name}: {}", String::from_utf8_lossy(&out.stderr));
    }
}

#[test]
fn missing_target_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let mut v: serde_json::Value = serde_json::from_str(&ScenarioConfig::fasting().to_json()).unwrap();
    v.as_object_mut().unwrap().remove("g_target");
    let path = dir.path().join("bad.json");
    fs::write(&path, v.to_string()).unwrap();
    let out = bin().args(["lint-config", "--config"]).arg(&path).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("g_target"));
}

#[test]
fn malformed_config_reports_position() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("broken.json");
    fs::write(&path, "{\n  \"duration\": ,\n}").unwrap();
    let out = bin().args(["run", "--config"]).arg(&path).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("line 2") && err.contains("column"), "{err}");
}

#[test]
fn run_writes_full_series() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("run.csv");
    let out = bin().args(["run", "--controller", "optimal", "--seed", "7", "--out"]).arg(&csv).output().unwrap();
    // the optimal controller never fails the robust exit check
    assert_eq!(out.status.code(), Some(0));
    let rows = read_csv(fs::read(&csv).unwrap().as_slice()).unwrap();
    assert_eq!(rows.len(), 2401);
}

#[test]
fn robust_failure_sets_exit_code() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = ScenarioConfig::fasting();
    let expect_failure = {
        let r = run_episode(&cfg);
        r.metrics.unstable_flag || r.metrics.hypo_events > 0
    };
    let out = bin().args(["run", "--out"]).arg(dir.path().join("r.csv")).output().unwrap();
    assert_eq!(out.status.code(), Some(if expect_failure { 1 } else { 0 }));
}

#[test]
fn suite_writes_summary() {
    let dir = tempfile::tempdir().unwrap();
    let out = bin().args(["suite", "--seed", "42", "--out"]).arg(dir.path()).output().unwrap();
    assert!(matches!(out.status.code(), Some(0 | 1)));
    let summary = fs::read_to_string(dir.path().join("summary.csv")).unwrap();
    assert_eq!(summary.lines().count(), 10);
    assert_eq!(String::from_utf8_lossy(&out.stdout), summary);
}
