use std::path::PathBuf;
use std::process::{Command, Output};

fn config(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(name)
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bodefrac")).args(args).output().unwrap()
}

fn last_line(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).lines().last().unwrap_or("").to_string()
}

#[test]
fn analyze_writes_report_and_csv() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config("classical.json");
    let out = run(&["analyze", "--config", cfg.to_str().unwrap(), "--out", dir.path().to_str().unwrap(), "--csv"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    assert_eq!(last_line(&out), "PASS");
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("report.json")).unwrap()).unwrap();
    assert!(report.is_object());
    let csv = std::fs::read_to_string(dir.path().join("integrand.csv")).unwrap();
    assert!(csv.lines().count() > 100);
}

#[test]
fn lemmas_pass_on_the_three_pole_loop() {
    let cfg = config("theorem1.json");
    let out = run(&["lemmas", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
}

#[test]
fn lemmas_flag_a_non_vanishing_arc() {
    // relative degree one: the arc has a finite nonzero limit
    let cfg = config("classical.json");
    let out = run(&["lemmas", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(last_line(&out), "FAIL");
}

#[test]
fn synth_runs_each_family() {
    for name in ["family_a.json", "family_b.json", "family_c.json"] {
        let cfg = config(name);
        let out = run(&["synth", "--config", cfg.to_str().unwrap()]);
        assert_eq!(out.status.code(), Some(0), "{name}: {}", String::from_utf8_lossy(&out.stdout));
    }
}

#[test]
fn sweep_writes_csv() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config("sweep.json");
    let out = run(&["sweep", "--config", cfg.to_str().unwrap(), "--out", dir.path().to_str().unwrap(), "--csv"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(dir.path().join("sweep.csv").exists());
}

#[test]
fn input_errors_exit_one() {
    assert_eq!(run(&["analyze", "--config", "/nonexistent/x.json"]).status.code(), Some(1));
    assert_eq!(run(&["frobnicate"]).status.code(), Some(1));

    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{ \"plant\": ").unwrap();
    assert_eq!(run(&["analyze", "--config", bad.to_str().unwrap()]).status.code(), Some(1));

    let cfg = config("classical.json");
    assert_eq!(run(&["analyze", "--config", cfg.to_str().unwrap(), "--csv"]).status.code(), Some(1));
}

#[test]
fn dump_config_round_trips() {
    let cfg = config("stable.json");
    let out = run(&["analyze", "--config", cfg.to_str().unwrap(), "--rel-tol", "1e-7", "--dump-config"]);
    assert_eq!(out.status.code(), Some(0));
    let dumped: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(dumped["settings"]["rel_tol"], serde_json::json!(1e-7));

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("dumped.json");
    std::fs::write(&path, &out.stdout).unwrap();
    let again = run(&["analyze", "--config", path.to_str().unwrap(), "--dump-config"]);
    assert_eq!(again.stdout, out.stdout);
}
