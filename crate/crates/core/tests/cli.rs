use std::process::Command;

use wavedd::bench::RunConfig;

fn wavedd(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_wavedd")).args(args).output().unwrap()
}

fn config_file(dir: &tempfile::TempDir, cfg: &RunConfig) -> String {
    let path = dir.path().join("case.cfg");
    std::fs::write(&path, cfg.render()).unwrap();
    path.to_string_lossy().into_owned()
}

fn small() -> RunConfig {
    RunConfig { frequency: 2.0, cells: 8, subdomains: 4, ..RunConfig::default() }
}

#[test]
fn run_prints_a_json_report() {
    let dir = tempfile::tempdir().unwrap();
    let out = wavedd(&["run", &config_file(&dir, &small())]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["converged"], true);
}

#[test]
fn non_converged_run_still_exits_zero() {
    let dir = tempfile::tempdir().unwrap();
    let out = wavedd(&["run", &config_file(&dir, &small()), "--set", "max_iter=2"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stderr).contains("not converged"));
}

#[test]
fn structural_errors_exit_nonzero() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config_file(&dir, &small());
    assert_ne!(wavedd(&["run", &cfg, "--set", "subdomains=100000"]).status.code(), Some(0));
    assert_ne!(wavedd(&["run", &cfg, "--set", "nonsense"]).status.code(), Some(0));
    assert_ne!(wavedd(&["run", "/nonexistent/case.cfg"]).status.code(), Some(0));
    let bad = dir.path().join("bad.cfg");
    std::fs::write(&bad, "frequency = [").unwrap();
    assert_ne!(wavedd(&["run", bad.to_str().unwrap()]).status.code(), Some(0));
}

#[test]
fn sweep_marks_failed_cells_and_exits_zero() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config_file(&dir, &RunConfig { cells: 4, ..small() });
    let csv = dir.path().join("sweep.csv");
    let out = wavedd(&["sweep", &cfg, "--f", "1", "--n", "4,1000", "--methods", "one-level", "--out", csv.to_str().unwrap()]);
    assert!(out.status.success());
    let text = std::fs::read_to_string(csv).unwrap();
    assert_eq!(text.lines().count(), 3);
    assert!(text.lines().any(|l| l.contains(",failed,")));
}

#[test]
fn dispersion_writes_one_row_per_sample() {
    let out = wavedd(&["dispersion", "--orders", "1,2", "--schemes", "fe", "--samples", "5"]);
    assert!(out.status.success());
    assert_eq!(String::from_utf8_lossy(&out.stdout).lines().count(), 1 + 2 * 5);
}

#[test]
fn check_passes() {
    let out = wavedd(&["check"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stdout));
}
