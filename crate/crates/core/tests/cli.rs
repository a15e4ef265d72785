use std::path::Path;
use std::process::{Command, Output};

use nirgas::sweep::{read_csv, read_json, RunConfig};

fn nirgas(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nirgas")).args(args).output().unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_string_lossy().into_owned()
}

const SMALL: &str = r#"{"detuning": {"min": -5, "max": 5, "count": 2}, "pump_rates": [0, 0.01], "phases": 2}"#;

#[test]
fn defaults_prints_reference_config() {
    let out = nirgas(&["defaults"]);
    assert_eq!(out.status.code(), Some(0));
    let cfg: RunConfig = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(cfg, RunConfig::default());
}

#[test]
fn validate_reports_config_errors() {
    let dir = tempfile::tempdir().unwrap();
    let ok = write(dir.path(), "ok.json", "");
    assert_eq!(nirgas(&["validate", "--config", &ok]).status.code(), Some(0));

    let bad = write(dir.path(), "bad.json", r#"{"system": {"medium": {"density": -1}}}"#);
    let out = nirgas(&["validate", "--config", &bad]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("medium.density"));

    let broken = write(dir.path(), "broken.json", "{\n  \"phases\": ]\n}");
    let out = nirgas(&["validate", "--config", &broken]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 2"));

    let missing = dir.path().join("missing.json");
    assert_eq!(nirgas(&["validate", "--config", missing.to_str().unwrap()]).status.code(), Some(1));
}

#[test]
fn run_writes_csv_and_json() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "cfg.json", SMALL);
    let csv = dir.path().join("out.csv");
    let out = nirgas(&["run", "--config", &cfg, "--out", csv.to_str().unwrap(), "--workers", "2"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let res = read_csv(&csv).unwrap();
    assert_eq!(res.rows.len(), 4);

    let json = dir.path().join("out.json");
    let out = nirgas(&[
        "run", "--config", &cfg, "--out", json.to_str().unwrap(), "--format", "json", "--method", "integrate",
        "--phases", "1",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let res = read_json(&json).unwrap();
    assert_eq!(res.metadata.config.phases, 1);
    assert_eq!(res.metadata.config.solver.method, nirgas::steady::Method::TimeIntegration);
}

#[test]
fn run_to_stdout() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "cfg.json", SMALL);
    let out = nirgas(&["run", "--config", &cfg]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("# nirgas"));
    assert_eq!(text.lines().filter(|l| !l.starts_with('#')).count(), 5);
}

#[test]
fn exit_codes_for_flagged_and_runtime_failures() {
    let dir = tempfile::tempdir().unwrap();
    let flagged = write(
        dir.path(),
        "flagged.json",
        r#"{"detuning": {"min": 0, "max": 0, "count": 1}, "phases": 1, "solver": {"max_iterations": 1}}"#,
    );
    let out_path = dir.path().join("f.csv");
    let out = nirgas(&["run", "--config", &flagged, "--out", out_path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));

    let cfg = write(dir.path(), "cfg.json", SMALL);
    let out = nirgas(&["run", "--config", &cfg, "--out", "/nonexistent-dir/out.csv"]);
    assert_eq!(out.status.code(), Some(2));

    let out = nirgas(&["run", "--config", &cfg, "--phases", "0"]);
    assert_eq!(out.status.code(), Some(1));
}
