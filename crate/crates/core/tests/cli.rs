use std::path::PathBuf;
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_beamsel"))
}

fn recipe(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../recipes").join(name)
}

#[test]
fn validate_accepts_recipes() {
    for name in beamsel::cli::RECIPES {
        let out = bin().args(["validate", "--config"]).arg(recipe(name)).output().unwrap();
        assert!(out.status.success(), "{name}: {}", String::from_utf8_lossy(&out.stderr));
    }
}

#[test]
fn validate_reports_violations() {
    let out = bin()
        .args(["validate", "--config"])
        .arg(recipe("fig3.cfg"))
        .args(["--set", "alpha=0.01", "--set", "N_it=200"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stdout).contains("αN_it < 1"));
}

#[test]
fn run_writes_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let out = bin()
        .args(["run", "--config"])
        .arg(recipe("fig3.cfg"))
        .args(["--set", "realizations=3", "--set", "N_it=20", "--workers", "2", "--out"])
        .arg(dir.path())
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    for f in ["curve.csv", "summary.csv", "provenance.json"] {
        assert!(dir.path().join(f).exists(), "{f} missing");
    }
}

#[test]
fn missing_config_exits_with_usage_error() {
    let out = bin().args(["run", "--config", "/nonexistent.cfg"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}
