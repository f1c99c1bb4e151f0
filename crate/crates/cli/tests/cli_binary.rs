//! End-to-end checks through the compiled binary.

use std::path::{Path, PathBuf};
use std::process::Command;

fn binary() -> &'static str {
    env!("CARGO_BIN_EXE_seawatch")
}

fn repo_scenario(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios").join(name)
}

fn temp_dir(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("seawatch-bin-{tag}-{}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    dir
}

#[test]
fn run_twice_produces_identical_files() {
    let scenario = repo_scenario("quick-look.toml");
    let dir_a = temp_dir("twice-a");
    let dir_b = temp_dir("twice-b");
    for dir in [&dir_a, &dir_b] {
        let status = Command::new(binary())
            .args(["run", scenario.to_str().unwrap(), "--seed", "7", "--out-dir"])
            .arg(dir)
            .status()
            .unwrap();
        assert!(status.success());
    }
    let a = std::fs::read(dir_a.join("ledger.csv")).unwrap();
    let b = std::fs::read(dir_b.join("ledger.csv")).unwrap();
    assert_eq!(a, b);
    let ja = std::fs::read(dir_a.join("run.json")).unwrap();
    let jb = std::fs::read(dir_b.join("run.json")).unwrap();
    assert_eq!(ja, jb);
    let _ = std::fs::remove_dir_all(&dir_a);
    let _ = std::fs::remove_dir_all(&dir_b);
}

#[test]
fn sweep_writes_table_and_chart() {
    let scenario = repo_scenario("quick-look.toml");
    let dir = temp_dir("sweep");
    let output = Command::new(binary())
        .args(["sweep", scenario.to_str().unwrap(), "--out-dir"])
        .arg(&dir)
        .output()
        .unwrap();
    assert!(output.status.success(), "stderr: {}", String::from_utf8_lossy(&output.stderr));
    let csv = std::fs::read_to_string(dir.join("sweep.csv")).unwrap();
    assert!(csv.starts_with("sweep_value,aoi_avg_s"));
    assert_eq!(csv.lines().count(), 3, "header + two sweep points");
    let svg = std::fs::read_to_string(dir.join("sweep.svg")).unwrap();
    assert_eq!(svg.matches("<polyline").count(), 3);
    assert!(dir.join("sweep.json").exists());
    // Values parse back and are finite.
    for line in csv.lines().skip(1) {
        for field in line.split(',').skip(1).take(5) {
            let v: f64 = field.parse().unwrap();
            assert!(v.is_finite());
        }
    }
    let _ = std::fs::remove_dir_all(&dir);
}

#[test]
fn validate_sets_the_exit_status() {
    let good = Command::new(binary())
        .args(["validate", repo_scenario("starlink-20x20.toml").to_str().unwrap()])
        .output()
        .unwrap();
    assert!(good.status.success());

    let missing = Command::new(binary()).args(["validate", "/nonexistent.toml"]).output().unwrap();
    assert!(!missing.status.success());
    assert!(!missing.stderr.is_empty());
}

#[test]
fn env_var_sets_the_output_directory() {
    let scenario = repo_scenario("quick-look.toml");
    let dir = temp_dir("envdir");
    let status = Command::new(binary())
        .args(["run", scenario.to_str().unwrap(), "--seed", "1"])
        .env("SEAWATCH_OUT_DIR", &dir)
        .status()
        .unwrap();
    assert!(status.success());
    assert!(dir.join("ledger.csv").exists());
    let _ = std::fs::remove_dir_all(&dir);
}
