use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_bsclab"))
}

fn spec(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("specs")
        .join(name)
}

fn run_json(args: &[&str], dir: &Path, name: &str) -> (Output, Value) {
    let out_path = dir.join(name);
    let output = bin()
        .args(args)
        .arg("--out")
        .arg(&out_path)
        .output()
        .expect("binary runs");
    let text = std::fs::read_to_string(&out_path).expect("report written");
    (output, serde_json::from_str(&text).expect("report is JSON"))
}

fn strip_wall_clock(v: &mut Value) {
    match v {
        Value::Object(map) => {
            map.retain(|k, _| !k.contains("wall_clock"));
            map.values_mut().for_each(strip_wall_clock);
        }
        Value::Array(items) => items.iter_mut().for_each(strip_wall_clock),
        _ => {}
    }
}

#[test]
fn icost_of_the_xor_noise_spec() {
    let dir = tempfile::tempdir().unwrap();
    let path = spec("xor_noise.json");
    let (out, doc) = run_json(
        &["icost", "--spec", path.to_str().unwrap(), "--mu", "uniform"],
        dir.path(),
        "ic.json",
    );
    assert!(out.status.success());
    let ic = doc["metrics"]["ic_ext_bits"].as_f64().unwrap();
    assert!((ic - 0.188722).abs() < 1e-6, "{ic}");
}

#[test]
fn biased_walk_report() {
    let dir = tempfile::tempdir().unwrap();
    let args = [
        "walk", "--mode", "brw", "--a", "13", "--b", "13", "--trials", "1000", "--seed", "1",
    ];
    let (out, doc) = run_json(&args, dir.path(), "walk.json");
    assert!(out.status.success());
    let rows = doc["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 1000);
    assert!(rows.iter().all(|r| r["end"] == 26));
    assert!(doc["metrics"]["mean_energy"].as_f64().unwrap() <= 48.0);
}

#[test]
fn csv_has_one_row_per_trial() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("walk.csv");
    let status = bin()
        .args([
            "walk", "--mode", "ubrw", "--a", "3", "--b", "1", "--trials", "250", "--format", "csv",
            "--out",
        ])
        .arg(&path)
        .output()
        .unwrap()
        .status;
    assert!(status.success());
    let text = std::fs::read_to_string(path).unwrap();
    assert_eq!(text.lines().count(), 251);
    assert!(text.starts_with("end,energy,steps,trial"));
}

#[test]
fn chunk_verify_passes_both_oracles() {
    let dir = tempfile::tempdir().unwrap();
    let args = [
        "chunk-verify",
        "--gamma",
        "20",
        "--epsilon",
        "0.1",
        "--samples",
        "5000",
        "--seed",
        "7",
    ];
    let (out, doc) = run_json(&args, dir.path(), "cv.json");
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stdout)
    );
    assert!(doc["metrics"]["max_abs_diff"].as_f64().unwrap() <= 1e-10);
    assert!(doc["tests"]
        .as_array()
        .unwrap()
        .iter()
        .all(|t| t["passed"] == true));
}

#[test]
fn suite_is_deterministic_apart_from_timings() {
    let dir = tempfile::tempdir().unwrap();
    let args = [
        "suite",
        "--scale",
        "0.01",
        "--only",
        "1,4,5,7,11,12",
        "--seed",
        "5",
    ];
    let (out_a, mut a) = run_json(&args, dir.path(), "a.json");
    let (_, mut b) = run_json(&args, dir.path(), "b.json");
    assert!(out_a.status.success());
    assert_eq!(a["tests"].as_array().unwrap().len(), 6);
    strip_wall_clock(&mut a);
    strip_wall_clock(&mut b);
    assert_eq!(a, b);
}

#[test]
fn failed_checks_set_the_exit_status() {
    let fail = bin()
        .args([
            "sample-prior",
            "--p",
            "0.05",
            "--q",
            "0.005",
            "--samples",
            "2000",
        ])
        .output()
        .unwrap();
    assert_eq!(fail.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&fail.stdout).contains("FAIL"));
    let pass = bin()
        .args([
            "sample-prior",
            "--p",
            "0.3",
            "--q",
            "0.2",
            "--samples",
            "2000",
        ])
        .output()
        .unwrap();
    assert!(pass.status.success());
}

#[test]
fn errors_exit_nonzero() {
    let missing = bin()
        .args(["icost", "--spec", "/nonexistent/spec.json"])
        .output()
        .unwrap();
    assert_eq!(missing.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&missing.stderr).contains("error"));
    let bad_flag = bin().args(["walk", "--bogus"]).output().unwrap();
    assert!(!bad_flag.status.success());
    let bad_params = bin()
        .args([
            "compress",
            "--epsilon",
            "0.1",
            "--gamma",
            "8",
            "--t-cap",
            "1.0",
            "--trials",
            "2",
        ])
        .output()
        .unwrap();
    assert_eq!(bad_params.status.code(), Some(2));
}

#[test]
fn worker_count_from_the_environment() {
    let out = bin()
        .env("BSCLAB_WORKERS", "2")
        .args(["equiv", "--spec"])
        .arg(spec("noisy_table.json"))
        .args(["--samples", "3000"])
        .output()
        .unwrap();
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stdout)
    );
}
