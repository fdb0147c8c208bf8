use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn binary() -> &'static str {
    env!("CARGO_BIN_EXE_lorentz")
}

fn write_config(dir: &Path, text: &str) -> PathBuf {
    let path = dir.join("config.json");
    std::fs::write(&path, text).unwrap();
    path
}

fn run(config: &Path, out: &Path, extra: &[&str]) -> Output {
    Command::new(binary())
        .arg("run")
        .arg("--config")
        .arg(config)
        .arg("--out")
        .arg(out)
        .args(extra)
        .output()
        .unwrap()
}

fn data_rows(csv: &str) -> Vec<Vec<String>> {
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_reader(csv.as_bytes());
    reader
        .records()
        .map(|r| r.unwrap().iter().map(str::to_string).collect())
        .collect()
}

const SSRW: &str = r#"{
  "experiment": "ssrw",
  "seed": 7,
  "system": {"kind": "ssrw", "dim": 2},
  "n": [2, 4],
  "mode": "exact"
}"#;

const BILLIARD_LCLT: &str = r#"{
  "experiment": "lclt",
  "seed": 11,
  "system": {"kind": "billiard"},
  "n": [10, 20],
  "ensemble": 3000,
  "green_kubo": {"max_lag": 5, "streams": 4, "stream_length": 2000}
}"#;

#[test]
fn minimal_ssrw_config_gives_exact_rows() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SSRW);
    let out = dir.path().join("out");
    let o = run(&cfg, &out, &[]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = std::fs::read_to_string(out.join("ssrw.csv")).unwrap();
    assert!(csv.starts_with("# n:"));
    let rows = data_rows(&csv);
    assert_eq!(rows.len(), 2);
    assert_eq!(rows[0][0], "2");
    assert_eq!(rows[0][1].parse::<f64>().unwrap(), 0.25);
    assert_eq!(rows[1][0], "4");
    assert_eq!(rows[1][1].parse::<f64>().unwrap(), 0.140625);
}

#[test]
fn unknown_key_exits_2_naming_it() {
    let dir = tempfile::tempdir().unwrap();
    let text = SSRW.replace("\"mode\": \"exact\"", "\"mode\": \"exact\",\n  \"trajectorees\": 5");
    let cfg = write_config(dir.path(), &text);
    let o = run(&cfg, &dir.path().join("out"), &[]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("trajectorees"), "{err}");
    assert!(err.contains("line"), "{err}");
}

#[test]
fn malformed_json_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "{\"experiment\": \"ssrw\",");
    let o = run(&cfg, &dir.path().join("out"), &[]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn infinite_horizon_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        r#"{"experiment": "simulate", "seed": 1, "n": [10], "ensemble": 10,
            "system": {"kind": "billiard", "disks": [{"center": [0.0, 0.0], "radius": 0.3}]}}"#,
    );
    let o = run(&cfg, &dir.path().join("out"), &[]);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("infinite horizon"));
}

#[test]
fn horizon_guard_exits_4() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        r#"{"experiment": "simulate", "seed": 1, "n": [10], "ensemble": 10,
            "system": {"kind": "billiard", "tau_max_hint": 0.01}}"#,
    );
    let o = run(&cfg, &dir.path().join("out"), &[]);
    assert_eq!(o.status.code(), Some(4));
}

fn read_all(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<_> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (e.file_name().to_string_lossy().into_owned(), std::fs::read(e.path()).unwrap())
        })
        .collect();
    files.sort();
    files
}

#[test]
fn reruns_are_byte_identical_across_thread_counts() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), BILLIARD_LCLT);
    let (a, b, c) = (dir.path().join("a"), dir.path().join("b"), dir.path().join("c"));
    for (out, threads) in [(&a, "1"), (&b, "1"), (&c, "3")] {
        let o = run(&cfg, out, &["--threads", threads]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    }
    let first = read_all(&a);
    assert_eq!(first.len(), 2);
    assert_eq!(first, read_all(&b));
    assert_eq!(first, read_all(&c));
}

#[test]
fn seed_flag_overrides_and_is_recorded() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SSRW);
    let out = dir.path().join("out");
    assert!(run(&cfg, &out, &["--seed", "99"]).status.success());
    let summary: Value = serde_json::from_slice(&std::fs::read(out.join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["seed"], 99);
    assert_eq!(summary["config"]["seed"], 99);
}

fn schema() -> Value {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("schema/summary.schema.json");
    serde_json::from_slice(&std::fs::read(path).unwrap()).unwrap()
}

#[test]
fn summaries_validate_against_schema() {
    let validator = jsonschema::validator_for(&schema()).unwrap();
    let configs = [
        SSRW.to_string(),
        BILLIARD_LCLT.to_string(),
        r#"{"experiment": "spectral", "seed": 1, "system": {"kind": "dyadic", "depth": 2, "values": [2, 0, 0, -2]},
            "t_grid": {"min": 0.0, "max": 3.0, "points": 7}}"#
            .into(),
        r#"{"experiment": "arithmetic", "seed": 1, "resolution": 256,
            "system": {"kind": "dyadic", "depth": 2, "values": [1, 0, 0, -1]}}"#
            .into(),
        r#"{"experiment": "recurrence", "seed": 2, "system": {"kind": "ssrw", "dim": 2},
            "n": [10, 100, 1000], "ensemble": 2000, "mode": "monte_carlo"}"#
            .into(),
        r#"{"experiment": "joint", "seed": 3, "system": {"kind": "ssrw", "dim": 1},
            "pairs": [[20, 60]], "ensemble": 5000}"#
            .into(),
        r#"{"experiment": "simulate", "seed": 4, "system": {"kind": "dyadic", "depth": 1, "values": [1, -1]},
            "n": [16], "ensemble": 2000, "green_kubo": {"max_lag": 2, "streams": 2, "stream_length": 1000}}"#
            .into(),
    ];
    for (i, text) in configs.iter().enumerate() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = write_config(dir.path(), text);
        let out = dir.path().join("out");
        let o = run(&cfg, &out, &[]);
        assert!(o.status.success(), "config {i}: {}", String::from_utf8_lossy(&o.stderr));
        let summary: Value = serde_json::from_slice(&std::fs::read(out.join("summary.json")).unwrap()).unwrap();
        let errors: Vec<String> = validator.iter_errors(&summary).map(|e| e.to_string()).collect();
        assert!(errors.is_empty(), "config {i}: {errors:?}");
        for file in summary["files"].as_array().unwrap() {
            assert!(out.join(file.as_str().unwrap()).exists());
        }
    }
}

#[test]
fn schema_rejects_a_broken_summary() {
    let validator = jsonschema::validator_for(&schema()).unwrap();
    let bad = serde_json::json!({"experiment": "ssrw", "seed": -1});
    assert!(!validator.is_valid(&bad));
}
