use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn railseg(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_railseg")).args(args).output().unwrap()
}

fn stdout_json(out: &Output) -> Value {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

fn stderr_error(out: &Output) -> Value {
    assert!(!out.status.success());
    let v: Value = serde_json::from_slice(&out.stderr).unwrap();
    v["error"].clone()
}

fn synth(dir: &Path, extra: &[&str]) {
    let d = dir.to_str().unwrap();
    let mut args = vec!["synth", "--seed", "42", "--out", d, "--width", "256", "--height", "192", "--focal", "125"];
    args.extend_from_slice(extra);
    stdout_json(&railseg(&args));
}

#[test]
fn ground_truth_scored_against_itself_is_perfect() {
    let dir = tempfile::tempdir().unwrap();
    synth(dir.path(), &[]);
    let manifest = dir.path().join("manifest.json");
    let gt = dir.path().join("gt");
    let report_path = dir.path().join("out.json");
    let out = railseg(&[
        "--manifest",
        manifest.to_str().unwrap(),
        "evaluate",
        "--pred-dir",
        gt.to_str().unwrap(),
        "--gt-dir",
        gt.to_str().unwrap(),
        "--report",
        report_path.to_str().unwrap(),
    ]);
    let report = stdout_json(&out);
    assert_eq!(report["miou"], 1.0);
    assert_eq!(report["fwiou"], 1.0);
    let on_disk: Value = serde_json::from_slice(&std::fs::read(&report_path).unwrap()).unwrap();
    assert_eq!(on_disk, report);
}

#[test]
fn synth_is_reproducible() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    synth(a.path(), &["--scans", "2"]);
    synth(b.path(), &["--scans", "2"]);
    for rel in ["clouds/scan-0000.bin", "gt/scan-0001.bin", "images/img-0001.pgm"] {
        assert_eq!(std::fs::read(a.path().join(rel)).unwrap(), std::fs::read(b.path().join(rel)).unwrap(), "{rel}");
    }
}

#[test]
fn selection_without_predictions_names_the_scans() {
    let dir = tempfile::tempdir().unwrap();
    synth(dir.path(), &[]);
    let m = dir.path().join("manifest.json");
    let m = m.to_str().unwrap();
    for stage in [&["preprocess"][..], &["sync"], &["motion-correct"], &["transfer"]] {
        let mut args = vec!["--manifest", m];
        args.extend_from_slice(stage);
        stdout_json(&railseg(&args));
    }
    let err = stderr_error(&railseg(&["--manifest", m, "select", "--n", "10"]));
    assert_eq!(err["kind"], "missing_predictions");
    let details: Vec<&str> = err["details"].as_array().unwrap().iter().map(|v| v.as_str().unwrap()).collect();
    assert_eq!(details, ["scan-0000", "scan-0001", "scan-0002"]);
    assert!(err["message"].as_str().unwrap().contains("scan-0002"));
}

#[test]
fn errors_are_structured() {
    let err = stderr_error(&railseg(&["frobnicate"]));
    assert_eq!(err["kind"], "usage");

    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("nope.json");
    let err = stderr_error(&railseg(&["--manifest", missing.to_str().unwrap(), "transfer"]));
    assert_eq!(err["kind"], "io");

    synth(dir.path(), &["--scans", "1", "--test-scans", "0"]);
    let m = dir.path().join("manifest.json");
    let err = stderr_error(&railseg(&[
        "--manifest",
        m.to_str().unwrap(),
        "motion-correct",
        "--speed-source",
        "constant",
    ]));
    assert_eq!(err["kind"], "invalid");

    let err = stderr_error(&railseg(&["--manifest", m.to_str().unwrap(), "select", "--iteration", "soon"]));
    assert_eq!(err["kind"], "usage");
}

#[test]
fn a_held_lock_blocks_a_second_writer() {
    let dir = tempfile::tempdir().unwrap();
    synth(dir.path(), &["--scans", "1", "--test-scans", "0"]);
    let m = dir.path().join("manifest.json");
    let _held = railseg::Dataset::open(&m).unwrap();
    let err = stderr_error(&railseg(&["--manifest", m.to_str().unwrap(), "sync"]));
    assert_eq!(err["kind"], "locked");
}

#[test]
fn help_exits_cleanly() {
    let out = railseg(&["--help"]);
    assert!(out.status.success());
    let text = String::from_utf8_lossy(&out.stdout);
    for sub in ["synth", "preprocess", "sync", "motion-correct", "transfer", "select", "evaluate", "serve"] {
        assert!(text.contains(sub), "{sub} missing from help");
    }
}
