//! Binary-level checks: exit codes per failure class and artifact reuse
//! across subcommands.

use std::path::{Path, PathBuf};
use std::process::Command;

fn mirlab() -> Command {
    Command::new(env!("CARGO_BIN_EXE_mirlab"))
}

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

fn fast_limits(cmd: &mut Command) -> &mut Command {
    cmd.args([
        "--sep-time-limit",
        "60",
        "--loop-time-limit",
        "600",
        "--max-rounds",
        "2",
        "--eps-bits",
        "4",
        "--sep-node-limit",
        "300",
    ])
}

#[test]
fn unreadable_base_exits_with_parse_code() {
    let dir = tempfile::tempdir().unwrap();
    let output = mirlab()
        .args(["generate", "--base", "/nonexistent/base.mps"])
        .args(["--out", dir.path().to_str().unwrap(), "--family-size", "1"])
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(2));
    assert!(!output.stderr.is_empty(), "expected a diagnostic on stderr");
}

#[test]
fn invalid_config_exits_with_config_code() {
    let dir = tempfile::tempdir().unwrap();
    let output = mirlab()
        .args(["generate", "--base"])
        .arg(fixture("multiknap.mps"))
        .args(["--out", dir.path().to_str().unwrap()])
        .args(["--family-size", "1", "--workers", "0"])
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(3));
}

#[test]
fn impossible_family_exits_with_runtime_code() {
    // a base whose LP optimum never moves cannot yield two distinct optima
    let dir = tempfile::tempdir().unwrap();
    let base = dir.path().join("fixed.mps");
    std::fs::write(
        &base,
        "NAME FIXED\nROWS\n N OBJ\n L R1\nCOLUMNS\n X OBJ 2.0 R1 1.0\nRHS\n RHS R1 0.0\nENDATA\n",
    )
    .unwrap();
    let mut cmd = mirlab();
    cmd.args(["generate", "--base"])
        .arg(&base)
        .args(["--out", dir.path().join("out").to_str().unwrap()])
        .args(["--family-size", "2"]);
    let output = fast_limits(&mut cmd).output().unwrap();
    assert_eq!(output.status.code(), Some(4));
}

#[test]
fn empty_family_succeeds() {
    let dir = tempfile::tempdir().unwrap();
    let mut cmd = mirlab();
    cmd.args(["generate", "--base"])
        .arg(fixture("multiknap.mps"))
        .args(["--out", dir.path().to_str().unwrap()])
        .args(["--family-size", "0"]);
    let output = fast_limits(&mut cmd).output().unwrap();
    assert_eq!(output.status.code(), Some(0), "{:?}", output);
    assert!(dir.path().join("family.json").exists());
}

#[test]
fn single_variation_dataset_cannot_be_split() {
    let dir = tempfile::tempdir().unwrap();
    let mut cmd = mirlab();
    cmd.args(["generate", "--base"])
        .arg(fixture("multiknap.mps"))
        .args(["--out", dir.path().to_str().unwrap()])
        .args(["--family-size", "1", "--seed", "3", "--min-gap", "0"]);
    assert_eq!(fast_limits(&mut cmd).output().unwrap().status.code(), Some(0));

    let output = mirlab()
        .args(["train", "--dataset"])
        .arg(dir.path().join("dataset.csv"))
        .args(["--out", dir.path().to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(3));
}

#[test]
fn train_reruns_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let mut cmd = mirlab();
    cmd.args(["generate", "--base"])
        .arg(fixture("multiknap.mps"))
        .args(["--out", dir.path().to_str().unwrap()])
        .args(["--family-size", "6", "--seed", "11", "--min-gap", "0"]);
    assert_eq!(fast_limits(&mut cmd).output().unwrap().status.code(), Some(0));

    let out_a = dir.path().join("a");
    let out_b = dir.path().join("b");
    for out in [&out_a, &out_b] {
        let output = mirlab()
            .args(["train", "--dataset"])
            .arg(dir.path().join("dataset.csv"))
            .args(["--out", out.to_str().unwrap(), "--seed", "5"])
            .output()
            .unwrap();
        assert_eq!(output.status.code(), Some(0), "{:?}", output);
    }
    let model_a = std::fs::read(out_a.join("model.json")).unwrap();
    let model_b = std::fs::read(out_b.join("model.json")).unwrap();
    assert_eq!(model_a, model_b, "model files differ between reruns");
}
