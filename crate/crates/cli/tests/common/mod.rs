#![allow(dead_code)]

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

pub fn poletsky(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_poletsky"))
        .args(args)
        .output()
        .expect("binary runs")
}

pub fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

pub fn stdout_json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!(
            "stdout is not JSON ({e}): {}\nstderr: {}",
            String::from_utf8_lossy(&out.stdout),
            String::from_utf8_lossy(&out.stderr)
        )
    })
}

pub fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path
}

pub fn read_json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

/// One-line verdict that shows up even when test output is captured.
pub fn verdict(id: &str, passed: bool, detail: &str) {
    let word = if passed { "PASS" } else { "FAIL" };
    let _ = writeln!(std::io::stderr(), "[acceptance] {id} {word} {detail}");
}

pub const MOBIUS_DISC: &str = r#"{"dimension": 1, "degree": 1, "coords": [[[0, 0], [0.99, 0]]]}"#;
/// Hits −0.09 at 0.3 and 0.6.
pub const QUADRATIC_DISC: &str = r#"{"dimension": 1, "degree": 2, "coords": [[[0, 0], [-0.45, 0], [0.5, 0]]]}"#;
/// Hits 0.18 at 0.2.
pub const LINEAR_DISC: &str = r#"{"dimension": 1, "degree": 1, "coords": [[[0, 0], [0.9, 0]]]}"#;

/// Runs `construct` for the Möbius example at level `n` and radius index 10.
pub fn construct_mobius(dir: &Path, n: f64, out: &str) -> (Output, PathBuf) {
    let disc = write(dir, "mobius_disc.json", MOBIUS_DISC);
    let cert = dir.join(out);
    let d = disc.to_str().unwrap();
    let level = n.to_string();
    let o = poletsky(&[
        "construct", "--domain", "disc", "disc", "--pole", "0.5,0.3", "--base", "0,0", "--level", &level,
        "--disc", d, d, "--radius-index", "10", "--out", cert.to_str().unwrap(),
    ]);
    (o, cert)
}

/// Runs `construct` for the two-preimage example at level 0.3.
pub fn construct_punctured(dir: &Path, out: &str) -> (Output, PathBuf) {
    let d1 = write(dir, "quadratic_disc.json", QUADRATIC_DISC);
    let d2 = write(dir, "linear_disc.json", LINEAR_DISC);
    let cert = dir.join(out);
    let o = poletsky(&[
        "construct", "--domain", "disc", "disc", "--pole=-0.09,0.18", "--base", "0,0", "--level", "0.3",
        "--disc", d1.to_str().unwrap(), d2.to_str().unwrap(), "--out", cert.to_str().unwrap(),
    ]);
    (o, cert)
}
