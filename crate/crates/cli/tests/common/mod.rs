#![allow(dead_code)]

use std::path::Path;
use std::process::{Command, Output};

pub fn cli(dir: &Path, args: &[&str]) -> Output {
    cli_env(dir, args, &[])
}

pub fn cli_env(dir: &Path, args: &[&str], env: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_padic-frames"));
    cmd.current_dir(dir).args(args);
    for (k, v) in env {
        cmd.env(k, v);
    }
    cmd.output().expect("binary runs")
}

pub fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

pub fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

/// enumerate-trees → build → frame → verify → approx in `dir`, returning each exit code.
pub fn pipeline(dir: &Path, p: &str, n: &str, m: &str, zeros: &str, env: &[(&str, &str)]) -> Vec<i32> {
    [
        vec!["enumerate-trees", "-p", p, "-N", n, "-M", m, "--max", "50", "--out", "trees.json"],
        vec!["build", "-p", p, "-N", n, "-M", m, "--zeros", zeros],
        vec!["frame", "--mask", "mask.json", "--strategy", "exhaustive"],
        vec!["verify", "--frame", "frame.json", "--corpus-size", "30", "--seed", "42"],
        vec!["approx", "--frame", "frame.json", "--corpus-size", "30", "--seed", "42", "--m", "1", "--m", "2", "--eps", "0.5", "--eps", "1"],
    ]
    .iter()
    .map(|a| code(&cli_env(dir, a, env)))
    .collect()
}

pub const ARTIFACTS: [&str; 6] = [
    "mask.json",
    "frame.json",
    "verify.json",
    "approx.csv",
    "approx.json",
    "trees.json",
];
