//! Runs the built binary.

use std::path::Path;
use std::process::Command;

pub struct Run {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

pub fn command() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_saas-pricing"));
    cmd.current_dir(super::fixture_path(""));
    cmd
}

pub fn run(args: &[&str]) -> Run {
    finish(command().args(args))
}

pub fn run_with_env(args: &[&str], key: &str, value: &str) -> Run {
    finish(command().args(args).env(key, value))
}

fn finish(cmd: &mut Command) -> Run {
    let output = cmd.output().unwrap();
    Run {
        code: output.status.code().unwrap_or(-1),
        stdout: String::from_utf8(output.stdout).unwrap(),
        stderr: String::from_utf8(output.stderr).unwrap(),
    }
}

pub fn path_str(path: &Path) -> &str {
    path.to_str().unwrap()
}
