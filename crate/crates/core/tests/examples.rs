// Every shipped example must run to completion. `cargo test` builds the
// example binaries next to the test executables.

use std::path::PathBuf;
use std::process::Command;

fn example_binary(name: &str) -> PathBuf {
    let exe = std::env::current_exe().unwrap();
    let profile = exe.parent().unwrap().parent().unwrap();
    profile.join("examples").join(format!("{name}{}", std::env::consts::EXE_SUFFIX))
}

fn run(name: &str) -> String {
    let path = example_binary(name);
    if !path.exists() {
        // Running a single test target does not build the examples.
        let cargo = std::env::var("CARGO").unwrap_or_else(|_| "cargo".into());
        let status = Command::new(cargo)
            .args(["build", "-q", "-p", "markov-mask", "--example", name])
            .status()
            .unwrap();
        assert!(status.success(), "building example {name}");
    }
    let out = Command::new(&path)
        .output()
        .unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    let stdout = String::from_utf8_lossy(&out.stdout).into_owned();
    assert!(
        out.status.success(),
        "{name} failed\n{stdout}\n{}",
        String::from_utf8_lossy(&out.stderr)
    );
    stdout
}

#[test]
fn classify() {
    assert!(run("classify").contains("2 transient states, 2 closed classes"));
}

#[test]
fn absorbing_expectations() {
    assert!(run("absorbing_expectations").contains("steps from t2            2"));
}

#[test]
fn steady_state() {
    assert!(run("steady_state").contains("time in a      0.75"));
}

#[test]
fn lead_changes() {
    assert!(run("lead_changes").contains("3 players: 64 states"));
}

#[test]
fn conditioning() {
    assert!(run("conditioning").contains("within bounds: true"));
}

#[test]
fn monte_carlo() {
    assert!(run("monte_carlo").contains("one thread gives the same mean: true"));
}

#[test]
fn file_formats() {
    assert!(run("file_formats").contains("matrix market round trip exact: true"));
}

#[test]
fn chutes_table() {
    let out = run("chutes_table");
    assert!(out.contains("game_length              39.598366"), "{out}");
    assert!(out.contains("6724 states"));
}
