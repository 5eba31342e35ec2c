//! End-to-end tests for the installed binary: golden outputs for the bundled
//! fixtures, the exit code contract, and byte-level determinism.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn fixtures_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

fn lamhat(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lamhat"))
        .args(args)
        .current_dir(Path::new(env!("CARGO_MANIFEST_DIR")).join("../.."))
        .output()
        .expect("binary runs")
}

fn stdout_of(out: &Output) -> &str {
    std::str::from_utf8(&out.stdout).expect("stdout is utf-8")
}

fn code_of(out: &Output) -> i32 {
    out.status.code().expect("no signal")
}

#[test]
fn eval_trace_replays_the_running_example() {
    let fixture = fixtures_dir().join("running_example.lamhat");
    let out = lamhat(&["eval", "--trace", fixture.to_str().unwrap()]);
    assert_eq!(
        code_of(&out),
        0,
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );

    let lines: Vec<&str> = stdout_of(&out).lines().collect();
    assert_eq!(lines.len(), 8, "expected 6 steps + 2 summary lines");
    let rules: Vec<&str> = lines[..6]
        .iter()
        .map(|l| l.split_whitespace().next().unwrap())
        .collect();
    assert_eq!(rules, ["dB", "e", "c", "e", "e", "e"]);
    assert_eq!(lines[6], "steps=(1,1,0,4)");
    assert_eq!(lines[7], "normal: C0");
}

#[test]
fn classify_reports_the_applied_data_clash() {
    let fixture = fixtures_dir().join("data_applied.lamhat");
    let out = lamhat(&["classify", fixture.to_str().unwrap()]);
    assert_eq!(
        stdout_of(&out),
        "neutral, clash: yes@here, clash-free-nf: no\n"
    );
    assert_eq!(code_of(&out), 2);
}

#[test]
fn check_accepts_the_committed_derivation() {
    let fixture = fixtures_dir().join("sigma.json");
    let out = lamhat(&["check", fixture.to_str().unwrap()]);
    assert_eq!(stdout_of(&out), "ok size=11\n");
    assert_eq!(code_of(&out), 0);
}

#[test]
fn synth_emits_a_derivation_that_checks() {
    let dir = tempfile::tempdir().unwrap();
    let emitted = dir.path().join("derivation.json");
    let fixture = fixtures_dir().join("running_example.lamhat");

    let out = lamhat(&[
        "synth",
        "--emit",
        emitted.to_str().unwrap(),
        fixture.to_str().unwrap(),
    ]);
    assert_eq!(stdout_of(&out), "typable: steps=6 bound=12\n");
    assert_eq!(code_of(&out), 0);

    let check = lamhat(&["check", emitted.to_str().unwrap()]);
    assert_eq!(stdout_of(&check), "ok size=12\n");
    assert_eq!(code_of(&check), 0);
}

#[test]
fn exit_codes_follow_the_contract() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.lamhat");
    std::fs::write(&bad, "case x of {}\n").unwrap();
    let open = dir.path().join("open.lamhat");
    std::fs::write(&open, "x y\n").unwrap();
    let omega = fixtures_dir().join("omega.lamhat");

    assert_eq!(
        code_of(&lamhat(&["bogus"])),
        1,
        "unknown subcommand is a usage error"
    );
    assert_eq!(
        code_of(&lamhat(&["eval", "missing.lamhat"])),
        1,
        "unreadable file"
    );
    assert_eq!(
        code_of(&lamhat(&["eval", bad.to_str().unwrap()])),
        1,
        "empty case is a parse error"
    );
    assert_eq!(
        code_of(&lamhat(&["eval", open.to_str().unwrap()])),
        2,
        "open term without --open"
    );
    assert_eq!(
        code_of(&lamhat(&["eval", "--open", open.to_str().unwrap()])),
        0
    );
    assert_eq!(
        code_of(&lamhat(&["synth", "--open", open.to_str().unwrap()])),
        1,
        "synth has no --open flag"
    );
    assert_eq!(
        code_of(&lamhat(&["eval", "--fuel", "20", omega.to_str().unwrap()])),
        3,
        "fuel exhaustion"
    );
    assert_eq!(
        code_of(&lamhat(&["synth", "--fuel", "20", omega.to_str().unwrap()])),
        3,
        "no synthesis verdict"
    );
    assert_eq!(code_of(&lamhat(&["--help"])), 0);
}

#[test]
fn simulate_certifies_the_value_beta_step() {
    let fixture = fixtures_dir().join("beta_identity.cbv");
    let out = lamhat(&[
        "simulate",
        "--from",
        "cbv",
        "--steps",
        "3",
        fixture.to_str().unwrap(),
    ]);
    assert_eq!(code_of(&out), 0);

    let text = stdout_of(&out);
    let rules: Vec<&str> = text
        .lines()
        .filter(|l| l.starts_with("  "))
        .map(|l| l.split_whitespace().next().unwrap())
        .collect();
    assert_eq!(rules, ["m", "e", "m", "e", "dB", "e"]);
    assert!(text.ends_with("certified 1 source steps\n"));
}

#[test]
fn encode_prints_the_translation() {
    let fixture = fixtures_dir().join("beta_identity.cbn");
    let out = lamhat(&["encode", "--from", "cbn", fixture.to_str().unwrap()]);
    assert_eq!(code_of(&out), 0);
    let printed = stdout_of(&out).trim_end();
    assert!(!printed.is_empty());

    let (_, _) = lamhat::parse::parse_term(printed).expect("translations re-parse");
}

#[test]
fn examples_lists_every_bundled_term() {
    let out = lamhat(&["examples"]);
    assert_eq!(code_of(&out), 0);
    let text = stdout_of(&out);
    for name in [
        "running-example",
        "omega",
        "data-applied",
        "exception-value",
        "exception-handled",
        "exception-propagated",
    ] {
        assert!(text.contains(&format!("# {name}\n")), "missing {name}");
    }
}

#[test]
fn identical_invocations_produce_identical_bytes() {
    let running = fixtures_dir().join("running_example.lamhat");
    let sigma = fixtures_dir().join("sigma.json");
    let cbv = fixtures_dir().join("beta_identity.cbv");
    let invocations: Vec<Vec<&str>> = vec![
        vec!["eval", "--trace", running.to_str().unwrap()],
        vec!["classify", running.to_str().unwrap()],
        vec!["check", sigma.to_str().unwrap()],
        vec!["synth", running.to_str().unwrap()],
        vec![
            "simulate",
            "--from",
            "cbv",
            "--steps",
            "3",
            cbv.to_str().unwrap(),
        ],
        vec!["examples"],
    ];
    for args in invocations {
        let first = lamhat(&args);
        let second = lamhat(&args);
        assert_eq!(first.stdout, second.stdout, "stdout drifted for {args:?}");
        assert_eq!(first.stderr, second.stderr, "stderr drifted for {args:?}");
        assert_eq!(first.status.code(), second.status.code());
    }
}
