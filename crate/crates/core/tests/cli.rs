//! End-to-end tests of the command-line surface: file formats, exit codes,
//! and output shapes.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn cslab(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cslab"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn exit_code(out: &Output) -> i32 {
    out.status.code().expect("no signal")
}

#[test]
fn code_gen_verify_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let out = cslab(&["code", "gen", "-n", "6", "--profile", "desk16", "-o", "code.txt"], dir.path());
    assert_eq!(exit_code(&out), 0, "{out:?}");

    let out = cslab(&["code", "verify", "--code", "code.txt", "-n", "6"], dir.path());
    assert_eq!(exit_code(&out), 0);
    assert!(stdout(&out).contains("pass"));

    // Duplicating a member breaks the pairwise-distance contract.
    let text = fs::read_to_string(dir.path().join("code.txt")).unwrap();
    let mut lines: Vec<&str> = text.lines().collect();
    lines[2] = lines[1];
    fs::write(dir.path().join("bad.txt"), lines.join("\n") + "\n").unwrap();
    let out = cslab(&["code", "verify", "--code", "bad.txt"], dir.path());
    assert_eq!(exit_code(&out), 1);
    assert!(stdout(&out).contains("FAIL"));
}

#[test]
fn solve_and_verify_center_flows() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("tiny.txt"), "2 3 2\n000\n111\n").unwrap();

    let out = cslab(&["solve", "--instance", "tiny.txt", "--algo", "brute"], dir.path());
    assert_eq!(exit_code(&out), 0);
    assert!(stdout(&out).contains("optimum: 2"));
    assert!(stdout(&out).contains("witness: 001"));

    let out = cslab(
        &["--format", "json", "solve", "--instance", "tiny.txt", "--algo", "branch", "--d", "1"],
        dir.path(),
    );
    assert_eq!(exit_code(&out), 0);
    let parsed: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(parsed["decision"], "no");

    let out = cslab(&["solve", "--instance", "tiny.txt", "--algo", "branch", "--d", "2"], dir.path());
    assert_eq!(exit_code(&out), 0);
    assert!(stdout(&out).starts_with("yes"));

    let out = cslab(&["verify-center", "--instance", "tiny.txt", "--center", "001"], dir.path());
    assert_eq!(exit_code(&out), 0);
    let out = cslab(&["verify-center", "--instance", "tiny.txt", "--center", "111"], dir.path());
    assert_eq!(exit_code(&out), 1, "max distance 3 exceeds d=2");
    let out = cslab(&["verify-center", "--instance", "tiny.txt", "--center", "11"], dir.path());
    assert_eq!(exit_code(&out), 2, "length mismatch is a usage error");
}

#[test]
fn reduce_writes_instance_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("c5.txt"), "5 5 3\n1 2\n2 3\n3 4\n4 5\n5 1\n").unwrap();

    let out = cslab(
        &[
            "reduce", "--graph", "c5.txt", "--mode", "sampled", "--seed", "7", "--sel-samples",
            "40", "--adj-samples", "10", "-o", "inst.txt", "--manifest", "man.txt",
        ],
        dir.path(),
    );
    assert_eq!(exit_code(&out), 0);
    let inst = fs::read_to_string(dir.path().join("inst.txt")).unwrap();
    assert!(inst.starts_with("50 52 34\n"));
    assert_eq!(inst.lines().count(), 51);
    let manifest = fs::read_to_string(dir.path().join("man.txt")).unwrap();
    assert!(manifest.contains("schema: cslab-manifest/1"));
    assert!(manifest.contains("gap_target: 35"));

    // Full mode over a tiny budget refuses with a budget error.
    let out = cslab(
        &["reduce", "--graph", "c5.txt", "--mode", "full", "--max-constraints", "100", "-o", "x.txt"],
        dir.path(),
    );
    assert_eq!(exit_code(&out), 2);
}

#[test]
fn gap_test_end_to_end() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("c5.txt"), "5 5 3\n1 2\n2 3\n3 4\n4 5\n5 1\n").unwrap();
    let out = cslab(&["gap-test", "--graph", "c5.txt", "--report", "report.txt"], dir.path());
    assert_eq!(exit_code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let text = stdout(&out);
    assert!(text.contains("clique: no"));
    assert!(text.contains("verdict: PASS"));
    assert!(!text.contains("timings"), "timings only appear with --timings");
    let report = fs::read_to_string(dir.path().join("report.txt")).unwrap();
    assert_eq!(report, text);
}

#[test]
fn bench_reports_refusals_without_failing() {
    let dir = tempfile::tempdir().unwrap();
    let out = cslab(
        &["bench", "--n", "5", "--k-min", "2", "--k-max", "3", "--max-constraints", "10"],
        dir.path(),
    );
    assert_eq!(exit_code(&out), 0);
    let text = stdout(&out);
    assert_eq!(text.lines().count(), 3, "header plus one row per k");
    assert!(text.contains("refused"));
}

#[test]
fn usage_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let out = cslab(&["solve", "--instance", "missing.txt", "--algo", "brute"], dir.path());
    assert_eq!(exit_code(&out), 2);
    let out = cslab(&["gap-test", "--graph", "nope.txt"], dir.path());
    assert_eq!(exit_code(&out), 2);
    let out = cslab(&["code", "gen", "-n", "3", "--profile", "bogus"], dir.path());
    assert_eq!(exit_code(&out), 2);
    let out = cslab(&["nonsense"], dir.path());
    assert_eq!(exit_code(&out), 2);
}
