//! End-to-end checks of the `rapt` binary.

use std::process::Command;

use serde_json::Value;

fn rapt(args: &[&str]) -> (i32, String, String) {
    let o = Command::new(env!("CARGO_BIN_EXE_rapt")).args(args).env("RAPT_COLOR", "0").output().expect("runs");
    (
        o.status.code().unwrap_or(-1),
        String::from_utf8_lossy(&o.stdout).into_owned(),
        String::from_utf8_lossy(&o.stderr).into_owned(),
    )
}

fn in_process(args: &[&str]) -> (i32, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("rapt").chain(args.iter().copied());
    let code = rapt::cli::run(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap())
}

const SPEC_FILE: &str = "[signature]
alphabet a b c
gamma a b = c

[spec E]
X = a . X + b
";

fn spec_file(name: &str) -> std::path::PathBuf {
    let dir = std::env::temp_dir().join(format!("rapt-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let p = dir.join(name);
    std::fs::write(&p, SPEC_FILE).unwrap();
    p
}

#[test]
fn normalize_prints_a_basic_term() {
    let (code, out, _) = rapt(&["normalize", "a & b"]);
    assert_eq!(code, 0);
    let sig = rapt::term::Signature::suite();
    let got = rapt::syntax::parse_term(out.trim(), &sig).unwrap();
    assert_eq!(got, rapt::syntax::parse_term("(a || b) + c", &sig).unwrap());
    assert_eq!(rapt(&["normalize", "enc{a}(a)"]).1.trim(), "delta");
    assert_eq!(rapt(&["normalize", "a . tau"]).1.trim(), "a . tau");
    assert_eq!(rapt(&["normalize", "--branching", "a . tau"]).1.trim(), "a");
}

#[test]
fn normalize_trace_is_json() {
    let (code, out, _) = rapt(&["normalize", "--trace", "(a + b) . c"]);
    assert_eq!(code, 0);
    let lines: Vec<&str> = out.lines().collect();
    let (last, steps) = lines.split_last().unwrap();
    assert_eq!(*last, "a . c + b . c");
    let first: Value = serde_json::from_str(steps[0]).unwrap();
    assert_eq!(first["rule"], "RA41");
    assert_eq!(first["before"], "(a + b) . c");
    for l in steps {
        serde_json::from_str::<Value>(l).unwrap();
    }
    let (_, out, _) = rapt(&["normalize", "--trace", "--format", "json", "(a + b) . c"]);
    let v: Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["normal_form"], "a . c + b . c");
    assert_eq!(v["trace"].as_array().unwrap().len(), steps.len());
}

#[test]
fn equiv_exit_codes() {
    let (code, out, _) = rapt(&["equiv", "a || b", "b || a", "-k", "fr-hhp"]);
    assert_eq!(code, 0);
    assert!(out.starts_with("equivalent under fr-hhp"));
    let (code, out, _) = rapt(&["equiv", "a || b", "a . b + b . a"]);
    assert_eq!(code, 1);
    assert!(out.starts_with("inequivalent under fr-step"));
    let (code, _, err) = rapt(&["equiv", "a", "b", "-k", "nonsense"]);
    assert_eq!(code, 2);
    assert!(err.contains("error"));
}

#[test]
fn lts_json_and_dot() {
    let (code, out, _) = rapt(&["lts", "a . b", "--format", "json"]);
    assert_eq!(code, 0);
    let v: Value = serde_json::from_str(&out).unwrap();
    let edges = v["edges"].as_array().unwrap();
    assert_eq!(edges.len(), 4);
    assert_eq!(edges.iter().filter(|e| e["dir"] == "fwd").count(), 2);
    assert!(edges.iter().filter(|e| e["dir"] == "rev").all(|e| e["events"][0]["key"].is_u64()));
    let (code, dot, _) = rapt(&["lts", "a . b", "--format", "dot"]);
    assert_eq!(code, 0);
    assert!(dot.starts_with("digraph"));
    assert_eq!(dot.matches("->").count(), 4);
    assert_eq!(dot.matches("style=dashed").count(), 2);
}

#[test]
fn key_limit_is_an_error() {
    let (code, out, err) = rapt(&["--max-key", "3", "lts", "a . b . c . a"]);
    assert_eq!(code, 2);
    assert!(out.is_empty());
    assert!(err.contains("KeyLimitExceeded"));
}

#[test]
fn parse_errors_exit_with_two() {
    let (code, _, err) = rapt(&["lts", "a . (", "--format", "json"]);
    assert_eq!(code, 2);
    assert!(err.contains("error"));
}

#[test]
fn prove_axioms_reports_counts() {
    let (code, out, _) = rapt(&["prove-axioms", "--instances", "5", "--only", "RA5,RU25"]);
    assert_eq!(code, 0);
    assert!(out.contains("RA5"));
    assert!(out.contains("RU25"));
    assert!(out.trim_end().ends_with("failures 0"));
}

#[test]
fn cluster_and_cfar_on_a_file() {
    let p = spec_file("e.rapt");
    let path = p.to_str().unwrap();
    let (code, out, _) = rapt(&["cluster", "-f", path, "--hide", "a"]);
    assert_eq!(code, 0);
    assert!(out.contains('X'));
    let (code, out, _) = rapt(&["cfar", "-f", path, "--var", "X", "--hide", "a", "--format", "json"]);
    assert_eq!(code, 0);
    let v: Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["result"], "tau . b");
    assert_eq!(v["verified"], true);
    let (code, out, _) = rapt(&["fmt", "-f", path]);
    assert_eq!(code, 0);
    assert!(out.contains("[spec E]"));
}

#[test]
fn runs_are_deterministic() {
    for args in [
        &["normalize", "(a + b) . (c || a)"][..],
        &["lts", "a || b . c", "--format", "json"],
        &["equiv", "a . (b + c)", "a . b + a . c", "-k", "fr-hp"],
    ] {
        assert_eq!(in_process(args), in_process(args));
        assert_eq!(in_process(args).1, rapt(args).1);
    }
}
