//! End-to-end tests of the command-line interface: exit-code contract and
//! deterministic outputs.

use std::fs;
use std::path::PathBuf;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_smallcancel"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn tmp(name: &str, content: &str) -> PathBuf {
    let dir = std::env::temp_dir().join("smallcancel-cli-tests");
    fs::create_dir_all(&dir).unwrap();
    let path = dir.join(name);
    fs::write(&path, content).unwrap();
    path
}

#[test]
fn generate_then_check_passes() {
    let out = run(&["generate", "--p", "7", "--N", "5"]);
    assert!(out.status.success());
    let pres = String::from_utf8(out.stdout).unwrap();
    assert!(pres.starts_with("alphabet: a b\n"));
    let path = tmp("fam_p7_n5.txt", &pres);
    let out = run(&["check", "--condition", "c", "--n", "7", "--presentation", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let report = String::from_utf8(out.stdout).unwrap();
    assert!(report.contains("verdict: pass"));
    assert!(report.contains("truncation: N=5"));
}

#[test]
fn check_fail_exit_code_and_witness() {
    let path = tmp("commutator.txt", "alphabet: a b\na b A B\n");
    let out = run(&["check", "--condition", "c", "--n", "6", "--presentation", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let report = String::from_utf8(out.stdout).unwrap();
    assert!(report.contains("verdict: fail"));
    assert!(report.contains("decomposition: 4 pieces"));
}

#[test]
fn malformed_file_exits_2_with_position() {
    let path = tmp("bad.txt", "alphabet: a\nx y z\n");
    let out = run(&["check", "--condition", "c", "--n", "6", "--presentation", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("line 2"), "diagnostic must carry the position: {err}");
}

#[test]
fn deterministic_output() {
    let path = tmp("fam_det.txt", &{
        let out = run(&["generate", "--p", "7", "--N", "4"]);
        String::from_utf8(out.stdout).unwrap()
    });
    let a = run(&["check", "--condition", "cprime", "--lambda", "1/6", "--presentation", path.to_str().unwrap()]);
    let b = run(&["check", "--condition", "cprime", "--lambda", "1/6", "--presentation", path.to_str().unwrap()]);
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(a.status.code(), b.status.code());
}

#[test]
fn curvature_prints_six() {
    // Tetrahedron as a diagram file.
    let d = smallcancel::diagram::fixtures::tetrahedron();
    let text = smallcancel::diagram::write_diagram(&d);
    let path = tmp("tetra.d", &text);
    let out = run(&["curvature", "--diagram", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(String::from_utf8(out.stdout).unwrap().trim(), "6");
}

#[test]
fn graph_checks_and_completion() {
    let g = "alphabet: a b\nA B a\nB C a\nC D b\nE D a\nF E b\nA F b\n";
    let gp = tmp("differences.g", g);
    let out = run(&["check", "--condition", "gr", "--n", "6", "--graph", gp.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));

    let f = "factor Za cyclic\ngen a\nradius 3\nfactor Zb cyclic\ngen b\nradius 3\n";
    let fp = tmp("zz.factors", f);
    let out = run(&[
        "check", "--condition", "grstar", "--n", "6",
        "--graph", gp.to_str().unwrap(), "--factors", fp.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(1));
    let report = String::from_utf8(out.stdout).unwrap();
    assert!(report.contains("decomposition: 2 pieces"));

    let out = run(&["completion", "--graph", gp.to_str().unwrap(), "--factors", fp.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("embedded: true"));
}

#[test]
fn distortion_certificate() {
    let gp = tmp("a7b.g", "alphabet: a b\nv0 v1 a\nv1 v2 a\nv2 v3 a\nv3 v4 a\nv4 v5 a\nv5 v6 a\nv6 v7 a\nv7 v0 b\n");
    let out = run(&["distortion", "--graph", gp.to_str().unwrap(), "--word", "a"]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("case: 2b"));
    assert!(text.contains("C0: 7"));
    assert!(text.contains("lower-bound: 1/7"));
    assert!(text.contains("hausdorff: 43"));
    // a^7 b is not Gr'(1/6): flagged, nonzero exit.
    assert_eq!(out.status.code(), Some(1));

    let out = run(&["distortion", "--graph", gp.to_str().unwrap(), "--word", "a", "--strict"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn witness_command() {
    let fam = run(&["generate", "--p", "7", "--N", "16"]);
    let path = tmp("fam16.txt", &String::from_utf8(fam.stdout).unwrap());
    let out = run(&["witness", "--presentation", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("W1: 256 words"));
    assert!(text.contains("W2: 256 words"));
    let short = run(&["generate", "--p", "7", "--N", "15"]);
    let path = tmp("fam15.txt", &String::from_utf8(short.stdout).unwrap());
    let out = run(&["witness", "--presentation", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}
