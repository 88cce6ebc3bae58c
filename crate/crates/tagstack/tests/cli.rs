use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tagstack::io::{assignments_jsonl, stacks_jsonl};
use tagstack_core::corpus::example_fixture;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tagstack"))
        .args(args)
        .output()
        .unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn fixture(dir: &Path) -> (PathBuf, PathBuf) {
    let d = example_fixture();
    let a = dir.join("assignments.jsonl");
    let st = dir.join("stacks.jsonl");
    fs::write(&a, assignments_jsonl(&d)).unwrap();
    fs::write(&st, stacks_jsonl(&d)).unwrap();
    (a, st)
}

#[test]
fn stats_on_fixture() {
    let dir = tempfile::tempdir().unwrap();
    let (a, st) = fixture(dir.path());
    let out = run(&["stats", "--assignments", s(&a), "--stacks", s(&st)]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("metric,value\n"));
    assert!(text.contains("stacked_fraction,0.714286\n"), "{text}");
    assert!(text.contains("common_tag_stack_fraction,1.000000\n"), "{text}");
}

#[test]
fn empty_stacks_file_gives_na() {
    let dir = tempfile::tempdir().unwrap();
    let (a, _) = fixture(dir.path());
    let empty = dir.path().join("none.jsonl");
    fs::write(&empty, "").unwrap();
    let out = run(&["stats", "--assignments", s(&a), "--stacks", s(&empty)]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("common_tag_stack_fraction,NA\n"), "{text}");
    // nothing to evaluate is a data error
    let out = run(&["sweep", "--assignments", s(&a), "--stacks", s(&empty)]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let (a, st) = fixture(dir.path());
    let missing = dir.path().join("missing.jsonl");
    assert_eq!(
        run(&["stats", "--assignments", s(&missing), "--stacks", s(&st)])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        run(&[
            "sweep",
            "--assignments",
            s(&a),
            "--stacks",
            s(&st),
            "--k-min",
            "5",
            "--k-max",
            "3"
        ])
        .status
        .code(),
        Some(1)
    );
    assert_eq!(
        run(&["bench", "--assignments", s(&a), "--stacks", s(&st), "--runs", "0"])
            .status
            .code(),
        Some(1)
    );
    assert_eq!(run(&["sweep", "--assignments", s(&a)]).status.code(), Some(1));
    assert_eq!(run(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(run(&["--help"]).status.code(), Some(0));

    let bad = dir.path().join("bad.jsonl");
    fs::write(&bad, "{\"user\":\"u\",\"url\":\"x\",\"tags\":[]}\nnot json\n").unwrap();
    let out = run(&["stats", "--assignments", s(&bad), "--stacks", s(&st)]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("bad.jsonl:2:"));

    let infeasible = run(&[
        "synth",
        "--out",
        s(&dir.path().join("x")),
        "--pages-min",
        "1",
        "--pages-max",
        "1",
        "--topics-min",
        "1",
        "--topics-max",
        "1",
        "--common-tag-fraction",
        "0",
    ]);
    assert_eq!(infeasible.status.code(), Some(2));
}

#[test]
fn sweep_writes_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let (a, st) = fixture(dir.path());
    let out = dir.path().join("sweep.csv");
    assert!(run(&[
        "sweep",
        "--assignments",
        s(&a),
        "--stacks",
        s(&st),
        "--k-max",
        "4",
        "--out",
        s(&out)
    ])
    .status
    .success());
    let csv = fs::read_to_string(&out).unwrap();
    assert_eq!(csv.lines().next(), Some("k,macro_p,macro_r,macro_f1"));
    assert_eq!(csv.lines().count(), 4);
    // the fixture's stacks are recovered exactly at K=3
    assert!(csv.contains("\n3,1.000000,1.000000,1.000000\n"), "{csv}");
    let m: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("sweep.manifest.json")).unwrap()).unwrap();
    assert_eq!(m["command"], "sweep");
    assert_eq!(m["params"]["k_min"], 2);
    assert_eq!(m["params"]["seed"], 42);
    assert_eq!(m["inputs"].as_array().unwrap().len(), 2);
    assert_eq!(m["outputs"][0]["sha256"].as_str().unwrap().len(), 64);
}

#[test]
fn bench_runs_only_change_random_rows() {
    let dir = tempfile::tempdir().unwrap();
    let (a, st) = fixture(dir.path());
    let bench = |runs: &str| {
        let o = run(&["bench", "--assignments", s(&a), "--stacks", s(&st), "--runs", runs]);
        assert!(o.status.success());
        String::from_utf8(o.stdout).unwrap()
    };
    let (one, ten) = (bench("1"), bench("10"));
    for (x, y) in one.lines().zip(ten.lines()) {
        let method = x.split(',').nth(1).unwrap();
        if method == "rbr" || method == "optimal_k" {
            assert_eq!(x, y);
        }
    }
    assert_eq!(one.lines().count(), 1 + 9 * 4);
}

#[test]
fn synth_is_seeded() {
    let dir = tempfile::tempdir().unwrap();
    let gen = |name: &str, seed: &str| {
        let out = dir.path().join(name);
        assert!(run(&["synth", "--out", s(&out), "--users", "15", "--seed", seed])
            .status
            .success());
        let read = |f: &str| fs::read(out.join(f)).unwrap();
        (
            read("assignments.jsonl"),
            read("stacks.jsonl"),
            read("topics.jsonl"),
            out,
        )
    };
    let a = gen("a", "7");
    let b = gen("b", "7");
    let c = gen("c", "8");
    assert_eq!((&a.0, &a.1, &a.2), (&b.0, &b.1, &b.2));
    assert_ne!(a.0, c.0);
    let topics = String::from_utf8(a.2.clone()).unwrap();
    let first: serde_json::Value = serde_json::from_str(topics.lines().next().unwrap()).unwrap();
    assert!(first["user"].is_string() && first["topic"].is_string() && first["urls"].is_array());
    assert!(a.3.join("manifest.json").exists());

    let stats = run(&[
        "stats",
        "--assignments",
        s(&a.3.join("assignments.jsonl")),
        "--stacks",
        s(&a.3.join("stacks.jsonl")),
    ]);
    let text = String::from_utf8(stats.stdout).unwrap();
    let sf: f64 = text
        .lines()
        .find_map(|l| l.strip_prefix("stacked_fraction,"))
        .unwrap()
        .parse()
        .unwrap();
    assert!((sf - 0.248).abs() <= 0.03, "{sf}");
}

#[test]
fn default_synth_is_the_standard_benchmark() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("std");
    assert!(run(&["synth", "--out", s(&out)]).status.success());
    let (d, _) = tagstack_core::synth::standard_benchmark();
    assert_eq!(fs::read(out.join("assignments.jsonl")).unwrap(), assignments_jsonl(&d));
    assert_eq!(fs::read(out.join("stacks.jsonl")).unwrap(), stacks_jsonl(&d));
}
