//! End-to-end runs of the `cwe-senses` binary over the bundled fixtures.

mod common;

use std::path::Path;
use std::process::{Command, Output};

use common::fixture;
use serde_json::Value;

fn cli(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cwe-senses"))
        .args(args)
        .output()
        .unwrap()
}

fn ok(args: &[&str]) -> Output {
    let out = cli(args);
    assert!(
        out.status.success(),
        "{args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn wsd_eval_smoke() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("report.json");
    let senses = fixture("senses.jsonl");
    ok(&[
        "wsd-eval",
        "--dataset",
        s(&senses),
        "--labels",
        "3",
        "--out",
        s(&out),
    ]);
    let report = json(&out);
    let f1 = report["report"]["weighted_f1"].as_f64().unwrap();
    assert!((0.0..=1.0).contains(&f1));
    let manifest = json(&dir.path().join("report.json.manifest.json"));
    assert_eq!(manifest["subcommand"], "wsd-eval");
    assert!(manifest["inputs"]["dataset_sha256"].is_string());
    assert!(manifest["inputs"]["dataset_header_sha256"].is_string());
    assert_eq!(manifest["seeds"], serde_json::json!([0]));
}

#[test]
fn cluster_twice_is_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let senses = fixture("senses.jsonl");
    let run = |name: &str| {
        let out = dir.path().join(name);
        ok(&[
            "cluster",
            "--dataset",
            s(&senses),
            "--labels",
            "4",
            "--restarts",
            "1",
            "--seed",
            "7",
            "--out",
            s(&out),
        ]);
        std::fs::read(&out).unwrap()
    };
    let a = run("a.json");
    assert_eq!(a, run("b.json"));
    let report: Value = serde_json::from_slice(&a).unwrap();
    assert_eq!(report["solution"]["seed"], 7);
    assert_eq!(report["solution"]["k"], 4);
    assert!(dir.path().join("a.heatmap.csv").exists());
}

#[test]
fn purity_on_eight_records() {
    let dir = tempfile::tempdir().unwrap();
    let data = fixture("purity8.jsonl");
    let sol = dir.path().join("sol.json");
    let out = dir.path().join("purity.json");
    ok(&[
        "cluster",
        "--dataset",
        s(&data),
        "--k",
        "2",
        "--restarts",
        "10",
        "--out",
        s(&sol),
    ]);
    ok(&[
        "purity",
        "--solution",
        s(&sol),
        "--dataset",
        s(&data),
        "--labels",
        "2",
        "--out",
        s(&out),
    ]);
    let report = json(&out);
    assert!((report["purity"].as_f64().unwrap() - 0.75).abs() < 1e-12);
    assert_eq!(report["tm"].as_f64().unwrap(), 1.0);
}

#[test]
fn lsc_and_cohesion_write_csv() {
    let dir = tempfile::tempdir().unwrap();
    let data = fixture("stream.jsonl");
    let sol = dir.path().join("sol.json");
    ok(&[
        "cluster",
        "--dataset",
        s(&data),
        "--k",
        "2",
        "--restarts",
        "5",
        "--out",
        s(&sol),
    ]);

    let series = dir.path().join("series.csv");
    ok(&[
        "lsc",
        "--dataset",
        s(&data),
        "--solution",
        s(&sol),
        "--out",
        s(&series),
    ]);
    let text = std::fs::read_to_string(&series).unwrap();
    assert!(text.starts_with("year,cluster_0,cluster_1,total,overall_rel_freq\n"));
    assert_eq!(text.lines().count(), 1 + 11);
    let change = std::fs::read_to_string(dir.path().join("series.change.csv")).unwrap();
    assert!(change.starts_with("year_from,year_to,jsd,cdpt\n"));
    assert_eq!(change.lines().count(), 1 + 10);

    let coh = dir.path().join("cohesion.json");
    ok(&[
        "cohesion",
        "--dataset",
        s(&data),
        "--solution",
        s(&sol),
        "--out",
        s(&coh),
    ]);
    assert!(json(&coh)["ais_minus_aps"].as_f64().unwrap() > 0.0);
    assert!(dir.path().join("cohesion.csv").exists());
}

#[test]
fn ingest_check_and_isotropy() {
    let dir = tempfile::tempdir().unwrap();
    let data = fixture("senses.jsonl");
    let summary = dir.path().join("summary.json");
    ok(&[
        "ingest-check",
        "--dataset",
        s(&data),
        "--dim",
        "16",
        "--out",
        s(&summary),
    ]);
    let v = json(&summary);
    assert_eq!(v["records"], 167);
    assert_eq!(v["labels"]["labels"][0], "MISSION");

    let iso = dir.path().join("iso.json");
    let out = ok(&[
        "isotropy",
        "--dataset",
        s(&data),
        "--tokens",
        "100",
        "--seed",
        "3",
        "--out",
        s(&iso),
    ]);
    let v = json(&iso);
    assert_eq!(v["n_pairs"], 50);
    assert_eq!(v["with_replacement"], false);
    assert!(String::from_utf8_lossy(&out.stdout).starts_with("ACS "));
}

#[test]
fn config_file_supplies_flags() {
    let dir = tempfile::tempdir().unwrap();
    let data = fixture("senses.jsonl");
    let cfg = dir.path().join("run.toml");
    std::fs::write(
        &cfg,
        "seed = 5\n[wsd-eval]\nlabels = 2\nsplit = \"stratified2080\"\n",
    )
    .unwrap();
    let out = dir.path().join("r.json");
    ok(&[
        "--config",
        s(&cfg),
        "wsd-eval",
        "--dataset",
        s(&data),
        "--out",
        s(&out),
    ]);
    let v = json(&out);
    assert_eq!(v["seed"], 5);
    assert_eq!(v["split"], "stratified2080");
    assert_eq!(v["subset"]["labels"].as_array().unwrap().len(), 2);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("x.json");
    let data = fixture("senses.jsonl");

    assert_eq!(cli(&["wsd-eval", "--bogus"]).status.code(), Some(1));
    assert_eq!(cli(&["nonsense"]).status.code(), Some(1));
    // Wrong expected dimension is a validation failure.
    assert_eq!(
        cli(&["ingest-check", "--dataset", s(&data), "--dim", "3"])
            .status
            .code(),
        Some(1)
    );
    // Too many labels requested.
    assert_eq!(
        cli(&[
            "wsd-eval",
            "--dataset",
            s(&data),
            "--labels",
            "9",
            "--out",
            s(&out)
        ])
        .status
        .code(),
        Some(1)
    );
    let missing = dir.path().join("missing.jsonl");
    assert_eq!(
        cli(&["ingest-check", "--dataset", s(&missing)])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(cli(&["--help"]).status.code(), Some(0));
}
