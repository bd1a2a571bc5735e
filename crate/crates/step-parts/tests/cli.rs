use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use step_parts::core::step::write_step;
use step_parts::core::synth;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_step-parts"));
    c.env_remove("STEP_PARTS_WORKERS");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("spawn")
}

fn fixture() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/cube.step")
}

fn json_of(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn write_models(dir: &Path, names: &[&str]) {
    fs::create_dir_all(dir).unwrap();
    let fx = synth::fixtures();
    for n in names {
        let g = &fx.iter().find(|f| f.0 == *n).unwrap().1;
        fs::write(dir.join(format!("{n}.step")), write_step(g)).unwrap();
    }
}

/// Every file in `dir` except timing data, name → bytes.
fn snapshot(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut v: Vec<(String, Vec<u8>)> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.file_name().unwrap() != "timing.json")
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), fs::read(&p).unwrap()))
        .collect();
    v.sort();
    v
}

#[test]
fn extract_cube_fixture() {
    let d = tempfile::tempdir().unwrap();
    let o = run(&["extract", s(&fixture()), "--out-dir", s(d.path())]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let summary: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(summary["num_parts"], 6);
    for stage in ["parse", "build", "partition", "tessellate", "stabilize", "serialize"] {
        assert!(summary["timing"][stage].as_f64().unwrap() >= 0.0);
    }
    let labels = json_of(&d.path().join("cube.labels.json"));
    assert_eq!(labels["schema"], 1);
    assert_eq!(labels["meta"]["theta_deg"], 8.0);
    assert_eq!(labels["meta"]["tau_min"], 20);
    assert_eq!(labels["meta"]["num_parts"], 6);
    assert_eq!(labels["meta"]["config"]["samples"], 100_000);
    let obj = fs::read_to_string(d.path().join("cube.obj")).unwrap();
    assert_eq!(obj.lines().filter(|l| l.starts_with("g part_")).count(), 6);
}

#[test]
fn corrupt_file_reports_parse_stage() {
    let d = tempfile::tempdir().unwrap();
    let bad = d.path().join("bad.step");
    fs::write(&bad, "ISO-10303-21;\nDATA;\n#1=(;\n").unwrap();
    let o = run(&["extract", s(&bad), "--out-dir", s(d.path())]);
    assert_eq!(o.status.code(), Some(2));
    let e: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(e["stage"], "parse");
    assert_eq!(e["model"], "bad");
    assert!(!d.path().join("bad.obj").exists());
    let o = run(&["extract", s(&d.path().join("missing.step"))]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn theta_zero_still_separates_cube_faces() {
    let d = tempfile::tempdir().unwrap();
    let o = run(&["extract", s(&fixture()), "--out-dir", s(d.path()), "--theta", "0"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(json_of(&d.path().join("cube.labels.json"))["meta"]["num_parts"], 6);
}

#[test]
fn embedded_config_reproduces_output() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let o = run(&["extract", s(&fixture()), "--out-dir", s(a.path()), "--theta", "12.5", "--tau-min", "7", "--tess", "t1", "--angle-tol", "15"]);
    assert_eq!(o.status.code(), Some(0));
    let cfg = &json_of(&a.path().join("cube.labels.json"))["meta"]["config"];
    let tess = cfg["tess"]["name"].as_str().unwrap().split('-').next().unwrap().to_ascii_lowercase();
    let args = [
        "extract".to_string(),
        fixture().to_string_lossy().into_owned(),
        "--out-dir".into(),
        b.path().to_string_lossy().into_owned(),
        "--theta".into(),
        cfg["theta_deg"].to_string(),
        "--tau-min".into(),
        cfg["tau_min"].to_string(),
        "--tess".into(),
        tess,
        "--chord-tol".into(),
        cfg["tess"]["chord_tol"].to_string(),
        "--angle-tol".into(),
        cfg["tess"]["angle_tol_deg"].to_string(),
    ];
    let o = bin().args(&args).output().unwrap();
    assert_eq!(o.status.code(), Some(0));
    for f in ["cube.obj", "cube.labels.json"] {
        assert_eq!(fs::read(a.path().join(f)).unwrap(), fs::read(b.path().join(f)).unwrap(), "{f}");
    }
}

#[test]
fn eval_identity_mismatch_and_tessellation_pairs() {
    let d = tempfile::tempdir().unwrap();
    let t0 = d.path().join("t0");
    let t2 = d.path().join("t2");
    assert_eq!(run(&["extract", s(&fixture()), "--out-dir", s(&t0)]).status.code(), Some(0));
    assert_eq!(run(&["extract", s(&fixture()), "--out-dir", s(&t2), "--tess", "t2"]).status.code(), Some(0));
    let r0 = t0.join("cube.labels.json");
    let r2 = t2.join("cube.labels.json");

    let o = run(&["eval", s(&r0), s(&r0), "--samples", "20000"]);
    assert_eq!(o.status.code(), Some(0));
    let rep: Value = serde_json::from_slice(&o.stdout).unwrap();
    for k in ["accuracy", "miou", "boundary_accuracy"] {
        assert_eq!(rep[k], 1.0, "{k}");
    }

    let out = d.path().join("rep.json");
    let o = run(&["eval", s(&r0), s(&r2), "--samples", "20000", "--out", s(&out)]);
    assert_eq!(o.status.code(), Some(0));
    let rep = json_of(&out);
    assert_eq!((rep["accuracy"].as_f64(), rep["miou"].as_f64()), (Some(1.0), Some(1.0)));
    assert_eq!(rep["matched"].as_array().unwrap().len(), 6);

    let o = run(&["eval", s(&r0), s(&r2), "--per-triangle"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("differ"));
}

#[test]
fn consistency_command_on_cube() {
    let o = run(&["consistency", s(&fixture()), "--alt", "t1", "--samples", "5000"]);
    assert_eq!(o.status.code(), Some(0));
    let rep: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(rep["miou"], 1.0);
}

#[test]
fn batch_is_worker_count_independent() {
    let d = tempfile::tempdir().unwrap();
    let input = d.path().join("in");
    write_models(&input, &["cube", "split_cylinder", "filleted_block"]);
    let o1 = run(&["batch", s(&input), "--out-dir", s(&d.path().join("w1")), "--workers", "1"]);
    let o4 = bin().args(["batch", s(&input), "--out-dir", s(&d.path().join("w4"))]).env("STEP_PARTS_WORKERS", "4").output().unwrap();
    assert_eq!((o1.status.code(), o4.status.code()), (Some(0), Some(0)));
    let a = snapshot(&d.path().join("w1"));
    assert_eq!(a.len(), 7);
    assert_eq!(a, snapshot(&d.path().join("w4")));
    assert_eq!(json_of(&d.path().join("w4/timing.json"))["workers"], 4);
    let sum = json_of(&d.path().join("w1/summary.json"));
    assert_eq!(sum["succeeded"], 3);
    let parts: Vec<u64> = sum["results"].as_array().unwrap().iter().map(|r| r["num_parts"].as_u64().unwrap()).collect();
    assert_eq!(parts, [6, 7, 3]);
}

#[test]
fn batch_isolates_failures() {
    let d = tempfile::tempdir().unwrap();
    let input = d.path().join("in");
    write_models(&input, &["cube", "split_cylinder"]);
    fs::write(input.join("aaa_corrupt.step"), "not a step file").unwrap();
    let out = d.path().join("out");
    let o = run(&["batch", s(&input), "--out-dir", s(&out), "--workers", "2"]);
    assert_eq!(o.status.code(), Some(1));
    let sum = json_of(&out.join("summary.json"));
    assert_eq!((sum["succeeded"].as_u64(), sum["failed"].as_u64()), (Some(2), Some(1)));
    assert_eq!(sum["results"][0]["status"], "failed");
    assert_eq!(sum["results"][0]["stage"], "parse");
    assert!(out.join("cube.labels.json").exists() && out.join("split_cylinder.obj").exists());
    assert_eq!(json_of(&out.join("aaa_corrupt.error.json"))["stage"], "parse");

    let o = run(&["batch", s(&input), "--out-dir", s(&d.path().join("ff")), "--workers", "1", "--fail-fast"]);
    assert_eq!(o.status.code(), Some(2));
    let sum = json_of(&d.path().join("ff/summary.json"));
    assert_eq!(sum["failed"], 1);
    assert_eq!(sum["skipped"], 2);
}

#[test]
fn hist_and_sweep_tables() {
    let d = tempfile::tempdir().unwrap();
    let input = d.path().join("in");
    write_models(&input, &["cube", "split_cylinder"]);
    let hist = d.path().join("hist.csv");
    let o = run(&["hist", s(&input), "--out", s(&hist)]);
    assert_eq!(o.status.code(), Some(0));
    let s_: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(s_["same_primitive_edges"], 14);
    let text = fs::read_to_string(&hist).unwrap();
    assert_eq!(text.lines().count(), 91);
    assert!(text.contains("\n0,2,2\n") && text.contains("\n90,92,12\n"));

    let sweep = d.path().join("sweep.csv");
    let o = run(&["sweep", s(&input), "--out", s(&sweep), "--tess", "t2"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let text = fs::read_to_string(&sweep).unwrap();
    let rows: Vec<&str> = text.lines().collect();
    assert_eq!(rows.len(), 11);
    assert!(rows[1].starts_with("cube,4,6,"));
    assert!(rows[6].starts_with("split_cylinder,4,3,"));

    let o = run(&["sweep", s(&input), "--out", s(&sweep), "--thetas", "8,4"]);
    assert_eq!(o.status.code(), Some(2));
    let o = run(&["hist", s(&input), "--out", s(&hist), "--bins", "1"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn stats_and_synth() {
    let d = tempfile::tempdir().unwrap();
    let o = run(&["synth", s(d.path()), "--corpus", "3", "--seed", "1"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(json_of(&d.path().join("manifest.json")).as_array().unwrap().len(), 3);
    let o = run(&["stats", s(&fixture())]);
    assert_eq!(o.status.code(), Some(0));
    let st: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!((st["faces"].as_u64(), st["edges"].as_u64(), st["num_parts"].as_u64()), (Some(6), Some(12), Some(6)));
}

#[test]
fn invalid_flags_are_fatal() {
    let o = run(&["extract", s(&fixture()), "--theta", "-3"]);
    assert_eq!(o.status.code(), Some(2));
    let o = run(&["extract", s(&fixture()), "--chord-tol", "0"]);
    assert_eq!(o.status.code(), Some(2));
}
