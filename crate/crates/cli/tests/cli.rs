use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn genmean(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_genmean"))
        .args(args)
        .current_dir(cwd)
        .env("RUST_LOG", "error")
        .output()
        .expect("binary runs")
}

fn ok(out: &Output) {
    assert!(
        out.status.success(),
        "exit {:?}\nstdout: {}\nstderr: {}",
        out.status.code(),
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
}

fn error_json(out: &Output) -> Value {
    let stderr = String::from_utf8_lossy(&out.stderr);
    let line = stderr
        .lines()
        .rev()
        .find(|l| l.starts_with('{'))
        .expect("error JSON on stderr");
    serde_json::from_str(line).unwrap()
}

fn small_config(dir: &Path) -> String {
    let cfg = r#"{
        "synth": {"n_per_community": 30},
        "experiment": {"n_starts": 2, "optimizer": {"max_iter": 8}}
    }"#;
    let path = dir.join("small.json");
    fs::write(&path, cfg).unwrap();
    path.to_string_lossy().into_owned()
}

fn make_instance(dir: &Path, config: &str, setting: &str, std: &str) {
    ok(&genmean(
        &[
            "--config",
            config,
            "synth",
            "--setting",
            setting,
            "--std",
            std,
            "--seed",
            "7",
            "--out",
            "inst",
        ],
        dir,
    ));
}

fn run_method(dir: &Path, config: &str, method: &str, out: &str, truth: bool) -> Value {
    let mut args = vec![
        "--config",
        config,
        "run",
        "--method",
        method,
        "--graph",
        "inst/edges.tsv",
        "--labels",
        "inst/labels_known.tsv",
        "--out",
        out,
    ];
    if truth {
        args.extend(["--truth", "inst/labels_truth.tsv"]);
    }
    ok(&genmean(&args, dir));
    serde_json::from_str(&fs::read_to_string(dir.join(out).join("result.json")).unwrap()).unwrap()
}

#[test]
fn synth_writes_four_reproducible_files() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    let cfg = small_config(dir);
    make_instance(dir, &cfg, "noisy", "2");
    let files = [
        "edges.tsv",
        "labels_known.tsv",
        "labels_truth.tsv",
        "spec.json",
    ];
    let first: Vec<Vec<u8>> = files
        .iter()
        .map(|f| fs::read(dir.join("inst").join(f)).unwrap())
        .collect();
    fs::rename(dir.join("inst"), dir.join("inst_a")).unwrap();
    make_instance(dir, &cfg, "noisy", "2");
    for (f, bytes) in files.iter().zip(&first) {
        assert_eq!(
            &fs::read(dir.join("inst").join(f)).unwrap(),
            bytes,
            "{f} differs"
        );
    }
    let spec: Value = serde_json::from_slice(&first[3]).unwrap();
    assert_eq!(spec["seed"], 7);
    assert_eq!(spec["synth"]["setting"], "noisy");
    assert_eq!(spec["n"], 90);
    let edges = String::from_utf8(first[0].clone()).unwrap();
    assert!(edges.starts_with("# genmean synth seed=7 config="));
}

#[test]
fn zero_std_is_a_validation_error() {
    let tmp = tempfile::tempdir().unwrap();
    let out = genmean(
        &["synth", "--setting", "noisy", "--std", "0", "--out", "x"],
        tmp.path(),
    );
    assert_eq!(out.status.code(), Some(1));
    let err = error_json(&out);
    assert_eq!(err["error"], "domain");
    assert!(err["message"].as_str().unwrap().contains("std"));
}

#[test]
fn fixed_mean_has_no_trace() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    let cfg = small_config(dir);
    make_instance(dir, &cfg, "informative", "3");
    let res = run_method(dir, &cfg, "ARIT", "arit", true);
    assert!(!dir.join("arit/trace.csv").exists());
    assert_eq!(res["method"], "ARIT");
    assert_eq!(res["theta"]["lambda"], 1.0);
    assert!(res["accuracy"].as_f64().unwrap() > 0.5);
    let preds = fs::read_to_string(dir.join("arit/predictions.tsv")).unwrap();
    let rows: Vec<&str> = preds.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(rows.len(), res["held_out"].as_u64().unwrap() as usize);
    assert!(rows.iter().all(|r| r.split('\t').count() == 2));
}

#[test]
fn accuracy_only_with_truth() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    let cfg = small_config(dir);
    make_instance(dir, &cfg, "informative", "3");
    let res = run_method(dir, &cfg, "MAX", "max", false);
    assert!(res.get("accuracy").is_none());
}

#[test]
fn learned_methods_emit_theta_counts_and_traces() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    let cfg = small_config(dir);
    make_instance(dir, &cfg, "complementary", "2");
    let multi = run_method(dir, &cfg, "MULTI", "multi", true);
    assert!(multi["theta"].is_object());
    assert!(multi.get("thetas").is_none());
    let binom = run_method(dir, &cfg, "BINOM", "binom", true);
    assert_eq!(binom["thetas"].as_array().unwrap().len(), 3);
    assert_eq!(binom["selected"].as_array().unwrap().len(), 3);

    let trace = fs::read_to_string(dir.join("binom/trace.csv")).unwrap();
    let mut lines = trace.lines().filter(|l| !l.starts_with('#'));
    let header = lines.next().unwrap();
    assert!(header.starts_with(
        "class,fold,start,n,f,g_tilde,eta,h,backtracks,alpha,beta_1,beta_2,beta_3,lambda"
    ));
    assert!(lines.count() > 0);
}

#[test]
fn unknown_config_key_rejected() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    fs::write(dir.join("bad.json"), r#"{"experiment": {"n_start": 3}}"#).unwrap();
    let out = genmean(
        &[
            "--config",
            "bad.json",
            "synth",
            "--setting",
            "noisy",
            "--std",
            "2",
            "--out",
            "x",
        ],
        dir,
    );
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(error_json(&out)["error"], "parse");
}

#[test]
fn malformed_graph_reports_parse_error() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    fs::write(dir.join("g.tsv"), "0 0 1 x\n").unwrap();
    fs::write(dir.join("l.tsv"), "0 a\n").unwrap();
    let out = genmean(
        &["run", "--graph", "g.tsv", "--labels", "l.tsv", "--out", "o"],
        dir,
    );
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(error_json(&out)["error"], "parse");
}

#[test]
fn bench_grid_shape() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    let cfg = r#"{
        "synth": {"n_per_community": 15},
        "experiment": {"n_starts": 2, "n_folds": 3, "optimizer": {"max_iter": 3}}
    }"#;
    fs::write(dir.join("tiny.json"), cfg).unwrap();
    ok(&genmean(
        &[
            "--config",
            "tiny.json",
            "bench",
            "--suite",
            "table2",
            "--samples",
            "1",
            "--out",
            "bench.csv",
        ],
        dir,
    ));
    let text = fs::read_to_string(dir.join("bench.csv")).unwrap();
    let rows: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).collect();
    // header + 12 grid rows + APR + AR
    assert_eq!(rows.len(), 15);
    let header: Vec<&str> = rows[0].split(',').collect();
    assert_eq!(header.len(), 2 + 2 * 10);
    assert_eq!(
        &header[..4],
        &["setting", "std", "LAYER1_mean", "LAYER1_std"]
    );
    assert!(rows[13].starts_with("APR,"));
    assert!(rows[14].starts_with("AR,"));
}

#[test]
fn scaling_rows_per_size() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    ok(&genmean(
        &[
            "scaling",
            "--sizes",
            "60,90",
            "--method",
            "MIN",
            "--repeats",
            "2",
            "--out",
            "scaling.csv",
        ],
        dir,
    ));
    let text = fs::read_to_string(dir.join("scaling.csv")).unwrap();
    let rows: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(rows[0], "n,method,mean_seconds,run_1,run_2");
    assert_eq!(rows.len(), 3);
    assert!(rows[1].starts_with("60,MIN,"));
    assert!(rows[2].starts_with("90,MIN,"));
}

#[test]
fn binom_on_noisy_instance_is_accurate() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    fs::write(dir.join("default.json"), "{}").unwrap();
    make_instance(dir, "default.json", "noisy", "2");
    let res = run_method(dir, "default.json", "BINOM", "binom", true);
    let acc = res["accuracy"].as_f64().unwrap();
    assert!(acc >= 0.95, "accuracy {acc}");
}
