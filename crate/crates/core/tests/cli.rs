use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use kec::io::{load_model_file, read_dataset_file};
use kec::simgen::generate;
use kec::{SimParams, SimSetting};
use tempfile::TempDir;

fn kec(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_kec"))
        .args(args)
        .env_remove("KEC_THREADS")
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn simulate(dir: &TempDir, name: &str, extra: &[&str]) -> std::path::PathBuf {
    let path = dir.path().join(name);
    let mut args = vec!["simulate", "--out", path_str(&path)];
    args.extend_from_slice(extra);
    let out = kec(&args);
    assert!(out.status.success(), "{}", stderr(&out));
    path
}

const SMALL: [&str; 10] = [
    "--setting",
    "normal-hd",
    "--n",
    "100",
    "--p",
    "50",
    "--k",
    "5",
    "--seed",
    "7",
];

#[test]
fn simulate_writes_requested_rows_deterministically() {
    let dir = TempDir::new().unwrap();
    let a = simulate(&dir, "a.csv", &SMALL);
    let b = simulate(&dir, "b.csv", &SMALL);
    let text = fs::read_to_string(&a).unwrap();
    let mut lines = text.lines();
    let header = lines.next().unwrap();
    assert!(header.starts_with("f1,f2,") && header.ends_with(",f50,label"));
    assert_eq!(lines.count(), 100);
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
}

#[test]
fn simulate_to_stdout_matches_file() {
    let dir = TempDir::new().unwrap();
    let file = simulate(&dir, "a.csv", &SMALL);
    let mut args = vec!["simulate"];
    args.extend_from_slice(&SMALL);
    let out = kec(&args);
    assert!(out.status.success());
    assert_eq!(out.stdout, fs::read(file).unwrap());
}

#[test]
fn simulate_rejects_p_below_k() {
    let out = kec(&[
        "simulate",
        "--setting",
        "normal-hd",
        "--n",
        "10",
        "--p",
        "3",
        "--k",
        "5",
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(out.stdout.is_empty());
}

#[test]
fn csv_round_trip_reproduces_dataset() {
    let dir = TempDir::new().unwrap();
    let path = simulate(&dir, "a.csv", &SMALL);
    let loaded = read_dataset_file(&path, Some(5)).unwrap();
    let params = SimParams::new(SimSetting::NormalHD, 100, 7).with_dims(50, 5);
    let original = generate(&params).unwrap().dataset;
    assert_eq!(loaded, original);
}

#[test]
fn train_and_predict_agree() {
    let dir = TempDir::new().unwrap();
    let data = simulate(&dir, "a.csv", &SMALL);
    let model = dir.path().join("m.json");
    let out = kec(&["train", "--data", path_str(&data), "--model-out", path_str(&model)]);
    assert!(out.status.success(), "{}", stderr(&out));
    let summary = stdout(&out);
    for name in [
        "linear",
        "distance",
        "spearman",
        "selected:",
        "training error: 0.000000 (0/100)",
    ] {
        assert!(summary.contains(name), "missing {name} in\n{summary}");
    }

    let pred = dir.path().join("p.csv");
    let out = kec(&[
        "predict",
        "--model",
        path_str(&model),
        "--data",
        path_str(&data),
        "--out",
        path_str(&pred),
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let truth = read_dataset_file(&data, Some(5)).unwrap();
    let text = fs::read_to_string(pred).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "label,p1,p2,p3,p4,p5");
    let labels: Vec<u32> = lines.map(|l| l.split(',').next().unwrap().parse().unwrap()).collect();
    assert_eq!(labels, truth.labels());

    let artifact = load_model_file(&model).unwrap();
    assert_eq!(artifact.p(), 50);
    assert_eq!(artifact.num_classes(), 5);
}

#[test]
fn linear_only_training_selects_linear() {
    let dir = TempDir::new().unwrap();
    let data = simulate(&dir, "a.csv", &SMALL);
    let model = dir.path().join("m.json");
    let out = kec(&[
        "train",
        "--data",
        path_str(&data),
        "--kernels",
        "linear",
        "--model-out",
        path_str(&model),
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    assert!(stdout(&out).contains("selected: linear"));
}

#[test]
fn predict_handles_empty_and_mismatched_inputs() {
    let dir = TempDir::new().unwrap();
    let data = simulate(&dir, "a.csv", &SMALL);
    let model = dir.path().join("m.json");
    assert!(
        kec(&["train", "--data", path_str(&data), "--model-out", path_str(&model)])
            .status
            .success()
    );

    let header: Vec<String> = (1..=50).map(|j| format!("f{j}")).chain(["label".into()]).collect();
    let empty = dir.path().join("empty.csv");
    fs::write(&empty, format!("{}\n", header.join(","))).unwrap();
    let out = kec(&["predict", "--model", path_str(&model), "--data", path_str(&empty)]);
    assert!(out.status.success(), "{}", stderr(&out));
    assert_eq!(stdout(&out).lines().count(), 1);

    let narrow = simulate(
        &dir,
        "narrow.csv",
        &["--setting", "normal-hd", "--n", "20", "--p", "40", "--k", "5"],
    );
    let out = kec(&["predict", "--model", path_str(&model), "--data", path_str(&narrow)]);
    assert_eq!(out.status.code(), Some(2));
    let msg = stderr(&out);
    assert!(msg.contains("50") && msg.contains("40"), "{msg}");
}

#[test]
fn missing_files_are_io_errors() {
    let dir = TempDir::new().unwrap();
    let missing = dir.path().join("nope.csv");
    let model = dir.path().join("m.json");
    let out = kec(&["train", "--data", path_str(&missing), "--model-out", path_str(&model)]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn cv_reports_a_table_and_records() {
    let dir = TempDir::new().unwrap();
    let records = dir.path().join("r.jsonl");
    let out = kec(&[
        "cv",
        "--setting",
        "uniform-hd",
        "--n",
        "500",
        "--p",
        "500",
        "--replicates",
        "3",
        "--methods",
        "fast-linear",
        "--records",
        path_str(&records),
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let table = stdout(&out);
    let row = table
        .lines()
        .find(|l| l.starts_with("fast-linear"))
        .expect("fast-linear row");
    let pct: f64 = row
        .split_whitespace()
        .nth(1)
        .unwrap()
        .trim_end_matches('%')
        .parse()
        .unwrap();
    assert!(pct <= 5.0, "{table}");
    let lines = fs::read_to_string(records).unwrap();
    assert_eq!(lines.lines().count(), 1 + 3 * 5);
    for l in lines.lines() {
        serde_json::from_str::<serde_json::Value>(l).unwrap();
    }
}

#[test]
fn cv_on_a_file_with_shared_folds() {
    let dir = TempDir::new().unwrap();
    let data = simulate(&dir, "a.csv", &SMALL);
    let records = dir.path().join("r.jsonl");
    let out = kec(&[
        "cv",
        "--data",
        path_str(&data),
        "--replicates",
        "2",
        "--methods",
        "reference,fast-linear",
        "--records",
        path_str(&records),
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let text = fs::read_to_string(records).unwrap();
    let folds: Vec<serde_json::Value> = text
        .lines()
        .map(|l| serde_json::from_str::<serde_json::Value>(l).unwrap())
        .filter(|v| v["kind"] == "fold")
        .collect();
    let pick = |m: &str| -> Vec<(u64, u64, f64)> {
        folds
            .iter()
            .filter(|v| v["method"] == m)
            .map(|v| {
                (
                    v["replicate"].as_u64().unwrap(),
                    v["fold"].as_u64().unwrap(),
                    v["error"].as_f64().unwrap(),
                )
            })
            .collect()
    };
    assert_eq!(pick("reference").len(), 10);
    assert_eq!(pick("reference"), pick("fast-linear"));
}

#[test]
fn cv_rejects_single_fold() {
    let out = kec(&["cv", "--setting", "normal-hd", "--n", "50", "--p", "10", "--folds", "1"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn bench_fast_path_only() {
    let out = kec(&[
        "bench",
        "--n-grid",
        "40,80,160,320",
        "--p",
        "10",
        "--k",
        "3",
        "--paths",
        "fast",
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let table = stdout(&out);
    assert!(table.contains("reference -"), "{table}");
    for line in table.lines().skip(1).take(4) {
        assert!(line.trim_end().ends_with('-'), "{line}");
    }
}

#[test]
fn bench_rejects_non_ascending_grid() {
    let out = kec(&["bench", "--n-grid", "400,200,800,1600", "--p", "10"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn unknown_arguments_are_usage_errors() {
    assert_eq!(kec(&["train", "--bogus"]).status.code(), Some(2));
    assert_eq!(kec(&["simulate", "--setting", "nope"]).status.code(), Some(2));
}
