//! End-to-end runs of the `hqnet` binary.

use std::path::Path;
use std::process::{Command, Output};

use hqnet::optim::EPOCH_LOG_HEADER;
use hqnet_cli::error::{EXIT_CONFIG, EXIT_DATA, EXIT_OK};

fn hqnet(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hqnet"))
        .args(args)
        .env_remove("HQNET_DATA")
        .output()
        .unwrap()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

const SMALL: &[&str] = &["--n-qubits", "3", "--depth", "1", "--batch-size", "16", "--quiet"];

fn synth(dir: &Path) {
    let out = hqnet(&["synth", "--out", path(dir), "--train-per-class", "6", "--test-per-class", "2"]);
    assert_eq!(out.status.code(), Some(EXIT_OK), "{}", String::from_utf8_lossy(&out.stderr));
}

fn train(data: &Path, out: &Path, extra: &[&str]) -> Output {
    let mut args = vec!["train", "--data", path(data), "--out", path(out)];
    args.extend_from_slice(SMALL);
    args.extend_from_slice(extra);
    hqnet(&args)
}

#[test]
fn train_eval_predict_pipeline() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("data");
    let run = dir.path().join("run");
    synth(&data);

    let out = train(&data, &run, &["--max-epochs", "1"]);
    assert_eq!(out.status.code(), Some(EXIT_OK), "{}", String::from_utf8_lossy(&out.stderr));
    for f in ["model.ckpt", "epochs.csv", "config.toml", "report.json", "per_class.csv"] {
        assert!(run.join(f).is_file(), "{f} missing");
    }
    let log = std::fs::read_to_string(run.join("epochs.csv")).unwrap();
    assert_eq!(log.lines().count(), 2);

    let ckpt = run.join("model.ckpt");
    let out = hqnet(&["eval", "--checkpoint", path(&ckpt), "--data", path(&data), "--out", path(&dir.path().join("ev"))]);
    assert_eq!(out.status.code(), Some(EXIT_OK));
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["n_samples"], 20);

    let png = dir.path().join("digit.png");
    image::GrayImage::from_fn(28, 28, |x, y| image::Luma([if (x as i32 - 14).abs() < 3 && y > 4 && y < 24 { 255 } else { 0 }]))
        .save(&png)
        .unwrap();
    let out = hqnet(&["predict", "--checkpoint", path(&ckpt), path(&png)]);
    assert_eq!(out.status.code(), Some(EXIT_OK));
    let pred: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let probs: Vec<f64> = pred["probabilities"].as_array().unwrap().iter().map(|v| v.as_f64().unwrap()).collect();
    assert_eq!(probs.len(), 10);
    assert!((probs.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    assert!(pred["label"].as_u64().unwrap() < 10);

    let out = hqnet(&["inspect-params", "--checkpoint", path(&ckpt), "--json"]);
    let census: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(census["total"].as_u64().unwrap() > 0);
}

#[test]
fn zero_epochs_still_writes_a_checkpoint() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("data");
    let run = dir.path().join("run");
    synth(&data);
    let out = train(&data, &run, &["--max-epochs", "0"]);
    assert_eq!(out.status.code(), Some(EXIT_OK), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(run.join("model.ckpt").is_file());
    assert_eq!(std::fs::read_to_string(run.join("epochs.csv")).unwrap().trim_end(), EPOCH_LOG_HEADER);
}

#[test]
fn saved_config_reproduces_the_run() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("data");
    synth(&data);
    let first = dir.path().join("a");
    assert!(train(&data, &first, &["--max-epochs", "1", "--seed", "3"]).status.success());
    let cfg = first.join("config.toml");
    let second = dir.path().join("b");
    let out = hqnet(&["train", "--config", path(&cfg), "--out", path(&second), "--quiet"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(
        std::fs::read(first.join("model.ckpt")).unwrap(),
        std::fs::read(second.join("model.ckpt")).unwrap()
    );
}

#[test]
fn inspect_params_default_census() {
    let out = hqnet(&["inspect-params", "--json"]);
    assert_eq!(out.status.code(), Some(EXIT_OK));
    let census: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(census["total"], 2_339_092);
    let text = String::from_utf8(hqnet(&["inspect-params"]).stdout).unwrap();
    assert!(text.contains("2,339,092"));
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.toml");
    std::fs::write(&bad, "learning_rate = 0.1\n").unwrap();
    assert_eq!(hqnet(&["inspect-params", "--config", path(&bad)]).status.code(), Some(EXIT_CONFIG));
    assert_eq!(hqnet(&["inspect-params", "--lr", "-1"]).status.code(), Some(EXIT_CONFIG));
    assert_eq!(hqnet(&["train", "--quiet"]).status.code(), Some(EXIT_CONFIG), "no data root");
    assert_eq!(hqnet(&["frobnicate"]).status.code(), Some(EXIT_CONFIG));

    let missing = dir.path().join("nope.ckpt");
    let out = hqnet(&["predict", "--checkpoint", path(&missing), path(&missing)]);
    assert_eq!(out.status.code(), Some(EXIT_DATA));
    let out = train(&dir.path().join("no-data"), &dir.path().join("r"), &[]);
    assert_eq!(out.status.code(), Some(EXIT_DATA));

    let garbage = dir.path().join("garbage.ckpt");
    std::fs::write(&garbage, b"not a checkpoint").unwrap();
    let out = hqnet(&["inspect-params", "--checkpoint", path(&garbage)]);
    assert_eq!(out.status.code(), Some(EXIT_DATA));
}
