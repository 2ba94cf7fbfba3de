use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn gwofs(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gwofs"))
        .args(args)
        .output()
        .expect("spawn gwofs")
}

fn ok(args: &[&str]) -> Output {
    let out = gwofs(args);
    assert!(
        out.status.success(),
        "gwofs {args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn s(p: &Path) -> &str {
    p.to_str().expect("utf-8 path")
}

fn bundled(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("data").join(name)
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn run_writes_reports_and_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    let config = bundled("config.json");
    ok(&["run", "--config", s(&config), "--seed", "3", "--iters", "20", "--out", s(&a)]);
    ok(&["run", "--config", s(&config), "--seed", "3", "--iters", "20", "--out", s(&b), "--parallel"]);
    for name in ["report.json", "roc.csv", "history.csv", "timings.json"] {
        assert!(a.join(name).exists(), "{name} missing");
    }
    assert_eq!(fs::read(a.join("report.json")).unwrap(), fs::read(b.join("report.json")).unwrap());
    let report = json(&a.join("report.json"));
    assert_eq!(report["config"]["seed"], 3);
    assert_eq!(report["config"]["selection"]["max_iter"], 20);
    assert_eq!(fs::read_to_string(a.join("history.csv")).unwrap().lines().count(), 21);
}

#[test]
fn stages_compose_into_the_pipeline() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let (fa, fb) = (bundled("features_a.csv"), bundled("features_b.csv"));
    let seed = "2";
    ok(&["run", "--config", s(&bundled("config.json")), "--seed", seed, "--out", s(&d.join("run"))]);
    let report = json(&d.join("run/report.json"));

    ok(&["split", "--in", s(&fa), "--in", s(&fb), "--seed", seed, "--out-dir", s(d)]);
    ok(&["pca-fit", "--threshold", "0.99", "--in", s(&d.join("train.csv")), "--out", s(&d.join("pca.json"))]);
    for part in ["train", "val", "test"] {
        ok(&[
            "pca-transform",
            "--model",
            s(&d.join("pca.json")),
            "--in",
            s(&d.join(format!("{part}.csv"))),
            "--out",
            s(&d.join(format!("{part}_pc.csv"))),
        ]);
    }
    let m = report["post_pca_dim"].as_u64().unwrap() as usize;
    let header = fs::read_to_string(d.join("train_pc.csv")).unwrap();
    assert_eq!(header.lines().next().unwrap().split(',').count(), m + 1);

    ok(&[
        "select",
        "--train",
        s(&d.join("train_pc.csv")),
        "--val",
        s(&d.join("val_pc.csv")),
        "--seed",
        seed,
        "--out",
        s(&d.join("mask.json")),
    ]);
    assert_eq!(json(&d.join("mask.json")), report["mask"]);

    ok(&[
        "evaluate",
        "--train",
        s(&d.join("train_pc.csv")),
        "--train",
        s(&d.join("val_pc.csv")),
        "--test",
        s(&d.join("test_pc.csv")),
        "--mask",
        s(&d.join("mask.json")),
        "--out",
        s(&d.join("pred.csv")),
        "--report",
        s(&d.join("eval.json")),
    ]);
    let eval = json(&d.join("eval.json"));
    assert_eq!(eval["accuracy"], report["accuracy"]["test"]);
    assert_eq!(eval["auc"], report["auc"]);

    ok(&[
        "evaluate",
        "--train",
        s(&d.join("train_pc.csv")),
        "--train",
        s(&d.join("val_pc.csv")),
        "--test",
        s(&d.join("test_pc.csv")),
        "--out",
        s(&d.join("pred_all.csv")),
    ]);
    let out = ok(&[
        "eval-mcnemar",
        "--a",
        s(&d.join("pred.csv")),
        "--b",
        s(&d.join("pred_all.csv")),
        "--truth",
        s(&d.join("test.csv")),
    ]);
    let mc: Value = serde_json::from_slice(&out.stdout).unwrap();
    let expected = &report["baseline"]["mcnemar"];
    assert_eq!(mc["b"], expected["b"]);
    assert_eq!(mc["c"], expected["c"]);
    assert_eq!(mc["p"], expected["p_value"]);
    assert_eq!(mc["statistic"], expected["statistic"]);
}

#[test]
fn mcnemar_counts_discordant_pairs() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let truth: Vec<usize> = (0..20).map(|i| i % 2).collect();
    // A wrong on 2 samples that B gets right, B wrong on 10 that A gets right
    let a: Vec<usize> = truth.iter().enumerate().map(|(i, &t)| if i < 2 { 1 - t } else { t }).collect();
    let b: Vec<usize> = truth.iter().enumerate().map(|(i, &t)| if (2..12).contains(&i) { 1 - t } else { t }).collect();
    let write = |name: &str, v: &[usize]| {
        let text: String = std::iter::once("label".to_string()).chain(v.iter().map(|l| l.to_string())).map(|l| l + "\n").collect();
        fs::write(d.join(name), text).unwrap();
    };
    write("a.csv", &a);
    write("b.csv", &b);
    write("y.csv", &truth);
    let out = ok(&["eval-mcnemar", "--a", s(&d.join("a.csv")), "--b", s(&d.join("b.csv")), "--truth", s(&d.join("y.csv"))]);
    let mc: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(mc["b"], 10);
    assert_eq!(mc["c"], 2);
    assert!((mc["statistic"].as_f64().unwrap() - 4.0833).abs() < 1e-4);
    assert!((mc["p"].as_f64().unwrap() - 0.0433).abs() < 1e-3);
}

#[test]
fn bench_compare_counts_rows() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("comparison.csv");
    ok(&[
        "bench-compare",
        "--config",
        s(&bundled("config.json")),
        "--optimizers",
        "gwo,pso,ga",
        "--seeds",
        "5",
        "--agents",
        "6",
        "--iters",
        "5",
        "--out",
        s(&out),
    ]);
    let text = fs::read_to_string(&out).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "optimizer,seed,accuracy,n_features,fitness,wall_time_s");
    assert_eq!(lines.len(), 1 + 15 + 3);
    assert_eq!(lines.iter().filter(|l| l.contains(",aggregate,")).count(), 3);
}

#[test]
fn synth_deals_columns_across_files() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a.csv"), dir.path().join("b.fmx"));
    ok(&["synth", "--samples", "30", "--informative", "2", "--noise", "3", "--out", s(&a), "--out", s(&b)]);
    let header = fs::read_to_string(&a).unwrap();
    assert_eq!(header.lines().next().unwrap(), "f0,f1,f2,label");
    assert_eq!(&fs::read(&b).unwrap()[..4], b"FMX1");
}

#[test]
fn exit_codes_follow_error_category() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("missing.csv");
    assert_eq!(gwofs(&["pca-fit", "--in", s(&missing), "--out", "x.json"]).status.code(), Some(3));
    assert_eq!(
        gwofs(&["pca-fit", "--threshold", "1.5", "--in", s(&bundled("features_a.csv")), "--out", s(&dir.path().join("m.json"))])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(gwofs(&["select", "--bogus"]).status.code(), Some(2));
    assert_eq!(gwofs(&["frobnicate"]).status.code(), Some(2));

    let config = dir.path().join("config.json");
    fs::write(&config, r#"{"inputs": ["missing.csv"], "output_dir": "out"}"#).unwrap();
    let out = gwofs(&["run", "--config", s(&config), "--out", s(&dir.path().join("out"))]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("stage load failed"));
    assert!(!dir.path().join("out").exists());
}
