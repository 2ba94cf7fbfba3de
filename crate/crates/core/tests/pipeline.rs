use std::fs;
use std::path::Path;

use gwofs::classify::ClassifierConfig;
use gwofs::dataset::{save_feature_set, synth_dataset, FileFormat};
use gwofs::pipeline::{
    execute, run_pipeline, ComparisonConfig, PipelineConfig, SelectionConfig, HISTORY_FILE, REPORT_FILE, ROC_FILE,
};
use gwofs::{Error, ErrorCategory};
use serde_json::Value;

const SCHEMA: &str = include_str!("../schema/report.schema.json");

fn write_inputs(dir: &Path) -> Vec<std::path::PathBuf> {
    let set = synth_dataset(240, 3, 9, 3, 5.0, 21).unwrap();
    let a = dir.join("a.csv");
    let b = dir.join("b.fmx");
    save_feature_set(&set.select_columns(&[0, 1, 2, 3, 4, 5]), &a, FileFormat::Csv).unwrap();
    save_feature_set(&set.select_columns(&[6, 7, 8, 9, 10, 11]), &b, FileFormat::Binary).unwrap();
    vec![a, b]
}

fn small_config(dir: &Path) -> PipelineConfig {
    PipelineConfig {
        inputs: write_inputs(dir),
        selection: SelectionConfig {
            n_agents: 8,
            max_iter: 15,
            ..SelectionConfig::default()
        },
        output_dir: dir.join("out"),
        seed: 3,
        ..PipelineConfig::default()
    }
}

fn validate(report: &str) {
    let schema: Value = serde_json::from_str(SCHEMA).unwrap();
    let validator = jsonschema::validator_for(&schema).unwrap();
    let instance: Value = serde_json::from_str(report).unwrap();
    let errors: Vec<String> = validator.iter_errors(&instance).map(|e| format!("{e} at {}", e.instance_path)).collect();
    assert!(errors.is_empty(), "{errors:#?}");
}

#[test]
fn end_to_end_outputs_and_invariants() {
    let dir = tempfile::tempdir().unwrap();
    let config = small_config(dir.path());
    let report = run_pipeline(&config).unwrap();
    assert!(report.n_selected <= report.post_pca_dim);
    assert!(report.post_pca_dim <= report.original_dim);
    assert_eq!(report.original_dim, 12);
    assert_eq!(report.mask.dim(), report.post_pca_dim);
    assert_eq!(report.auc.len(), 3);
    for (acc, loss) in [
        (report.accuracy.train, report.loss.train),
        (report.accuracy.val, report.loss.val),
        (report.accuracy.test, report.loss.test),
    ] {
        assert_eq!(loss, 1.0 - acc);
    }
    assert!(report.accuracy.test > 0.8, "{}", report.accuracy.test);
    let stages: Vec<&str> = report.timings.iter().map(|t| t.stage).collect();
    assert_eq!(stages, ["load", "concat", "split", "pca", "select", "train", "evaluate"]);

    let out = &config.output_dir;
    let text = fs::read_to_string(out.join(REPORT_FILE)).unwrap();
    validate(&text);
    let json: Value = serde_json::from_str(&text).unwrap();
    assert!(json.get("timings").is_none());
    assert!(json["config"].get("output_dir").is_none());

    let roc = fs::read_to_string(out.join(ROC_FILE)).unwrap();
    assert!(roc.starts_with("class,threshold,fpr,tpr\n"));
    let history = fs::read_to_string(out.join(HISTORY_FILE)).unwrap();
    assert_eq!(history.lines().count(), 1 + 15);
    let values: Vec<f64> = history.lines().skip(1).map(|l| l.split(',').nth(1).unwrap().parse().unwrap()).collect();
    assert!(values.windows(2).all(|w| w[1] <= w[0]));
}

#[test]
fn reports_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let config = small_config(dir.path());
    let a = execute(&config).unwrap().report_json().unwrap();
    let b = execute(&config).unwrap().report_json().unwrap();
    assert_eq!(a, b);
    let mut parallel = config.clone();
    parallel.selection.parallel = true;
    assert_eq!(a, execute(&parallel).unwrap().report_json().unwrap());
}

#[test]
fn threshold_one_keeps_full_rank() {
    let dir = tempfile::tempdir().unwrap();
    let config = PipelineConfig {
        pca_threshold: 1.0,
        ..small_config(dir.path())
    };
    let report = execute(&config).unwrap().report;
    assert_eq!(report.post_pca_dim, 12);
}

#[test]
fn skip_pca_selects_on_raw_features() {
    let dir = tempfile::tempdir().unwrap();
    let config = PipelineConfig {
        skip_pca: true,
        classifier: ClassifierConfig::Knn { k: 5 },
        ..small_config(dir.path())
    };
    let output = execute(&config).unwrap();
    assert!(output.report.pca.is_none());
    assert_eq!(output.report.post_pca_dim, 12);
    validate(&output.report_json().unwrap());
}

#[test]
fn comparison_table_is_written() {
    let dir = tempfile::tempdir().unwrap();
    let config = PipelineConfig {
        comparison: Some(ComparisonConfig {
            optimizers: vec!["gwo".into(), "pso".into(), "ga".into()],
            n_seeds: 2,
        }),
        ..small_config(dir.path())
    };
    let report = run_pipeline(&config).unwrap();
    validate(&serde_json::to_string(&report).unwrap());
    let csv = fs::read_to_string(config.output_dir.join("comparison.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1 + 6 + 3);
}

#[test]
fn stage_failures_are_named_and_leave_no_output() {
    let dir = tempfile::tempdir().unwrap();
    let mut config = small_config(dir.path());
    config.inputs.push(dir.path().join("missing.csv"));
    let err = run_pipeline(&config).unwrap_err();
    assert!(matches!(err, Error::Stage { stage: "load", .. }), "{err}");
    assert_eq!(err.category(), ErrorCategory::Data);
    assert!(!config.output_dir.exists());

    let short = synth_dataset(30, 2, 0, 3, 5.0, 1).unwrap();
    let path = dir.path().join("short.csv");
    save_feature_set(&short, &path, FileFormat::Csv).unwrap();
    let mut config = small_config(dir.path());
    config.inputs.push(path);
    let err = execute(&config).unwrap_err();
    assert!(matches!(err, Error::Stage { stage: "concat", .. }), "{err}");
    assert!(err.to_string().contains("row-count mismatch"));
}

#[test]
fn invalid_configs_are_usage_errors() {
    let dir = tempfile::tempdir().unwrap();
    for config in [
        PipelineConfig {
            pca_threshold: 0.0,
            ..small_config(dir.path())
        },
        PipelineConfig {
            inputs: vec![],
            ..small_config(dir.path())
        },
    ] {
        assert_eq!(execute(&config).unwrap_err().category(), ErrorCategory::Usage);
    }
}

#[test]
fn config_json_defaults() {
    let config = PipelineConfig::from_json(r#"{"inputs": ["x.csv"]}"#).unwrap();
    assert_eq!(config.pca_threshold, 0.99);
    assert_eq!(config.selection.n_agents, 30);
    assert_eq!(config.selection.max_iter, 100);
    assert_eq!(config.classifier, ClassifierConfig::default());
    assert!(PipelineConfig::from_json(r#"{"inputs": ["x.csv"], "bogus": 1}"#).is_ok());
}
