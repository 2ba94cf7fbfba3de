//! End-to-end run: load and concatenate feature files, split, fit PCA on the
//! training split, select components with GWO, retrain on train ∪ val and
//! evaluate on the held-out test split.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::bench::{compare_selectors, ComparisonTable, OptimizerKind, OptimizerSpec, SelectionData};
use crate::classify::metrics::accuracy;
use crate::classify::{confusion, mcnemar, metrics, roc_ova, ClassifierConfig, ConfusionMatrix, McNemarResult, Metrics, RocResult};
use crate::dataset::{concat_features, load_feature_set, split, FileFormat, LabeledFeatureSet, SplitSpec};
use crate::error::{Error, Result};
use crate::gwo::{select_features_with, FeatureMask, GwoConfig, SelectionObjective, DEFAULT_LAMBDA};
use crate::pca::PcaModel;

pub const REPORT_FILE: &str = "report.json";
pub const ROC_FILE: &str = "roc.csv";
pub const HISTORY_FILE: &str = "history.csv";
pub const COMPARISON_FILE: &str = "comparison.csv";
pub const TIMINGS_FILE: &str = "timings.json";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SplitConfig {
    pub train_fraction: f64,
    pub val_fraction: f64,
    pub test_fraction: f64,
    pub stratified: bool,
}

impl Default for SplitConfig {
    fn default() -> Self {
        let d = SplitSpec::default();
        Self {
            train_fraction: d.train_fraction,
            val_fraction: d.val_fraction,
            test_fraction: d.test_fraction,
            stratified: d.stratified,
        }
    }
}

impl SplitConfig {
    pub fn with_seed(&self, seed: u64) -> SplitSpec {
        SplitSpec {
            train_fraction: self.train_fraction,
            val_fraction: self.val_fraction,
            test_fraction: self.test_fraction,
            seed,
            stratified: self.stratified,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SelectionConfig {
    pub n_agents: usize,
    pub max_iter: usize,
    pub lambda: f64,
    /// Execution detail, left out of the report echo.
    #[serde(skip_serializing)]
    pub parallel: bool,
}

impl Default for SelectionConfig {
    fn default() -> Self {
        let g = GwoConfig::default();
        Self {
            n_agents: g.n_agents,
            max_iter: g.max_iter,
            lambda: DEFAULT_LAMBDA,
            parallel: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonConfig {
    pub optimizers: Vec<String>,
    #[serde(default = "one")]
    pub n_seeds: usize,
}

fn one() -> usize {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PipelineConfig {
    pub inputs: Vec<PathBuf>,
    pub split: SplitConfig,
    pub pca_threshold: f64,
    /// Ablation: hand the raw concatenated features straight to selection.
    pub skip_pca: bool,
    pub selection: SelectionConfig,
    pub classifier: ClassifierConfig,
    /// Classifier inside the selection loop; defaults to `classifier`.
    pub fitness_classifier: Option<ClassifierConfig>,
    pub comparison: Option<ComparisonConfig>,
    #[serde(skip_serializing)]
    pub output_dir: PathBuf,
    pub seed: u64,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            inputs: Vec::new(),
            split: SplitConfig::default(),
            pca_threshold: 0.99,
            skip_pca: false,
            selection: SelectionConfig::default(),
            classifier: ClassifierConfig::default(),
            fitness_classifier: None,
            comparison: None,
            output_dir: PathBuf::from("out"),
            seed: 0,
        }
    }
}

impl PipelineConfig {
    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    pub fn validate(&self) -> Result<()> {
        if self.inputs.is_empty() {
            return Err(Error::Config("at least one input file is required".into()));
        }
        if !(self.pca_threshold > 0.0 && self.pca_threshold <= 1.0) {
            return Err(Error::Config(format!(
                "pca_threshold must lie in (0, 1], got {}",
                self.pca_threshold
            )));
        }
        self.split.with_seed(self.seed).validate()?;
        self.gwo_config(1).validate()
    }

    pub fn gwo_config(&self, dim: usize) -> GwoConfig {
        GwoConfig {
            n_agents: self.selection.n_agents,
            max_iter: self.selection.max_iter,
            dim,
            bounds: (0.0, 1.0),
            seed: self.seed,
            parallel: self.selection.parallel,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SplitScores {
    pub train: f64,
    pub val: f64,
    pub test: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PcaSummary {
    pub threshold: f64,
    pub eigenvalues: Vec<f64>,
    pub explained_variance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BaselineSummary {
    /// Test accuracy of the final classifier on every post-PCA feature.
    pub test_accuracy: f64,
    /// Selected-subset model (A) against the all-feature model (B).
    pub mcnemar: McNemarResult,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StageTiming {
    pub stage: &'static str,
    pub seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvalReport {
    pub config: PipelineConfig,
    pub n_samples: usize,
    pub n_classes: usize,
    pub original_dim: usize,
    pub post_pca_dim: usize,
    pub pca: Option<PcaSummary>,
    pub mask: FeatureMask,
    pub n_selected: usize,
    pub selection_fitness: f64,
    pub accuracy: SplitScores,
    /// `1 - accuracy` per split.
    pub loss: SplitScores,
    pub confusion: ConfusionMatrix,
    pub metrics: Metrics,
    pub auc: Vec<f64>,
    pub baseline: BaselineSummary,
    pub history_file: String,
    pub roc_file: String,
    /// Wall-clock seconds per stage, written to `timings.json` so that the
    /// report itself stays reproducible.
    #[serde(skip)]
    pub timings: Vec<StageTiming>,
}

/// Everything a run produces, before it touches the filesystem.
#[derive(Debug, Clone)]
pub struct PipelineOutput {
    pub report: EvalReport,
    pub roc: RocResult,
    pub history: Vec<f64>,
    pub comparison: Option<ComparisonTable>,
}

struct Stopwatch(Vec<StageTiming>);

impl Stopwatch {
    fn run<T>(&mut self, stage: &'static str, f: impl FnOnce() -> Result<T>) -> Result<T> {
        let start = Instant::now();
        let out = f().map_err(|e| Error::Stage {
            stage,
            source: Box::new(e),
        })?;
        self.0.push(StageTiming {
            stage,
            seconds: start.elapsed().as_secs_f64(),
        });
        Ok(out)
    }
}

fn split_accuracy(model: &crate::classify::Classifier, set: &LabeledFeatureSet) -> Result<(Vec<usize>, f64)> {
    let (pred, _) = model.predict(set.features().view())?;
    let acc = accuracy(set.labels(), &pred);
    Ok((pred, acc))
}

/// Data handed to selection: PCA-projected (unless skipped) splits.
#[derive(Debug, Clone)]
pub struct PreparedData {
    pub n_samples: usize,
    pub n_classes: usize,
    pub original_dim: usize,
    pub pca: Option<PcaModel>,
    pub train: LabeledFeatureSet,
    pub val: LabeledFeatureSet,
    pub test: LabeledFeatureSet,
}

/// Runs the load, concat, split and PCA stages.
pub fn prepare(config: &PipelineConfig) -> Result<PreparedData> {
    config.validate()?;
    prepare_timed(config, &mut Stopwatch(Vec::new()))
}

fn prepare_timed(config: &PipelineConfig, clock: &mut Stopwatch) -> Result<PreparedData> {
    let inputs = clock.run("load", || {
        config
            .inputs
            .iter()
            .map(|p| load_feature_set(p, FileFormat::from_path(p)))
            .collect::<Result<Vec<_>>>()
    })?;
    let data = clock.run("concat", || concat_features(&inputs))?;
    drop(inputs);
    let (train, val, test) = clock.run("split", || split(&data, &config.split.with_seed(config.seed)))?;
    clock.run("pca", || {
        let (pca, train, val, test) = if config.skip_pca {
            (None, train, val, test)
        } else {
            let model = PcaModel::fit(train.features().view(), config.pca_threshold)?;
            let project = |s: &LabeledFeatureSet| s.with_features(model.transform(s.features().view())?);
            let (tr, va, te) = (project(&train)?, project(&val)?, project(&test)?);
            (Some(model), tr, va, te)
        };
        Ok(PreparedData {
            n_samples: data.n_samples(),
            n_classes: data.n_classes(),
            original_dim: data.n_dims(),
            pca,
            train,
            val,
            test,
        })
    })
}

/// Runs every stage in memory.
pub fn execute(config: &PipelineConfig) -> Result<PipelineOutput> {
    config.validate()?;
    let mut clock = Stopwatch(Vec::new());
    let PreparedData {
        n_samples,
        n_classes,
        original_dim,
        pca,
        train,
        val,
        test,
    } = prepare_timed(config, &mut clock)?;
    let m = train.n_dims();

    let fitness_clf = config.fitness_classifier.unwrap_or(config.classifier);
    let selection = clock.run("select", || {
        let objective = SelectionObjective::new(&train, &val, fitness_clf).with_lambda(config.selection.lambda);
        select_features_with(&objective, &config.gwo_config(m))
    })?;

    let mask = selection.mask.clone();
    let train_val = train.stack(&val)?;
    let model = clock.run("train", || config.classifier.fit(&train_val.select_columns(mask.selected())))?;

    let (report_parts, roc) = clock.run("evaluate", || {
        let (_, train_acc) = split_accuracy(&model, &train.select_columns(mask.selected()))?;
        let (_, val_acc) = split_accuracy(&model, &val.select_columns(mask.selected()))?;
        let test_sub = test.select_columns(mask.selected());
        let (test_pred, scores) = model.predict(test_sub.features().view())?;
        let test_acc = accuracy(test.labels(), &test_pred);
        let cm = confusion(test.labels(), &test_pred, test.n_classes())?;
        let met = metrics(&cm)?;
        let roc = roc_ova(scores.view(), test.labels())?;

        let baseline_model = config.classifier.fit(&train_val)?;
        let (baseline_pred, baseline_acc) = split_accuracy(&baseline_model, &test)?;
        let mc = mcnemar(&test_pred, &baseline_pred, test.labels())?;
        Ok((
            (
                SplitScores {
                    train: train_acc,
                    val: val_acc,
                    test: test_acc,
                },
                cm,
                met,
                BaselineSummary {
                    test_accuracy: baseline_acc,
                    mcnemar: mc,
                },
            ),
            roc,
        ))
    })?;
    let (acc, cm, met, baseline) = report_parts;

    let comparison = match &config.comparison {
        Some(cmp) => Some(clock.run("compare", || {
            let specs = cmp
                .optimizers
                .iter()
                .map(|name| {
                    Ok(OptimizerSpec {
                        parallel: config.selection.parallel,
                        ..OptimizerSpec::new(
                            OptimizerKind::from_name(name)?,
                            config.selection.n_agents,
                            config.selection.max_iter,
                            config.seed,
                        )
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            compare_selectors(
                &specs,
                SelectionData {
                    train: &train,
                    val: &val,
                    test: &test,
                },
                &fitness_clf,
                cmp.n_seeds,
            )
        })?),
        None => None,
    };

    let report = EvalReport {
        config: config.clone(),
        n_samples,
        n_classes,
        original_dim,
        post_pca_dim: m,
        pca: pca.map(|p| PcaSummary {
            threshold: p.threshold,
            explained_variance: p.explained_variance_ratio(),
            eigenvalues: p.eigenvalues,
        }),
        n_selected: mask.len(),
        mask,
        selection_fitness: selection.fitness,
        loss: SplitScores {
            train: 1.0 - acc.train,
            val: 1.0 - acc.val,
            test: 1.0 - acc.test,
        },
        accuracy: acc,
        confusion: cm,
        metrics: met,
        auc: roc.aucs(),
        baseline,
        history_file: HISTORY_FILE.into(),
        roc_file: ROC_FILE.into(),
        timings: clock.0,
    };
    Ok(PipelineOutput {
        report,
        roc,
        history: selection.history,
        comparison,
    })
}

pub fn write_history_csv<W: Write>(history: &[f64], mut w: W) -> std::io::Result<()> {
    writeln!(w, "iteration,alpha_fitness")?;
    for (i, f) in history.iter().enumerate() {
        writeln!(w, "{},{f}", i + 1)?;
    }
    Ok(())
}

impl PipelineOutput {
    pub fn report_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(&self.report)?;
        s.push('\n');
        Ok(s)
    }

    /// Writes every output file into `dir`; on failure, files written so far
    /// are removed again.
    pub fn write(&self, dir: &Path) -> Result<Vec<PathBuf>> {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let mut files: Vec<(&str, Vec<u8>)> = Vec::new();
        files.push((REPORT_FILE, self.report_json()?.into_bytes()));
        let mut roc = Vec::new();
        self.roc.write_csv(&mut roc).expect("write to Vec");
        files.push((ROC_FILE, roc));
        let mut history = Vec::new();
        write_history_csv(&self.history, &mut history).expect("write to Vec");
        files.push((HISTORY_FILE, history));
        if let Some(table) = &self.comparison {
            let mut csv = Vec::new();
            table.write_csv(&mut csv).expect("write to Vec");
            files.push((COMPARISON_FILE, csv));
        }
        files.push((TIMINGS_FILE, serde_json::to_vec_pretty(&self.report.timings)?));

        let mut written = Vec::new();
        for (name, bytes) in files {
            let path = dir.join(name);
            if let Err(e) = fs::write(&path, bytes) {
                for p in &written {
                    let _ = fs::remove_file(p);
                }
                return Err(Error::io(path, e));
            }
            written.push(path);
        }
        Ok(written)
    }
}

/// Runs the pipeline and writes its outputs into `config.output_dir`.
pub fn run_pipeline(config: &PipelineConfig) -> Result<EvalReport> {
    let output = execute(config)?;
    output.write(&config.output_dir)?;
    Ok(output.report)
}
