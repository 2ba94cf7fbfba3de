mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use gwofs::classify::{ClassifierConfig, Gamma};
use gwofs::ErrorCategory;

#[derive(Parser)]
#[command(name = "gwofs", version, about = "PCA + Grey Wolf Optimizer feature reduction with SVM evaluation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the whole pipeline from a JSON config.
    Run(RunArgs),
    /// Generate a synthetic Gaussian-blob dataset.
    Synth(SynthArgs),
    /// Concatenate inputs and write train/val/test files.
    Split(SplitArgs),
    /// Fit PCA on a feature file and save the model as JSON.
    PcaFit(PcaFitArgs),
    /// Project a feature file with a saved PCA model.
    PcaTransform(PcaTransformArgs),
    /// GWO wrapper feature selection on train/val files.
    Select(SelectArgs),
    /// Train on a file restricted to a mask and predict another file.
    Evaluate(EvaluateArgs),
    /// Compare GWO, PSO and GA as feature selectors over several seeds.
    BenchCompare(BenchCompareArgs),
    /// McNemar's test on two prediction files.
    EvalMcnemar(McNemarArgs),
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    threshold: Option<f64>,
    #[arg(long)]
    agents: Option<usize>,
    #[arg(long)]
    iters: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Evaluate fitness across threads (results are identical).
    #[arg(long)]
    parallel: bool,
}

#[derive(Args)]
struct SynthArgs {
    #[arg(long, default_value_t = 600)]
    samples: usize,
    #[arg(long, default_value_t = 3)]
    informative: usize,
    #[arg(long, default_value_t = 17)]
    noise: usize,
    #[arg(long, default_value_t = 3)]
    classes: usize,
    #[arg(long, default_value_t = 5.0)]
    sep: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output files; with several, columns are dealt out in equal blocks.
    #[arg(long = "out", required = true)]
    out: Vec<PathBuf>,
}

#[derive(Args)]
struct SplitArgs {
    #[arg(long = "in", required = true)]
    inputs: Vec<PathBuf>,
    #[arg(long, default_value_t = 0.7)]
    train: f64,
    #[arg(long, default_value_t = 0.15)]
    val: f64,
    #[arg(long, default_value_t = 0.15)]
    test: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    no_stratify: bool,
    /// Directory receiving train.csv, val.csv and test.csv.
    #[arg(long)]
    out_dir: PathBuf,
}

#[derive(Args)]
struct PcaFitArgs {
    #[arg(long, default_value_t = 0.99)]
    threshold: f64,
    #[arg(long = "in", required = true)]
    inputs: Vec<PathBuf>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct PcaTransformArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long = "in", required = true)]
    inputs: Vec<PathBuf>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum ClassifierKind {
    Svm,
    Knn,
}

#[derive(Args, Clone)]
struct ClassifierArgs {
    #[arg(long, value_enum, default_value = "svm")]
    classifier: ClassifierKind,
    /// SVM box constraint.
    #[arg(long = "svm-c", default_value_t = 1.0)]
    svm_c: f64,
    /// RBF gamma; defaults to 1 / (d * mean feature variance).
    #[arg(long)]
    gamma: Option<f64>,
    /// Neighbours for k-NN (odd).
    #[arg(long, default_value_t = 5)]
    k: usize,
}

impl ClassifierArgs {
    fn config(&self) -> ClassifierConfig {
        match self.classifier {
            ClassifierKind::Svm => ClassifierConfig::Svm {
                c: self.svm_c,
                gamma: self.gamma.map_or(Gamma::Scale, Gamma::Fixed),
            },
            ClassifierKind::Knn => ClassifierConfig::Knn { k: self.k },
        }
    }
}

#[derive(Args)]
struct SelectArgs {
    #[arg(long)]
    train: PathBuf,
    #[arg(long)]
    val: PathBuf,
    #[arg(long, default_value_t = 30)]
    agents: usize,
    #[arg(long, default_value_t = 100)]
    iters: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = gwofs::gwo::DEFAULT_LAMBDA)]
    lambda: f64,
    #[command(flatten)]
    clf: ClassifierArgs,
    #[arg(long)]
    parallel: bool,
    /// Mask JSON `{"selected": [...], "dim": n}`.
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    history: Option<PathBuf>,
}

#[derive(Args)]
struct EvaluateArgs {
    /// Training files; several are stacked row-wise (e.g. train and val).
    #[arg(long, required = true)]
    train: Vec<PathBuf>,
    #[arg(long)]
    test: PathBuf,
    /// Mask JSON; all columns when omitted.
    #[arg(long)]
    mask: Option<PathBuf>,
    #[command(flatten)]
    clf: ClassifierArgs,
    /// Predicted labels, one per line under a `label` header.
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    roc: Option<PathBuf>,
    /// Metrics JSON.
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Args)]
struct BenchCompareArgs {
    /// Pipeline config supplying inputs, split and classifier.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Feature files, when no config is given.
    #[arg(long = "in")]
    inputs: Vec<PathBuf>,
    #[arg(long, value_delimiter = ',', default_value = "gwo,pso,ga")]
    optimizers: Vec<String>,
    #[arg(long, default_value_t = 5)]
    seeds: usize,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    agents: Option<usize>,
    #[arg(long)]
    iters: Option<usize>,
    #[arg(long)]
    threshold: Option<f64>,
    /// Select on the raw concatenated features.
    #[arg(long)]
    no_pca: bool,
    #[arg(long)]
    parallel: bool,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct McNemarArgs {
    #[arg(long)]
    a: PathBuf,
    #[arg(long)]
    b: PathBuf,
    /// Labels file, or any feature file (label in the last column).
    #[arg(long)]
    truth: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn exit_code(category: ErrorCategory) -> u8 {
    match category {
        ErrorCategory::Usage => 2,
        ErrorCategory::Data => 3,
        ErrorCategory::Numerical => 4,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(a) => commands::run(a),
        Command::Synth(a) => commands::synth(a),
        Command::Split(a) => commands::split(a),
        Command::PcaFit(a) => commands::pca_fit(a),
        Command::PcaTransform(a) => commands::pca_transform(a),
        Command::Select(a) => commands::select(a),
        Command::Evaluate(a) => commands::evaluate(a),
        Command::BenchCompare(a) => commands::bench_compare(a),
        Command::EvalMcnemar(a) => commands::eval_mcnemar(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(e.category()))
        }
    }
}
