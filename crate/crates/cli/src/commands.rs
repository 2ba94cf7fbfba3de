use std::fs;
use std::path::{Path, PathBuf};

use gwofs::bench::{compare_selectors, OptimizerKind, OptimizerSpec, SelectionData};
use gwofs::classify::{confusion, mcnemar, metrics, roc_ova, Metrics};
use gwofs::dataset::{
    concat_features, load_feature_set, save_feature_set, split as split_set, synth_dataset, FileFormat,
    LabeledFeatureSet, SplitSpec,
};
use gwofs::gwo::{select_features_with, FeatureMask, GwoConfig, SelectionObjective};
use gwofs::pipeline::{execute, prepare, write_history_csv, PipelineConfig};
use gwofs::{Error, PcaModel, Result};
use serde::Serialize;

use crate::{
    BenchCompareArgs, EvaluateArgs, McNemarArgs, PcaFitArgs, PcaTransformArgs, RunArgs, SelectArgs, SplitArgs,
    SynthArgs,
};

fn load(path: &Path) -> Result<LabeledFeatureSet> {
    load_feature_set(path, FileFormat::from_path(path))
}

fn load_concat(paths: &[PathBuf]) -> Result<LabeledFeatureSet> {
    let sets = paths.iter().map(|p| load(p)).collect::<Result<Vec<_>>>()?;
    concat_features(&sets)
}

fn save(set: &LabeledFeatureSet, path: &Path) -> Result<()> {
    save_feature_set(set, path, FileFormat::from_path(path))
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn write_with(path: &Path, f: impl FnOnce(&mut Vec<u8>) -> std::io::Result<()>) -> Result<()> {
    let mut buf = Vec::new();
    f(&mut buf).map_err(|e| Error::io(path, e))?;
    write_text(path, &String::from_utf8(buf).expect("utf-8 output"))
}

fn json<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

/// Reads a pipeline config; relative input paths resolve against the
/// config file's directory.
fn read_config(path: &Path) -> Result<PipelineConfig> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut config = PipelineConfig::from_json(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    let base = path.parent().unwrap_or(Path::new(""));
    for input in &mut config.inputs {
        if input.is_relative() {
            *input = base.join(&*input);
        }
    }
    Ok(config)
}

pub fn run(args: RunArgs) -> Result<()> {
    let mut config = read_config(&args.config)?;
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    if let Some(t) = args.threshold {
        config.pca_threshold = t;
    }
    if let Some(n) = args.agents {
        config.selection.n_agents = n;
    }
    if let Some(n) = args.iters {
        config.selection.max_iter = n;
    }
    if let Some(out) = args.out {
        config.output_dir = out;
    }
    config.selection.parallel |= args.parallel;
    let output = execute(&config)?;
    output.write(&config.output_dir)?;
    let r = &output.report;
    println!(
        "m = {} of {} dims, selected {} ({:?}), test accuracy {:.4} (all features {:.4}), report in {}",
        r.post_pca_dim,
        r.original_dim,
        r.n_selected,
        r.mask.selected(),
        r.accuracy.test,
        r.baseline.test_accuracy,
        config.output_dir.display()
    );
    Ok(())
}

pub fn synth(args: SynthArgs) -> Result<()> {
    let set = synth_dataset(args.samples, args.informative, args.noise, args.classes, args.sep, args.seed)?;
    let d = set.n_dims();
    let parts = args.out.len();
    if parts > d {
        return Err(Error::Config(format!("cannot deal {d} columns into {parts} files")));
    }
    let mut start = 0;
    for (i, path) in args.out.iter().enumerate() {
        let width = d / parts + usize::from(i < d % parts);
        let cols: Vec<usize> = (start..start + width).collect();
        start += width;
        save(&set.select_columns(&cols), path)?;
    }
    Ok(())
}

pub fn split(args: SplitArgs) -> Result<()> {
    let set = load_concat(&args.inputs)?;
    let spec = SplitSpec {
        train_fraction: args.train,
        val_fraction: args.val,
        test_fraction: args.test,
        seed: args.seed,
        stratified: !args.no_stratify,
    };
    let (train, val, test) = split_set(&set, &spec)?;
    fs::create_dir_all(&args.out_dir).map_err(|e| Error::io(&args.out_dir, e))?;
    for (name, part) in [("train.csv", &train), ("val.csv", &val), ("test.csv", &test)] {
        save(part, &args.out_dir.join(name))?;
    }
    Ok(())
}

pub fn pca_fit(args: PcaFitArgs) -> Result<()> {
    let set = load_concat(&args.inputs)?;
    let model = PcaModel::fit(set.features().view(), args.threshold)?;
    write_text(&args.out, &model.to_json()?)?;
    eprintln!(
        "kept {} of {} components (CEV {:.6})",
        model.n_components(),
        model.n_dims(),
        model.explained_variance_ratio()
    );
    Ok(())
}

pub fn pca_transform(args: PcaTransformArgs) -> Result<()> {
    let text = fs::read_to_string(&args.model).map_err(|e| Error::io(&args.model, e))?;
    let model = PcaModel::from_json(&text)?;
    let set = load_concat(&args.inputs)?;
    let scores = model.transform(set.features().view())?;
    save(&set.with_features(scores)?, &args.out)
}

pub fn select(args: SelectArgs) -> Result<()> {
    let train = load(&args.train)?;
    let val = load(&args.val)?;
    let objective = SelectionObjective::new(&train, &val, args.clf.config()).with_lambda(args.lambda);
    let config = GwoConfig {
        n_agents: args.agents,
        max_iter: args.iters,
        dim: train.n_dims(),
        bounds: (0.0, 1.0),
        seed: args.seed,
        parallel: args.parallel,
    };
    let result = select_features_with(&objective, &config)?;
    write_text(&args.out, &format!("{}\n", result.mask.to_json()?))?;
    if let Some(path) = &args.history {
        write_with(path, |w| write_history_csv(&result.history, w))?;
    }
    eprintln!(
        "selected {} of {} features, fitness {}",
        result.mask.len(),
        result.mask.dim(),
        result.fitness
    );
    Ok(())
}

#[derive(Serialize)]
struct EvaluationReport {
    mask: FeatureMask,
    accuracy: f64,
    metrics: Metrics,
    auc: Vec<f64>,
}

pub fn evaluate(args: EvaluateArgs) -> Result<()> {
    let mut train = load(&args.train[0])?;
    for path in &args.train[1..] {
        train = train.stack(&load(path)?)?;
    }
    let test = load(&args.test)?;
    if train.n_dims() != test.n_dims() {
        return Err(Error::DimensionMismatch {
            expected: train.n_dims(),
            found: test.n_dims(),
        });
    }
    let mask = match &args.mask {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
            let mask: FeatureMask = serde_json::from_str(&text)?;
            if mask.dim() != train.n_dims() {
                return Err(Error::DimensionMismatch {
                    expected: train.n_dims(),
                    found: mask.dim(),
                });
            }
            mask
        }
        None => FeatureMask::full(train.n_dims())?,
    };
    let model = args.clf.config().fit(&train.select_columns(mask.selected()))?;
    let (pred, scores) = model.predict(test.select_columns(mask.selected()).features().view())?;
    write_text(
        &args.out,
        &std::iter::once("label".to_string())
            .chain(pred.iter().map(usize::to_string))
            .map(|l| l + "\n")
            .collect::<String>(),
    )?;
    let n_classes = train.n_classes().max(test.n_classes());
    let m = metrics(&confusion(test.labels(), &pred, n_classes)?)?;
    let roc = roc_ova(scores.view(), test.labels())?;
    if let Some(path) = &args.roc {
        write_with(path, |w| roc.write_csv(w))?;
    }
    eprintln!("test accuracy {:.4}", m.accuracy);
    if let Some(path) = &args.report {
        let report = EvaluationReport {
            mask,
            accuracy: m.accuracy,
            auc: roc.aucs(),
            metrics: m,
        };
        write_text(path, &json(&report)?)?;
    }
    Ok(())
}

pub fn bench_compare(args: BenchCompareArgs) -> Result<()> {
    let mut config = match &args.config {
        Some(path) => read_config(path)?,
        None => PipelineConfig::default(),
    };
    if !args.inputs.is_empty() {
        config.inputs = args.inputs.clone();
    }
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    if let Some(n) = args.agents {
        config.selection.n_agents = n;
    }
    if let Some(n) = args.iters {
        config.selection.max_iter = n;
    }
    if let Some(t) = args.threshold {
        config.pca_threshold = t;
    }
    config.skip_pca |= args.no_pca;
    config.selection.parallel |= args.parallel;
    let specs = args
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
    let data = prepare(&config)?;
    let clf = config.fitness_classifier.unwrap_or(config.classifier);
    let table = compare_selectors(
        &specs,
        SelectionData {
            train: &data.train,
            val: &data.val,
            test: &data.test,
        },
        &clf,
        args.seeds,
    )?;
    write_with(&args.out, |w| table.write_csv(w))?;
    for a in &table.aggregates {
        eprintln!(
            "{:>4}: accuracy {:.4} ± {:.4}, features {:.1} ± {:.1}",
            a.optimizer, a.accuracy.mean, a.accuracy.std, a.n_features.mean, a.n_features.std
        );
    }
    Ok(())
}

/// One label per line; a non-numeric first line is a header and rows with
/// several columns contribute their last cell.
fn read_labels(path: &Path) -> Result<Vec<usize>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut labels = Vec::new();
    for (row, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let cell = line.rsplit(',').next().unwrap_or(line).trim();
        match cell.parse::<usize>() {
            Ok(l) => labels.push(l),
            Err(_) if row == 0 => {}
            Err(e) => {
                return Err(Error::Parse {
                    row,
                    col: line.matches(',').count(),
                    msg: format!("{}: label {cell:?}: {e}", path.display()),
                })
            }
        }
    }
    Ok(labels)
}

pub fn eval_mcnemar(args: McNemarArgs) -> Result<()> {
    let a = read_labels(&args.a)?;
    let b = read_labels(&args.b)?;
    let truth = read_labels(&args.truth)?;
    let r = mcnemar(&a, &b, &truth)?;
    let text = json(&serde_json::json!({
        "b": r.b,
        "c": r.c,
        "statistic": r.statistic,
        "p": r.p_value,
    }))?;
    match &args.out {
        Some(path) => write_text(path, &text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}
