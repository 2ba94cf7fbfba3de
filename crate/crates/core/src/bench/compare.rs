use std::io::Write;
use std::time::Instant;

use serde::Serialize;

use super::{run_optimizer, OptimizerSpec};
use crate::classify::metrics::accuracy;
use crate::classify::ClassifierConfig;
use crate::dataset::LabeledFeatureSet;
use crate::error::{Error, Result};
use crate::gwo::{binarize, FeatureMask, SelectionObjective};

/// Train/validation sets drive selection; the test set only scores the
/// final classifier.
#[derive(Debug, Clone, Copy)]
pub struct SelectionData<'a> {
    pub train: &'a LabeledFeatureSet,
    pub val: &'a LabeledFeatureSet,
    pub test: &'a LabeledFeatureSet,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonRow {
    pub optimizer: String,
    pub seed: u64,
    pub accuracy: f64,
    pub n_features: usize,
    pub fitness: f64,
    pub wall_time_s: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MeanStd {
    pub mean: f64,
    pub std: f64,
}

impl MeanStd {
    fn of(values: &[f64]) -> Self {
        if values.is_empty() {
            return Self {
                mean: f64::NAN,
                std: f64::NAN,
            };
        }
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let std = if values.len() > 1 {
            (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
        } else {
            0.0
        };
        Self { mean, std }
    }
}

/// Mean ± sample standard deviation over the successful runs of one
/// optimizer.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AggregateRow {
    pub optimizer: String,
    pub seed: &'static str,
    pub accuracy: MeanStd,
    pub n_features: MeanStd,
    pub fitness: MeanStd,
    pub wall_time_s: MeanStd,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonTable {
    pub rows: Vec<ComparisonRow>,
    pub aggregates: Vec<AggregateRow>,
}

fn run_one(
    spec: &OptimizerSpec,
    data: SelectionData<'_>,
    clf: &ClassifierConfig,
) -> Result<(FeatureMask, f64, f64)> {
    let objective = SelectionObjective::new(data.train, data.val, *clf);
    let run = run_optimizer(spec, &objective, data.train.n_dims(), (0.0, 1.0))?;
    let mask = binarize(&run.best_position, objective.threshold);
    let final_train = data
        .train
        .stack(data.val)?
        .select_columns(mask.selected());
    let model = clf.fit(&final_train)?;
    let test = data.test.select_columns(mask.selected());
    let (pred, _) = model.predict(test.features().view())?;
    Ok((mask, run.best_fitness, accuracy(test.labels(), &pred)))
}

/// Runs every spec for seeds `spec.seed .. spec.seed + n_seeds` and scores
/// the selected subset on the test split. Rows keep spec order, then seed
/// order; failed runs keep their row with `error` set.
pub fn compare_selectors(
    specs: &[OptimizerSpec],
    data: SelectionData<'_>,
    clf: &ClassifierConfig,
    n_seeds: usize,
) -> Result<ComparisonTable> {
    if specs.is_empty() {
        return Err(Error::Config("no optimizers to compare".into()));
    }
    if n_seeds == 0 {
        return Err(Error::Config("n_seeds must be at least 1".into()));
    }
    let mut rows = Vec::with_capacity(specs.len() * n_seeds);
    let mut aggregates = Vec::with_capacity(specs.len());
    for spec in specs {
        let mut ok = Vec::new();
        for offset in 0..n_seeds as u64 {
            let seeded = OptimizerSpec {
                seed: spec.seed.wrapping_add(offset),
                ..spec.clone()
            };
            let start = Instant::now();
            let outcome = run_one(&seeded, data, clf);
            let wall_time_s = start.elapsed().as_secs_f64();
            let row = match outcome {
                Ok((mask, fitness, acc)) => ComparisonRow {
                    optimizer: spec.name().to_string(),
                    seed: seeded.seed,
                    accuracy: acc,
                    n_features: mask.len(),
                    fitness,
                    wall_time_s,
                    error: None,
                },
                Err(e) => ComparisonRow {
                    optimizer: spec.name().to_string(),
                    seed: seeded.seed,
                    accuracy: f64::NAN,
                    n_features: 0,
                    fitness: f64::NAN,
                    wall_time_s,
                    error: Some(e.to_string()),
                },
            };
            if row.error.is_none() {
                ok.push(row.clone());
            }
            rows.push(row);
        }
        let col = |f: fn(&ComparisonRow) -> f64| MeanStd::of(&ok.iter().map(f).collect::<Vec<_>>());
        aggregates.push(AggregateRow {
            optimizer: spec.name().to_string(),
            seed: "aggregate",
            accuracy: col(|r| r.accuracy),
            n_features: col(|r| r.n_features as f64),
            fitness: col(|r| r.fitness),
            wall_time_s: col(|r| r.wall_time_s),
        });
    }
    Ok(ComparisonTable { rows, aggregates })
}

impl ComparisonTable {
    /// Columns `optimizer,seed,accuracy,n_features,fitness,wall_time_s`.
    /// Aggregate rows carry `mean±std` cells and the seed `aggregate`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "optimizer,seed,accuracy,n_features,fitness,wall_time_s")?;
        for r in &self.rows {
            writeln!(
                w,
                "{},{},{},{},{},{}",
                r.optimizer, r.seed, r.accuracy, r.n_features, r.fitness, r.wall_time_s
            )?;
        }
        let cell = |m: &MeanStd| format!("{}±{}", m.mean, m.std);
        for a in &self.aggregates {
            writeln!(
                w,
                "{},{},{},{},{},{}",
                a.optimizer,
                a.seed,
                cell(&a.accuracy),
                cell(&a.n_features),
                cell(&a.fitness),
                cell(&a.wall_time_s)
            )?;
        }
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bench::OptimizerKind;
    use crate::dataset::{split, synth_dataset, SplitSpec};

    fn data() -> (LabeledFeatureSet, LabeledFeatureSet, LabeledFeatureSet) {
        let set = synth_dataset(90, 2, 4, 2, 3.0, 12).unwrap();
        split(&set, &SplitSpec::default()).unwrap()
    }

    #[test]
    fn one_spec_one_seed() {
        let (train, val, test) = data();
        let specs = [OptimizerSpec::new(OptimizerKind::Gwo, 5, 5, 1)];
        let t = compare_selectors(
            &specs,
            SelectionData { train: &train, val: &val, test: &test },
            &ClassifierConfig::Knn { k: 3 },
            1,
        )
        .unwrap();
        assert_eq!(t.rows.len(), 1);
        assert_eq!(t.aggregates.len(), 1);
        assert_eq!(t.aggregates[0].accuracy.std, 0.0);
        let mut csv = Vec::new();
        t.write_csv(&mut csv).unwrap();
        let text = String::from_utf8(csv).unwrap();
        assert_eq!(text.lines().count(), 3);
        assert!(text.starts_with("optimizer,seed,accuracy,n_features,fitness,wall_time_s\n"));
    }

    #[test]
    fn deterministic_apart_from_timing() {
        let (train, val, test) = data();
        let specs = [
            OptimizerSpec::new(OptimizerKind::Gwo, 5, 6, 3),
            OptimizerSpec::new(OptimizerKind::pso(), 5, 6, 3),
            OptimizerSpec::new(OptimizerKind::ga(), 5, 6, 3),
        ];
        let d = SelectionData { train: &train, val: &val, test: &test };
        let clf = ClassifierConfig::Knn { k: 3 };
        let strip = |t: ComparisonTable| {
            t.rows
                .into_iter()
                .map(|r| (r.optimizer, r.seed, r.accuracy, r.n_features, r.fitness))
                .collect::<Vec<_>>()
        };
        let a = strip(compare_selectors(&specs, d, &clf, 2).unwrap());
        let b = strip(compare_selectors(&specs, d, &clf, 2).unwrap());
        assert_eq!(a, b);
        let names: Vec<&str> = a.iter().map(|r| r.0.as_str()).collect();
        assert_eq!(names, ["gwo", "gwo", "pso", "pso", "ga", "ga"]);
    }

    #[test]
    fn failures_stay_in_their_row() {
        let (train, val, test) = data();
        let specs = [OptimizerSpec::new(OptimizerKind::Gwo, 2, 5, 0)];
        let t = compare_selectors(
            &specs,
            SelectionData { train: &train, val: &val, test: &test },
            &ClassifierConfig::Knn { k: 3 },
            2,
        )
        .unwrap();
        assert_eq!(t.rows.len(), 2);
        assert!(t.rows.iter().all(|r| r.error.is_some()));
    }
}
