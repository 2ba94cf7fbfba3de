use std::collections::HashMap;
use std::sync::Mutex;

use serde::{Deserialize, Serialize};

use super::{optimize, GwoConfig};
use crate::classify::metrics::accuracy;
use crate::classify::ClassifierConfig;
use crate::dataset::LabeledFeatureSet;
use crate::error::{Error, Result};
use crate::objective::Objective;

/// Weight of the selected-feature ratio in the selection fitness.
pub const DEFAULT_LAMBDA: f64 = 0.01;
pub const DEFAULT_THRESHOLD: f64 = 0.5;

/// Non-empty sorted subset of `0..dim`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "MaskFile")]
pub struct FeatureMask {
    selected: Vec<usize>,
    dim: usize,
}

#[derive(Deserialize)]
struct MaskFile {
    selected: Vec<usize>,
    dim: usize,
}

impl TryFrom<MaskFile> for FeatureMask {
    type Error = Error;

    fn try_from(f: MaskFile) -> Result<Self> {
        FeatureMask::new(f.selected, f.dim)
    }
}

impl FeatureMask {
    pub fn new(mut selected: Vec<usize>, dim: usize) -> Result<Self> {
        if selected.is_empty() {
            return Err(Error::InvalidData("feature mask is empty".into()));
        }
        selected.sort_unstable();
        if let Some(w) = selected.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::InvalidData(format!("duplicate index {} in mask", w[0])));
        }
        if let Some(&last) = selected.last() {
            if last >= dim {
                return Err(Error::InvalidData(format!(
                    "mask index {last} out of range for dimension {dim}"
                )));
            }
        }
        Ok(Self { selected, dim })
    }

    pub fn full(dim: usize) -> Result<Self> {
        Self::new((0..dim).collect(), dim)
    }

    pub fn selected(&self) -> &[usize] {
        &self.selected
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.selected.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }
}

/// Selects `i` where `position[i] > threshold`. An empty result is repaired
/// to the single largest component (lowest index on ties).
pub fn binarize(position: &[f64], threshold: f64) -> FeatureMask {
    assert!(!position.is_empty(), "cannot binarize an empty position");
    let mut selected: Vec<usize> = (0..position.len())
        .filter(|&i| position[i] > threshold)
        .collect();
    if selected.is_empty() {
        let mut best = 0;
        for (i, &v) in position.iter().enumerate() {
            if v > position[best] {
                best = i;
            }
        }
        selected.push(best);
    }
    FeatureMask {
        selected,
        dim: position.len(),
    }
}

/// `(1 - validation accuracy) + lambda * |mask| / dim` for the classifier
/// trained on the masked columns of `train`.
pub fn selection_fitness(
    mask: &FeatureMask,
    train: &LabeledFeatureSet,
    val: &LabeledFeatureSet,
    clf: &ClassifierConfig,
    lambda: f64,
) -> Result<f64> {
    if train.n_dims() != mask.dim() || val.n_dims() != mask.dim() {
        return Err(Error::DimensionMismatch {
            expected: mask.dim(),
            found: train.n_dims(),
        });
    }
    let wrap = |e: Error| Error::Classifier {
        mask: mask.selected().to_vec(),
        source: Box::new(e),
    };
    let train_sub = train.select_columns(mask.selected());
    let val_sub = val.select_columns(mask.selected());
    let model = clf.fit(&train_sub).map_err(wrap)?;
    let (pred, _) = model.predict(val_sub.features().view()).map_err(wrap)?;
    let acc = accuracy(val.labels(), &pred);
    Ok((1.0 - acc) + lambda * mask.len() as f64 / mask.dim() as f64)
}

/// Wrapper-selection objective over the `(0,1)` box. Ties in fitness are
/// broken toward smaller masks. Fitness per distinct mask is memoized.
pub struct SelectionObjective<'a> {
    pub train: &'a LabeledFeatureSet,
    pub val: &'a LabeledFeatureSet,
    pub clf: ClassifierConfig,
    pub lambda: f64,
    pub threshold: f64,
    cache: Mutex<HashMap<Vec<usize>, f64>>,
}

impl<'a> SelectionObjective<'a> {
    pub fn new(train: &'a LabeledFeatureSet, val: &'a LabeledFeatureSet, clf: ClassifierConfig) -> Self {
        Self {
            train,
            val,
            clf,
            lambda: DEFAULT_LAMBDA,
            threshold: DEFAULT_THRESHOLD,
            cache: Mutex::new(HashMap::new()),
        }
    }

    pub fn with_lambda(mut self, lambda: f64) -> Self {
        self.lambda = lambda;
        self
    }

    pub fn dim(&self) -> usize {
        self.train.n_dims()
    }

    pub fn mask_fitness(&self, mask: &FeatureMask) -> Result<f64> {
        if let Some(&f) = self.cache.lock().expect("cache poisoned").get(mask.selected()) {
            return Ok(f);
        }
        let f = selection_fitness(mask, self.train, self.val, &self.clf, self.lambda)?;
        self.cache
            .lock()
            .expect("cache poisoned")
            .insert(mask.selected().to_vec(), f);
        Ok(f)
    }

    /// Number of distinct masks scored so far.
    pub fn evaluations(&self) -> usize {
        self.cache.lock().expect("cache poisoned").len()
    }
}

impl Objective for SelectionObjective<'_> {
    fn evaluate(&self, position: &[f64]) -> Result<f64> {
        self.mask_fitness(&binarize(position, self.threshold))
    }

    fn tie_key(&self, position: &[f64]) -> usize {
        binarize(position, self.threshold).len()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SelectionResult {
    pub mask: FeatureMask,
    pub fitness: f64,
    pub history: Vec<f64>,
}

/// GWO over the `(0,1)` box of feature weights, scored by
/// [`selection_fitness`]. `config.dim` and `config.bounds` are overridden.
pub fn select_features(
    train: &LabeledFeatureSet,
    val: &LabeledFeatureSet,
    config: &GwoConfig,
    clf: &ClassifierConfig,
) -> Result<SelectionResult> {
    let objective = SelectionObjective::new(train, val, *clf);
    select_features_with(&objective, config)
}

pub fn select_features_with(objective: &SelectionObjective<'_>, config: &GwoConfig) -> Result<SelectionResult> {
    if objective.train.n_classes() != objective.val.n_classes() {
        return Err(Error::InvalidData("train and val disagree on class count".into()));
    }
    let config = GwoConfig {
        dim: objective.dim(),
        bounds: (0.0, 1.0),
        ..config.clone()
    };
    let run = optimize(&config, objective)?;
    Ok(SelectionResult {
        mask: binarize(&run.best_position, objective.threshold),
        fitness: run.best_fitness,
        history: run.history,
    })
}
