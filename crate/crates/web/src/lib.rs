//! WebAssembly bindings for the browser demo. Every export returns a JSON
//! string; the plain Rust functions underneath are usable natively.

use gwofs::bench::{test_functions, TestFunction};
use gwofs::classify::metrics::accuracy;
use gwofs::classify::{roc_ova, ClassifierConfig, RocResult};
use gwofs::dataset::{split, synth_dataset, LabeledFeatureSet, SplitSpec};
use gwofs::gwo::{init_pack, select_features_with, GwoConfig, SelectionObjective};
use gwofs::pca::{covariance_spectrum, standardize, EigenPath};
use gwofs::{PcaModel, Result};
use serde::Serialize;
use wasm_bindgen::prelude::*;

const GRID: usize = 96;

#[derive(Debug, Serialize)]
pub struct Frame {
    pub positions: Vec<[f64; 2]>,
    pub alpha: [f64; 2],
    pub alpha_fitness: f64,
    pub a: f64,
}

#[derive(Debug, Serialize)]
pub struct GwoTrace {
    pub function: &'static str,
    pub bounds: (f64, f64),
    /// Row-major `GRID x GRID` samples of the landscape, `y` down the rows.
    pub grid: Vec<f64>,
    pub grid_size: usize,
    pub frames: Vec<Frame>,
}

/// GWO on a two-dimensional test function, keeping every iteration.
pub fn trace_gwo(function: &str, n_agents: usize, max_iter: usize, seed: u64) -> Result<GwoTrace> {
    let f: TestFunction = test_functions(function)?;
    let bounds = f.bounds();
    let objective = |x: &[f64]| f.evaluate(x);
    let config = GwoConfig {
        n_agents,
        max_iter,
        dim: 2,
        bounds,
        seed,
        parallel: false,
    };
    let mut pack = init_pack(&config)?;
    pack.evaluate(&objective)?;
    let snapshot = |p: &gwofs::WolfPack| Frame {
        positions: p.positions().iter().map(|x| [x[0], x[1]]).collect(),
        alpha: [p.alpha().position[0], p.alpha().position[1]],
        alpha_fitness: p.alpha().fitness,
        a: p.a(),
    };
    let mut frames = vec![snapshot(&pack)];
    while !pack.is_finished() {
        pack.step(&objective)?;
        frames.push(snapshot(&pack));
    }
    let (low, high) = bounds;
    let at = |i: usize| low + (high - low) * (i as f64 + 0.5) / GRID as f64;
    let grid = (0..GRID)
        .flat_map(|r| (0..GRID).map(move |c| f.evaluate(&[at(c), at(r)])))
        .collect();
    Ok(GwoTrace {
        function: f.name(),
        bounds,
        grid,
        grid_size: GRID,
        frames,
    })
}

#[derive(Debug, Serialize)]
pub struct Spectrum {
    pub eigenvalues: Vec<f64>,
    pub cev: Vec<f64>,
    pub m: usize,
    pub threshold: f64,
    pub n_dims: usize,
}

/// Eigenvalue spectrum of Gaussian-blob data, where only `informative`
/// dimensions carry class structure.
pub fn pca_spectrum(
    n_samples: usize,
    informative: usize,
    noise: usize,
    class_sep: f64,
    threshold: f64,
    seed: u64,
) -> Result<Spectrum> {
    let set = synth_dataset(n_samples, informative, noise, 3, class_sep, seed)?;
    let (x, _) = standardize(set.features().view())?;
    let spectrum = covariance_spectrum(x.view(), EigenPath::Auto)?;
    let m = spectrum.components_for(threshold);
    Ok(Spectrum {
        cev: spectrum.cumulative_explained_variance(),
        eigenvalues: spectrum.eigenvalues,
        m,
        threshold,
        n_dims: set.n_dims(),
    })
}

#[derive(Debug, Serialize)]
pub struct SelectionDemo {
    pub original_dim: usize,
    pub m: usize,
    pub selected: Vec<usize>,
    pub history: Vec<f64>,
    pub test_accuracy: f64,
    pub all_features_accuracy: f64,
    pub roc: RocResult,
    pub auc: Vec<f64>,
}

/// The full reduction pipeline on synthetic data: split, PCA on the
/// training part, GWO selection, SVM on train + val, ROC on test.
pub fn run_selection(
    n_samples: usize,
    noise: usize,
    class_sep: f64,
    n_agents: usize,
    max_iter: usize,
    seed: u64,
) -> Result<SelectionDemo> {
    let set = synth_dataset(n_samples, 3, noise, 3, class_sep, seed)?;
    let (train, val, test) = split(&set, &SplitSpec { seed, ..SplitSpec::default() })?;
    let pca = PcaModel::fit(train.features().view(), 0.99)?;
    let project = |s: &LabeledFeatureSet| s.with_features(pca.transform(s.features().view())?);
    let (train, val, test) = (project(&train)?, project(&val)?, project(&test)?);

    let clf = ClassifierConfig::default();
    let objective = SelectionObjective::new(&train, &val, clf);
    let config = GwoConfig {
        n_agents,
        max_iter,
        seed,
        ..GwoConfig::default()
    };
    let selection = select_features_with(&objective, &config)?;
    let cols = selection.mask.selected();
    let train_val = train.stack(&val)?;
    let model = clf.fit(&train_val.select_columns(cols))?;
    let (pred, scores) = model.predict(test.select_columns(cols).features().view())?;
    let roc = roc_ova(scores.view(), test.labels())?;
    let (all_pred, _) = clf.fit(&train_val)?.predict(test.features().view())?;
    Ok(SelectionDemo {
        original_dim: set.n_dims(),
        m: pca.n_components(),
        selected: cols.to_vec(),
        history: selection.history,
        test_accuracy: accuracy(test.labels(), &pred),
        all_features_accuracy: accuracy(test.labels(), &all_pred),
        auc: roc.aucs(),
        roc,
    })
}

fn to_js<T: Serialize>(r: Result<T>) -> Result<String, JsError> {
    let value = r.map_err(|e| JsError::new(&e.to_string()))?;
    serde_json::to_string(&value).map_err(|e| JsError::new(&e.to_string()))
}

#[wasm_bindgen(js_name = gwoTrace)]
pub fn gwo_trace_js(function: &str, n_agents: usize, max_iter: usize, seed: u32) -> Result<String, JsError> {
    to_js(trace_gwo(function, n_agents, max_iter, seed as u64))
}

#[wasm_bindgen(js_name = pcaSpectrum)]
pub fn pca_spectrum_js(
    n_samples: usize,
    informative: usize,
    noise: usize,
    class_sep: f64,
    threshold: f64,
    seed: u32,
) -> Result<String, JsError> {
    to_js(pca_spectrum(n_samples, informative, noise, class_sep, threshold, seed as u64))
}

#[wasm_bindgen(js_name = runSelection)]
pub fn run_selection_js(
    n_samples: usize,
    noise: usize,
    class_sep: f64,
    n_agents: usize,
    max_iter: usize,
    seed: u32,
) -> Result<String, JsError> {
    to_js(run_selection(n_samples, noise, class_sep, n_agents, max_iter, seed as u64))
}
