//! Labeled feature matrices: file formats, concatenation, splitting and
//! synthetic generation.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use ndarray::{concatenate, Array2, Axis};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const MAGIC: &[u8; 4] = b"FMX1";

/// Dense feature matrix with one integer class label per row.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledFeatureSet {
    features: Array2<f64>,
    labels: Vec<usize>,
    n_classes: usize,
    feature_names: Option<Vec<String>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FileFormat {
    Csv,
    Binary,
}

impl FileFormat {
    /// Picks the format from the file extension; anything but `.csv` is binary.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(ext) if ext.eq_ignore_ascii_case("csv") => FileFormat::Csv,
            _ => FileFormat::Binary,
        }
    }
}

impl LabeledFeatureSet {
    /// Builds a validated set. Every class in `0..n_classes` must occur.
    pub fn new(features: Array2<f64>, labels: Vec<usize>, n_classes: usize) -> Result<Self> {
        let set = Self::from_parts(features, labels, n_classes)?;
        let counts = set.class_counts();
        if let Some(c) = counts.iter().position(|&n| n == 0) {
            return Err(Error::ClassAbsent(c));
        }
        Ok(set)
    }

    /// Like [`new`](Self::new) but allows classes with no samples, which is
    /// what a split of a small set can legitimately produce.
    pub fn from_parts(features: Array2<f64>, labels: Vec<usize>, n_classes: usize) -> Result<Self> {
        let (n, d) = features.dim();
        if n == 0 || d == 0 {
            return Err(Error::Empty);
        }
        if labels.len() != n {
            return Err(Error::LengthMismatch(n, labels.len()));
        }
        if n_classes == 0 {
            return Err(Error::InvalidData("n_classes must be positive".into()));
        }
        for (row, values) in features.outer_iter().enumerate() {
            if let Some(col) = values.iter().position(|v| !v.is_finite()) {
                return Err(Error::NonFinite { row, col });
            }
        }
        if let Some(row) = labels.iter().position(|&l| l >= n_classes) {
            return Err(Error::LabelOutOfRange {
                row,
                label: labels[row] as u64,
                n_classes,
            });
        }
        Ok(Self {
            features,
            labels,
            n_classes,
            feature_names: None,
        })
    }

    pub fn with_feature_names(mut self, names: Vec<String>) -> Result<Self> {
        if names.len() != self.n_dims() {
            return Err(Error::LengthMismatch(self.n_dims(), names.len()));
        }
        self.feature_names = Some(names);
        Ok(self)
    }

    pub fn features(&self) -> &Array2<f64> {
        &self.features
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn n_classes(&self) -> usize {
        self.n_classes
    }

    pub fn feature_names(&self) -> Option<&[String]> {
        self.feature_names.as_deref()
    }

    pub fn n_samples(&self) -> usize {
        self.features.nrows()
    }

    pub fn n_dims(&self) -> usize {
        self.features.ncols()
    }

    pub fn class_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.n_classes];
        for &l in &self.labels {
            counts[l] += 1;
        }
        counts
    }

    /// Rows at `indices`, in the given order. Classes may become absent.
    pub fn select_rows(&self, indices: &[usize]) -> Self {
        Self {
            features: self.features.select(Axis(0), indices),
            labels: indices.iter().map(|&i| self.labels[i]).collect(),
            n_classes: self.n_classes,
            feature_names: self.feature_names.clone(),
        }
    }

    /// Columns at `columns`, in the given order.
    pub fn select_columns(&self, columns: &[usize]) -> Self {
        Self {
            features: self.features.select(Axis(1), columns),
            labels: self.labels.clone(),
            n_classes: self.n_classes,
            feature_names: self
                .feature_names
                .as_ref()
                .map(|names| columns.iter().map(|&c| names[c].clone()).collect()),
        }
    }

    /// Same labels, new feature matrix (e.g. PCA scores).
    pub fn with_features(&self, features: Array2<f64>) -> Result<Self> {
        if features.nrows() != self.n_samples() {
            return Err(Error::RowCountMismatch {
                expected: self.n_samples(),
                found: features.nrows(),
            });
        }
        Self::from_parts(features, self.labels.clone(), self.n_classes)
    }

    /// Vertical stack of two sets with the same dimension and class count.
    pub fn stack(&self, other: &Self) -> Result<Self> {
        if self.n_dims() != other.n_dims() {
            return Err(Error::DimensionMismatch {
                expected: self.n_dims(),
                found: other.n_dims(),
            });
        }
        if self.n_classes != other.n_classes {
            return Err(Error::InvalidData(format!(
                "class count mismatch {} vs {}",
                self.n_classes, other.n_classes
            )));
        }
        let features = concatenate(Axis(0), &[self.features.view(), other.features.view()])
            .expect("column counts checked");
        let mut labels = self.labels.clone();
        labels.extend_from_slice(&other.labels);
        Ok(Self {
            features,
            labels,
            n_classes: self.n_classes,
            feature_names: self.feature_names.clone(),
        })
    }
}

pub fn load_feature_set(path: &Path, format: FileFormat) -> Result<LabeledFeatureSet> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let reader = BufReader::new(file);
    match format {
        FileFormat::Csv => read_csv(reader),
        FileFormat::Binary => read_binary(reader).map_err(|e| match e {
            Error::Io { source, .. } => Error::io(path, source),
            other => other,
        }),
    }
}

pub fn save_feature_set(set: &LabeledFeatureSet, path: &Path, format: FileFormat) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut writer = BufWriter::new(file);
    match format {
        FileFormat::Csv => write_csv(set, &mut writer),
        FileFormat::Binary => write_binary(set, &mut writer),
    }
    .and_then(|_| writer.flush())
    .map_err(|e| Error::io(path, e))
}

/// Parses the CSV layout: optional `f0,...` header, `n_dims` floats then an
/// integer label per row. `n_classes` is the largest label plus one.
pub fn read_csv<R: Read>(reader: R) -> Result<LabeledFeatureSet> {
    let mut csv = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let mut names = None;
    let mut values = Vec::new();
    let mut labels = Vec::new();
    let mut n_cols = None;
    let mut row = 0usize;
    for (line, record) in csv.records().enumerate() {
        let record = record.map_err(|e| Error::Parse {
            row,
            col: 0,
            msg: e.to_string(),
        })?;
        if line == 0 && record.get(0).is_some_and(|c| c == "f0") {
            let cells: Vec<String> = record.iter().map(str::to_owned).collect();
            names = Some(cells[..cells.len().saturating_sub(1)].to_vec());
            continue;
        }
        if record.len() == 1 && record.get(0) == Some("") {
            continue;
        }
        let width = *n_cols.get_or_insert(record.len());
        if record.len() != width {
            return Err(Error::Parse {
                row,
                col: record.len().min(width),
                msg: format!("expected {width} fields, found {}", record.len()),
            });
        }
        if width < 2 {
            return Err(Error::Parse {
                row,
                col: 0,
                msg: "need at least one feature column and a label".into(),
            });
        }
        for (col, cell) in record.iter().take(width - 1).enumerate() {
            let v: f64 = cell.parse().map_err(|_| Error::Parse {
                row,
                col,
                msg: format!("invalid float {cell:?}"),
            })?;
            if !v.is_finite() {
                return Err(Error::NonFinite { row, col });
            }
            values.push(v);
        }
        let cell = &record[width - 1];
        let label: u64 = cell.parse().map_err(|_| Error::Parse {
            row,
            col: width - 1,
            msg: format!("invalid label {cell:?}"),
        })?;
        labels.push(label as usize);
        row += 1;
    }
    let n_cols = n_cols.ok_or(Error::Empty)?;
    let n_dims = n_cols - 1;
    let n_classes = labels.iter().max().map_or(0, |&m| m + 1);
    let features = Array2::from_shape_vec((labels.len(), n_dims), values)
        .map_err(|e| Error::InvalidData(e.to_string()))?;
    let set = LabeledFeatureSet::new(features, labels, n_classes)?;
    match names {
        Some(names) if names.len() == n_dims => set.with_feature_names(names),
        Some(names) => Err(Error::Parse {
            row: 0,
            col: names.len(),
            msg: format!("header has {} feature names, rows have {n_dims}", names.len()),
        }),
        None => Ok(set),
    }
}

pub fn write_csv<W: Write>(set: &LabeledFeatureSet, mut w: W) -> std::io::Result<()> {
    let header: Vec<String> = (0..set.n_dims()).map(|i| format!("f{i}")).collect();
    writeln!(w, "{},label", header.join(","))?;
    for (row, &label) in set.features.outer_iter().zip(&set.labels) {
        for v in row {
            write!(w, "{v},")?;
        }
        writeln!(w, "{label}")?;
    }
    Ok(())
}

fn read_u32<R: Read>(r: &mut R) -> Result<u32> {
    let mut buf = [0u8; 4];
    r.read_exact(&mut buf).map_err(|e| Error::io("<binary>", e))?;
    Ok(u32::from_le_bytes(buf))
}

pub fn read_binary<R: Read>(mut r: R) -> Result<LabeledFeatureSet> {
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic).map_err(|e| Error::io("<binary>", e))?;
    if &magic != MAGIC {
        return Err(Error::BadMagic { found: magic });
    }
    let n_samples = read_u32(&mut r)? as usize;
    let n_dims = read_u32(&mut r)? as usize;
    let n_classes = read_u32(&mut r)? as usize;
    if n_samples == 0 || n_dims == 0 {
        return Err(Error::Empty);
    }
    let mut values = Vec::with_capacity(n_samples * n_dims);
    let mut buf = [0u8; 8];
    for row in 0..n_samples {
        for col in 0..n_dims {
            r.read_exact(&mut buf).map_err(|e| Error::Parse {
                row,
                col,
                msg: format!("truncated matrix: {e}"),
            })?;
            let v = f64::from_le_bytes(buf);
            if !v.is_finite() {
                return Err(Error::NonFinite { row, col });
            }
            values.push(v);
        }
    }
    let mut labels = Vec::with_capacity(n_samples);
    for row in 0..n_samples {
        let label = read_u32(&mut r).map_err(|_| Error::Parse {
            row,
            col: n_dims,
            msg: "truncated label block".into(),
        })?;
        if label as usize >= n_classes {
            return Err(Error::LabelOutOfRange {
                row,
                label: label.into(),
                n_classes,
            });
        }
        labels.push(label as usize);
    }
    let features = Array2::from_shape_vec((n_samples, n_dims), values)
        .map_err(|e| Error::InvalidData(e.to_string()))?;
    LabeledFeatureSet::new(features, labels, n_classes)
}

pub fn write_binary<W: Write>(set: &LabeledFeatureSet, mut w: W) -> std::io::Result<()> {
    w.write_all(MAGIC)?;
    for n in [set.n_samples(), set.n_dims(), set.n_classes] {
        w.write_all(&(n as u32).to_le_bytes())?;
    }
    for v in set.features.iter() {
        w.write_all(&v.to_le_bytes())?;
    }
    for &l in &set.labels {
        w.write_all(&(l as u32).to_le_bytes())?;
    }
    Ok(())
}

/// Horizontal concatenation of sets that describe the same samples.
pub fn concat_features(sets: &[LabeledFeatureSet]) -> Result<LabeledFeatureSet> {
    let first = sets
        .first()
        .ok_or_else(|| Error::InvalidData("no feature sets to concatenate".into()))?;
    for other in &sets[1..] {
        if other.n_samples() != first.n_samples() {
            return Err(Error::RowCountMismatch {
                expected: first.n_samples(),
                found: other.n_samples(),
            });
        }
        if let Some(index) = first
            .labels
            .iter()
            .zip(&other.labels)
            .position(|(a, b)| a != b)
        {
            return Err(Error::LabelMismatch { index });
        }
        if other.n_classes != first.n_classes {
            return Err(Error::InvalidData(format!(
                "class count mismatch {} vs {}",
                first.n_classes, other.n_classes
            )));
        }
    }
    let views: Vec<_> = sets.iter().map(|s| s.features.view()).collect();
    let features = concatenate(Axis(1), &views).expect("row counts checked");
    let feature_names = sets
        .iter()
        .map(|s| s.feature_names.clone())
        .collect::<Option<Vec<_>>>()
        .map(|v| v.concat());
    Ok(LabeledFeatureSet {
        features,
        labels: first.labels.clone(),
        n_classes: first.n_classes,
        feature_names,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitSpec {
    pub train_fraction: f64,
    pub val_fraction: f64,
    pub test_fraction: f64,
    pub seed: u64,
    pub stratified: bool,
}

impl Default for SplitSpec {
    fn default() -> Self {
        Self {
            train_fraction: 0.7,
            val_fraction: 0.15,
            test_fraction: 0.15,
            seed: 0,
            stratified: true,
        }
    }
}

impl SplitSpec {
    pub fn validate(&self) -> Result<()> {
        let fractions = self.fractions();
        if fractions.iter().any(|f| !(*f > 0.0 && *f < 1.0)) {
            return Err(Error::Config(format!(
                "split fractions must lie in (0,1), got {fractions:?}"
            )));
        }
        let sum: f64 = fractions.iter().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(Error::Config(format!("split fractions sum to {sum}, not 1")));
        }
        Ok(())
    }

    fn fractions(&self) -> [f64; 3] {
        [self.train_fraction, self.val_fraction, self.test_fraction]
    }
}

/// Largest-remainder apportionment of `n` items over `fractions`; ties in the
/// remainder go to the earlier slot.
pub(crate) fn apportion(n: usize, fractions: &[f64]) -> Vec<usize> {
    let exact: Vec<f64> = fractions.iter().map(|f| f * n as f64).collect();
    let mut counts: Vec<usize> = exact.iter().map(|e| e.floor() as usize).collect();
    let assigned: usize = counts.iter().sum();
    let mut order: Vec<usize> = (0..fractions.len()).collect();
    // remainders equal up to rounding noise count as ties
    let remainder = |i: usize| ((exact[i] - exact[i].floor()) * 1e9).round() as i64;
    order.sort_by(|&a, &b| remainder(b).cmp(&remainder(a)).then(a.cmp(&b)));
    for &slot in order.iter().take(n.saturating_sub(assigned)) {
        counts[slot] += 1;
    }
    counts
}

/// Index partition behind [`split`], each part sorted ascending.
pub fn split_indices(set: &LabeledFeatureSet, spec: &SplitSpec) -> Result<[Vec<usize>; 3]> {
    spec.validate()?;
    let fractions = spec.fractions();
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut parts: [Vec<usize>; 3] = Default::default();
    let groups: Vec<Vec<usize>> = if spec.stratified {
        let mut by_class = vec![Vec::new(); set.n_classes];
        for (i, &l) in set.labels.iter().enumerate() {
            by_class[l].push(i);
        }
        by_class
    } else {
        vec![(0..set.n_samples()).collect()]
    };
    if spec.stratified {
        if let Some((class, group)) = groups.iter().enumerate().find(|(_, g)| g.len() < 3) {
            return Err(Error::ClassTooSmall {
                class,
                count: group.len(),
                needed: 3,
            });
        }
    }
    for (class, mut group) in groups.into_iter().enumerate() {
        group.shuffle(&mut rng);
        let counts = apportion(group.len(), &fractions);
        if spec.stratified && counts.contains(&0) {
            let smallest = fractions.iter().cloned().fold(f64::INFINITY, f64::min);
            return Err(Error::ClassTooSmall {
                class,
                count: group.len(),
                needed: (1.0 / smallest).ceil() as usize,
            });
        }
        let mut rest = group.as_slice();
        for (part, count) in parts.iter_mut().zip(counts) {
            let (head, tail) = rest.split_at(count);
            part.extend_from_slice(head);
            rest = tail;
        }
    }
    for part in &mut parts {
        part.sort_unstable();
    }
    Ok(parts)
}

/// Partitions a set into (train, val, test).
pub fn split(
    set: &LabeledFeatureSet,
    spec: &SplitSpec,
) -> Result<(LabeledFeatureSet, LabeledFeatureSet, LabeledFeatureSet)> {
    let [train, val, test] = split_indices(set, spec)?;
    for (name, part) in [("train", &train), ("val", &val), ("test", &test)] {
        if part.is_empty() {
            return Err(Error::InvalidData(format!("{name} split is empty")));
        }
    }
    Ok((
        set.select_rows(&train),
        set.select_rows(&val),
        set.select_rows(&test),
    ))
}

/// Gaussian-blob classification data.
///
/// Class `c` is centred at `class_sep * c / sqrt(n_informative)` in every
/// informative dimension, so consecutive class means sit exactly `class_sep`
/// apart. Noise dimensions are standard normal and independent of the label.
/// Labels cycle `0, 1, .., n_classes - 1`.
pub fn synth_dataset(
    n_samples: usize,
    n_informative: usize,
    n_noise: usize,
    n_classes: usize,
    class_sep: f64,
    seed: u64,
) -> Result<LabeledFeatureSet> {
    if n_samples == 0 || n_informative == 0 || n_classes == 0 {
        return Err(Error::Config(
            "n_samples, n_informative and n_classes must be positive".into(),
        ));
    }
    if n_samples < n_classes {
        return Err(Error::Config(format!(
            "{n_samples} samples cannot cover {n_classes} classes"
        )));
    }
    if !(class_sep > 0.0 && class_sep.is_finite()) {
        return Err(Error::Config(format!("class_sep must be positive, got {class_sep}")));
    }
    let n_dims = n_informative + n_noise;
    let step = class_sep / (n_informative as f64).sqrt();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let labels: Vec<usize> = (0..n_samples).map(|i| i % n_classes).collect();
    let mut values = Vec::with_capacity(n_samples * n_dims);
    for &label in &labels {
        for d in 0..n_dims {
            let z: f64 = rng.sample(StandardNormal);
            let centre = if d < n_informative { step * label as f64 } else { 0.0 };
            values.push(centre + z);
        }
    }
    let features = Array2::from_shape_vec((n_samples, n_dims), values).expect("shape");
    LabeledFeatureSet::new(features, labels, n_classes)
}
