//! Classifiers and evaluation: SMO-trained RBF SVM, k-NN, confusion-matrix
//! metrics, one-vs-all ROC/AUC and McNemar's test.

pub mod knn;
pub mod mcnemar;
pub mod metrics;
pub mod roc;
pub mod svm;

use ndarray::{Array2, ArrayView2};
use serde::{Deserialize, Serialize};

pub use knn::{train_knn, KnnModel};
pub use mcnemar::{mcnemar, McNemarResult};
pub use metrics::{confusion, metrics, ConfusionMatrix, Metrics};
pub use roc::{roc_ova, RocResult};
pub use svm::{train_svm, Gamma, SvmModel};

use crate::dataset::LabeledFeatureSet;
use crate::error::Result;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ClassifierConfig {
    Svm {
        #[serde(default = "default_c")]
        c: f64,
        #[serde(default)]
        gamma: Gamma,
    },
    Knn {
        k: usize,
    },
}

fn default_c() -> f64 {
    1.0
}

impl Default for ClassifierConfig {
    fn default() -> Self {
        ClassifierConfig::Svm {
            c: 1.0,
            gamma: Gamma::Scale,
        }
    }
}

impl ClassifierConfig {
    pub fn fit(&self, train: &LabeledFeatureSet) -> Result<Classifier> {
        match *self {
            ClassifierConfig::Svm { c, gamma } => train_svm(train, c, gamma).map(Classifier::Svm),
            ClassifierConfig::Knn { k } => train_knn(train, k).map(Classifier::Knn),
        }
    }
}

#[derive(Debug, Clone)]
pub enum Classifier {
    Svm(SvmModel),
    Knn(KnnModel),
}

impl Classifier {
    pub fn predict(&self, x: ArrayView2<f64>) -> Result<(Vec<usize>, Array2<f64>)> {
        match self {
            Classifier::Svm(m) => m.predict(x),
            Classifier::Knn(m) => m.predict(x),
        }
    }
}
