//! Two-stage feature reduction: PCA down to a cumulative-explained-variance
//! threshold, then Grey Wolf Optimizer wrapper selection scored by a
//! classifier, with SVM evaluation, ROC/AUC and McNemar's test.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bench;
pub mod classify;
pub mod dataset;
pub mod error;
pub mod gwo;
pub mod objective;
pub mod pca;
pub mod pipeline;

pub use dataset::{LabeledFeatureSet, SplitSpec};
pub use error::{Error, ErrorCategory, Result};
pub use gwo::{FeatureMask, GwoConfig, WolfPack};
pub use objective::Objective;
pub use pca::PcaModel;
