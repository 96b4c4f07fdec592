//! Demographic prediction from bag-of-apps features.
//!
//! Users are rows of a sparse binary matrix whose columns are apps. Each
//! demographic attribute is binarized and class-balanced, then predicted by
//! L2-regularized logistic regression. Around that core sit the evaluation
//! protocols (stratified k-fold CV, ROC/AUC, confidence coverage, learning
//! curves, app-count bins with a Welch t-test), three dimensionality
//! reductions, CSV ingestion, and a synthetic generator with planted signal
//! whose Bayes-optimal accuracy is known.
//!
//! See the crate's `examples/` directory for one runnable program per
//! capability.

pub mod cli;
pub mod dataset;
pub mod dense;
pub mod dimred;
pub mod error;
pub mod eval;
pub mod logreg;
pub mod report;
pub mod rng;
pub mod sampling;
pub mod sparse;
pub mod synth;

pub use dense::DenseFeatureMatrix;
pub use error::{Error, Result};
pub use logreg::{LogRegModel, TrainConfig};
pub use sampling::{Attribute, BinarizationRule, DemographicRecord, LabeledSubset};
pub use sparse::{Axis, FeatureMatrix, SparseBinaryMatrix};
