//! Evaluation protocols and statistics.

pub mod curves;
pub mod cv;
pub mod roc;
pub mod special;
pub mod ttest;

pub use curves::{
    app_count_bins, benchmark_174, learning_curve, standard_error, CurvePoint, CurveReport, Dispersion, Protocol,
    DEFAULT_BIN_EDGES,
};
pub use cv::{kfold_cv, stratified_folds, CvReport};
pub use roc::{confidence_coverage, roc_auc, RocPoint, RocReport};
pub use ttest::{welch_t_test, welch_t_test_flags, TTestResult};
