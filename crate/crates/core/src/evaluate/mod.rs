//! Splits, cross-validation, confusion matrices, metrics, and ROC curves.

mod cv;
mod metrics;
mod roc;
mod split;

pub use cv::{cross_validate, CvConfig, CvResult, FoldResult, MetricStats};
pub use metrics::{confusion, metrics_from, ConfusionMatrix, Metrics};
pub use roc::{roc_curve, RocCurve};
pub use split::{assign_folds, split_indices, test_size, train_test_split};

/// A fraction in [0, 1] as a percentage with one decimal, halves to even.
pub fn percent(value: f64) -> String {
    let tenths = (value * 1000.0).round_ties_even();
    format!("{:.1}", tenths / 10.0)
}
