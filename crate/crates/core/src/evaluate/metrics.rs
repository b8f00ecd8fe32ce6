use serde::{Deserialize, Serialize};

use super::roc::roc_curve;
use crate::dataset::BOTNET;
use crate::error::{Error, Result};

/// 2x2 confusion counts with botnet as the positive class.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub tp: usize,
    pub tn: usize,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
}

impl ConfusionMatrix {
    pub fn total(&self) -> usize {
        self.tp + self.tn + self.fp + self.fn_
    }

    /// Recall of the normal class, `tn / (tn + fp)`; `None` without normal rows.
    pub fn specificity(&self) -> Option<f64> {
        ratio(self.tn, self.tn + self.fp)
    }

    /// `fp / (fp + tn)`.
    pub fn false_positive_rate(&self) -> Option<f64> {
        ratio(self.fp, self.fp + self.tn)
    }

    /// `tp / (tp + fn)`.
    pub fn true_positive_rate(&self) -> Option<f64> {
        ratio(self.tp, self.tp + self.fn_)
    }
}

fn ratio(num: usize, den: usize) -> Option<f64> {
    (den > 0).then(|| num as f64 / den as f64)
}

pub fn confusion(labels_true: &[u8], labels_pred: &[u8]) -> Result<ConfusionMatrix> {
    if labels_true.len() != labels_pred.len() {
        return Err(Error::LengthMismatch {
            left: labels_true.len(),
            right: labels_pred.len(),
        });
    }
    let mut cm = ConfusionMatrix::default();
    for (&t, &p) in labels_true.iter().zip(labels_pred) {
        match (t == BOTNET, p == BOTNET) {
            (true, true) => cm.tp += 1,
            (false, false) => cm.tn += 1,
            (false, true) => cm.fp += 1,
            (true, false) => cm.fn_ += 1,
        }
    }
    Ok(cm)
}

/// Accuracy, precision, recall, F1, and ROC AUC, all in [0, 1]. Ratios whose
/// denominator is zero are reported as 0 and named in `degenerate`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub roc_auc: f64,
    /// Recall of the normal (minority) class.
    pub specificity: f64,
    pub degenerate: Vec<String>,
}

impl Metrics {
    pub fn is_degenerate(&self, name: &str) -> bool {
        self.degenerate.iter().any(|d| d == name)
    }

    /// `(name, value)` pairs in report order.
    pub fn named(&self) -> [(&'static str, f64); 6] {
        [
            ("accuracy", self.accuracy),
            ("precision", self.precision),
            ("recall", self.recall),
            ("f1", self.f1),
            ("roc_auc", self.roc_auc),
            ("specificity", self.specificity),
        ]
    }
}

pub fn metrics_from(cm: &ConfusionMatrix, scores: &[f64], labels_true: &[u8]) -> Result<Metrics> {
    if scores.len() != labels_true.len() {
        return Err(Error::LengthMismatch {
            left: scores.len(),
            right: labels_true.len(),
        });
    }
    if cm.total() != labels_true.len() {
        return Err(Error::LengthMismatch {
            left: cm.total(),
            right: labels_true.len(),
        });
    }
    let mut degenerate = Vec::new();
    let mut flagged = |name: &str, v: Option<f64>| {
        v.unwrap_or_else(|| {
            degenerate.push(name.to_string());
            0.0
        })
    };
    let accuracy = flagged("accuracy", ratio(cm.tp + cm.tn, cm.total()));
    let precision_v = ratio(cm.tp, cm.tp + cm.fp);
    let recall_v = ratio(cm.tp, cm.tp + cm.fn_);
    let f1_v = match (precision_v, recall_v) {
        (Some(p), Some(r)) if p + r > 0.0 => Some(2.0 * p * r / (p + r)),
        _ => None,
    };
    let precision = flagged("precision", precision_v);
    let recall = flagged("recall", recall_v);
    let f1 = flagged("f1", f1_v);
    let specificity = flagged("specificity", cm.specificity());
    let roc_auc = flagged("roc_auc", roc_curve(scores, labels_true).ok().map(|c| c.auc));
    Ok(Metrics {
        accuracy,
        precision,
        recall,
        f1,
        roc_auc,
        specificity,
        degenerate,
    })
}
