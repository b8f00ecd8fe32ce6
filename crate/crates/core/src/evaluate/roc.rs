use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::dataset::BOTNET;
use crate::error::{Error, Result};

/// ROC points from a descending threshold sweep, `(fpr, tpr)` from (0, 0)
/// to (1, 1), with the trapezoidal area under them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RocCurve {
    pub points: Vec<(f64, f64)>,
    pub auc: f64,
}

impl RocCurve {
    /// Two-column `fpr<TAB>tpr` text for external plotting.
    pub fn to_tsv(&self) -> String {
        let mut out = String::from("fpr\ttpr\n");
        for (fpr, tpr) in &self.points {
            let _ = writeln!(out, "{fpr}\t{tpr}");
        }
        out
    }
}

/// A row is predicted positive when its score is at or above the threshold;
/// thresholds are the distinct scores, so tied scores move together.
pub fn roc_curve(scores: &[f64], labels_true: &[u8]) -> Result<RocCurve> {
    if scores.len() != labels_true.len() {
        return Err(Error::LengthMismatch {
            left: scores.len(),
            right: labels_true.len(),
        });
    }
    if let Some(&bad) = scores.iter().find(|s| !s.is_finite()) {
        return Err(Error::NonFiniteScore(bad));
    }
    let positives = labels_true.iter().filter(|&&l| l == BOTNET).count();
    let negatives = labels_true.len() - positives;
    if positives == 0 || negatives == 0 {
        return Err(Error::SingleClass("roc_curve"));
    }

    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));

    // integer counts keep the area exact until the final division
    let mut counts: Vec<(u64, u64)> = vec![(0, 0)];
    let (mut fp, mut tp) = (0u64, 0u64);
    let mut i = 0;
    while i < order.len() {
        let s = scores[order[i]];
        while i < order.len() && scores[order[i]] == s {
            if labels_true[order[i]] == BOTNET {
                tp += 1;
            } else {
                fp += 1;
            }
            i += 1;
        }
        counts.push((fp, tp));
    }

    let twice_area: u128 = counts
        .windows(2)
        .map(|w| u128::from(w[1].0 - w[0].0) * u128::from(w[1].1 + w[0].1))
        .sum();
    let (p, n) = (positives as f64, negatives as f64);
    let auc = twice_area as f64 / (2.0 * p * n);
    let points = counts
        .into_iter()
        .map(|(fp, tp)| (fp as f64 / n, tp as f64 / p))
        .collect();
    Ok(RocCurve { points, auc })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn perfect_and_constant() {
        let labels = [1u8, 0, 1, 0];
        let scores: Vec<f64> = labels.iter().map(|&l| f64::from(l)).collect();
        assert_eq!(roc_curve(&scores, &labels).unwrap().auc, 1.0);

        let c = roc_curve(&[0.3; 4], &labels).unwrap();
        assert_eq!(c.points, vec![(0.0, 0.0), (1.0, 1.0)]);
        assert_eq!(c.auc, 0.5);
    }

    #[test]
    fn single_class_is_error() {
        assert!(roc_curve(&[0.1, 0.2], &[1, 1]).is_err());
        assert!(roc_curve(&[f64::NAN, 0.2], &[0, 1]).is_err());
    }

    #[test]
    fn reversal_complements() {
        let labels = [1u8, 0, 1, 1, 0, 0, 1];
        let scores = [0.9, 0.1, 0.4, 0.4, 0.6, 0.2, 0.8];
        let a = roc_curve(&scores, &labels).unwrap().auc;
        let neg: Vec<f64> = scores.iter().map(|s| -s).collect();
        let b = roc_curve(&neg, &labels).unwrap().auc;
        assert!((a + b - 1.0).abs() < 1e-15);
    }

    #[test]
    fn tsv_layout() {
        let c = roc_curve(&[0.5, 0.5], &[0, 1]).unwrap();
        assert_eq!(c.to_tsv(), "fpr\ttpr\n0\t0\n1\t1\n");
    }
}
