//! Gaussian naive Bayes scored in log space.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::dataset::{Dataset, BOTNET};
use crate::error::{Error, Result};

/// Relative variance floor: added to every class variance, scaled by the
/// largest per-feature variance of the training set.
pub const VAR_SMOOTHING: f64 = 1e-9;

/// Class-conditional Gaussian parameters. Index 0 is normal, 1 is botnet.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GnbModel {
    pub feature_names: Vec<String>,
    pub class_priors: [f64; 2],
    pub means: [Vec<f64>; 2],
    pub variances: [Vec<f64>; 2],
    /// Smoothing term already included in `variances`.
    pub epsilon: f64,
}

pub fn fit(train: &Dataset) -> Result<GnbModel> {
    let counts = train.class_counts();
    if !counts.both_present() {
        return Err(Error::SingleClass("gnb_fit"));
    }
    let d = train.n_features();
    let n = train.n_rows() as f64;
    let class_n = [counts.normal as f64, counts.botnet as f64];

    let mut sums = [vec![0.0; d], vec![0.0; d]];
    let mut all_sum = vec![0.0; d];
    for (row, &label) in train.rows().zip(train.labels()) {
        let c = usize::from(label == BOTNET);
        for j in 0..d {
            sums[c][j] += row[j];
            all_sum[j] += row[j];
        }
    }
    let means = [0, 1].map(|c| sums[c].iter().map(|s| s / class_n[c]).collect::<Vec<_>>());
    let all_mean: Vec<f64> = all_sum.iter().map(|s| s / n).collect();

    let mut sq = [vec![0.0; d], vec![0.0; d]];
    let mut all_sq = vec![0.0; d];
    for (row, &label) in train.rows().zip(train.labels()) {
        let c = usize::from(label == BOTNET);
        for j in 0..d {
            sq[c][j] += (row[j] - means[c][j]).powi(2);
            all_sq[j] += (row[j] - all_mean[j]).powi(2);
        }
    }
    let max_var = all_sq.iter().map(|s| s / n).fold(0.0, f64::max);
    let epsilon = if max_var > 0.0 {
        VAR_SMOOTHING * max_var
    } else {
        VAR_SMOOTHING
    };
    let variances = [0, 1].map(|c| {
        sq[c]
            .iter()
            .map(|s| s / class_n[c] + epsilon)
            .collect::<Vec<_>>()
    });

    Ok(GnbModel {
        feature_names: train.feature_names().to_vec(),
        class_priors: [class_n[0] / n, class_n[1] / n],
        means,
        variances,
        epsilon,
    })
}

impl GnbModel {
    /// `log P(class) + sum_f log N(x_f; mean, var)` for both classes.
    pub fn log_joint(&self, row: &[f64]) -> [f64; 2] {
        [0, 1].map(|c| {
            let mut acc = self.class_priors[c].ln();
            for (j, &x) in row.iter().enumerate() {
                let var = self.variances[c][j];
                let diff = x - self.means[c][j];
                acc -= 0.5 * (2.0 * PI * var).ln() + diff * diff / (2.0 * var);
            }
            acc
        })
    }

    /// Normalized class posteriors.
    pub fn posteriors(&self, row: &[f64]) -> [f64; 2] {
        let lj = self.log_joint(row);
        let m = lj[0].max(lj[1]);
        let e = [(lj[0] - m).exp(), (lj[1] - m).exp()];
        let z = e[0] + e[1];
        [e[0] / z, e[1] / z]
    }

    /// Posterior probability of the botnet class.
    pub fn score(&self, row: &[f64]) -> f64 {
        let lj = self.log_joint(row);
        // logistic of the log-odds, evaluated on the stable side
        let t = lj[1] - lj[0];
        if t >= 0.0 {
            1.0 / (1.0 + (-t).exp())
        } else {
            let e = t.exp();
            e / (1.0 + e)
        }
    }
}
