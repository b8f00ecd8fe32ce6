//! Chi-square feature scoring and mean-threshold selection.
//!
//! For a non-negative feature `f` the observed value of class `c` is the sum
//! of `f` over the rows of that class, and the expected value is the class
//! row fraction times the grand sum of `f`. The score is
//! `sum_c (observed_c - expected_c)^2 / expected_c`.

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::{Dataset, BOTNET};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureScoreReport {
    /// Candidate features in dataset column order.
    pub feature_names: Vec<String>,
    pub scores: Vec<f64>,
    pub mean_score: f64,
    /// `selected[i]` iff `scores[i] > mean_score`.
    pub selected: Vec<bool>,
    /// Feature names by descending score; ties keep column order.
    pub ranked_names: Vec<String>,
}

impl FeatureScoreReport {
    fn from_scores(feature_names: Vec<String>, scores: Vec<f64>) -> Self {
        let mean_score = if scores.is_empty() {
            0.0
        } else {
            scores.iter().sum::<f64>() / scores.len() as f64
        };
        let selected = scores.iter().map(|&s| s > mean_score).collect();
        let mut order: Vec<usize> = (0..scores.len()).collect();
        order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));
        let ranked_names = order.iter().map(|&i| feature_names[i].clone()).collect();
        FeatureScoreReport {
            feature_names,
            scores,
            mean_score,
            selected,
            ranked_names,
        }
    }

    pub fn selected_names(&self) -> Vec<String> {
        self.feature_names
            .iter()
            .zip(&self.selected)
            .filter(|(_, &s)| s)
            .map(|(n, _)| n.clone())
            .collect()
    }

    pub fn score_of(&self, feature: &str) -> Option<f64> {
        let i = self.feature_names.iter().position(|n| n == feature)?;
        Some(self.scores[i])
    }

    /// Two-column `feature<TAB>score` table, highest score first.
    pub fn to_table(&self) -> String {
        let mut out = String::from("feature\tscore\n");
        for name in &self.ranked_names {
            let score = self.score_of(name).expect("ranked name is a feature");
            let _ = writeln!(out, "{name}\t{score}");
        }
        out
    }
}

/// Scores every feature column of a non-negative dataset.
pub fn chi2_scores(dataset: &Dataset) -> Result<FeatureScoreReport> {
    let counts = dataset.class_counts();
    if !counts.both_present() {
        return Err(Error::SingleClass("chi2_scores"));
    }
    let n = dataset.n_rows() as f64;
    let class_fraction = [counts.normal as f64 / n, counts.botnet as f64 / n];
    let labels = dataset.labels();
    let features = dataset.features();

    let scores = (0..dataset.n_features())
        .into_par_iter()
        .map(|j| {
            let column = features.column(j);
            let mut observed = [0.0_f64; 2];
            let first = column[0];
            let mut constant = true;
            for (&v, &label) in column.iter().zip(labels) {
                if v < 0.0 {
                    return Err(Error::NegativeFeature {
                        feature: dataset.feature_names()[j].clone(),
                    });
                }
                observed[usize::from(label == BOTNET)] += v;
                constant &= v == first;
            }
            let total = observed[0] + observed[1];
            // a constant column is independent of the label
            if constant || total == 0.0 {
                return Ok(0.0);
            }
            Ok(observed
                .iter()
                .zip(class_fraction)
                .map(|(&obs, frac)| {
                    let expected = frac * total;
                    (obs - expected).powi(2) / expected
                })
                .sum())
        })
        .collect::<Result<Vec<f64>>>()?;

    Ok(FeatureScoreReport::from_scores(
        dataset.feature_names().to_vec(),
        scores,
    ))
}

/// Keeps exactly the columns the report selected.
pub fn select_features(dataset: &Dataset, report: &FeatureScoreReport) -> Result<Dataset> {
    dataset.check_same_features(&report.feature_names)?;
    let keep: Vec<usize> = report
        .selected
        .iter()
        .enumerate()
        .filter(|(_, &s)| s)
        .map(|(i, _)| i)
        .collect();
    if keep.is_empty() {
        return Err(Error::NoFeaturesSelected);
    }
    Ok(dataset.select_columns(&keep))
}

/// Keeps the named columns, in the given order.
pub fn select_named(dataset: &Dataset, names: &[String]) -> Result<Dataset> {
    let idx = names
        .iter()
        .map(|name| {
            dataset
                .feature_names()
                .iter()
                .position(|n| n == name)
                .ok_or_else(|| Error::FeatureMismatch {
                    expected: name.clone(),
                    found: dataset.feature_names().join(","),
                })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(dataset.select_columns(&idx))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn names(d: usize) -> Vec<String> {
        (0..d).map(|j| format!("f{j}")).collect()
    }

    #[test]
    fn label_copy_feature_scores_fifty() {
        let labels: Vec<u8> = (0..100).map(|i| u8::from(i >= 50)).collect();
        let rows = labels.iter().map(|&l| vec![f64::from(l), 3.0]).collect();
        let ds = Dataset::from_rows(rows, labels, names(2)).unwrap();
        let report = chi2_scores(&ds).unwrap();
        assert!((report.scores[0] - 50.0).abs() < 1e-12);
        assert_eq!(report.scores[1], 0.0);
        assert_eq!(report.mean_score, 25.0);
        assert_eq!(report.selected, [true, false]);
        assert_eq!(report.ranked_names, ["f0", "f1"]);
    }

    #[test]
    fn zero_sum_feature_scores_zero() {
        let ds = Dataset::from_rows(vec![vec![0.0], vec![0.0]], vec![0, 1], names(1)).unwrap();
        assert_eq!(chi2_scores(&ds).unwrap().scores, [0.0]);
    }

    #[test]
    fn single_class_and_negative_errors() {
        let ds = Dataset::from_rows(vec![vec![1.0], vec![2.0]], vec![1, 1], names(1)).unwrap();
        assert!(matches!(chi2_scores(&ds), Err(Error::SingleClass(_))));
        let ds = Dataset::from_rows(vec![vec![-1.0], vec![2.0]], vec![0, 1], names(1)).unwrap();
        assert!(matches!(chi2_scores(&ds), Err(Error::NegativeFeature { .. })));
    }

    #[test]
    fn threshold_keeps_above_mean_only() {
        let report = FeatureScoreReport::from_scores(names(3), vec![9.0, 3.0, 0.0]);
        assert_eq!(report.mean_score, 4.0);
        let ds = Dataset::from_rows(vec![vec![1.0, 2.0, 3.0]], vec![0], names(3)).unwrap();
        let out = select_features(&ds, &report).unwrap();
        assert_eq!(out.feature_names(), ["f0"]);
        assert_eq!(out.labels(), ds.labels());
    }

    #[test]
    fn all_equal_scores_select_nothing() {
        let report = FeatureScoreReport::from_scores(names(2), vec![2.0, 2.0]);
        let ds = Dataset::from_rows(vec![vec![1.0, 2.0]], vec![0], names(2)).unwrap();
        assert!(matches!(select_features(&ds, &report), Err(Error::NoFeaturesSelected)));
    }

    #[test]
    fn table_is_sorted() {
        let report = FeatureScoreReport::from_scores(names(3), vec![1.0, 5.0, 2.5]);
        assert_eq!(report.to_table(), "feature\tscore\nf1\t5\nf2\t2.5\nf0\t1\n");
    }
}
