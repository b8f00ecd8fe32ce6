//! Brute-force k-nearest-neighbours with unweighted majority vote.

use serde::{Deserialize, Serialize};

use crate::dataset::{Dataset, BOTNET, NORMAL};
use crate::error::{Error, Result};

pub const DEFAULT_K: usize = 5;

/// Stored training rows and the neighbour count.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KnnModel {
    pub train: Dataset,
    pub k: usize,
}

pub fn validate_k(k: usize) -> Result<()> {
    if k == 0 || k.is_multiple_of(2) {
        return Err(Error::Config(format!("KNN k must be odd and positive, got {k}")));
    }
    Ok(())
}

pub fn fit(train: &Dataset, k: usize) -> Result<KnnModel> {
    validate_k(k)?;
    if k > train.n_rows() {
        return Err(Error::Config(format!(
            "KNN k={k} exceeds the {} training rows",
            train.n_rows()
        )));
    }
    Ok(KnnModel {
        train: train.clone(),
        k,
    })
}

/// Majority label of neighbours given nearest first. A tie goes to the
/// nearest neighbour's label.
pub fn vote(nearest_first: &[u8]) -> u8 {
    let botnet = nearest_first.iter().filter(|&&l| l == BOTNET).count();
    let normal = nearest_first.len() - botnet;
    match botnet.cmp(&normal) {
        std::cmp::Ordering::Greater => BOTNET,
        std::cmp::Ordering::Less => NORMAL,
        std::cmp::Ordering::Equal => nearest_first.first().copied().unwrap_or(NORMAL),
    }
}

impl KnnModel {
    /// Indices of the k nearest training rows, nearest first; equal
    /// distances resolve to the lower row index.
    pub fn neighbors(&self, row: &[f64]) -> Vec<usize> {
        let mut dist: Vec<(f64, usize)> = self
            .train
            .rows()
            .enumerate()
            .map(|(i, t)| {
                let d: f64 = t.iter().zip(row).map(|(a, b)| (a - b) * (a - b)).sum();
                (d, i)
            })
            .collect();
        let cmp = |a: &(f64, usize), b: &(f64, usize)| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1));
        if self.k < dist.len() {
            dist.select_nth_unstable_by(self.k, cmp);
            dist.truncate(self.k);
        }
        dist.sort_by(cmp);
        dist.into_iter().map(|(_, i)| i).collect()
    }

    fn neighbor_labels(&self, row: &[f64]) -> Vec<u8> {
        let labels = self.train.labels();
        self.neighbors(row).into_iter().map(|i| labels[i]).collect()
    }

    pub fn predict(&self, row: &[f64]) -> u8 {
        vote(&self.neighbor_labels(row))
    }

    /// Fraction of the k nearest neighbours labelled botnet.
    pub fn score(&self, row: &[f64]) -> f64 {
        let labels = self.neighbor_labels(row);
        labels.iter().filter(|&&l| l == BOTNET).count() as f64 / labels.len() as f64
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line(points: &[(f64, u8)]) -> Dataset {
        let rows = points.iter().map(|&(x, _)| vec![x]).collect();
        let labels = points.iter().map(|&(_, l)| l).collect();
        Dataset::from_rows(rows, labels, vec!["x".into()]).unwrap()
    }

    #[test]
    fn exact_match_with_k1() {
        let m = fit(&line(&[(0.0, 0), (1.0, 1), (2.0, 0)]), 1).unwrap();
        assert_eq!(m.predict(&[1.0]), 1);
        assert_eq!(m.predict(&[2.0]), 0);
    }

    #[test]
    fn vote_fraction() {
        let m = fit(&line(&[(0.0, 1), (0.1, 1), (0.2, 0), (5.0, 0), (6.0, 0)]), 3).unwrap();
        assert_eq!(m.predict(&[0.0]), 1);
        assert!((m.score(&[0.0]) - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn ties_use_nearest_label() {
        assert_eq!(vote(&[0, 1, 1, 0]), 0);
        assert_eq!(vote(&[1, 0]), 1);
        assert_eq!(vote(&[1, 1, 0]), 1);
    }

    #[test]
    fn distance_ties_take_lower_index() {
        let m = fit(&line(&[(1.0, 1), (-1.0, 0), (3.0, 0)]), 1).unwrap();
        assert_eq!(m.neighbors(&[0.0]), [0]);
    }

    #[test]
    fn k_validation() {
        let ds = line(&[(0.0, 0), (1.0, 1)]);
        assert!(fit(&ds, 0).is_err());
        assert!(fit(&ds, 2).is_err());
        assert!(fit(&ds, 3).is_err());
    }

    #[test]
    fn k_equal_n_predicts_majority() {
        let ds = line(&[(0.0, 0), (1.0, 1), (2.0, 1), (3.0, 0), (4.0, 1)]);
        let m = fit(&ds, 5).unwrap();
        for q in [-10.0, 0.0, 2.5, 100.0] {
            assert_eq!(m.predict(&[q]), 1);
        }
    }
}
