//! SMOTE oversampling of the minority class.
//!
//! Each synthetic row is `p + u * (q - p)` where `p` is a minority row, `q`
//! one of its `k` nearest minority neighbours (Euclidean, exact brute force),
//! and `u` is uniform on [0, 1). Synthetic rows are appended after all
//! original rows.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::{ClassCounts, Dataset};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum BalanceTarget {
    /// Grow the minority class to the majority count.
    #[default]
    MatchMajority,
    /// Grow the minority class to this many rows.
    MinorityCount(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct SmoteConfig {
    pub k_neighbors: usize,
    pub target: BalanceTarget,
    pub seed: u64,
}

impl Default for SmoteConfig {
    fn default() -> Self {
        SmoteConfig {
            k_neighbors: 5,
            target: BalanceTarget::MatchMajority,
            seed: 0,
        }
    }
}

/// A balanced dataset plus the index of its first synthetic row.
#[derive(Debug, Clone, PartialEq)]
pub struct Resampled {
    pub dataset: Dataset,
    pub synthetic_from: usize,
}

impl Resampled {
    pub fn synthetic_count(&self) -> usize {
        self.dataset.n_rows() - self.synthetic_from
    }
}

fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// For every row of `points`, the indices of its `k` nearest other rows.
/// Distance ties resolve to the lower index.
pub fn nearest_neighbors(points: &[&[f64]], k: usize) -> Vec<Vec<usize>> {
    points
        .par_iter()
        .enumerate()
        .map(|(i, p)| {
            let mut dist: Vec<(f64, usize)> = points
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != i)
                .map(|(j, q)| (squared_distance(p, q), j))
                .collect();
            let by_distance = |a: &(f64, usize), b: &(f64, usize)| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1));
            if k < dist.len() {
                dist.select_nth_unstable_by(k, by_distance);
                dist.truncate(k);
            }
            dist.sort_by(by_distance);
            dist.into_iter().map(|(_, j)| j).collect()
        })
        .collect()
}

/// Number of synthetic rows each minority row spawns: an even share, with
/// the remainder going to the first rows of a seeded permutation.
fn quotas(minority: usize, required: usize, rng: &mut ChaCha8Rng) -> Vec<usize> {
    let mut quota = vec![required / minority; minority];
    let mut order: Vec<usize> = (0..minority).collect();
    order.shuffle(rng);
    for &i in &order[..required % minority] {
        quota[i] += 1;
    }
    quota
}

pub fn smote(dataset: &Dataset, config: &SmoteConfig) -> Result<Resampled> {
    let counts: ClassCounts = dataset.class_counts();
    if !counts.both_present() {
        return Err(Error::SingleClass("smote"));
    }
    let minority_label = counts.minority();
    let minority_n = counts.of(minority_label);
    let majority_n = counts.total() - minority_n;
    if config.k_neighbors == 0 {
        return Err(Error::Config("SMOTE k_neighbors must be at least 1".into()));
    }
    if minority_n <= config.k_neighbors {
        return Err(Error::Config(format!(
            "SMOTE needs more than k_neighbors={} minority rows, found {minority_n}",
            config.k_neighbors
        )));
    }
    let target = match config.target {
        BalanceTarget::MatchMajority => majority_n,
        BalanceTarget::MinorityCount(n) => n,
    };
    let required = target.saturating_sub(minority_n);

    let minority_idx: Vec<usize> = dataset
        .labels()
        .iter()
        .enumerate()
        .filter(|(_, &l)| l == minority_label)
        .map(|(i, _)| i)
        .collect();
    let points: Vec<&[f64]> = minority_idx.iter().map(|&i| dataset.row(i)).collect();
    let neighbors = nearest_neighbors(&points, config.k_neighbors);

    let mut quota_rng = ChaCha8Rng::seed_from_u64(config.seed);
    let quota = quotas(minority_n, required, &mut quota_rng);

    let d = dataset.n_features();
    let synthetic: Vec<f64> = (0..minority_n)
        .into_par_iter()
        .flat_map_iter(|i| {
            // one stream per minority row keeps parallel and serial output equal
            let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
            rng.set_stream(i as u64 + 1);
            let p = points[i];
            let mut out = Vec::with_capacity(quota[i] * d);
            for _ in 0..quota[i] {
                let q = points[neighbors[i][rng.random_range(0..neighbors[i].len())]];
                let u: f64 = rng.random();
                out.extend(p.iter().zip(q).map(|(a, b)| a + u * (b - a)));
            }
            out
        })
        .collect();

    let labels = vec![minority_label; required];
    Ok(Resampled {
        dataset: dataset.append_rows(synthetic, &labels),
        synthetic_from: dataset.n_rows(),
    })
}
