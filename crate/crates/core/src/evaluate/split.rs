use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::dataset::{Dataset, BOTNET, NORMAL};
use crate::error::{Error, Result};

/// `round(n * fraction)` with halves rounded up.
pub fn test_size(n: usize, fraction: f64) -> usize {
    (n as f64 * fraction + 0.5).floor() as usize
}

fn class_indices(labels: &[u8], label: u8) -> Vec<usize> {
    labels
        .iter()
        .enumerate()
        .filter(|(_, &l)| l == label)
        .map(|(i, _)| i)
        .collect()
}

/// Splits `total` across classes in proportion to their sizes, largest
/// remainder first (ties go to the lower label).
fn proportional(total: usize, sizes: [usize; 2]) -> [usize; 2] {
    let n = sizes[0] + sizes[1];
    let num = sizes.map(|s| total as u128 * s as u128);
    let mut alloc = num.map(|v| (v / n as u128) as usize);
    let rem = num.map(|v| v % n as u128);
    let mut left = total - alloc[0] - alloc[1];
    let order = if rem[1] > rem[0] { [1, 0] } else { [0, 1] };
    for c in order {
        if left > 0 && alloc[c] < sizes[c] {
            alloc[c] += 1;
            left -= 1;
        }
    }
    alloc
}

/// Row indices of the train and test sides, each in ascending order.
pub fn split_indices(
    labels: &[u8],
    test_fraction: f64,
    seed: u64,
    stratified: bool,
) -> Result<(Vec<usize>, Vec<usize>)> {
    if !(test_fraction > 0.0 && test_fraction < 1.0) {
        return Err(Error::Config(format!(
            "test fraction must lie in (0, 1), got {test_fraction}"
        )));
    }
    let n = labels.len();
    let n_test = test_size(n, test_fraction);
    if n_test == 0 {
        return Err(Error::EmptySplit("test"));
    }
    if n_test >= n {
        return Err(Error::EmptySplit("train"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut test = Vec::with_capacity(n_test);
    if stratified {
        let groups = [class_indices(labels, NORMAL), class_indices(labels, BOTNET)];
        let alloc = proportional(n_test, [groups[0].len(), groups[1].len()]);
        for (mut group, take) in groups.into_iter().zip(alloc) {
            group.shuffle(&mut rng);
            test.extend_from_slice(&group[..take]);
        }
    } else {
        let mut all: Vec<usize> = (0..n).collect();
        all.shuffle(&mut rng);
        test.extend_from_slice(&all[..n_test]);
    }
    let mut in_test = vec![false; n];
    for &i in &test {
        in_test[i] = true;
    }
    test.sort_unstable();
    let train = (0..n).filter(|&i| !in_test[i]).collect();
    Ok((train, test))
}

pub fn train_test_split(
    dataset: &Dataset,
    test_fraction: f64,
    seed: u64,
    stratified: bool,
) -> Result<(Dataset, Dataset)> {
    let (train, test) = split_indices(dataset.labels(), test_fraction, seed, stratified)?;
    Ok((dataset.select_rows(&train), dataset.select_rows(&test)))
}

/// Partitions row indices into `k` folds whose sizes differ by at most one.
/// Stratified folds also keep each class's per-fold count within one row.
pub fn assign_folds(labels: &[u8], k: usize, seed: u64, stratified: bool) -> Result<Vec<Vec<usize>>> {
    if k < 2 {
        return Err(Error::Config(format!("cross-validation needs k >= 2, got {k}")));
    }
    if k > labels.len() {
        return Err(Error::Config(format!(
            "k={k} folds exceed the {} rows",
            labels.len()
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let order: Vec<usize> = if stratified {
        let mut normal = class_indices(labels, NORMAL);
        let mut botnet = class_indices(labels, BOTNET);
        normal.shuffle(&mut rng);
        botnet.shuffle(&mut rng);
        normal.into_iter().chain(botnet).collect()
    } else {
        let mut all: Vec<usize> = (0..labels.len()).collect();
        all.shuffle(&mut rng);
        all
    };
    let mut folds = vec![Vec::with_capacity(labels.len() / k + 1); k];
    for (pos, i) in order.into_iter().enumerate() {
        folds[pos % k].push(i);
    }
    for fold in &mut folds {
        fold.sort_unstable();
    }
    Ok(folds)
}
