use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::metrics::{confusion, metrics_from, ConfusionMatrix, Metrics};
use super::split::assign_folds;
use crate::classifiers::{threshold, ModelSpec};
use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::pipeline::{fit_transform, PipelineSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CvConfig {
    pub k: usize,
    pub seed: u64,
    pub stratified: bool,
    /// Stages fitted inside every fold on that fold's training rows.
    pub per_fold: PipelineSpec,
}

impl Default for CvConfig {
    fn default() -> Self {
        CvConfig {
            k: 5,
            seed: 0,
            stratified: true,
            per_fold: PipelineSpec::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldResult {
    pub fold: usize,
    pub train_rows: usize,
    pub test_rows: usize,
    pub confusion: ConfusionMatrix,
    pub metrics: Metrics,
}

/// Per-metric mean and population standard deviation across folds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricStats {
    pub mean: f64,
    pub std: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvResult {
    pub k: usize,
    pub seed: u64,
    pub stratified: bool,
    pub folds: Vec<FoldResult>,
    /// `(metric name, stats)` in [`Metrics::named`] order.
    pub summary: Vec<(String, MetricStats)>,
}

impl CvResult {
    pub fn stats(&self, metric: &str) -> Option<MetricStats> {
        self.summary.iter().find(|(n, _)| n == metric).map(|(_, s)| *s)
    }
}

fn summarize(folds: &[FoldResult]) -> Vec<(String, MetricStats)> {
    let k = folds.len() as f64;
    let names = folds[0].metrics.named().map(|(n, _)| n);
    names
        .iter()
        .enumerate()
        .map(|(m, name)| {
            let values: Vec<f64> = folds.iter().map(|f| f.metrics.named()[m].1).collect();
            let mean = values.iter().sum::<f64>() / k;
            let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / k;
            (name.to_string(), MetricStats { mean, std: var.sqrt() })
        })
        .collect()
}

/// k-fold cross-validation. Folds run concurrently; results are ordered by
/// fold index. Per-fold stages see only that fold's training rows, and the
/// SMOTE seed is offset by the fold index.
pub fn cross_validate(dataset: &Dataset, model: &ModelSpec, config: &CvConfig) -> Result<CvResult> {
    model.validate()?;
    let folds = assign_folds(dataset.labels(), config.k, config.seed, config.stratified)?;
    let n = dataset.n_rows();

    let results = (0..config.k)
        .into_par_iter()
        .map(|f| {
            let mut held_out = vec![false; n];
            for &i in &folds[f] {
                held_out[i] = true;
            }
            let train_idx: Vec<usize> = (0..n).filter(|&i| !held_out[i]).collect();
            let train = dataset.select_rows(&train_idx);
            let test = dataset.select_rows(&folds[f]);
            if !train.class_counts().both_present() {
                return Err(Error::Stratification { fold: f });
            }
            let mut spec = config.per_fold;
            if let Some(s) = spec.smote.as_mut() {
                s.seed = s.seed.wrapping_add(f as u64);
            }
            let prepared = fit_transform(&train, &spec)?;
            let trained = model.fit(&prepared.train)?;
            let test = prepared.pipeline.transform(&test)?;
            let scores = trained.score_batch(&test)?;
            let predicted: Vec<u8> = scores.iter().copied().map(threshold).collect();
            let cm = confusion(test.labels(), &predicted)?;
            let metrics = metrics_from(&cm, &scores, test.labels())?;
            Ok(FoldResult {
                fold: f,
                train_rows: prepared.train.n_rows(),
                test_rows: test.n_rows(),
                confusion: cm,
                metrics,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    Ok(CvResult {
        k: config.k,
        seed: config.seed,
        stratified: config.stratified,
        summary: summarize(&results),
        folds: results,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn blobs(n: usize) -> Dataset {
        let rows = (0..n)
            .map(|i| {
                let l = (i % 4 != 0) as u8 as f64;
                vec![l + (i as f64 * 0.37).sin() * 0.2, l - (i as f64 * 0.11).cos() * 0.2]
            })
            .collect();
        let labels = (0..n).map(|i| u8::from(i % 4 != 0)).collect();
        Dataset::from_rows(rows, labels, vec!["a".into(), "b".into()]).unwrap()
    }

    #[test]
    fn folds_of_twenty() {
        let cfg = CvConfig { seed: 3, ..Default::default() };
        let r = cross_validate(&blobs(100), &ModelSpec::Gnb, &cfg).unwrap();
        assert_eq!(r.folds.len(), 5);
        assert!(r.folds.iter().all(|f| f.test_rows == 20 && f.train_rows == 80));
        assert!(r.stats("accuracy").unwrap().mean > 0.9);
    }

    #[test]
    fn repeatable() {
        let cfg = CvConfig { seed: 11, ..Default::default() };
        let spec = ModelSpec::Knn { k: 3 };
        let a = cross_validate(&blobs(60), &spec, &cfg).unwrap();
        let b = cross_validate(&blobs(60), &spec, &cfg).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn single_class_training_fold() {
        // one normal row: the fold holding it out trains on botnet only
        let rows = (0..10).map(|i| vec![i as f64]).collect();
        let labels = (0..10).map(|i| u8::from(i != 0)).collect();
        let ds = Dataset::from_rows(rows, labels, vec!["x".into()]).unwrap();
        let err = cross_validate(&ds, &ModelSpec::Gnb, &CvConfig::default()).unwrap_err();
        assert!(matches!(err, Error::Stratification { .. }));
    }

    #[test]
    fn population_std() {
        let m = |a: f64| Metrics {
            accuracy: a,
            precision: 0.0,
            recall: 0.0,
            f1: 0.0,
            roc_auc: 0.0,
            specificity: 0.0,
            degenerate: vec![],
        };
        let folds: Vec<FoldResult> = [0.2, 0.4]
            .iter()
            .enumerate()
            .map(|(i, &a)| FoldResult {
                fold: i,
                train_rows: 0,
                test_rows: 0,
                confusion: ConfusionMatrix::default(),
                metrics: m(a),
            })
            .collect();
        let s = summarize(&folds);
        assert!((s[0].1.mean - 0.3).abs() < 1e-15);
        assert!((s[0].1.std - 0.1).abs() < 1e-15);
    }
}
