//! The three supervised learners behind a shared fit / score / predict
//! contract. Every model scores a row with the probability (or vote share)
//! of the botnet class; labels come from thresholding that score at 0.5.

pub mod gnb;
pub mod knn;
pub mod mlp;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use gnb::GnbModel;
pub use knn::KnnModel;
pub use mlp::{MlpModel, MlpParams};

use crate::dataset::{Dataset, BOTNET, NORMAL};
use crate::error::{Error, Result};

/// Scores at or above this are labelled botnet.
pub const THRESHOLD: f64 = 0.5;

pub fn threshold(score: f64) -> u8 {
    if score >= THRESHOLD {
        BOTNET
    } else {
        NORMAL
    }
}

fn default_k() -> usize {
    knn::DEFAULT_K
}

/// Which model to fit, with its hyperparameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ModelSpec {
    Gnb,
    Knn {
        #[serde(default = "default_k")]
        k: usize,
    },
    Mlp(MlpParams),
}

impl ModelSpec {
    pub fn name(&self) -> &'static str {
        match self {
            ModelSpec::Gnb => "gnb",
            ModelSpec::Knn { .. } => "knn",
            ModelSpec::Mlp(_) => "mlp",
        }
    }

    /// Default hyperparameters for a model name.
    pub fn from_name(name: &str) -> Result<Self> {
        match name {
            "gnb" => Ok(ModelSpec::Gnb),
            "knn" => Ok(ModelSpec::Knn { k: knn::DEFAULT_K }),
            "mlp" => Ok(ModelSpec::Mlp(MlpParams::default())),
            other => Err(Error::Config(format!("unknown model `{other}`"))),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            ModelSpec::Gnb => Ok(()),
            ModelSpec::Knn { k } => knn::validate_k(*k),
            ModelSpec::Mlp(p) => p.validate(),
        }
    }

    /// Replaces the training seed for models that use one.
    pub fn with_seed(&self, seed: u64) -> Self {
        match self {
            ModelSpec::Mlp(p) => ModelSpec::Mlp(MlpParams { seed, ..*p }),
            other => other.clone(),
        }
    }

    pub fn fit(&self, train: &Dataset) -> Result<TrainedModel> {
        Ok(match self {
            ModelSpec::Gnb => TrainedModel::Gnb(gnb::fit(train)?),
            ModelSpec::Knn { k } => TrainedModel::Knn(knn::fit(train, *k)?),
            ModelSpec::Mlp(p) => TrainedModel::Mlp(mlp::fit(train, p)?),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum TrainedModel {
    Gnb(GnbModel),
    Knn(KnnModel),
    Mlp(MlpModel),
}

impl TrainedModel {
    pub fn name(&self) -> &'static str {
        match self {
            TrainedModel::Gnb(_) => "gnb",
            TrainedModel::Knn(_) => "knn",
            TrainedModel::Mlp(_) => "mlp",
        }
    }

    pub fn feature_names(&self) -> &[String] {
        match self {
            TrainedModel::Gnb(m) => &m.feature_names,
            TrainedModel::Knn(m) => m.train.feature_names(),
            TrainedModel::Mlp(m) => &m.feature_names,
        }
    }

    pub fn width(&self) -> usize {
        self.feature_names().len()
    }

    pub fn score(&self, row: &[f64]) -> f64 {
        match self {
            TrainedModel::Gnb(m) => m.score(row),
            TrainedModel::Knn(m) => m.score(row),
            TrainedModel::Mlp(m) => m.score(row),
        }
    }

    pub fn predict(&self, row: &[f64]) -> u8 {
        match self {
            TrainedModel::Knn(m) => m.predict(row),
            other => threshold(other.score(row)),
        }
    }

    /// Scores every row, in row order.
    pub fn score_batch(&self, data: &Dataset) -> Result<Vec<f64>> {
        if data.n_features() != self.width() {
            return Err(Error::LengthMismatch {
                left: data.n_features(),
                right: self.width(),
            });
        }
        Ok((0..data.n_rows())
            .into_par_iter()
            .map(|i| self.score(data.row(i)))
            .collect())
    }

    pub fn predict_batch(&self, data: &Dataset) -> Result<Vec<u8>> {
        Ok(self.score_batch(data)?.into_iter().map(threshold).collect())
    }
}
