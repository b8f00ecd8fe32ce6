//! Fit-on-train preprocessing chain (scale, score and select features,
//! SMOTE) and the model bundle that carries it alongside a trained model.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::classifiers::TrainedModel;
use crate::dataset::{ClassCounts, Dataset};
use crate::error::{Error, Result};
use crate::features::{chi2_scores, select_named, FeatureScoreReport};
use crate::preprocess::{apply_scaler, fit_scaler, EncodingMap, ScalerParams};
use crate::resample::{smote, SmoteConfig};

/// Which stages to fit on a training set. They always run in the order
/// scale, feature selection, SMOTE.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct PipelineSpec {
    pub scale: bool,
    pub select_features: bool,
    pub smote: Option<SmoteConfig>,
}

impl PipelineSpec {
    pub fn stage_names(&self) -> Vec<&'static str> {
        let mut stages = Vec::new();
        if self.scale {
            stages.push("normalize");
        }
        if self.select_features {
            stages.push("score-features");
        }
        if self.smote.is_some() {
            stages.push("smote");
        }
        stages
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SmoteSummary {
    pub config: SmoteConfig,
    pub before: ClassCounts,
    pub after: ClassCounts,
}

/// Parameters learned by [`fit_transform`], replayable on new data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FittedPipeline {
    pub input_features: Vec<String>,
    pub scaler: Option<ScalerParams>,
    pub feature_report: Option<FeatureScoreReport>,
    /// Columns handed to the model, in order.
    pub selected: Vec<String>,
    pub smote: Option<SmoteSummary>,
}

impl FittedPipeline {
    /// Scaling and column selection. SMOTE never applies to evaluation data.
    pub fn transform(&self, data: &Dataset) -> Result<Dataset> {
        data.check_same_features(&self.input_features)?;
        let scaled = match &self.scaler {
            Some(params) => apply_scaler(data, params)?,
            None => data.clone(),
        };
        if scaled.feature_names() == self.selected.as_slice() {
            return Ok(scaled);
        }
        select_named(&scaled, &self.selected)
    }
}

/// A training set after the fitted stages, ready for a model.
#[derive(Debug, Clone)]
pub struct Prepared {
    pub pipeline: FittedPipeline,
    pub train: Dataset,
    /// First synthetic row of `train` when SMOTE ran.
    pub synthetic_from: Option<usize>,
}

fn stage<T>(name: &'static str, r: Result<T>) -> Result<T> {
    r.map_err(|e| Error::Stage {
        stage: name,
        source: Box::new(e),
    })
}

pub fn fit_transform(train: &Dataset, spec: &PipelineSpec) -> Result<Prepared> {
    let input_features = train.feature_names().to_vec();
    let (scaler, data) = if spec.scale {
        let params = stage("normalize", fit_scaler(train))?;
        let scaled = stage("normalize", apply_scaler(train, &params))?;
        (Some(params), scaled)
    } else {
        (None, train.clone())
    };
    let (feature_report, data) = if spec.select_features {
        let report = stage("score-features", chi2_scores(&data))?;
        let selected = stage("score-features", crate::features::select_features(&data, &report))?;
        (Some(report), selected)
    } else {
        (None, data)
    };
    let selected = data.feature_names().to_vec();
    let (smote_summary, data, synthetic_from) = match spec.smote {
        Some(config) => {
            let out = stage("smote", smote(&data, &config))?;
            let summary = SmoteSummary {
                config,
                before: data.class_counts(),
                after: out.dataset.class_counts(),
            };
            (Some(summary), out.dataset, Some(out.synthetic_from))
        }
        None => (None, data, None),
    };
    Ok(Prepared {
        pipeline: FittedPipeline {
            input_features,
            scaler,
            feature_report,
            selected,
            smote: smote_summary,
        },
        train: data,
        synthetic_from,
    })
}

/// A trained model with everything needed to score raw data again.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelBundle {
    /// Categorical codes, present when the model was trained from flow CSV.
    pub encoding: Option<EncodingMap>,
    pub pipeline: FittedPipeline,
    pub model: TrainedModel,
    /// Free-form provenance: seeds, stage order, input description.
    pub provenance: Vec<(String, String)>,
}

impl ModelBundle {
    pub fn save(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string_pretty(self)?;
        std::fs::write(path, text).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let bundle: ModelBundle = serde_json::from_str(&text)?;
        if let Some(enc) = &bundle.encoding {
            enc.validate()?;
        }
        Ok(bundle)
    }

    /// Scores of a dataset with the bundle's input columns.
    pub fn score(&self, data: &Dataset) -> Result<Vec<f64>> {
        let ready = self.pipeline.transform(data)?;
        self.model.score_batch(&ready)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classifiers::ModelSpec;

    fn data() -> Dataset {
        let rows: Vec<Vec<f64>> = (0..40)
            .map(|i| {
                let x = i as f64;
                vec![x, if i < 8 { 100.0 + x } else { x }, 3.0]
            })
            .collect();
        let labels = (0..40).map(|i| u8::from(i >= 8)).collect();
        Dataset::from_rows(rows, labels, vec!["a".into(), "b".into(), "c".into()]).unwrap()
    }

    #[test]
    fn stages_run_in_order() {
        let spec = PipelineSpec {
            scale: true,
            select_features: true,
            smote: Some(SmoteConfig { k_neighbors: 3, ..Default::default() }),
        };
        let prepared = fit_transform(&data(), &spec).unwrap();
        assert_eq!(prepared.pipeline.selected, ["b"]);
        assert_eq!(prepared.train.class_counts(), ClassCounts { normal: 32, botnet: 32 });
        assert_eq!(prepared.synthetic_from, Some(40));
        let test = prepared.pipeline.transform(&data()).unwrap();
        assert_eq!(test.n_rows(), 40);
        assert!(test.features().iter().all(|v| (0.0..=1.0).contains(v)));
        assert_eq!(spec.stage_names(), ["normalize", "score-features", "smote"]);
    }

    #[test]
    fn bundle_round_trips_exactly() {
        let spec = PipelineSpec { scale: true, ..Default::default() };
        let prepared = fit_transform(&data(), &spec).unwrap();
        let model = ModelSpec::from_name("mlp").unwrap().fit(&prepared.train).unwrap();
        let bundle = ModelBundle {
            encoding: None,
            pipeline: prepared.pipeline,
            model,
            provenance: vec![("seed".into(), "0".into())],
        };
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("model.json");
        bundle.save(&path).unwrap();
        let back = ModelBundle::load(&path).unwrap();
        assert_eq!(back, bundle);
        assert_eq!(back.score(&data()).unwrap(), bundle.score(&data()).unwrap());
    }
}
