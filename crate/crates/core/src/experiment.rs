//! End-to-end experiment runner: ingest, preprocess, score features,
//! optionally balance with SMOTE, train every configured model, evaluate,
//! and write a report bundle.
//!
//! Two stage orders are supported. The default fits every stage on the
//! training split only (and again inside each cross-validation fold):
//! split, normalize, score features, SMOTE, train, evaluate. Paper mode
//! transforms the whole dataset before splitting: normalize, SMOTE, score
//! features, split, train, evaluate.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::classifiers::{threshold, ModelSpec, TrainedModel};
use crate::dataset::{load_csv, ClassCounts, ClassSummary, Dataset, Schema};
use crate::error::{Error, Result};
use crate::evaluate::{
    confusion, cross_validate, metrics_from, percent, roc_curve, split_indices, ConfusionMatrix,
    CvConfig, CvResult, Metrics, RocCurve,
};
use crate::features::{chi2_scores, select_features, FeatureScoreReport};
use crate::pipeline::{fit_transform, FittedPipeline, ModelBundle, PipelineSpec};
use crate::preprocess::{apply_scaler, fit_scaler, prepare, EncodingMap};
use crate::resample::{smote, SmoteConfig};
use crate::synth::{generate_table, TrafficProfile};

/// Environment variable that overrides the configured output directory.
pub const OUT_ENV: &str = "FLOWGUARD_OUT";

/// Offsets added to the master seed for each stage.
pub mod seed_offset {
    pub const SYNTH: u64 = 1;
    pub const SPLIT: u64 = 2;
    pub const CV: u64 = 3;
    pub const SMOTE: u64 = 4;
    pub const MODEL: u64 = 5;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// Every stage is fitted on training data only.
    #[default]
    Default,
    /// Normalize and balance the whole dataset before splitting.
    Paper,
}

/// D1 is the data as loaded; D2 is its SMOTE-balanced counterpart.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    D1,
    D2,
}

impl Variant {
    pub fn name(self) -> &'static str {
        match self {
            Variant::D1 => "d1",
            Variant::D2 => "d2",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "lowercase", deny_unknown_fields)]
pub enum InputSource {
    /// A flow CSV; `schema` defaults to the bundled BoT-IoT schema.
    Csv {
        path: PathBuf,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        schema: Option<PathBuf>,
    },
    /// Synthetic flows; `profile` defaults to the bundled profile.
    Synth {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        profile: Option<PathBuf>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        rows: Option<usize>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SmoteSection {
    pub enabled: bool,
    pub k_neighbors: usize,
}

impl Default for SmoteSection {
    fn default() -> Self {
        SmoteSection {
            enabled: false,
            k_neighbors: 5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
    pub mode: Mode,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub input: Option<InputSource>,
    pub smote: SmoteSection,
    pub feature_selection: bool,
    pub models: Vec<ModelSpec>,
    pub split_fraction: f64,
    /// Cross-validation folds on the training split; 0 skips cross-validation.
    pub cv_folds: usize,
    pub stratified: bool,
    /// Defaults to D2 when SMOTE is enabled and D1 otherwise.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub variants: Option<Vec<Variant>>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            seed: 42,
            output_dir: None,
            mode: Mode::Default,
            input: None,
            smote: SmoteSection::default(),
            feature_selection: true,
            models: Vec::new(),
            split_fraction: 0.2,
            cv_folds: 5,
            stratified: true,
            variants: None,
        }
    }
}

fn resolve(base: &Path, p: &Path) -> PathBuf {
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        base.join(p)
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    /// Loads a TOML config; relative paths resolve against its directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        let mut config = ExperimentConfig::from_toml(&text)?;
        let base = path.parent().unwrap_or(Path::new("."));
        config.resolve_paths(base);
        Ok(config)
    }

    /// Config stored in a run manifest.
    pub fn from_manifest(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        let manifest: Manifest = serde_json::from_str(&text).map_err(|e| Error::Config(e.to_string()))?;
        Ok(manifest.config)
    }

    pub fn resolve_paths(&mut self, base: &Path) {
        match &mut self.input {
            Some(InputSource::Csv { path, schema }) => {
                *path = resolve(base, path);
                if let Some(s) = schema {
                    *s = resolve(base, s);
                }
            }
            Some(InputSource::Synth { profile: Some(p), .. }) => *p = resolve(base, p),
            _ => {}
        }
        if let Some(out) = &mut self.output_dir {
            *out = resolve(base, out);
        }
    }

    pub fn stage_seed(&self, offset: u64) -> u64 {
        self.seed.wrapping_add(offset)
    }

    pub fn variants(&self) -> Vec<Variant> {
        let mut v = self.variants.clone().unwrap_or_else(|| {
            if self.smote.enabled {
                vec![Variant::D2]
            } else {
                vec![Variant::D1]
            }
        });
        v.sort();
        v.dedup();
        v
    }

    pub fn smote_config(&self) -> SmoteConfig {
        SmoteConfig {
            k_neighbors: self.smote.k_neighbors,
            seed: self.stage_seed(seed_offset::SMOTE),
            ..Default::default()
        }
    }

    /// Output directory: the environment override, then the config value.
    pub fn output_dir(&self) -> Option<PathBuf> {
        std::env::var_os(OUT_ENV)
            .map(PathBuf::from)
            .or_else(|| self.output_dir.clone())
    }

    /// Checks everything that can be checked before computing anything.
    pub fn validate(&self) -> Result<()> {
        if self.models.is_empty() {
            return Err(Error::Config("at least one model must be listed".into()));
        }
        for m in &self.models {
            m.validate()?;
        }
        let mut names: Vec<&str> = self.models.iter().map(ModelSpec::name).collect();
        names.sort_unstable();
        if names.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::Config("each model kind may be listed once".into()));
        }
        if !(self.split_fraction > 0.0 && self.split_fraction < 1.0) {
            return Err(Error::Config(format!(
                "split_fraction must lie in (0, 1), got {}",
                self.split_fraction
            )));
        }
        if self.cv_folds == 1 {
            return Err(Error::Config("cv_folds must be 0 (off) or at least 2".into()));
        }
        if self.smote.k_neighbors == 0 {
            return Err(Error::Config("smote.k_neighbors must be at least 1".into()));
        }
        if let Some(v) = &self.variants {
            if v.is_empty() {
                return Err(Error::Config("variants must not be empty".into()));
            }
        }
        match &self.input {
            None => return Err(Error::Config("no input configured".into())),
            Some(InputSource::Csv { path, schema }) => {
                if !path.is_file() {
                    return Err(Error::Config(format!("input {} does not exist", path.display())));
                }
                if let Some(s) = schema {
                    Schema::load(s).map_err(|e| Error::Config(e.to_string()))?;
                }
            }
            Some(InputSource::Synth { profile, rows }) => {
                if let Some(p) = profile {
                    TrafficProfile::load(p).map_err(|e| Error::Config(e.to_string()))?;
                }
                if *rows == Some(0) {
                    return Err(Error::Config("synth rows must be positive".into()));
                }
            }
        }
        Ok(())
    }
}

/// The loaded input: model-ready numeric data plus what ingest learned.
#[derive(Debug, Clone)]
pub struct Ingested {
    pub dataset: Dataset,
    pub encoding: EncodingMap,
    pub summary: ClassSummary,
    pub description: String,
}

pub fn ingest(source: &InputSource, synth_seed: Option<u64>) -> Result<Ingested> {
    let (table, description) = match source {
        InputSource::Csv { path, schema } => {
            let schema = match schema {
                Some(p) => Schema::load(p)?,
                None => Schema::bundled(),
            };
            (load_csv(path, &schema)?, format!("csv:{}", path.display()))
        }
        InputSource::Synth { profile, rows } => {
            let mut p = match profile {
                Some(path) => TrafficProfile::load(path)?,
                None => TrafficProfile::bundled(),
            };
            if let Some(n) = rows {
                p.row_count = *n;
            }
            if let Some(seed) = synth_seed {
                p.seed = seed;
            }
            let description = format!(
                "synth:{} rows={} class_ratio={} seed={}",
                profile.as_ref().map_or("bundled".to_string(), |p| p.display().to_string()),
                p.row_count,
                p.class_ratio,
                p.seed
            );
            (generate_table(&p)?, description)
        }
    };
    let summary = crate::dataset::class_summary(&table.records)?;
    let (dataset, encoding) = prepare(table)?;
    Ok(Ingested {
        dataset,
        encoding,
        summary,
        description,
    })
}

/// Evaluation of one model on held-out rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub model: String,
    /// Where the numbers come from, e.g. `holdout-test`.
    pub provenance: String,
    pub rows: usize,
    pub confusion: ConfusionMatrix,
    pub metrics: Metrics,
    /// Metrics as percentages with one decimal.
    pub percentages: Vec<(String, String)>,
}

impl EvalReport {
    pub fn new(model: &str, provenance: &str, labels: &[u8], scores: &[f64]) -> Result<(Self, Option<RocCurve>)> {
        let predicted: Vec<u8> = scores.iter().copied().map(threshold).collect();
        let cm = confusion(labels, &predicted)?;
        let metrics = metrics_from(&cm, scores, labels)?;
        let percentages = metrics
            .named()
            .iter()
            .map(|(n, v)| (n.to_string(), percent(*v)))
            .collect();
        let roc = roc_curve(scores, labels).ok();
        Ok((
            EvalReport {
                model: model.to_string(),
                provenance: provenance.to_string(),
                rows: labels.len(),
                confusion: cm,
                metrics,
                percentages,
            },
            roc,
        ))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelResult {
    pub holdout: EvalReport,
    pub cv: Option<CvResult>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassCountReport {
    pub input: ClassCounts,
    pub train: ClassCounts,
    pub test: ClassCounts,
    pub after_smote: Option<ClassCounts>,
    /// `full-dataset` (paper mode) or `training-split` (default mode).
    pub smote_scope: Option<String>,
}

#[derive(Debug, Clone)]
pub struct VariantResult {
    pub variant: Variant,
    pub stages: Vec<String>,
    pub class_counts: ClassCountReport,
    pub feature_report: Option<FeatureScoreReport>,
    pub models: Vec<(ModelResult, Option<RocCurve>)>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub config: ExperimentConfig,
    pub mode: Mode,
    pub master_seed: u64,
    pub stage_seeds: Vec<(String, u64)>,
    pub input: String,
    pub candidate_features: Vec<String>,
    pub variants: Vec<ManifestVariant>,
    pub files: Vec<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ManifestVariant {
    pub name: String,
    pub stages: Vec<String>,
    pub smote_stage: Option<String>,
    pub number_provenance: String,
}

/// Everything a run produced, before it is written to disk.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub config: ExperimentConfig,
    pub input: String,
    pub summary: ClassSummary,
    pub candidate_features: Vec<String>,
    pub variants: Vec<VariantResult>,
}

fn stage<T>(name: &'static str, r: Result<T>) -> Result<T> {
    r.map_err(|e| match e {
        e @ Error::Stage { .. } => e,
        e => Error::Stage {
            stage: name,
            source: Box::new(e),
        },
    })
}

fn evaluate_models(
    config: &ExperimentConfig,
    train: &Dataset,
    test: &Dataset,
    pipeline: Option<&FittedPipeline>,
    cv_data: &Dataset,
    cv_config: &CvConfig,
) -> Result<Vec<(ModelResult, Option<RocCurve>)>> {
    let model_seed = config.stage_seed(seed_offset::MODEL);
    config
        .models
        .par_iter()
        .map(|spec| {
            let spec = spec.with_seed(model_seed);
            let model = stage("train", spec.fit(train))?;
            let test_ready = match pipeline {
                Some(p) => stage("evaluate", p.transform(test))?,
                None => test.clone(),
            };
            let scores = stage("evaluate", model.score_batch(&test_ready))?;
            let (holdout, roc) = stage(
                "evaluate",
                EvalReport::new(spec.name(), "holdout-test", test_ready.labels(), &scores),
            )?;
            let cv = if config.cv_folds >= 2 {
                Some(stage("cross-validate", cross_validate(cv_data, &spec, cv_config))?)
            } else {
                None
            };
            Ok((ModelResult { holdout, cv }, roc))
        })
        .collect()
}

fn run_variant(config: &ExperimentConfig, data: &Dataset, variant: Variant) -> Result<VariantResult> {
    let balance = variant == Variant::D2;
    let split_seed = config.stage_seed(seed_offset::SPLIT);
    let mut cv_config = CvConfig {
        k: config.cv_folds,
        seed: config.stage_seed(seed_offset::CV),
        stratified: config.stratified,
        per_fold: PipelineSpec::default(),
    };
    let input = data.class_counts();

    match config.mode {
        Mode::Paper => {
            let mut stages = vec!["normalize"];
            let params = stage("normalize", fit_scaler(data))?;
            let mut all = stage("normalize", apply_scaler(data, &params))?;
            let mut after_smote = None;
            if balance {
                stages.push("smote");
                all = stage("smote", smote(&all, &config.smote_config()))?.dataset;
                after_smote = Some(all.class_counts());
            }
            let mut feature_report = None;
            if config.feature_selection {
                stages.push("score-features");
                let report = stage("score-features", chi2_scores(&all))?;
                all = stage("score-features", select_features(&all, &report))?;
                feature_report = Some(report);
            }
            stages.extend(["split", "train", "evaluate"]);
            let (train_idx, test_idx) = stage(
                "split",
                split_indices(all.labels(), config.split_fraction, split_seed, config.stratified),
            )?;
            let train = all.select_rows(&train_idx);
            let test = all.select_rows(&test_idx);
            if config.cv_folds >= 2 {
                stages.push("cross-validate");
            }
            let models = evaluate_models(config, &train, &test, None, &train, &cv_config)?;
            Ok(VariantResult {
                variant,
                stages: stages.into_iter().map(String::from).collect(),
                class_counts: ClassCountReport {
                    input,
                    train: train.class_counts(),
                    test: test.class_counts(),
                    after_smote,
                    smote_scope: balance.then(|| "full-dataset".to_string()),
                },
                feature_report,
                models,
            })
        }
        Mode::Default => {
            let (train_idx, test_idx) = stage(
                "split",
                split_indices(data.labels(), config.split_fraction, split_seed, config.stratified),
            )?;
            let raw_train = data.select_rows(&train_idx);
            let test = data.select_rows(&test_idx);
            let spec = PipelineSpec {
                scale: true,
                select_features: config.feature_selection,
                smote: balance.then(|| config.smote_config()),
            };
            let prepared = fit_transform(&raw_train, &spec)?;
            cv_config.per_fold = spec;
            let mut stages = vec!["split"];
            stages.extend(spec.stage_names());
            stages.extend(["train", "evaluate"]);
            if config.cv_folds >= 2 {
                stages.push("cross-validate");
            }
            let models = evaluate_models(
                config,
                &prepared.train,
                &test,
                Some(&prepared.pipeline),
                &raw_train,
                &cv_config,
            )?;
            Ok(VariantResult {
                variant,
                stages: stages.into_iter().map(String::from).collect(),
                class_counts: ClassCountReport {
                    input,
                    train: raw_train.class_counts(),
                    test: test.class_counts(),
                    after_smote: prepared.pipeline.smote.map(|s| s.after),
                    smote_scope: balance.then(|| "training-split".to_string()),
                },
                feature_report: prepared.pipeline.feature_report.clone(),
                models,
            })
        }
    }
}

/// Runs the configured pipeline in memory.
pub fn execute(config: &ExperimentConfig) -> Result<RunOutput> {
    config.validate()?;
    let source = config.input.as_ref().expect("validated");
    let ingested = stage("ingest", ingest(source, Some(config.stage_seed(seed_offset::SYNTH))))?;
    let variants = config
        .variants()
        .into_iter()
        .map(|v| run_variant(config, &ingested.dataset, v))
        .collect::<Result<Vec<_>>>()?;
    Ok(RunOutput {
        config: config.clone(),
        input: ingested.description,
        summary: ingested.summary,
        candidate_features: ingested.dataset.feature_names().to_vec(),
        variants,
    })
}

fn write(dir: &Path, rel: &str, contents: &str, files: &mut Vec<String>) -> Result<()> {
    let path = dir.join(rel);
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    fs::write(&path, contents).map_err(|e| Error::io(&path, e))?;
    files.push(rel.to_string());
    Ok(())
}

fn json<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

const SUMMARY_METRICS: [&str; 5] = ["accuracy", "precision", "recall", "f1", "roc_auc"];

/// Models by dataset variant, five metrics as percentages.
pub fn summary_table(output: &RunOutput) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "# held-out test split ({}% of rows), percentages, mode={}",
        percent(output.config.split_fraction).trim_end_matches(".0"),
        match output.config.mode {
            Mode::Default => "default",
            Mode::Paper => "paper",
        }
    );
    let _ = writeln!(out, "model\tdataset\t{}", SUMMARY_METRICS.join("\t"));
    for spec in &output.config.models {
        for v in &output.variants {
            let Some((result, _)) = v.models.iter().find(|(r, _)| r.holdout.model == spec.name()) else {
                continue;
            };
            let values: Vec<String> = SUMMARY_METRICS
                .iter()
                .map(|m| {
                    result
                        .holdout
                        .percentages
                        .iter()
                        .find(|(n, _)| n == m)
                        .map(|(_, p)| p.clone())
                        .unwrap_or_default()
                })
                .collect();
            let _ = writeln!(
                out,
                "{}\t{}\t{}",
                spec.name(),
                v.variant.name().to_uppercase(),
                values.join("\t")
            );
        }
    }
    out
}

fn cv_table(cv: &CvResult) -> String {
    let mut out = format!("# {}-fold cross-validation, population std\nmetric\tmean\tstd\n", cv.k);
    for (name, s) in &cv.summary {
        let _ = writeln!(out, "{name}\t{}\t{}", percent(s.mean), percent(s.std));
    }
    out
}

/// Writes the bundle files into `dir` and returns the manifest.
pub fn write_bundle(output: &RunOutput, dir: &Path) -> Result<Manifest> {
    let mut files = Vec::new();
    let config = &output.config;
    write(dir, "class_summary.txt", &output.summary.to_table(), &mut files)?;
    write(dir, "class_summary.json", &json(&output.summary)?, &mut files)?;
    let mut manifest_variants = Vec::new();
    for v in &output.variants {
        let name = v.variant.name();
        write(dir, &format!("{name}/class_counts.json"), &json(&v.class_counts)?, &mut files)?;
        if let Some(report) = &v.feature_report {
            write(dir, &format!("{name}/feature_scores.tsv"), &report.to_table(), &mut files)?;
            write(dir, &format!("{name}/feature_scores.json"), &json(report)?, &mut files)?;
        }
        for (result, roc) in &v.models {
            let model = &result.holdout.model;
            write(dir, &format!("{name}/reports/{model}.json"), &json(result)?, &mut files)?;
            if let Some(cv) = &result.cv {
                write(dir, &format!("{name}/reports/{model}.cv.txt"), &cv_table(cv), &mut files)?;
            }
            if let Some(roc) = roc {
                write(dir, &format!("{name}/roc/{model}.tsv"), &roc.to_tsv(), &mut files)?;
            }
        }
        manifest_variants.push(ManifestVariant {
            name: name.to_string(),
            stages: v.stages.clone(),
            smote_stage: v.class_counts.smote_scope.as_ref().map(|scope| match config.mode {
                Mode::Paper => format!("{scope}: after normalization, before feature scoring and split"),
                Mode::Default => format!("{scope}: after normalization and feature selection"),
            }),
            number_provenance: "holdout-test for reports/*.json `holdout`; cv fold means for `cv`".into(),
        });
    }
    write(dir, "summary.txt", &summary_table(output), &mut files)?;

    let mut echo = config.clone();
    echo.output_dir = None;
    let manifest = Manifest {
        tool: "flowguard".into(),
        version: env!("CARGO_PKG_VERSION").into(),
        config: echo,
        mode: config.mode,
        master_seed: config.seed,
        stage_seeds: [
            ("synth", seed_offset::SYNTH),
            ("split", seed_offset::SPLIT),
            ("cv", seed_offset::CV),
            ("smote", seed_offset::SMOTE),
            ("model", seed_offset::MODEL),
        ]
        .iter()
        .map(|(n, o)| (n.to_string(), config.stage_seed(*o)))
        .collect(),
        input: output.input.clone(),
        candidate_features: output.candidate_features.clone(),
        variants: manifest_variants,
        files: files.clone(),
    };
    write(dir, "manifest.json", &json(&manifest)?, &mut files)?;
    Ok(manifest)
}

/// Runs the experiment and writes the bundle to `out`. Output is staged in
/// a sibling directory and moved into place only on success, so a failed
/// run leaves nothing behind.
pub fn run_experiment(config: &ExperimentConfig, out: &Path) -> Result<Manifest> {
    config.validate()?;
    let output = execute(config)?;
    let staging = out.with_extension("partial");
    let _ = fs::remove_dir_all(&staging);
    fs::create_dir_all(&staging).map_err(|e| Error::io(&staging, e))?;
    let manifest = match write_bundle(&output, &staging) {
        Ok(m) => m,
        Err(e) => {
            let _ = fs::remove_dir_all(&staging);
            return Err(e);
        }
    };
    if out.exists() {
        fs::remove_dir_all(out).map_err(|e| Error::io(out, e))?;
    }
    fs::rename(&staging, out).map_err(|e| Error::io(out, e))?;
    Ok(manifest)
}

/// Trains one model on a dataset with the given preprocessing and returns
/// a self-contained bundle.
pub fn train_bundle(
    data: &Dataset,
    encoding: Option<EncodingMap>,
    spec: &ModelSpec,
    pipeline: &PipelineSpec,
    provenance: Vec<(String, String)>,
) -> Result<(ModelBundle, Option<usize>, Dataset)> {
    spec.validate()?;
    let prepared = fit_transform(data, pipeline)?;
    let model: TrainedModel = stage("train", spec.fit(&prepared.train))?;
    Ok((
        ModelBundle {
            encoding,
            pipeline: prepared.pipeline,
            model,
            provenance,
        },
        prepared.synthetic_from,
        prepared.train,
    ))
}
