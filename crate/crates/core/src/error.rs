use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("cannot access {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("invalid schema: {0}")]
    Schema(String),

    #[error("header does not contain the label column `{0}`")]
    MissingLabelColumn(String),

    #[error("row {row}: label `{value}` is not 0 or 1")]
    InvalidLabel { row: usize, value: String },

    #[error("every row was dropped during cleansing")]
    EmptyAfterCleansing,

    #[error("unknown category in `{field}`: `{token}`")]
    UnknownCategory { field: String, token: String },

    #[error("row {row}: column `{column}` has no numeric value")]
    NonNumeric { row: usize, column: String },

    #[error("invalid dataset: {0}")]
    InvalidDataset(String),

    #[error("empty input to {0}")]
    Empty(&'static str),

    #[error("{0} requires both classes to be present")]
    SingleClass(&'static str),

    #[error("feature `{feature}` has a negative value; chi-square scoring needs non-negative features")]
    NegativeFeature { feature: String },

    #[error("no feature scored above the mean (all scores equal)")]
    NoFeaturesSelected,

    #[error("feature mismatch: expected {expected}, found {found}")]
    FeatureMismatch { expected: String, found: String },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("invalid traffic profile: {0}")]
    Profile(String),

    #[error("training diverged at epoch {epoch}: loss is not finite")]
    Divergence { epoch: usize },

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("split would leave the {0} side empty")]
    EmptySplit(&'static str),

    #[error("fold {fold}: training portion holds a single class; enable stratified folds")]
    Stratification { fold: usize },

    #[error("score {0} is not finite")]
    NonFiniteScore(f64),

    #[error("serialization error: {0}")]
    Serde(String),

    #[error("stage `{stage}` failed: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for errors caused by invalid user input detected before any
    /// computation starts (config, schema, profile, hyperparameters).
    pub fn is_validation(&self) -> bool {
        match self {
            Error::Config(_) | Error::Schema(_) | Error::Profile(_) => true,
            Error::Stage { source, .. } => source.is_validation(),
            _ => false,
        }
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Serde(e.to_string())
    }
}
