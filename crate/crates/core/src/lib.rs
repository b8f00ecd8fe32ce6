//! Botnet detection on network flow records.
//!
//! The crate covers the whole path from a flow CSV to an evaluation report:
//! schema-driven loading ([`dataset`]), cleansing, categorical encoding and
//! min-max scaling ([`preprocess`]), chi-square feature selection
//! ([`features`]), SMOTE oversampling ([`resample`]), three classifiers
//! ([`classifiers`]), and metrics with cross-validation ([`evaluate`]).
//! [`synth`] generates labelled flows for experiments without the real data,
//! and [`experiment`] runs the complete imbalanced-vs-balanced comparison.

pub mod classifiers;
pub mod dataset;
pub mod error;
pub mod evaluate;
pub mod experiment;
pub mod features;
pub mod pipeline;
pub mod preprocess;
pub mod resample;
pub mod synth;

pub use dataset::{ClassCounts, Dataset, FlowRecord, FlowTable, Schema};
pub use error::{Error, Result};
