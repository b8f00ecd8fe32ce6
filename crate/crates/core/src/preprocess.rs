//! Cleansing, categorical encoding, and min-max scaling.

use std::collections::BTreeMap;

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::dataset::{Cell, Column, Dataset, FlowRecord, FlowTable, Role};
use crate::error::{Error, Result};

/// Drops every record with a missing label or a missing value in any of the
/// given columns. Order is preserved.
pub fn cleanse(mut records: Vec<FlowRecord>, columns: &[Column]) -> Result<Vec<FlowRecord>> {
    records.retain(|r| r.attack.is_some() && columns.iter().all(|c| !r.is_missing(&c.name)));
    if records.is_empty() {
        return Err(Error::EmptyAfterCleansing);
    }
    Ok(records)
}

/// First code handed out for a categorical field: `state` values count up
/// from 10, every other field from 1.
pub fn first_code(field: &str) -> u32 {
    if field == "state" {
        10
    } else {
        1
    }
}

/// Token-to-code tables for categorical columns, codes assigned in
/// first-appearance order.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct EncodingMap {
    pub fields: BTreeMap<String, BTreeMap<String, u32>>,
}

impl EncodingMap {
    pub fn codes(&self, field: &str) -> Option<&BTreeMap<String, u32>> {
        self.fields.get(field)
    }

    pub fn proto_codes(&self) -> Option<&BTreeMap<String, u32>> {
        self.codes("proto")
    }

    pub fn state_codes(&self) -> Option<&BTreeMap<String, u32>> {
        self.codes("state")
    }

    /// Codes per field must be exactly `first_code(field)..first_code + len`.
    pub fn validate(&self) -> Result<()> {
        for (field, codes) in &self.fields {
            let start = first_code(field);
            let mut seen: Vec<u32> = codes.values().copied().collect();
            seen.sort_unstable();
            let expected: Vec<u32> = (start..start + codes.len() as u32).collect();
            if seen != expected {
                return Err(Error::Config(format!(
                    "encoding for `{field}` is not consecutive from {start}"
                )));
            }
        }
        Ok(())
    }
}

pub fn fit_encoding(records: &[FlowRecord], columns: &[Column]) -> EncodingMap {
    let mut map = EncodingMap::default();
    for column in columns.iter().filter(|c| c.role == Role::Categorical) {
        let start = first_code(&column.name);
        let codes = map.fields.entry(column.name.clone()).or_default();
        for record in records {
            if let Cell::Token(token) = record.get(&column.name) {
                let next = start + codes.len() as u32;
                codes.entry(token).or_insert(next);
            }
        }
    }
    map
}

/// Replaces categorical tokens by their codes.
pub fn apply_encoding(mut records: Vec<FlowRecord>, map: &EncodingMap) -> Result<Vec<FlowRecord>> {
    for record in &mut records {
        for (field, codes) in &map.fields {
            if let Cell::Token(token) = record.get(field) {
                let code = codes.get(&token).ok_or_else(|| Error::UnknownCategory {
                    field: field.clone(),
                    token: token.clone(),
                })?;
                record.set(field, Cell::Number(f64::from(*code)));
            }
        }
    }
    Ok(records)
}

/// Builds the numeric dataset from fully numeric records.
pub fn to_dataset(records: &[FlowRecord], columns: &[Column]) -> Result<Dataset> {
    let d = columns.len();
    let mut flat = Vec::with_capacity(records.len() * d);
    let mut labels = Vec::with_capacity(records.len());
    for (i, record) in records.iter().enumerate() {
        for column in columns {
            let v = record.get(&column.name).as_number().ok_or_else(|| Error::NonNumeric {
                row: i,
                column: column.name.clone(),
            })?;
            flat.push(v);
        }
        labels.push(record.attack.ok_or_else(|| Error::NonNumeric {
            row: i,
            column: "label".into(),
        })?);
    }
    let names = columns.iter().map(|c| c.name.clone()).collect();
    let features = Array2::from_shape_vec((labels.len(), d), flat)
        .map_err(|e| Error::InvalidDataset(e.to_string()))?;
    Dataset::new(features, labels, names)
}

/// Cleanse, fit and apply the categorical encoding, and build the dataset.
pub fn prepare(table: FlowTable) -> Result<(Dataset, EncodingMap)> {
    let records = cleanse(table.records, &table.columns)?;
    let encoding = fit_encoding(&records, &table.columns);
    let records = apply_encoding(records, &encoding)?;
    Ok((to_dataset(&records, &table.columns)?, encoding))
}

/// Cleanse and encode with an existing map (unseen tokens are errors).
pub fn prepare_with(table: FlowTable, encoding: &EncodingMap) -> Result<Dataset> {
    let records = cleanse(table.records, &table.columns)?;
    let records = apply_encoding(records, encoding)?;
    to_dataset(&records, &table.columns)
}

/// Per-feature minimum and maximum learned from a fit set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalerParams {
    pub feature_names: Vec<String>,
    pub min: Vec<f64>,
    pub max: Vec<f64>,
}

impl ScalerParams {
    /// Maps one value of feature `j` into [0, 1]. Constant features map to 0;
    /// values outside the fitted range are clamped.
    pub fn scale(&self, j: usize, x: f64) -> f64 {
        let (lo, hi) = (self.min[j], self.max[j]);
        if hi <= lo {
            return 0.0;
        }
        ((x - lo) / (hi - lo)).clamp(0.0, 1.0)
    }

    pub fn scale_row(&self, row: &mut [f64]) {
        for (j, v) in row.iter_mut().enumerate() {
            *v = self.scale(j, *v);
        }
    }
}

pub fn fit_scaler(dataset: &Dataset) -> Result<ScalerParams> {
    if dataset.is_empty() {
        return Err(Error::Empty("fit_scaler"));
    }
    let d = dataset.n_features();
    let mut min = vec![f64::INFINITY; d];
    let mut max = vec![f64::NEG_INFINITY; d];
    for row in dataset.rows() {
        for (j, &v) in row.iter().enumerate() {
            min[j] = min[j].min(v);
            max[j] = max[j].max(v);
        }
    }
    Ok(ScalerParams {
        feature_names: dataset.feature_names().to_vec(),
        min,
        max,
    })
}

pub fn apply_scaler(dataset: &Dataset, params: &ScalerParams) -> Result<Dataset> {
    dataset.check_same_features(&params.feature_names)?;
    let mut features = dataset.features().clone();
    for mut row in features.rows_mut() {
        for (j, v) in row.iter_mut().enumerate() {
            *v = params.scale(j, *v);
        }
    }
    Ok(dataset.with_features(features))
}
