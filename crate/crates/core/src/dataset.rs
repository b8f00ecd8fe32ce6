//! Flow-record data model, schema-driven CSV loading, and the numeric
//! [`Dataset`] that every later pipeline stage transforms.

use std::collections::{BTreeMap, HashSet};
use std::fmt::Write as _;
use std::fs::File;
use std::path::Path;

use ndarray::{Array2, Axis};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Label value of normal traffic.
pub const NORMAL: u8 = 0;
/// Label value of botnet traffic (the positive class).
pub const BOTNET: u8 = 1;

/// Name of the label column in dataset CSV files written by this crate.
pub const LABEL_COLUMN: &str = "attack";
/// Provenance column marking SMOTE-generated rows.
pub const SYNTHETIC_COLUMN: &str = "synthetic";

const COUNT_FIELDS: [&str; 7] = ["pkts", "bytes", "spkts", "dpkts", "sbytes", "dbytes", "dur"];

/// Numeric fields with a dedicated slot on [`FlowRecord`], in display order.
pub const NUMERIC_FIELDS: [&str; 10] = [
    "pkts", "bytes", "dur", "spkts", "dpkts", "sbytes", "dbytes", "rate", "srate", "drate",
];

/// Role a CSV column plays in the pipeline.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    Numeric,
    Categorical,
    Label,
    Ignore,
}

/// Column-role declaration for flow CSV files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Schema {
    /// Role given to header columns the schema does not mention.
    #[serde(default = "default_role")]
    pub default: Role,
    pub columns: BTreeMap<String, Role>,
}

fn default_role() -> Role {
    Role::Ignore
}

/// Schema bundled with the crate: the twelve flow fields plus the label.
pub const DEFAULT_SCHEMA: &str = include_str!("../assets/bot-iot.schema.toml");

impl Schema {
    pub fn bundled() -> Self {
        Schema::from_toml(DEFAULT_SCHEMA).expect("bundled schema is valid")
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let schema: Schema = toml::from_str(text).map_err(|e| Error::Schema(e.to_string()))?;
        schema.validate()?;
        Ok(schema)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Schema::from_toml(&text)
    }

    /// Schema for a simple table: the named columns are numeric, `label` is the label.
    pub fn numeric(columns: &[&str], label: &str) -> Self {
        let mut map: BTreeMap<String, Role> = columns
            .iter()
            .map(|c| (c.to_string(), Role::Numeric))
            .collect();
        map.insert(label.to_string(), Role::Label);
        Schema {
            default: Role::Ignore,
            columns: map,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let labels: Vec<&String> = self
            .columns
            .iter()
            .filter(|(_, r)| **r == Role::Label)
            .map(|(n, _)| n)
            .collect();
        if labels.len() != 1 {
            return Err(Error::Schema(format!(
                "exactly one label column required, found {}",
                labels.len()
            )));
        }
        if self.default == Role::Label {
            return Err(Error::Schema("default role cannot be `label`".into()));
        }
        for (name, role) in &self.columns {
            let is_named_numeric = NUMERIC_FIELDS.contains(&name.as_str());
            if is_named_numeric && !matches!(role, Role::Numeric | Role::Ignore) {
                return Err(Error::Schema(format!(
                    "column `{name}` must be numeric or ignored"
                )));
            }
        }
        Ok(())
    }

    pub fn label_column(&self) -> &str {
        self.columns
            .iter()
            .find(|(_, r)| **r == Role::Label)
            .map(|(n, _)| n.as_str())
            .expect("validated schema has a label column")
    }

    pub fn role_of(&self, column: &str) -> Role {
        self.columns.get(column).copied().unwrap_or(self.default)
    }
}

/// One cell of a flow record that may hold a number, a categorical token,
/// or nothing.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub enum Cell {
    #[default]
    Missing,
    Number(f64),
    Token(String),
}

impl Cell {
    pub fn is_missing(&self) -> bool {
        matches!(self, Cell::Missing)
    }

    pub fn as_number(&self) -> Option<f64> {
        match self {
            Cell::Number(v) => Some(*v),
            _ => None,
        }
    }
}

/// One flow row in the BoT-IoT column layout.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct FlowRecord {
    pub pkts: Option<f64>,
    pub bytes: Option<f64>,
    pub dur: Option<f64>,
    pub proto: Cell,
    pub state: Cell,
    pub spkts: Option<f64>,
    pub dpkts: Option<f64>,
    pub sbytes: Option<f64>,
    pub dbytes: Option<f64>,
    pub rate: Option<f64>,
    pub srate: Option<f64>,
    pub drate: Option<f64>,
    pub attack: Option<u8>,
    pub extra: BTreeMap<String, Cell>,
}

impl FlowRecord {
    fn numeric_slot(&self, name: &str) -> Option<&Option<f64>> {
        Some(match name {
            "pkts" => &self.pkts,
            "bytes" => &self.bytes,
            "dur" => &self.dur,
            "spkts" => &self.spkts,
            "dpkts" => &self.dpkts,
            "sbytes" => &self.sbytes,
            "dbytes" => &self.dbytes,
            "rate" => &self.rate,
            "srate" => &self.srate,
            "drate" => &self.drate,
            _ => return None,
        })
    }

    fn numeric_slot_mut(&mut self, name: &str) -> Option<&mut Option<f64>> {
        Some(match name {
            "pkts" => &mut self.pkts,
            "bytes" => &mut self.bytes,
            "dur" => &mut self.dur,
            "spkts" => &mut self.spkts,
            "dpkts" => &mut self.dpkts,
            "sbytes" => &mut self.sbytes,
            "dbytes" => &mut self.dbytes,
            "rate" => &mut self.rate,
            "srate" => &mut self.srate,
            "drate" => &mut self.drate,
            _ => return None,
        })
    }

    /// Value of a column by name. The label is not reachable through this.
    pub fn get(&self, name: &str) -> Cell {
        if let Some(slot) = self.numeric_slot(name) {
            return slot.map_or(Cell::Missing, Cell::Number);
        }
        match name {
            "proto" => self.proto.clone(),
            "state" => self.state.clone(),
            _ => self.extra.get(name).cloned().unwrap_or_default(),
        }
    }

    pub fn is_missing(&self, name: &str) -> bool {
        if let Some(slot) = self.numeric_slot(name) {
            return slot.is_none();
        }
        match name {
            "proto" => self.proto.is_missing(),
            "state" => self.state.is_missing(),
            _ => self.extra.get(name).is_none_or(Cell::is_missing),
        }
    }

    pub fn set(&mut self, name: &str, cell: Cell) {
        if let Some(slot) = self.numeric_slot_mut(name) {
            *slot = cell.as_number();
            return;
        }
        match name {
            "proto" => self.proto = cell,
            "state" => self.state = cell,
            _ => {
                self.extra.insert(name.to_string(), cell);
            }
        }
    }

    /// Present numeric values: the dedicated fields first, then numeric extras.
    pub fn numeric_values(&self) -> impl Iterator<Item = (&str, f64)> {
        let named = NUMERIC_FIELDS
            .iter()
            .filter_map(|&n| self.numeric_slot(n).and_then(|v| v.map(|v| (n, v))));
        let extra = self
            .extra
            .iter()
            .filter_map(|(n, c)| c.as_number().map(|v| (n.as_str(), v)));
        named.chain(extra)
    }

    /// Checks the record-level invariants (non-negative counts, label range,
    /// and `pkts = spkts + dpkts` when all three are present).
    pub fn check(&self) -> std::result::Result<(), String> {
        for name in COUNT_FIELDS {
            if let Some(Some(v)) = self.numeric_slot(name) {
                if *v < 0.0 {
                    return Err(format!("{name} is negative"));
                }
            }
        }
        if let Some(a) = self.attack {
            if a > 1 {
                return Err(format!("attack label {a}"));
            }
        }
        if let (Some(p), Some(s), Some(d)) = (self.pkts, self.spkts, self.dpkts) {
            if p != s + d {
                return Err(format!("pkts {p} != spkts {s} + dpkts {d}"));
            }
        }
        Ok(())
    }
}

/// A declared feature column of a loaded flow table.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Column {
    pub name: String,
    pub role: Role,
}

/// Flow records together with the feature columns they were loaded with.
#[derive(Debug, Clone, PartialEq)]
pub struct FlowTable {
    /// Numeric and categorical columns, in header order.
    pub columns: Vec<Column>,
    /// Header name of the label column.
    pub label: String,
    pub records: Vec<FlowRecord>,
}

impl FlowTable {
    pub fn class_counts(&self) -> ClassCounts {
        ClassCounts::from_labels(self.records.iter().filter_map(|r| r.attack))
    }
}

fn parse_number(raw: &str, column: &str) -> Option<f64> {
    let v: f64 = raw.parse().ok()?;
    if !v.is_finite() {
        return None;
    }
    if v < 0.0 && COUNT_FIELDS.contains(&column) {
        return None;
    }
    Some(v)
}

/// Loads a flow CSV. Cells that fail numeric parsing become missing values.
pub fn load_csv(path: &Path, schema: &Schema) -> Result<FlowTable> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_flows(file, schema)
}

/// Reads flow records from any CSV source; see [`load_csv`].
pub fn read_flows<R: std::io::Read>(source: R, schema: &Schema) -> Result<FlowTable> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(source);
    let header = reader.headers()?.clone();
    let label = schema.label_column().to_string();
    let roles: Vec<Role> = header.iter().map(|h| schema.role_of(h)).collect();
    let label_idx = header
        .iter()
        .position(|h| h == label)
        .ok_or_else(|| Error::MissingLabelColumn(label.clone()))?;

    let mut seen = HashSet::new();
    let mut columns = Vec::new();
    for (name, role) in header.iter().zip(&roles) {
        if !seen.insert(name) {
            return Err(Error::Schema(format!("duplicate header column `{name}`")));
        }
        if matches!(role, Role::Numeric | Role::Categorical) {
            if NUMERIC_FIELDS.contains(&name) && *role == Role::Categorical {
                return Err(Error::Schema(format!("column `{name}` must be numeric")));
            }
            columns.push(Column {
                name: name.to_string(),
                role: *role,
            });
        }
    }

    let mut records = Vec::new();
    for (i, row) in reader.records().enumerate() {
        let row = row?;
        let mut record = FlowRecord::default();
        for ((idx, raw), (name, role)) in row.iter().enumerate().zip(header.iter().zip(&roles)) {
            if idx == label_idx {
                record.attack = match raw {
                    "" => None,
                    "0" => Some(NORMAL),
                    "1" => Some(BOTNET),
                    other => {
                        return Err(Error::InvalidLabel {
                            row: i + 2,
                            value: other.to_string(),
                        })
                    }
                };
                continue;
            }
            let cell = match role {
                Role::Numeric => parse_number(raw, name).map_or(Cell::Missing, Cell::Number),
                Role::Categorical if raw.is_empty() => Cell::Missing,
                Role::Categorical => Cell::Token(raw.to_string()),
                Role::Label | Role::Ignore => continue,
            };
            record.set(name, cell);
        }
        records.push(record);
    }
    Ok(FlowTable {
        columns,
        label,
        records,
    })
}

fn format_cell(cell: &Cell) -> String {
    match cell {
        Cell::Missing => String::new(),
        Cell::Number(v) => v.to_string(),
        Cell::Token(t) => t.clone(),
    }
}

/// Writes a flow table back to CSV in the layout [`load_csv`] reads.
pub fn write_flows_csv(path: &Path, table: &FlowTable) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut writer = csv::Writer::from_writer(file);
    let mut header: Vec<&str> = table.columns.iter().map(|c| c.name.as_str()).collect();
    header.push(&table.label);
    writer.write_record(&header)?;
    for record in &table.records {
        let mut row: Vec<String> = table
            .columns
            .iter()
            .map(|c| format_cell(&record.get(&c.name)))
            .collect();
        row.push(record.attack.map_or(String::new(), |a| a.to_string()));
        writer.write_record(&row)?;
    }
    writer.flush().map_err(|e| Error::io(path, e))?;
    Ok(())
}

/// Per-class row counts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ClassCounts {
    pub normal: usize,
    pub botnet: usize,
}

impl ClassCounts {
    pub fn from_labels(labels: impl IntoIterator<Item = u8>) -> Self {
        let mut counts = ClassCounts::default();
        for l in labels {
            if l == BOTNET {
                counts.botnet += 1;
            } else {
                counts.normal += 1;
            }
        }
        counts
    }

    pub fn total(&self) -> usize {
        self.normal + self.botnet
    }

    pub fn of(&self, label: u8) -> usize {
        if label == BOTNET {
            self.botnet
        } else {
            self.normal
        }
    }

    pub fn both_present(&self) -> bool {
        self.normal > 0 && self.botnet > 0
    }

    /// The smaller class; ties resolve to normal.
    pub fn minority(&self) -> u8 {
        if self.normal <= self.botnet {
            NORMAL
        } else {
            BOTNET
        }
    }
}

/// Per-class means of one numeric feature; `None` when a class has no
/// present value for it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureMeans {
    pub feature: String,
    pub normal: Option<f64>,
    pub botnet: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassSummary {
    pub counts: ClassCounts,
    pub means: Vec<FeatureMeans>,
}

impl ClassSummary {
    pub fn mean(&self, feature: &str, label: u8) -> Option<f64> {
        let m = self.means.iter().find(|m| m.feature == feature)?;
        if label == BOTNET {
            m.botnet
        } else {
            m.normal
        }
    }

    pub fn to_table(&self) -> String {
        fn fmt(v: Option<f64>) -> String {
            v.map_or_else(|| "-".to_string(), |v| format!("{v:.2}"))
        }
        let mut out = format!(
            "rows\tnormal {}\tbotnet {}\nfeature\tnormal_mean\tbotnet_mean\n",
            self.counts.normal, self.counts.botnet
        );
        for m in &self.means {
            let _ = writeln!(out, "{}\t{}\t{}", m.feature, fmt(m.normal), fmt(m.botnet));
        }
        out
    }
}

/// Class counts and per-class means of every numeric feature. Records
/// without a label are skipped; means use present values only.
pub fn class_summary(records: &[FlowRecord]) -> Result<ClassSummary> {
    if records.is_empty() {
        return Err(Error::Empty("class_summary"));
    }
    let mut order: Vec<String> = Vec::new();
    // feature -> [(sum, count); 2]
    let mut acc: BTreeMap<String, [(f64, usize); 2]> = BTreeMap::new();
    let mut counts = ClassCounts::default();
    for record in records {
        let Some(label) = record.attack else { continue };
        if label == BOTNET {
            counts.botnet += 1;
        } else {
            counts.normal += 1;
        }
        for (name, v) in record.numeric_values() {
            let slot = acc.entry(name.to_string()).or_insert_with(|| {
                order.push(name.to_string());
                [(0.0, 0); 2]
            });
            slot[label as usize].0 += v;
            slot[label as usize].1 += 1;
        }
    }
    // dedicated fields first in their fixed order, extras after
    order.sort_by_key(|n| {
        NUMERIC_FIELDS
            .iter()
            .position(|f| f == n)
            .unwrap_or(NUMERIC_FIELDS.len())
    });
    let mean = |(sum, n): (f64, usize)| (n > 0).then(|| sum / n as f64);
    let means = order
        .into_iter()
        .map(|name| {
            let [normal, botnet] = acc[&name];
            FeatureMeans {
                feature: name,
                normal: mean(normal),
                botnet: mean(botnet),
            }
        })
        .collect();
    Ok(ClassSummary { counts, means })
}

/// Numeric feature matrix with binary labels. Immutable once built.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    features: Array2<f64>,
    labels: Vec<u8>,
    feature_names: Vec<String>,
}

impl Dataset {
    pub fn new(features: Array2<f64>, labels: Vec<u8>, feature_names: Vec<String>) -> Result<Self> {
        if features.nrows() != labels.len() {
            return Err(Error::LengthMismatch {
                left: features.nrows(),
                right: labels.len(),
            });
        }
        if features.ncols() != feature_names.len() {
            return Err(Error::InvalidDataset(format!(
                "{} columns but {} names",
                features.ncols(),
                feature_names.len()
            )));
        }
        let mut seen = HashSet::new();
        if let Some(dup) = feature_names.iter().find(|n| !seen.insert(n.as_str())) {
            return Err(Error::InvalidDataset(format!("duplicate feature `{dup}`")));
        }
        if let Some(bad) = labels.iter().find(|&&l| l > 1) {
            return Err(Error::InvalidDataset(format!("label {bad} outside {{0,1}}")));
        }
        if features.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidDataset("missing or non-finite value".into()));
        }
        let features = features.as_standard_layout().into_owned();
        Ok(Dataset {
            features,
            labels,
            feature_names,
        })
    }

    /// Builds from row vectors; every row must have `feature_names.len()` entries.
    pub fn from_rows(rows: Vec<Vec<f64>>, labels: Vec<u8>, feature_names: Vec<String>) -> Result<Self> {
        let d = feature_names.len();
        let n = rows.len();
        let mut flat = Vec::with_capacity(n * d);
        for row in rows {
            if row.len() != d {
                return Err(Error::LengthMismatch {
                    left: row.len(),
                    right: d,
                });
            }
            flat.extend(row);
        }
        let features = Array2::from_shape_vec((n, d), flat)
            .map_err(|e| Error::InvalidDataset(e.to_string()))?;
        Dataset::new(features, labels, feature_names)
    }

    pub fn features(&self) -> &Array2<f64> {
        &self.features
    }

    pub fn labels(&self) -> &[u8] {
        &self.labels
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn n_rows(&self) -> usize {
        self.labels.len()
    }

    pub fn n_features(&self) -> usize {
        self.feature_names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let d = self.n_features();
        &self.features.as_slice().expect("standard layout")[i * d..(i + 1) * d]
    }

    pub fn rows(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        (0..self.n_rows()).map(move |i| self.row(i))
    }

    pub fn class_counts(&self) -> ClassCounts {
        ClassCounts::from_labels(self.labels.iter().copied())
    }

    /// Rows at the given indices, in the given order.
    pub fn select_rows(&self, idx: &[usize]) -> Dataset {
        Dataset {
            features: self.features.select(Axis(0), idx).as_standard_layout().into_owned(),
            labels: idx.iter().map(|&i| self.labels[i]).collect(),
            feature_names: self.feature_names.clone(),
        }
    }

    /// Columns at the given indices, in the given order.
    pub fn select_columns(&self, idx: &[usize]) -> Dataset {
        Dataset {
            features: self.features.select(Axis(1), idx).as_standard_layout().into_owned(),
            labels: self.labels.clone(),
            feature_names: idx.iter().map(|&i| self.feature_names[i].clone()).collect(),
        }
    }

    /// Same labels and names with a replaced matrix of identical shape.
    pub(crate) fn with_features(&self, features: Array2<f64>) -> Dataset {
        debug_assert_eq!(features.dim(), self.features.dim());
        Dataset {
            features: features.as_standard_layout().into_owned(),
            labels: self.labels.clone(),
            feature_names: self.feature_names.clone(),
        }
    }

    /// Appends rows (flattened, row-major) with their labels.
    pub(crate) fn append_rows(&self, flat: Vec<f64>, labels: &[u8]) -> Dataset {
        let d = self.n_features();
        let n = self.n_rows() + labels.len();
        let mut data = self.features.as_slice().expect("standard layout").to_vec();
        data.extend(flat);
        let mut all_labels = self.labels.clone();
        all_labels.extend_from_slice(labels);
        Dataset {
            features: Array2::from_shape_vec((n, d), data).expect("shape checked by caller"),
            labels: all_labels,
            feature_names: self.feature_names.clone(),
        }
    }

    /// Checks that `other` carries the same feature names in the same order.
    pub fn check_same_features(&self, names: &[String]) -> Result<()> {
        if self.feature_names != names {
            return Err(Error::FeatureMismatch {
                expected: names.join(","),
                found: self.feature_names.join(","),
            });
        }
        Ok(())
    }
}

/// Writes a dataset as CSV: feature columns then `attack`. When
/// `synthetic_from` is given, rows at or after that index are flagged in a
/// trailing `synthetic` column.
pub fn write_dataset_csv(path: &Path, dataset: &Dataset, synthetic_from: Option<usize>) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut writer = csv::Writer::from_writer(file);
    let mut header: Vec<&str> = dataset.feature_names().iter().map(String::as_str).collect();
    header.push(LABEL_COLUMN);
    if synthetic_from.is_some() {
        header.push(SYNTHETIC_COLUMN);
    }
    writer.write_record(&header)?;
    for (i, row) in dataset.rows().enumerate() {
        let mut out: Vec<String> = row.iter().map(f64::to_string).collect();
        out.push(dataset.labels()[i].to_string());
        if let Some(from) = synthetic_from {
            out.push(u8::from(i >= from).to_string());
        }
        writer.write_record(&out)?;
    }
    writer.flush().map_err(|e| Error::io(path, e))?;
    Ok(())
}

/// Reads a dataset CSV written by [`write_dataset_csv`]: every column other
/// than `attack` and `synthetic` must be numeric in every row.
pub fn read_dataset_csv(path: &Path) -> Result<Dataset> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(file);
    let header = reader.headers()?.clone();
    let label_idx = header
        .iter()
        .position(|h| h == LABEL_COLUMN)
        .ok_or_else(|| Error::MissingLabelColumn(LABEL_COLUMN.into()))?;
    let feature_idx: Vec<usize> = header
        .iter()
        .enumerate()
        .filter(|(i, h)| *i != label_idx && *h != SYNTHETIC_COLUMN)
        .map(|(i, _)| i)
        .collect();
    let names: Vec<String> = feature_idx.iter().map(|&i| header[i].to_string()).collect();
    let mut flat = Vec::new();
    let mut labels = Vec::new();
    for (r, row) in reader.records().enumerate() {
        let row = row?;
        for &i in &feature_idx {
            let v = row
                .get(i)
                .and_then(|raw| raw.parse::<f64>().ok())
                .filter(|v| v.is_finite())
                .ok_or_else(|| Error::NonNumeric {
                    row: r + 2,
                    column: header[i].to_string(),
                })?;
            flat.push(v);
        }
        labels.push(match row.get(label_idx) {
            Some("0") => NORMAL,
            Some("1") => BOTNET,
            other => {
                return Err(Error::InvalidLabel {
                    row: r + 2,
                    value: other.unwrap_or_default().to_string(),
                })
            }
        });
    }
    let features = Array2::from_shape_vec((labels.len(), names.len()), flat)
        .map_err(|e| Error::InvalidDataset(e.to_string()))?;
    Dataset::new(features, labels, names)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn schema() -> Schema {
        Schema::bundled()
    }

    #[test]
    fn loads_three_row_csv() {
        let csv = "pkts,proto,attack\n4,tcp,1\n2,udp,0\n9,tcp,1\n";
        let table = read_flows(csv.as_bytes(), &schema()).unwrap();
        assert_eq!(table.records.len(), 3);
        assert_eq!(table.class_counts(), ClassCounts { normal: 1, botnet: 2 });
        assert_eq!(table.records[0].pkts, Some(4.0));
        assert_eq!(table.records[1].proto, Cell::Token("udp".into()));
        let names: Vec<_> = table.columns.iter().map(|c| c.name.as_str()).collect();
        assert_eq!(names, ["pkts", "proto"]);
    }

    #[test]
    fn empty_and_garbage_cells_are_missing() {
        let csv = "pkts,dur,attack\n4,,1\n3,abc,0\n-2,1e-3,0\n";
        let table = read_flows(csv.as_bytes(), &schema()).unwrap();
        assert_eq!(table.records[0].dur, None);
        assert_eq!(table.records[1].dur, None);
        assert_eq!(table.records[2].pkts, None);
        assert_eq!(table.records[2].dur, Some(1e-3));
    }

    #[test]
    fn label_errors() {
        let missing = "pkts,proto\n4,tcp\n";
        assert!(matches!(
            read_flows(missing.as_bytes(), &schema()),
            Err(Error::MissingLabelColumn(_))
        ));
        let bad = "pkts,attack\n4,2\n";
        assert!(matches!(
            read_flows(bad.as_bytes(), &schema()),
            Err(Error::InvalidLabel { row: 2, .. })
        ));
    }

    #[test]
    fn missing_file_is_io_error() {
        let err = load_csv(Path::new("/nonexistent/flows.csv"), &schema()).unwrap_err();
        assert!(matches!(err, Error::Io { .. }));
    }

    #[test]
    fn unknown_columns_ignored_by_default() {
        let csv = "pkSeqID,pkts,category,attack\n1,4,DDoS,1\n";
        let table = read_flows(csv.as_bytes(), &schema()).unwrap();
        assert_eq!(table.columns.len(), 1);
        assert!(table.records[0].extra.is_empty());
    }

    #[test]
    fn schema_needs_one_label() {
        let text = "[columns]\npkts = \"numeric\"\n";
        assert!(matches!(Schema::from_toml(text), Err(Error::Schema(_))));
        let text = "[columns]\npkts = \"categorical\"\nattack = \"label\"\n";
        assert!(Schema::from_toml(text).is_err());
    }

    #[test]
    fn summary_means_per_class() {
        let mut a = FlowRecord { pkts: Some(10.0), attack: Some(0), ..Default::default() };
        let b = FlowRecord { pkts: Some(20.0), attack: Some(0), ..Default::default() };
        let c = FlowRecord { pkts: None, attack: Some(1), ..Default::default() };
        a.extra.insert("mean".into(), Cell::Number(3.0));
        let s = class_summary(&[a, b, c]).unwrap();
        assert_eq!(s.counts, ClassCounts { normal: 2, botnet: 1 });
        assert_eq!(s.mean("pkts", NORMAL), Some(15.0));
        assert_eq!(s.mean("pkts", BOTNET), None);
        assert_eq!(s.mean("mean", NORMAL), Some(3.0));
        assert_eq!(s.means[0].feature, "pkts");
        assert!(class_summary(&[]).is_err());
    }

    #[test]
    fn dataset_invariants() {
        let names = vec!["a".to_string(), "a".to_string()];
        assert!(Dataset::from_rows(vec![vec![1.0, 2.0]], vec![0], names).is_err());
        let names = vec!["a".to_string()];
        assert!(Dataset::from_rows(vec![vec![f64::NAN]], vec![0], names.clone()).is_err());
        assert!(Dataset::from_rows(vec![vec![1.0]], vec![0, 1], names.clone()).is_err());
        let ds = Dataset::from_rows(vec![vec![1.0], vec![2.0], vec![3.0]], vec![0, 1, 1], names).unwrap();
        let c = ds.class_counts();
        assert_eq!(c.total(), ds.n_rows());
        assert_eq!(ds.row(2), &[3.0]);
        assert_eq!(ds.select_rows(&[2, 0]).labels(), &[1, 0]);
    }

    #[test]
    fn record_check_flags_packet_sum() {
        let r = FlowRecord {
            pkts: Some(5.0),
            spkts: Some(2.0),
            dpkts: Some(2.0),
            ..Default::default()
        };
        assert!(r.check().is_err());
        let r = FlowRecord { pkts: Some(4.0), ..r };
        assert!(r.check().is_ok());
    }
}
