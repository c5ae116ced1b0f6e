//! Labeled tabular data: CSV ingestion with missing-value handling.

use std::collections::BTreeMap;
use std::io::Read;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// An n-vector of attribute values, the unit of classification.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NDPoint {
    pub values: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub id: Option<String>,
}

impl NDPoint {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        Self::with_id(values, None)
    }

    pub fn with_id(values: Vec<f64>, id: Option<String>) -> Result<Self> {
        if values.len() < 2 {
            return Err(Error::DimensionTooSmall(values.len()));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(i));
        }
        Ok(Self { values, id })
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ClassLabel {
    pub name: String,
    pub color: String,
}

impl ClassLabel {
    pub fn new(name: impl Into<String>, color: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            color: color.into(),
        }
    }
}

/// Colors handed out to classes in order when none is configured.
pub const DEFAULT_PALETTE: [&str; 6] = ["green", "red", "blue", "orange", "purple", "brown"];

/// Points with parallel class indices into `classes`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabeledDataset {
    pub points: Vec<NDPoint>,
    pub labels: Vec<usize>,
    pub classes: Vec<ClassLabel>,
    pub attributes: Vec<String>,
}

impl LabeledDataset {
    pub fn new(
        points: Vec<NDPoint>,
        labels: Vec<usize>,
        classes: Vec<ClassLabel>,
        attributes: Vec<String>,
    ) -> Result<Self> {
        if points.len() != labels.len() {
            return Err(Error::Invalid(format!(
                "{} points but {} labels",
                points.len(),
                labels.len()
            )));
        }
        if let Some(&bad) = labels.iter().find(|&&l| l >= classes.len()) {
            return Err(Error::Invalid(format!("label index {bad} has no class")));
        }
        for (i, a) in classes.iter().enumerate() {
            if classes[..i].iter().any(|b| b.name == a.name) {
                return Err(Error::Invalid(format!("duplicate class `{}`", a.name)));
            }
        }
        if let Some(first) = points.first() {
            let dim = first.dim();
            if let Some(p) = points.iter().find(|p| p.dim() != dim) {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: p.dim(),
                });
            }
            if !attributes.is_empty() && attributes.len() != dim {
                return Err(Error::ParameterLength {
                    what: "attribute names",
                    expected: dim,
                    found: attributes.len(),
                });
            }
        }
        Ok(Self {
            points,
            labels,
            classes,
            attributes,
        })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn dim(&self) -> Option<usize> {
        self.points.first().map(NDPoint::dim)
    }

    pub fn class_index(&self, name: &str) -> Option<usize> {
        self.classes.iter().position(|c| c.name == name)
    }

    pub fn label_name(&self, case: usize) -> &str {
        &self.classes[self.labels[case]].name
    }

    /// Record id of a case, falling back to its 1-based position.
    pub fn case_id(&self, case: usize) -> String {
        self.points[case]
            .id
            .clone()
            .unwrap_or_else(|| (case + 1).to_string())
    }

    /// Cases at `indices`, in that order; the class list is kept whole.
    pub fn subset(&self, indices: &[usize]) -> LabeledDataset {
        LabeledDataset {
            points: indices.iter().map(|&i| self.points[i].clone()).collect(),
            labels: indices.iter().map(|&i| self.labels[i]).collect(),
            classes: self.classes.clone(),
            attributes: self.attributes.clone(),
        }
    }
}

/// Number of cases per class name; classes without cases are absent.
pub fn class_counts(ds: &LabeledDataset) -> BTreeMap<String, usize> {
    let mut counts = BTreeMap::new();
    for &l in &ds.labels {
        *counts.entry(ds.classes[l].name.clone()).or_insert(0) += 1;
    }
    counts
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MissingPolicy {
    #[default]
    DropRow,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct LoadOptions {
    pub label_column: String,
    /// Column holding record ids; excluded from attributes.
    pub id_column: Option<String>,
    /// Further columns excluded from attributes.
    pub drop_columns: Vec<String>,
    /// Raw label value to class name. When non-empty, fixes class order and
    /// rejects unmapped labels.
    pub label_map: Vec<(String, String)>,
    /// Class name to display color.
    pub colors: Vec<(String, String)>,
    pub missing_marker: String,
    pub missing_policy: MissingPolicy,
}

impl Default for LoadOptions {
    fn default() -> Self {
        Self {
            label_column: "class".into(),
            id_column: None,
            drop_columns: Vec::new(),
            label_map: Vec::new(),
            colors: Vec::new(),
            missing_marker: "?".into(),
            missing_policy: MissingPolicy::DropRow,
        }
    }
}

impl LoadOptions {
    /// Layout of the UCI breast-cancer-wisconsin file with a header row:
    /// id column dropped, labels 2/4 mapped to benign (green) / malignant (red).
    pub fn wbc() -> Self {
        Self {
            label_column: "class".into(),
            id_column: Some("id".into()),
            label_map: vec![
                ("2".into(), "benign".into()),
                ("4".into(), "malignant".into()),
            ],
            colors: vec![
                ("benign".into(), "green".into()),
                ("malignant".into(), "red".into()),
            ],
            ..Self::default()
        }
    }
}

pub fn load_csv(path: impl AsRef<Path>, opts: &LoadOptions) -> Result<LabeledDataset> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let ds = read_csv(file, opts)?;
    log::info!(
        "loaded {} cases from {}: {:?}",
        ds.len(),
        path.display(),
        class_counts(&ds)
    );
    Ok(ds)
}

pub fn read_csv<R: Read>(reader: R, opts: &LoadOptions) -> Result<LabeledDataset> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let headers = match rdr.headers() {
        Ok(h) if !h.is_empty() && !(h.len() == 1 && h[0].is_empty()) => h.clone(),
        Ok(_) => return Err(Error::NoDataRows),
        Err(e) => return Err(e.into()),
    };
    let find = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::UnknownColumn(name.to_string()))
    };
    let label_col = find(&opts.label_column)?;
    let id_col = opts.id_column.as_deref().map(find).transpose()?;
    let mut excluded = vec![label_col];
    excluded.extend(id_col);
    for c in &opts.drop_columns {
        excluded.push(find(c)?);
    }
    let attr_cols: Vec<usize> = (0..headers.len())
        .filter(|c| !excluded.contains(c))
        .collect();
    let attributes: Vec<String> = attr_cols.iter().map(|&c| headers[c].to_string()).collect();

    let mut classes: Vec<ClassLabel> = opts
        .label_map
        .iter()
        .map(|(_, name)| ClassLabel::new(name.clone(), String::new()))
        .collect();
    classes.dedup_by(|a, b| a.name == b.name);

    let mut points = Vec::new();
    let mut labels = Vec::new();
    let mut rows = 0usize;
    let mut dropped = 0usize;
    for (row, record) in rdr.records().enumerate() {
        let record = record?;
        rows += 1;
        if record.iter().any(|v| v == opts.missing_marker) {
            match opts.missing_policy {
                MissingPolicy::DropRow => {
                    dropped += 1;
                    continue;
                }
            }
        }
        let mut values = Vec::with_capacity(attr_cols.len());
        for &c in &attr_cols {
            let raw = record.get(c).unwrap_or("");
            let v: f64 = raw.parse().map_err(|_| Error::NonNumeric {
                row: row + 1,
                column: headers[c].to_string(),
                value: raw.to_string(),
            })?;
            values.push(v);
        }
        let raw_label = record.get(label_col).unwrap_or("");
        let name = if opts.label_map.is_empty() {
            raw_label.to_string()
        } else {
            opts.label_map
                .iter()
                .find(|(raw, _)| raw == raw_label)
                .map(|(_, n)| n.clone())
                .ok_or_else(|| Error::UnknownClass(raw_label.to_string()))?
        };
        let label = match classes.iter().position(|c| c.name == name) {
            Some(i) => i,
            None => {
                classes.push(ClassLabel::new(name, String::new()));
                classes.len() - 1
            }
        };
        let id = id_col.and_then(|c| record.get(c)).map(str::to_string);
        points.push(NDPoint::with_id(values, id)?);
        labels.push(label);
    }
    if rows == 0 {
        return Err(Error::NoDataRows);
    }
    if dropped > 0 {
        log::info!("dropped {dropped} rows containing `{}`", opts.missing_marker);
    }
    for (i, class) in classes.iter_mut().enumerate() {
        class.color = opts
            .colors
            .iter()
            .find(|(n, _)| *n == class.name)
            .map(|(_, c)| c.clone())
            .unwrap_or_else(|| DEFAULT_PALETTE[i % DEFAULT_PALETTE.len()].to_string());
    }
    LabeledDataset::new(points, labels, classes, attributes)
}
