//! Labeled feature matrices: CSV ingestion, one-hot encoding, min-max
//! normalization, stratified folds and a synthetic generator.

mod csv_io;
mod encode;
mod folds;
mod synth;

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::FeatureSet;

pub use csv_io::{load_csv, load_csv_with, write_csv, ColumnKind, LoadOptions, Schema};
pub use encode::{normalize_minmax, one_hot_encode, OneHotEncoder};
pub use folds::{stratified_kfold, FoldPlan};
pub use synth::{synth_generate, SynthParams};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FeatureKind {
    Numeric,
    Onehot { parent: String, category: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureDescriptor {
    pub id: usize,
    pub name: String,
    pub kind: FeatureKind,
    pub train_min: f64,
    pub train_max: f64,
}

impl FeatureDescriptor {
    pub fn is_numeric(&self) -> bool {
        matches!(self.kind, FeatureKind::Numeric)
    }
}

/// A raw categorical column awaiting one-hot encoding.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CategoricalColumn {
    pub name: String,
    pub values: Vec<String>,
}

/// Immutable labeled feature matrix. Rows are samples, label 1 is anomaly.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    columns: Vec<FeatureDescriptor>,
    values: Vec<f64>,
    labels: Vec<u8>,
    categoricals: Vec<CategoricalColumn>,
    provenance: String,
    dropped_constant: Vec<String>,
}

impl Dataset {
    /// Builds a numeric-only dataset from row-major values.
    pub fn from_rows(
        names: Vec<String>,
        rows: Vec<Vec<f64>>,
        labels: Vec<u8>,
        provenance: impl Into<String>,
    ) -> Result<Self> {
        let width = names.len();
        let mut values = Vec::with_capacity(rows.len() * width);
        for (r, row) in rows.iter().enumerate() {
            if row.len() != width {
                return Err(Error::MalformedRow {
                    row: r,
                    message: format!("expected {width} values, found {}", row.len()),
                });
            }
            values.extend_from_slice(row);
        }
        let kinds = vec![FeatureKind::Numeric; width];
        Self::assemble(names, kinds, values, labels, Vec::new(), provenance.into())
    }

    pub(crate) fn assemble(
        names: Vec<String>,
        kinds: Vec<FeatureKind>,
        values: Vec<f64>,
        labels: Vec<u8>,
        categoricals: Vec<CategoricalColumn>,
        provenance: String,
    ) -> Result<Self> {
        let width = names.len();
        if kinds.len() != width {
            return Err(Error::invalid("descriptor count differs from name count"));
        }
        let n = labels.len();
        if values.len() != n * width {
            return Err(Error::invalid(format!(
                "matrix has {} cells, expected {} rows x {} columns",
                values.len(),
                n,
                width
            )));
        }
        if let Some(pos) = labels.iter().position(|&l| l > 1) {
            return Err(Error::Label(format!("row {pos} has non-binary label")));
        }
        for c in &categoricals {
            if c.values.len() != n {
                return Err(Error::invalid(format!(
                    "categorical column {} has {} values for {} rows",
                    c.name,
                    c.values.len(),
                    n
                )));
            }
        }
        let mut seen = BTreeSet::new();
        for name in names.iter().chain(categoricals.iter().map(|c| &c.name)) {
            if !seen.insert(name.as_str()) {
                return Err(Error::Schema(format!("duplicate column name {name}")));
            }
        }
        let columns = names
            .into_iter()
            .zip(kinds)
            .enumerate()
            .map(|(id, (name, kind))| {
                let (lo, hi) = column_range(&values, width, id);
                FeatureDescriptor {
                    id,
                    name,
                    kind,
                    train_min: lo,
                    train_max: hi,
                }
            })
            .collect();
        Ok(Dataset {
            columns,
            values,
            labels,
            categoricals,
            provenance,
            dropped_constant: Vec::new(),
        })
    }

    pub fn n_rows(&self) -> usize {
        self.labels.len()
    }

    pub fn n_features(&self) -> usize {
        self.columns.len()
    }

    pub fn columns(&self) -> &[FeatureDescriptor] {
        &self.columns
    }

    pub fn descriptor(&self, id: usize) -> Option<&FeatureDescriptor> {
        self.columns.get(id)
    }

    pub fn labels(&self) -> &[u8] {
        &self.labels
    }

    pub fn categoricals(&self) -> &[CategoricalColumn] {
        &self.categoricals
    }

    pub fn provenance(&self) -> &str {
        &self.provenance
    }

    /// Numeric columns removed at load time because they had zero variance.
    pub fn dropped_constant(&self) -> &[String] {
        &self.dropped_constant
    }

    pub fn value(&self, row: usize, col: usize) -> f64 {
        self.values[row * self.columns.len() + col]
    }

    pub fn row(&self, row: usize) -> &[f64] {
        let w = self.columns.len();
        &self.values[row * w..(row + 1) * w]
    }

    pub fn column(&self, col: usize) -> Vec<f64> {
        (0..self.n_rows()).map(|r| self.value(r, col)).collect()
    }

    pub fn id_of(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c.name == name)
    }

    pub fn name_of(&self, id: usize) -> Option<&str> {
        self.columns.get(id).map(|c| c.name.as_str())
    }

    pub fn names(&self, features: &FeatureSet) -> Vec<String> {
        features
            .iter()
            .map(|id| self.name_of(id).unwrap_or("?").to_string())
            .collect()
    }

    pub fn all_features(&self) -> FeatureSet {
        (0..self.n_features()).collect()
    }

    pub fn numeric_features(&self) -> FeatureSet {
        self.columns
            .iter()
            .filter(|c| c.is_numeric())
            .map(|c| c.id)
            .collect()
    }

    pub fn onehot_features(&self) -> FeatureSet {
        self.columns
            .iter()
            .filter(|c| !c.is_numeric())
            .map(|c| c.id)
            .collect()
    }

    /// Returns (normal, anomaly) counts.
    pub fn class_counts(&self) -> (usize, usize) {
        let pos = self.labels.iter().filter(|&&l| l == 1).count();
        (self.labels.len() - pos, pos)
    }

    /// Checks that every id in `features` is a column of this dataset.
    pub fn check_features(&self, features: &FeatureSet) -> Result<()> {
        match features.iter().find(|&id| id >= self.n_features()) {
            Some(id) => Err(Error::FeatureMismatch(format!(
                "feature id {id} out of range for {} columns",
                self.n_features()
            ))),
            None => Ok(()),
        }
    }

    /// Column-major copies of the requested features, in ascending id order.
    pub fn gather_columns(&self, features: &FeatureSet) -> Vec<Vec<f64>> {
        features.iter().map(|id| self.column(id)).collect()
    }

    /// New dataset holding the given rows in the given order.
    pub fn subset_rows(&self, rows: &[usize]) -> Dataset {
        let w = self.n_features();
        let mut values = Vec::with_capacity(rows.len() * w);
        for &r in rows {
            values.extend_from_slice(self.row(r));
        }
        Dataset {
            columns: self.columns.clone(),
            values,
            labels: rows.iter().map(|&r| self.labels[r]).collect(),
            categoricals: self
                .categoricals
                .iter()
                .map(|c| CategoricalColumn {
                    name: c.name.clone(),
                    values: rows.iter().map(|&r| c.values[r].clone()).collect(),
                })
                .collect(),
            provenance: self.provenance.clone(),
            dropped_constant: self.dropped_constant.clone(),
        }
    }

    /// Rows sorted lexicographically by (values, label); a canonical indexing
    /// independent of the order rows were read in.
    pub fn canonical_sort(&self) -> Dataset {
        let mut order: Vec<usize> = (0..self.n_rows()).collect();
        order.sort_by(|&a, &b| {
            self.row(a)
                .iter()
                .zip(self.row(b))
                .map(|(x, y)| x.total_cmp(y))
                .find(|o| o.is_ne())
                .unwrap_or(std::cmp::Ordering::Equal)
                .then(self.labels[a].cmp(&self.labels[b]))
        });
        self.subset_rows(&order)
    }

    pub fn with_provenance(&self, provenance: impl Into<String>) -> Dataset {
        let mut d = self.clone();
        d.provenance = provenance.into();
        d
    }

    /// Projects this dataset onto the column layout of `reference`, matching
    /// columns by name. Used to bring a test file in line with the training
    /// file after the latter dropped constant columns.
    pub fn align_to(&self, reference: &Dataset) -> Result<Dataset> {
        let ids: Vec<usize> = reference
            .columns
            .iter()
            .map(|c| {
                self.id_of(&c.name)
                    .filter(|&id| self.columns[id].kind == c.kind)
                    .ok_or_else(|| {
                        Error::Layout(format!("column {} missing or of different kind", c.name))
                    })
            })
            .collect::<Result<_>>()?;
        let categoricals = reference
            .categoricals
            .iter()
            .map(|rc| {
                self.categoricals
                    .iter()
                    .find(|c| c.name == rc.name)
                    .cloned()
                    .ok_or_else(|| Error::Layout(format!("categorical column {} missing", rc.name)))
            })
            .collect::<Result<Vec<_>>>()?;
        let w = self.n_features();
        let mut values = Vec::with_capacity(self.n_rows() * ids.len());
        for r in 0..self.n_rows() {
            let row = &self.values[r * w..(r + 1) * w];
            values.extend(ids.iter().map(|&id| row[id]));
        }
        let mut out = Dataset::assemble(
            reference.columns.iter().map(|c| c.name.clone()).collect(),
            reference.columns.iter().map(|c| c.kind.clone()).collect(),
            values,
            self.labels.clone(),
            categoricals,
            self.provenance.clone(),
        )?;
        out.dropped_constant = reference.dropped_constant.clone();
        Ok(out)
    }

    #[cfg(test)]
    pub(crate) fn raw_values(&self) -> &[f64] {
        &self.values
    }

    pub(crate) fn set_dropped_constant(&mut self, dropped: Vec<String>) {
        self.dropped_constant = dropped;
    }

    pub(crate) fn set_ranges_from(&mut self, reference: &Dataset) {
        for (c, r) in self.columns.iter_mut().zip(&reference.columns) {
            c.train_min = r.train_min;
            c.train_max = r.train_max;
        }
    }
}

fn column_range(values: &[f64], width: usize, col: usize) -> (f64, f64) {
    if width == 0 || values.is_empty() {
        return (0.0, 0.0);
    }
    values
        .iter()
        .skip(col)
        .step_by(width)
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
            (lo.min(v), hi.max(v))
        })
}
