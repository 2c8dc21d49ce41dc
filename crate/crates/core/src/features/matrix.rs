use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use super::{Ablation, Category};
use crate::calendar::Quarter;
use crate::error::{Error, Result};

/// Instances × named dimensions, with optional binary labels.
#[derive(Clone, Debug, PartialEq)]
pub struct FeatureMatrix {
    pub quarter: Quarter,
    pub dimensions: Vec<String>,
    pub categories: Vec<Category>,
    /// One customer id per row, ascending.
    pub customers: Vec<String>,
    pub rows: Vec<Vec<f64>>,
    pub labels: Option<Vec<u8>>,
}

impl FeatureMatrix {
    /// Checks shape and finiteness. Labels, if given, must be 0 or 1.
    pub fn new(
        quarter: Quarter,
        dimensions: Vec<String>,
        categories: Vec<Category>,
        customers: Vec<String>,
        rows: Vec<Vec<f64>>,
        labels: Option<Vec<u8>>,
    ) -> Result<Self> {
        if categories.len() != dimensions.len() {
            return Err(Error::DimensionMismatch {
                expected: dimensions.len(),
                got: categories.len(),
            });
        }
        if customers.len() != rows.len() || labels.as_ref().is_some_and(|l| l.len() != rows.len()) {
            return Err(Error::DimensionMismatch {
                expected: rows.len(),
                got: customers.len(),
            });
        }
        for (i, row) in rows.iter().enumerate() {
            if row.len() != dimensions.len() {
                return Err(Error::DimensionMismatch {
                    expected: dimensions.len(),
                    got: row.len(),
                });
            }
            if let Some(j) = row.iter().position(|x| !x.is_finite()) {
                return Err(Error::Config(format!(
                    "feature `{}` of row {i} is not finite",
                    dimensions[j]
                )));
            }
        }
        if labels.as_ref().is_some_and(|l| l.iter().any(|&y| y > 1)) {
            return Err(Error::Config("labels must be 0 or 1".into()));
        }
        Ok(FeatureMatrix {
            quarter,
            dimensions,
            categories,
            customers,
            rows,
            labels,
        })
    }

    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn n_dims(&self) -> usize {
        self.dimensions.len()
    }

    pub fn column(&self, j: usize) -> impl Iterator<Item = f64> + '_ {
        self.rows.iter().map(move |r| r[j])
    }

    pub fn positives(&self) -> usize {
        self.labels
            .as_ref()
            .map_or(0, |l| l.iter().map(|&y| y as usize).sum())
    }

    /// Keeps the listed columns, in the given order.
    pub fn select_columns(&self, columns: &[usize]) -> FeatureMatrix {
        FeatureMatrix {
            quarter: self.quarter,
            dimensions: columns
                .iter()
                .map(|&j| self.dimensions[j].clone())
                .collect(),
            categories: columns.iter().map(|&j| self.categories[j]).collect(),
            customers: self.customers.clone(),
            rows: self
                .rows
                .iter()
                .map(|r| columns.iter().map(|&j| r[j]).collect())
                .collect(),
            labels: self.labels.clone(),
        }
    }

    /// Column indices belonging to an ablation's categories.
    pub fn ablation_columns(&self, ablation: Ablation) -> Vec<usize> {
        (0..self.n_dims())
            .filter(|&j| ablation.categories().contains(&self.categories[j]))
            .collect()
    }

    pub fn project(&self, ablation: Ablation) -> FeatureMatrix {
        self.select_columns(&self.ablation_columns(ablation))
    }

    /// SHA-256 over the bit patterns of one column, keyed by its name.
    pub fn column_fingerprint(&self, j: usize) -> String {
        let mut hasher = Sha256::new();
        hasher.update(self.dimensions[j].as_bytes());
        for x in self.column(j) {
            hasher.update(x.to_bits().to_le_bytes());
        }
        hex::encode(hasher.finalize())
    }

    pub fn fingerprints(&self) -> BTreeMap<String, String> {
        (0..self.n_dims())
            .map(|j| (self.dimensions[j].clone(), self.column_fingerprint(j)))
            .collect()
    }

    /// Renders the matrix as CSV: `customer_id`, every dimension, then `label`
    /// when labels are attached. Floats use the shortest exact representation.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("customer_id");
        for d in &self.dimensions {
            out.push(',');
            out.push_str(d);
        }
        if self.labels.is_some() {
            out.push_str(",label");
        }
        out.push('\n');
        for (i, row) in self.rows.iter().enumerate() {
            out.push_str(&self.customers[i]);
            for x in row {
                let _ = write!(out, ",{x}");
            }
            if let Some(labels) = &self.labels {
                let _ = write!(out, ",{}", labels[i]);
            }
            out.push('\n');
        }
        out
    }

    /// Writes `<stem>.csv` and the `<stem>.categories.json` sidecar.
    pub fn write(&self, dir: &Path, stem: &str) -> Result<(PathBuf, PathBuf)> {
        #[derive(Serialize)]
        struct Sidecar<'a> {
            quarter: String,
            categories: BTreeMap<&'a str, &'static str>,
            order: &'a [String],
        }
        let csv_path = dir.join(format!("{stem}.csv"));
        std::fs::write(&csv_path, self.to_csv()).map_err(|e| Error::io(&csv_path, e))?;
        let sidecar = Sidecar {
            quarter: self.quarter.to_string(),
            categories: self
                .dimensions
                .iter()
                .zip(&self.categories)
                .map(|(d, c)| (d.as_str(), c.code()))
                .collect(),
            order: &self.dimensions,
        };
        let json_path = dir.join(format!("{stem}.categories.json"));
        let mut text = serde_json::to_string_pretty(&sidecar)?;
        text.push('\n');
        std::fs::write(&json_path, text).map_err(|e| Error::io(&json_path, e))?;
        Ok((csv_path, json_path))
    }
}
