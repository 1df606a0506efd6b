//! Labeled opcode-feature datasets: construction, CSV persistence,
//! consensus labeling and synthetic test data.

mod consensus;
mod csv_io;
mod extract;
pub mod oracle;
mod synth;

use std::path::PathBuf;

use thiserror::Error;

pub use consensus::{consensus_label, ScanVerdicts};
pub use csv_io::{read_dataset, read_features, write_dataset, write_features, FEATURE_COLUMNS};
pub use extract::{extract_corpus, ExtractOptions, Extracted};
pub use synth::{synth_blobs, BlobSpec};

pub const BENIGN: u8 = 0;
pub const MALWARE: u8 = 1;

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
    #[error("{path}: header does not match `id,label,op_00,...,op_ff`")]
    BadHeader { path: PathBuf },
    #[error("{path}:{line}: malformed row: {fields} fields, expected 258")]
    MalformedRow {
        path: PathBuf,
        line: u64,
        fields: usize,
    },
    #[error("{path}:{line}: column `{column}`: {message}")]
    BadCell {
        path: PathBuf,
        line: u64,
        column: String,
        message: String,
    },
    #[error(
        "dataset must have exactly {FEATURE_COLUMNS} feature columns to be written as CSV, has {0}"
    )]
    WrongWidth(usize),
    #[error("row {row}: {message}")]
    Invalid { row: usize, message: String },
    #[error("no engine verdicts for {0}; refusing to guess a label")]
    UnknownLabel(String),
    #[error("blob spec: {0}")]
    BadBlobSpec(String),
    #[error("{path}: {source}")]
    Dex {
        path: PathBuf,
        #[source]
        source: crate::dex::DexError,
    },
    #[error("two apps share the id `{0}`")]
    DuplicateId(String),
    #[error("oracle: {0}")]
    Oracle(String),
}

/// Feature matrix with per-row ids and binary labels.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Dataset {
    ids: Vec<String>,
    features: Vec<Vec<f64>>,
    labels: Vec<u8>,
}

impl Dataset {
    /// Validates equal lengths, consistent width, finite non-negative
    /// features and labels in {0, 1}.
    pub fn new(
        ids: Vec<String>,
        features: Vec<Vec<f64>>,
        labels: Vec<u8>,
    ) -> Result<Self, DatasetError> {
        if ids.len() != features.len() || ids.len() != labels.len() {
            return Err(DatasetError::Invalid {
                row: ids.len().min(features.len()).min(labels.len()),
                message: format!(
                    "length mismatch: {} ids, {} feature rows, {} labels",
                    ids.len(),
                    features.len(),
                    labels.len()
                ),
            });
        }
        let width = features.first().map_or(0, Vec::len);
        for (row, (x, &y)) in features.iter().zip(&labels).enumerate() {
            if x.len() != width {
                return Err(DatasetError::Invalid {
                    row,
                    message: format!("{} features, expected {width}", x.len()),
                });
            }
            if let Some(v) = x.iter().find(|v| !v.is_finite() || **v < 0.0) {
                return Err(DatasetError::Invalid {
                    row,
                    message: format!("feature value {v} is not a finite non-negative number"),
                });
            }
            if y > 1 {
                return Err(DatasetError::Invalid {
                    row,
                    message: format!("label {y} not in {{0, 1}}"),
                });
            }
        }
        Ok(Self {
            ids,
            features,
            labels,
        })
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn n_features(&self) -> usize {
        self.features.first().map_or(0, Vec::len)
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn features(&self) -> &[Vec<f64>] {
        &self.features
    }

    pub fn labels(&self) -> &[u8] {
        &self.labels
    }

    /// `(benign, malware)` row counts.
    pub fn class_counts(&self) -> (usize, usize) {
        let malware = self.labels.iter().filter(|&&y| y == MALWARE).count();
        (self.len() - malware, malware)
    }

    /// Rows at `indices`, in the given order.
    pub fn subset(&self, indices: &[usize]) -> Dataset {
        Dataset {
            ids: indices.iter().map(|&i| self.ids[i].clone()).collect(),
            features: indices.iter().map(|&i| self.features[i].clone()).collect(),
            labels: indices.iter().map(|&i| self.labels[i]).collect(),
        }
    }

    /// Same rows with replaced labels.
    pub fn with_labels(&self, labels: Vec<u8>) -> Result<Dataset, DatasetError> {
        Dataset::new(self.ids.clone(), self.features.clone(), labels)
    }

    pub(crate) fn push_unchecked(&mut self, id: String, features: Vec<f64>, label: u8) {
        self.ids.push(id);
        self.features.push(features);
        self.labels.push(label);
    }
}
