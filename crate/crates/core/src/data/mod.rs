//! Datasets: synthetic blobs, CSV ingestion, vertical partitioning and the
//! replication splits used by the experiment harness.

mod blobs;
mod checkpoint;
mod csv_io;
mod partition;
mod split;

use std::collections::HashSet;
use std::io;

use thiserror::Error;

pub use blobs::{generate_blobs, BlobSpec};
pub use csv_io::{load_csv, write_csv, CsvOptions};
pub use partition::{partition_columns, partition_vertical, PartitionStrategy, VerticalPartition};
pub use split::{bootstrap_replications, bootstrap_resample, split_indices, split_indices_count, split_train_test};

use crate::codec::DecodeError;
use crate::encoding::ClassVector;
use crate::learners::FeatureMatrix;

#[derive(Debug, Error)]
pub enum DataError {
    #[error("row {row}: {message}")]
    Parse { row: usize, message: String },

    #[error("{0}")]
    Invalid(String),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),

    #[error("dataset file {0}")]
    Decode(#[from] DecodeError),

    #[error("i/o: {0}")]
    Io(#[from] io::Error),
}

impl From<crate::Error> for DataError {
    fn from(e: crate::Error) -> Self {
        DataError::Invalid(e.to_string())
    }
}

/// Rows of features with their labels and unique sample IDs.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub features: FeatureMatrix,
    pub labels: ClassVector,
    pub sample_ids: Vec<String>,
    /// Original label values for each class index, when known.
    pub label_names: Option<Vec<String>>,
}

impl Dataset {
    pub fn new(features: FeatureMatrix, labels: ClassVector, sample_ids: Vec<String>) -> Result<Self, DataError> {
        if features.num_rows() != labels.len() || sample_ids.len() != labels.len() {
            return Err(DataError::Invalid(format!(
                "dataset parts disagree: {} feature rows, {} labels, {} ids",
                features.num_rows(),
                labels.len(),
                sample_ids.len()
            )));
        }
        let mut seen = HashSet::with_capacity(sample_ids.len());
        if let Some(dup) = sample_ids.iter().find(|id| !seen.insert(id.as_str())) {
            return Err(DataError::Invalid(format!("duplicate sample id {dup:?}")));
        }
        Ok(Self { features, labels, sample_ids, label_names: None })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn num_features(&self) -> usize {
        self.features.num_cols()
    }

    pub fn num_classes(&self) -> usize {
        self.labels.num_classes()
    }

    /// Rows in the given order. Callers must not repeat a row.
    pub fn select_rows(&self, rows: &[usize]) -> Result<Self, DataError> {
        Ok(Self {
            features: self.features.select_rows(rows),
            labels: self.labels.select(rows)?,
            sample_ids: rows.iter().map(|&r| self.sample_ids[r].clone()).collect(),
            label_names: self.label_names.clone(),
        })
    }

    pub fn select_cols(&self, cols: &[usize]) -> Self {
        Self {
            features: self.features.select_cols(cols),
            labels: self.labels.clone(),
            sample_ids: self.sample_ids.clone(),
            label_names: self.label_names.clone(),
        }
    }

    /// Checksum of the (id, label) sequence. Vertical slices of one dataset
    /// share it.
    pub fn alignment_digest(&self) -> u64 {
        crate::transport::label_digest(&self.sample_ids, self.labels.labels())
    }
}
