//! Config-driven experiments: replicated runs of a protocol variant or a
//! baseline, per-round metrics, summaries and merged reports.

mod config;
mod metrics;
mod report;
mod run;

use std::path::PathBuf;

use thiserror::Error;

pub use config::{DatasetSource, ExperimentConfig, TransportKind};
pub use metrics::{carried_forward, mean_and_stderr, read_metrics, write_metrics, MetricsRecord};
pub use report::{emit_report, ReportRow, ReportSummary};
pub use run::{
    replication_data, run_arm, run_baseline, run_experiment, Arm, BaselineKind, ExperimentOutcome, ReplicationData,
    ReplicationFailure, ReplicationResult, RoundSummary, RunOptions, RunSummary,
};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },

    #[error("config does not parse: {0}")]
    Parse(#[from] serde_json::Error),

    #[error("csv {}: {source}", path.display())]
    Csv { path: PathBuf, source: csv::Error },

    #[error("invalid config: {0}")]
    Invalid(String),
}
