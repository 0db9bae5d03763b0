use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::ConfigError;
use crate::alpha::StopCriterion;
use crate::data::{BlobSpec, PartitionStrategy};
use crate::learners::WeakModelSpec;
use crate::protocol::Variant;

fn default_box() -> (f64, f64) {
    (-10.0, 10.0)
}

fn default_delimiter() -> char {
    ','
}

fn default_train_fraction() -> f64 {
    0.7
}

fn default_replications() -> usize {
    20
}

fn default_variant() -> Variant {
    Variant::Ascii
}

fn default_stop() -> StopCriterion {
    StopCriterion::AlphaThreshold
}

/// Where each replication's rows come from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "snake_case", deny_unknown_fields)]
pub enum DatasetSource {
    /// A fresh blob sample per replication, split into exact sizes.
    Blobs {
        n_train: usize,
        n_test: usize,
        d_informative: usize,
        #[serde(default)]
        d_redundant: usize,
        num_classes: usize,
        cluster_std: f64,
        #[serde(default = "default_box")]
        center_box: (f64, f64),
    },
    /// A bootstrap resample of the file per replication, split by fraction.
    Csv {
        path: PathBuf,
        label_column: String,
        #[serde(default)]
        id_column: Option<String>,
        #[serde(default = "default_delimiter")]
        delimiter: char,
        #[serde(default = "default_train_fraction")]
        train_fraction: f64,
    },
}

impl DatasetSource {
    pub fn blob_spec(&self, seed: u64) -> Option<BlobSpec> {
        match *self {
            DatasetSource::Blobs { n_train, n_test, d_informative, d_redundant, num_classes, cluster_std, center_box } => {
                Some(BlobSpec { n: n_train + n_test, d_informative, d_redundant, num_classes, cluster_std, center_box, seed })
            }
            DatasetSource::Csv { .. } => None,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum TransportKind {
    #[default]
    Inproc,
    Socket,
}

/// One experiment: data, partition, learners, protocol variant and
/// replication plan.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub name: String,
    pub dataset: DatasetSource,
    #[serde(default = "PartitionStrategy::default_even")]
    pub partition: PartitionStrategy,
    pub agents: usize,
    /// Learner for every agent unless `agent_learners` overrides it.
    pub learner: WeakModelSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub agent_learners: Option<Vec<WeakModelSpec>>,
    #[serde(default = "default_variant")]
    pub variant: Variant,
    pub max_rounds: u32,
    #[serde(default = "default_stop")]
    pub stop: StopCriterion,
    #[serde(default = "default_replications")]
    pub replications: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub transport: TransportKind,
    /// `host:port` per agent for the socket transport; ephemeral ports when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub socket_addrs: Option<Vec<String>>,
    #[serde(default)]
    pub lean_messages: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
}

impl PartitionStrategy {
    fn default_even() -> Self {
        PartitionStrategy::Even
    }
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        let cfg: Self = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Reads and validates a config file. Relative dataset paths are taken
    /// relative to the file's directory.
    pub fn load(path: impl AsRef<Path>) -> Result<Self, ConfigError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Io { path: path.to_owned(), source: e })?;
        let mut cfg: Self = serde_json::from_str(&text)?;
        let base = path.parent().unwrap_or(Path::new("."));
        if let DatasetSource::Csv { path: data, .. } = &mut cfg.dataset {
            if data.is_relative() {
                *data = base.join(&*data);
            }
        }
        if let Some(out) = cfg.output_dir.as_mut().filter(|o| o.is_relative()) {
            *out = base.join(&*out);
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn learner_for(&self, agent: usize) -> &WeakModelSpec {
        self.agent_learners.as_ref().map_or(&self.learner, |l| &l[agent])
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let fail = |m: String| Err(ConfigError::Invalid(m));
        if self.agents == 0 {
            return fail("agents must be >= 1".into());
        }
        if self.max_rounds == 0 {
            return fail("max_rounds must be >= 1".into());
        }
        if self.replications == 0 {
            return fail("replications must be >= 1".into());
        }
        self.learner.validate().map_err(|e| ConfigError::Invalid(e.to_string()))?;
        if let Some(list) = &self.agent_learners {
            if list.len() != self.agents {
                return fail(format!("agent_learners lists {} specs for {} agents", list.len(), self.agents));
            }
            for s in list {
                s.validate().map_err(|e| ConfigError::Invalid(e.to_string()))?;
            }
        }
        if let StopCriterion::Holdout { patience, fraction } = self.stop {
            if patience == 0 || !(fraction > 0.0 && fraction < 1.0) {
                return fail(format!("holdout stop needs patience >= 1 and fraction in (0, 1), got {patience}, {fraction}"));
            }
        }
        if self.lean_messages && matches!(self.variant, Variant::Ascii | Variant::AsciiRandom) {
            return fail(format!("variant {} needs the score accumulator; lean_messages drops it", self.variant.name()));
        }
        if let Some(addrs) = &self.socket_addrs {
            if addrs.len() != self.agents {
                return fail(format!("socket_addrs lists {} addresses for {} agents", addrs.len(), self.agents));
            }
        }
        match &self.dataset {
            DatasetSource::Blobs { n_train, n_test, d_informative, d_redundant, .. } => {
                if *n_train == 0 || *n_test == 0 {
                    return fail("blob n_train and n_test must be >= 1".into());
                }
                self.dataset.blob_spec(0).expect("blobs").validate().map_err(|e| ConfigError::Invalid(e.to_string()))?;
                if d_informative + d_redundant < self.agents && !matches!(self.partition, PartitionStrategy::Explicit { .. }) {
                    return fail(format!("{} columns cannot be split across {} agents", d_informative + d_redundant, self.agents));
                }
            }
            DatasetSource::Csv { path, train_fraction, .. } => {
                if !path.is_file() {
                    return fail(format!("dataset file {} does not exist", path.display()));
                }
                if !(*train_fraction > 0.0 && *train_fraction < 1.0) {
                    return fail(format!("train_fraction {train_fraction} must lie in (0, 1)"));
                }
            }
        }
        Ok(())
    }

    /// Hash of everything that defines the comparison: the config minus the
    /// variant, transport and output location. Runs of different variants on
    /// the same setup share it.
    pub fn comparison_digest(&self) -> String {
        let mut c = self.clone();
        c.variant = Variant::Ascii;
        c.transport = TransportKind::Inproc;
        c.socket_addrs = None;
        c.output_dir = None;
        if let DatasetSource::Csv { path, .. } = &mut c.dataset {
            *path = PathBuf::from(path.file_name().unwrap_or_default());
        }
        let json = serde_json::to_vec(&c).expect("config serializes");
        let h = Sha256::digest(&json);
        h[..8].iter().map(|b| format!("{b:02x}")).collect()
    }
}
