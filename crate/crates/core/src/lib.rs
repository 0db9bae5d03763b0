//! Assisted classification across agents that hold vertical slices of the
//! same samples. Agents never exchange features or models. Each round they
//! pass per-sample ignorance scores and scalar model weights along a chain,
//! and together they build one boosted classifier.
//!
//! Start from [`protocol::Session`] for a metered run over a transport, or
//! from [`harness::run_experiment`] for config-driven experiments.

pub mod alpha;
pub mod codec;
pub mod data;
pub mod encoding;
pub mod error;
pub mod harness;
pub mod learners;
pub mod protocol;
pub mod seed;
pub mod transport;
pub mod weights;

pub use alpha::{compute_alpha_chain, compute_alpha_follow, compute_alpha_lead, should_stop, StopCriterion, StopReason};
pub use data::{Dataset, DataError};
pub use encoding::{encode_labels, exp_loss, ClassVector, LabelMatrix};
pub use error::{Error, Result};
pub use learners::{wst, FeatureMatrix, TrainedWeakModel, WeakModelSpec};
pub use protocol::{AgentState, EnsembleComponent, Session, SessionOptions, Variant};
pub use transport::{CostLedger, ProtocolError, RoundMessage};
pub use weights::{update_ignorance, weighted_accuracy, IgnoranceVector, RewardVector, ScoreAccumulator};
