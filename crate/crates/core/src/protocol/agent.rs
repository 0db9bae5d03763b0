use serde::{Deserialize, Serialize};

use crate::alpha::{compute_alpha_chain, compute_alpha_follow, compute_alpha_lead};
use crate::data::Dataset;
use crate::encoding::ClassVector;
use crate::error::{Error, Result};
use crate::learners::{wst, FeatureMatrix, TrainedWeakModel, WeakModelSpec};
use crate::seed::derive_seed;
use crate::transport::RoundMessage;
use crate::weights::{update_ignorance, weighted_accuracy, IgnoranceVector, RewardVector, ScoreAccumulator};

/// One weighted weak model of the joint additive classifier.
#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleComponent {
    /// Round, starting at 1.
    pub round: u32,
    /// Zero-based index of the agent that trained the model.
    pub agent: usize,
    pub alpha: f64,
    pub model: TrainedWeakModel,
}

/// How an agent weighs its freshly trained model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AlphaRule {
    /// Stagewise optimum given the predecessors' within-round scores.
    Chain,
    /// Own weighted accuracy only, as if acting alone.
    Simple,
    /// Two-agent closed forms: lead weight first, follow weight second.
    TwoAgent,
}

/// What one agent did in one round.
#[derive(Debug, Clone, PartialEq)]
pub struct Step {
    pub agent: usize,
    pub round: u32,
    pub alpha: f64,
    pub weighted_accuracy: f64,
    /// False when the model was no better than chance and was dropped.
    pub kept: bool,
    pub outgoing: RoundMessage,
}

/// An agent's private data, learner and trained components. Features never
/// leave this struct; only [`RoundMessage`]s do.
#[derive(Debug, Clone)]
pub struct AgentState {
    pub index: usize,
    pub features: FeatureMatrix,
    pub classes: ClassVector,
    pub spec: WeakModelSpec,
    /// Base seed; each fit derives its own from (agent, round).
    pub seed: u64,
    pub components: Vec<EnsembleComponent>,
}

impl AgentState {
    pub fn new(index: usize, features: FeatureMatrix, classes: ClassVector, spec: WeakModelSpec, seed: u64) -> Result<Self> {
        if features.num_rows() != classes.len() {
            return Err(Error::invalid(format!(
                "agent {index}: {} feature rows but {} labels",
                features.num_rows(),
                classes.len()
            )));
        }
        spec.validate()?;
        Ok(Self { index, features, classes, spec, seed, components: Vec::new() })
    }

    pub fn from_dataset(index: usize, ds: &Dataset, spec: WeakModelSpec, seed: u64) -> Result<Self> {
        Self::new(index, ds.features.clone(), ds.labels.clone(), spec, seed)
    }

    pub fn num_samples(&self) -> usize {
        self.classes.len()
    }

    /// Trains on the received ignorance, weighs the model and builds the
    /// message for the next agent. A model with `alpha <= 0` is dropped: the
    /// ignorance and accumulator pass through untouched, the forwarded alpha
    /// is zero and the message is marked terminal.
    pub fn act(
        &mut self,
        incoming: &RoundMessage,
        round: u32,
        first_in_round: bool,
        rule: AlphaRule,
        lean: bool,
    ) -> Result<Step> {
        let n = self.num_samples();
        if incoming.len() != n {
            return Err(Error::invalid(format!("agent {}: message carries {} samples, expected {n}", self.index, incoming.len())));
        }
        let k = self.classes.num_classes();
        let w = &incoming.ignorance;
        let acc = if first_in_round {
            ScoreAccumulator::zeros(n, round)
        } else {
            match &incoming.accumulator {
                Some(a) => ScoreAccumulator { scores: a.scores.clone(), round },
                None if rule == AlphaRule::Chain => {
                    return Err(Error::invalid("chain weights need the score accumulator, which lean messages omit"));
                }
                None => ScoreAccumulator::zeros(n, round),
            }
        };

        let fit_seed = derive_seed(self.seed, &[self.index as u64, u64::from(round)]);
        let (model, reward) = wst(&self.classes, &self.features, w, &self.spec, fit_seed)?;
        let r_bar = weighted_accuracy(w, &reward)?;
        let alpha = match rule {
            AlphaRule::Chain => compute_alpha_chain(w, &acc, &reward, k)?,
            AlphaRule::Simple => compute_alpha_lead(r_bar, k),
            AlphaRule::TwoAgent if first_in_round => compute_alpha_lead(r_bar, k),
            AlphaRule::TwoAgent => compute_alpha_follow(w, &incoming.reward, &reward, incoming.alpha, k)?,
        };

        let kept = alpha > 0.0;
        let (ignorance, acc, sent_alpha) = if kept {
            let mut acc = acc;
            acc.extend(alpha, &reward, k);
            self.components.push(EnsembleComponent { round, agent: self.index, alpha, model });
            (update_ignorance(w, &reward, alpha)?, acc, alpha)
        } else {
            (w.clone(), acc, 0.0)
        };
        let outgoing = RoundMessage {
            round,
            sender: self.index as u32,
            alpha: sent_alpha,
            terminal: (!first_in_round && incoming.terminal) || !kept,
            ignorance,
            reward,
            accumulator: (!lean).then_some(acc),
        };
        Ok(Step { agent: self.index, round, alpha, weighted_accuracy: r_bar, kept, outgoing })
    }
}

/// Message that starts round 1: uniform ignorance, nothing accumulated.
pub fn initial_message(n: usize, lead: usize) -> RoundMessage {
    RoundMessage {
        round: 0,
        sender: lead as u32,
        alpha: 0.0,
        terminal: false,
        ignorance: IgnoranceVector::uniform(n),
        reward: RewardVector::new(vec![true; n]),
        accumulator: Some(ScoreAccumulator::zeros(n, 0)),
    }
}
