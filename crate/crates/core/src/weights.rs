//! Per-sample vectors that travel between agents.

use crate::encoding::{clamped_exp, code_product_for_reward};
use crate::error::{Error, Result};

/// Tolerance on the unit-sum invariant of a normalized ignorance vector.
pub const NORMALIZATION_TOLERANCE: f64 = 1e-9;

/// Normalized, nonnegative per-sample weights.
#[derive(Debug, Clone, PartialEq)]
pub struct IgnoranceVector(Vec<f64>);

impl IgnoranceVector {
    /// `1/n` everywhere.
    pub fn uniform(n: usize) -> Self {
        Self(vec![1.0 / n as f64; n])
    }

    /// Normalizes arbitrary nonnegative weights.
    pub fn from_weights(weights: Vec<f64>) -> Result<Self> {
        if let Some(v) = weights.iter().find(|v| !v.is_finite() || **v < 0.0) {
            return Err(Error::invalid(format!("ignorance weight {v} is not a finite nonnegative number")));
        }
        let total: f64 = weights.iter().sum();
        if total <= 0.0 {
            return Err(Error::invalid("ignorance weights have zero total mass"));
        }
        Ok(Self(weights.into_iter().map(|v| v / total).collect()))
    }

    /// Wraps weights that are already normalized, checking the invariant.
    pub fn from_normalized(weights: Vec<f64>) -> Result<Self> {
        if let Some(v) = weights.iter().find(|v| !v.is_finite() || **v < 0.0) {
            return Err(Error::invalid(format!("ignorance weight {v} is not a finite nonnegative number")));
        }
        let total: f64 = weights.iter().sum();
        if !weights.is_empty() && (total - 1.0).abs() > NORMALIZATION_TOLERANCE {
            return Err(Error::invalid(format!("ignorance weights sum to {total}, expected 1")));
        }
        Ok(Self(weights))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

/// Per-sample correctness of a freshly trained weak model.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct RewardVector(Vec<bool>);

impl RewardVector {
    pub fn new(correct: Vec<bool>) -> Self {
        Self(correct)
    }

    pub fn from_predictions(truth: &[usize], predicted: &[usize]) -> Self {
        Self(truth.iter().zip(predicted).map(|(a, b)| a == b).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, i: usize) -> bool {
        self.0[i]
    }

    /// Reward of sample `i` as `0.0` or `1.0`.
    pub fn value(&self, i: usize) -> f64 {
        if self.0[i] {
            1.0
        } else {
            0.0
        }
    }

    pub fn as_slice(&self) -> &[bool] {
        &self.0
    }

    pub fn all_correct(&self) -> bool {
        self.0.iter().all(|&r| r)
    }
}

/// Within-round partial scores `sum_j alpha_j * y_i^T g_j(x_i)` of the agents
/// that already acted in the current round.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreAccumulator {
    pub scores: Vec<f64>,
    pub round: u32,
}

impl ScoreAccumulator {
    pub fn zeros(n: usize, round: u32) -> Self {
        Self { scores: vec![0.0; n], round }
    }

    pub fn len(&self) -> usize {
        self.scores.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scores.is_empty()
    }

    /// Adds one agent's weighted contribution. `y^T g` depends only on
    /// whether the prediction was right, so the reward vector is enough.
    pub fn extend(&mut self, alpha: f64, reward: &RewardVector, num_classes: usize) {
        let hit = code_product_for_reward(true, num_classes);
        let miss = code_product_for_reward(false, num_classes);
        for (s, &r) in self.scores.iter_mut().zip(reward.as_slice()) {
            *s += alpha * if r { hit } else { miss };
        }
    }
}

fn check_lengths(a: usize, b: usize) -> Result<()> {
    if a != b {
        return Err(Error::invalid(format!("length mismatch: {a} weights vs {b} rewards")));
    }
    Ok(())
}

/// `sum w_i r_i / sum w_i`.
pub fn weighted_accuracy(w: &IgnoranceVector, r: &RewardVector) -> Result<f64> {
    check_lengths(w.len(), r.len())?;
    let total: f64 = w.as_slice().iter().sum();
    if total <= 0.0 {
        return Err(Error::invalid("weighted accuracy of zero total weight"));
    }
    let hit: f64 = w
        .as_slice()
        .iter()
        .zip(r.as_slice())
        .filter(|(_, &r)| r)
        .map(|(w, _)| w)
        .sum();
    Ok(hit / total)
}

/// Multiplies misclassified samples by `e^alpha` and renormalizes.
pub fn update_ignorance(w: &IgnoranceVector, r: &RewardVector, alpha: f64) -> Result<IgnoranceVector> {
    check_lengths(w.len(), r.len())?;
    if !alpha.is_finite() {
        return Err(Error::invalid(format!("alpha {alpha} is not finite")));
    }
    let miss = clamped_exp(alpha);
    let raw: Vec<f64> = w
        .as_slice()
        .iter()
        .zip(r.as_slice())
        .map(|(&w, &r)| if r { w } else { w * miss })
        .collect();
    let total: f64 = raw.iter().sum();
    if !(total > 0.0) || !total.is_finite() {
        return Err(Error::invalid("ignorance update produced zero or non-finite total mass"));
    }
    Ok(IgnoranceVector(raw.into_iter().map(|v| v / total).collect()))
}
