//! Closed-form model weights and stopping rules.
//!
//! All three weight formulas share one shape: `log(K-1)` plus the log-odds of
//! correctly versus incorrectly classified (reweighted) mass. Log-odds are
//! clamped as if the accuracy were confined to `[EPSILON, 1 - EPSILON]`, so a
//! perfect weak learner gets a large finite weight instead of infinity.

use crate::encoding::EXP_ARG_LIMIT;
use crate::error::{Error, Result};
use crate::weights::{IgnoranceVector, RewardVector, ScoreAccumulator};

/// Accuracy clamp applied before taking log-odds.
pub const EPSILON: f64 = 1e-10;

fn logit_bound() -> f64 {
    ((1.0 - EPSILON) / EPSILON).ln()
}

fn log_k_minus_one(num_classes: usize) -> f64 {
    (num_classes as f64 - 1.0).ln()
}

/// Combines log-masses of correct and incorrect samples into a weight.
fn alpha_from_log_masses(log_correct: f64, log_wrong: f64, num_classes: usize) -> Result<f64> {
    if log_correct == f64::NEG_INFINITY && log_wrong == f64::NEG_INFINITY {
        return Err(Error::invalid("model weight undefined: zero total mass"));
    }
    let bound = logit_bound();
    let logit = if log_wrong == f64::NEG_INFINITY {
        bound
    } else if log_correct == f64::NEG_INFINITY {
        -bound
    } else {
        (log_correct - log_wrong).clamp(-bound, bound)
    };
    Ok(logit + log_k_minus_one(num_classes))
}

fn log_sum_exp(terms: impl Iterator<Item = f64>) -> f64 {
    let terms: Vec<f64> = terms.filter(|t| *t > f64::NEG_INFINITY).collect();
    let Some(max) = terms.iter().copied().reduce(f64::max) else {
        return f64::NEG_INFINITY;
    };
    max + terms.iter().map(|t| (t - max).exp()).sum::<f64>().ln()
}

fn check_len(expected: usize, got: usize, what: &str) -> Result<()> {
    if expected != got {
        return Err(Error::invalid(format!("{what} has length {got}, expected {expected}")));
    }
    Ok(())
}

/// Weight of the first agent in a round: `log(r/(1-r)) + log(K-1)`.
pub fn compute_alpha_lead(r_bar: f64, num_classes: usize) -> f64 {
    let r = r_bar.clamp(EPSILON, 1.0 - EPSILON);
    (r / (1.0 - r)).ln() + log_k_minus_one(num_classes)
}

/// Weight of the assisting agent in a two-agent round, given the
/// predecessor's rewards and weight.
///
/// The four masses `n_{AB}`, `n_{A'B}`, `n_{AB'}`, `n_{A'B'}` split the
/// received ignorance by (predecessor correct?, own model correct?).
pub fn compute_alpha_follow(
    w: &IgnoranceVector,
    r_prev: &RewardVector,
    r_own: &RewardVector,
    alpha_prev: f64,
    num_classes: usize,
) -> Result<f64> {
    check_len(w.len(), r_prev.len(), "predecessor reward")?;
    check_len(w.len(), r_own.len(), "own reward")?;
    let (mut n_ab, mut n_nab, mut n_anb, mut n_nanb) = (0.0, 0.0, 0.0, 0.0);
    for (i, &wi) in w.as_slice().iter().enumerate() {
        match (r_prev.get(i), r_own.get(i)) {
            (true, true) => n_ab += wi,
            (false, true) => n_nab += wi,
            (true, false) => n_anb += wi,
            (false, false) => n_nanb += wi,
        }
    }
    let km1 = num_classes as f64 - 1.0;
    let up = (alpha_prev / (km1 * km1)).clamp(-EXP_ARG_LIMIT, EXP_ARG_LIMIT);
    let down = (-alpha_prev / km1).clamp(-EXP_ARG_LIMIT, EXP_ARG_LIMIT);
    let log_correct = log_sum_exp([up + n_nab.ln(), down + n_ab.ln()].into_iter());
    let log_wrong = log_sum_exp([up + n_nanb.ln(), down + n_anb.ln()].into_iter());
    alpha_from_log_masses(log_correct, log_wrong, num_classes)
}

/// Weight of any agent in a chain. Each sample's ignorance is reweighted by
/// `exp(-acc_i / K)`, the exponential loss of the predecessors' contributions
/// within this round. The positive constant `K/(K-1)^2` of the exact
/// stagewise minimizer is dropped, as it is for every other weight.
pub fn compute_alpha_chain(
    w: &IgnoranceVector,
    acc: &ScoreAccumulator,
    r_own: &RewardVector,
    num_classes: usize,
) -> Result<f64> {
    check_len(w.len(), acc.len(), "score accumulator")?;
    check_len(w.len(), r_own.len(), "own reward")?;
    let k = num_classes as f64;
    let terms = || {
        w.as_slice()
            .iter()
            .zip(&acc.scores)
            .zip(r_own.as_slice())
            .map(move |((&wi, &a), &r)| (wi.ln() - a / k, r))
    };
    let log_correct = log_sum_exp(terms().filter(|(_, r)| *r).map(|(t, _)| t));
    let log_wrong = log_sum_exp(terms().filter(|(_, r)| !*r).map(|(t, _)| t));
    alpha_from_log_masses(log_correct, log_wrong, num_classes)
}

/// Why a run should end.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StopReason {
    /// The weak model is no better than random guessing (`r <= 1/K`, `alpha <= 0`).
    NoBetterThanChance,
    /// Holdout error has not improved for this many rounds.
    HoldoutStalled(usize),
}

/// Which stopping rule drives a run.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopCriterion {
    AlphaThreshold,
    Holdout { patience: usize, fraction: f64 },
}

/// Decides whether to stop after the current round.
///
/// `holdout_history` holds one holdout error per completed round. The run
/// stops once the best error was last (strictly) improved `patience` or more
/// entries ago.
pub fn should_stop(
    r_bar: f64,
    alpha: f64,
    num_classes: usize,
    holdout_history: Option<&[f64]>,
    patience: usize,
) -> Option<StopReason> {
    if r_bar <= 1.0 / num_classes as f64 || alpha <= 0.0 {
        return Some(StopReason::NoBetterThanChance);
    }
    let history = holdout_history?;
    let stale = rounds_since_improvement(history);
    (stale >= patience.max(1)).then_some(StopReason::HoldoutStalled(stale))
}

pub(crate) fn rounds_since_improvement(history: &[f64]) -> usize {
    let mut best = f64::INFINITY;
    let mut best_at = 0;
    for (i, &e) in history.iter().enumerate() {
        if e < best {
            best = e;
            best_at = i;
        }
    }
    if history.is_empty() {
        0
    } else {
        history.len() - 1 - best_at
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rv(v: &[u8]) -> RewardVector {
        RewardVector::new(v.iter().map(|&b| b == 1).collect())
    }

    #[test]
    fn lead_examples() {
        for k in 2..=10 {
            assert!(compute_alpha_lead(1.0 / k as f64, k).abs() < 1e-12);
        }
        assert!((compute_alpha_lead(0.75, 2) - 3f64.ln()).abs() < 1e-12);
        assert!((compute_alpha_lead(0.9, 3) - 18f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn lead_clamps_perfect_and_hopeless() {
        let top = compute_alpha_lead(1.0, 2);
        assert!(top.is_finite() && top > 20.0);
        let bottom = compute_alpha_lead(0.0, 2);
        assert!(bottom.is_finite() && bottom < -20.0);
    }

    #[test]
    fn follow_without_predecessor_weight_is_own_log_odds() {
        let w = IgnoranceVector::uniform(4);
        for prev in [[1, 1, 1, 1], [0, 0, 0, 0], [1, 0, 1, 0]] {
            let a = compute_alpha_follow(&w, &rv(&prev), &rv(&[1, 1, 1, 0]), 0.0, 2).unwrap();
            assert!((a - 3f64.ln()).abs() < 1e-12);
        }
    }

    #[test]
    fn follow_balanced_case_is_zero() {
        let w = IgnoranceVector::uniform(4);
        let a = compute_alpha_follow(&w, &rv(&[1, 1, 0, 0]), &rv(&[1, 0, 1, 0]), 3f64.ln(), 2).unwrap();
        assert!(a.abs() < 1e-12);
    }

    #[test]
    fn follow_perfect_own_model_is_clamped() {
        let w = IgnoranceVector::uniform(3);
        let a = compute_alpha_follow(&w, &rv(&[1, 0, 1]), &rv(&[1, 1, 1]), 1.0, 3).unwrap();
        assert!(a.is_finite() && a > 20.0);
    }

    #[test]
    fn chain_first_agent_matches_lead() {
        let w = IgnoranceVector::from_weights(vec![0.1, 0.4, 0.2, 0.3]).unwrap();
        let r = rv(&[1, 0, 1, 1]);
        let acc = ScoreAccumulator::zeros(4, 1);
        let chain = compute_alpha_chain(&w, &acc, &r, 3).unwrap();
        let lead = compute_alpha_lead(crate::weights::weighted_accuracy(&w, &r).unwrap(), 3);
        assert!((chain - lead).abs() < 1e-12);
    }

    #[test]
    fn chain_balanced_split_is_zero() {
        let w = IgnoranceVector::uniform(2);
        let acc = ScoreAccumulator::zeros(2, 1);
        assert!(compute_alpha_chain(&w, &acc, &rv(&[1, 0]), 2).unwrap().abs() < 1e-12);
    }

    #[test]
    fn chain_survives_huge_accumulators() {
        let w = IgnoranceVector::uniform(3);
        let acc = ScoreAccumulator { scores: vec![5000.0, 4000.0, -3000.0], round: 1 };
        let a = compute_alpha_chain(&w, &acc, &rv(&[1, 0, 1]), 2).unwrap();
        assert!(a.is_finite());
    }

    #[test]
    fn stop_at_chance_level() {
        assert_eq!(should_stop(1.0 / 3.0, 0.0, 3, None, 1), Some(StopReason::NoBetterThanChance));
        let r = 1.0 / 3.0 + 0.01;
        assert_eq!(should_stop(r, compute_alpha_lead(r, 3), 3, None, 1), None);
    }

    #[test]
    fn stop_on_stalled_holdout() {
        let h = [0.30, 0.29, 0.29, 0.29];
        assert_eq!(should_stop(0.9, 1.0, 2, Some(&h[..3]), 2), None);
        assert_eq!(should_stop(0.9, 1.0, 2, Some(&h), 2), Some(StopReason::HoldoutStalled(2)));
        assert_eq!(should_stop(0.9, 1.0, 2, Some(&h), 3), None);
        let h5 = [0.30, 0.29, 0.29, 0.29, 0.29];
        assert_eq!(should_stop(0.9, 1.0, 2, Some(&h5), 3), Some(StopReason::HoldoutStalled(3)));
    }
}
