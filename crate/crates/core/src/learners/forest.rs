use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::tree::{fit_tree_rows, FeaturePool, Tree};
use super::FeatureMatrix;
use crate::seed::derive_seed;

/// Plurality vote of trees grown on weighted bootstrap resamples.
#[derive(Debug, Clone, PartialEq)]
pub struct Forest {
    pub(crate) trees: Vec<Tree>,
    pub(crate) num_classes: usize,
}

impl Forest {
    pub fn trees(&self) -> &[Tree] {
        &self.trees
    }

    pub fn predict_row(&self, row: &[f64]) -> usize {
        let mut votes = vec![0usize; self.num_classes];
        for t in &self.trees {
            votes[t.predict_row(row)] += 1;
        }
        let mut best = 0;
        for (c, &v) in votes.iter().enumerate() {
            if v > votes[best] {
                best = c;
            }
        }
        best
    }
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct ForestParams {
    pub num_trees: usize,
    pub depth: usize,
    pub bootstrap: bool,
    pub feature_subsample: bool,
}

/// Draws `n` rows with replacement, row `i` with probability proportional to
/// `weights[i]`, and returns the per-row draw counts.
pub(crate) fn weighted_bootstrap_counts<R: Rng>(weights: &[f64], rng: &mut R) -> Vec<usize> {
    let mut cumulative = Vec::with_capacity(weights.len());
    let mut acc = 0.0;
    for &w in weights {
        acc += w;
        cumulative.push(acc);
    }
    let mut counts = vec![0; weights.len()];
    for _ in 0..weights.len() {
        let u = rng.random::<f64>() * acc;
        let i = cumulative.partition_point(|&c| c <= u).min(weights.len() - 1);
        counts[i] += 1;
    }
    counts
}

pub(crate) fn fit_forest(
    x: &FeatureMatrix,
    labels: &[usize],
    weights: &[f64],
    num_classes: usize,
    params: ForestParams,
    seed: u64,
) -> Forest {
    let n = labels.len();
    let per_split = ((x.num_cols() as f64).sqrt().round() as usize).max(1);
    let trees = (0..params.num_trees)
        .map(|t| {
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, &[t as u64]));
            let (tree_weights, rows) = if params.bootstrap {
                let counts = weighted_bootstrap_counts(weights, &mut rng);
                let rows: Vec<usize> = (0..n).filter(|&i| counts[i] > 0).collect();
                let w: Vec<f64> = counts.iter().map(|&c| c as f64 / n as f64).collect();
                (w, rows)
            } else {
                (weights.to_vec(), (0..n).collect())
            };
            let pool = if params.feature_subsample {
                FeaturePool::Subsample { per_split, rng: &mut rng }
            } else {
                FeaturePool::All
            };
            fit_tree_rows(x, labels, &tree_weights, num_classes, params.depth, rows, pool)
        })
        .collect();
    Forest { trees, num_classes }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bootstrap_follows_weights() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let counts = weighted_bootstrap_counts(&[0.0, 1.0, 0.0], &mut rng);
        assert_eq!(counts, vec![0, 3, 0]);
        let w = vec![0.1; 10];
        let counts = weighted_bootstrap_counts(&w, &mut rng);
        assert_eq!(counts.iter().sum::<usize>(), 10);
    }
}
