//! Weighted decision stumps and trees.
//!
//! Interior splits maximize the weighted Gini decrease. A split whose
//! children are leaves (the last level, and every stump) instead minimizes
//! weighted misclassification directly, which is exactly what the leaves
//! are scored on. A depth-1 tree is therefore the optimal stump.

use rand::seq::index::sample;
use rand::Rng;

use super::FeatureMatrix;
use crate::encoding::argmax;

/// Nodes lighter than this never split.
pub const MIN_LEAF_MASS: f64 = 1e-9;

const TIE_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Node {
    Leaf { class: usize },
    Split { feature: usize, threshold: f64, left: usize, right: usize },
}

/// A binary tree stored as a node arena; node 0 is the root. Rows with
/// `x[feature] <= threshold` go left.
#[derive(Debug, Clone, PartialEq)]
pub struct Tree {
    pub(crate) nodes: Vec<Node>,
}

impl Tree {
    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn predict_row(&self, row: &[f64]) -> usize {
        let mut at = 0;
        loop {
            match self.nodes[at] {
                Node::Leaf { class } => return class,
                Node::Split { feature, threshold, left, right } => {
                    at = if row[feature] <= threshold { left } else { right };
                }
            }
        }
    }

    pub fn depth(&self) -> usize {
        fn walk(nodes: &[Node], at: usize) -> usize {
            match nodes[at] {
                Node::Leaf { .. } => 0,
                Node::Split { left, right, .. } => 1 + walk(nodes, left).max(walk(nodes, right)),
            }
        }
        walk(&self.nodes, 0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Criterion {
    Gini,
    Misclassification,
}

#[derive(Debug, Clone, Copy)]
struct Split {
    feature: usize,
    threshold: f64,
    /// Lower is better.
    cost: f64,
}

/// Where features for each split come from.
pub(crate) enum FeaturePool<'a, R: Rng> {
    All,
    Subsample { per_split: usize, rng: &'a mut R },
}

pub(crate) struct Grower<'a, R: Rng> {
    x: &'a FeatureMatrix,
    labels: &'a [usize],
    weights: &'a [f64],
    num_classes: usize,
    pool: FeaturePool<'a, R>,
    nodes: Vec<Node>,
}

impl<'a, R: Rng> Grower<'a, R> {
    pub(crate) fn new(
        x: &'a FeatureMatrix,
        labels: &'a [usize],
        weights: &'a [f64],
        num_classes: usize,
        pool: FeaturePool<'a, R>,
    ) -> Self {
        Self { x, labels, weights, num_classes, pool, nodes: Vec::new() }
    }

    pub(crate) fn grow(mut self, rows: Vec<usize>, depth: usize) -> Tree {
        self.grow_node(rows, depth);
        Tree { nodes: self.nodes }
    }

    fn class_masses(&self, rows: &[usize]) -> Vec<f64> {
        let mut m = vec![0.0; self.num_classes];
        for &r in rows {
            m[self.labels[r]] += self.weights[r];
        }
        m
    }

    fn features(&mut self) -> Vec<usize> {
        let p = self.x.num_cols();
        match &mut self.pool {
            FeaturePool::All => (0..p).collect(),
            FeaturePool::Subsample { per_split, rng } => {
                let mut f = sample(*rng, p, (*per_split).min(p)).into_vec();
                f.sort_unstable();
                f
            }
        }
    }

    fn grow_node(&mut self, rows: Vec<usize>, depth: usize) -> usize {
        let id = self.nodes.len();
        let masses = self.class_masses(&rows);
        let total: f64 = masses.iter().sum();
        let leaf = Node::Leaf { class: argmax(&masses) };
        self.nodes.push(leaf);

        let occupied = masses.iter().filter(|m| **m > 0.0).count();
        if depth == 0 || occupied <= 1 || total < MIN_LEAF_MASS {
            return id;
        }
        let criterion = if depth == 1 { Criterion::Misclassification } else { Criterion::Gini };
        let features = self.features();
        // Zero-gain splits are still taken: XOR-like structure only pays off
        // one level down.
        let Some(split) = self.best_split(&rows, &masses, &features, criterion) else {
            return id;
        };
        let (left_rows, right_rows): (Vec<usize>, Vec<usize>) = rows
            .into_iter()
            .partition(|&r| self.x.get(r, split.feature) <= split.threshold);
        let left = self.grow_node(left_rows, depth - 1);
        let right = self.grow_node(right_rows, depth - 1);
        self.nodes[id] = Node::Split { feature: split.feature, threshold: split.threshold, left, right };
        id
    }

    /// Scans midpoints between consecutive distinct values of every candidate
    /// feature. Ties keep the earliest (feature, threshold).
    fn best_split(&self, rows: &[usize], masses: &[f64], features: &[usize], criterion: Criterion) -> Option<Split> {
        let total: f64 = masses.iter().sum();
        let tol = TIE_TOLERANCE * total;
        let mut best: Option<Split> = None;
        let mut order = rows.to_vec();
        for &j in features {
            order.sort_by(|&a, &b| self.x.get(a, j).total_cmp(&self.x.get(b, j)).then(a.cmp(&b)));
            let mut left = vec![0.0; self.num_classes];
            let mut right = masses.to_vec();
            let mut left_mass = 0.0;
            let mut left_sq = 0.0;
            let mut right_sq: f64 = masses.iter().map(|m| m * m).sum();
            let mut left_max = 0.0f64;
            for s in 0..order.len() - 1 {
                let r = order[s];
                let c = self.labels[r];
                let v = self.weights[r];
                left_sq += (left[c] + v) * (left[c] + v) - left[c] * left[c];
                right_sq += (right[c] - v) * (right[c] - v) - right[c] * right[c];
                left[c] += v;
                right[c] -= v;
                left_mass += v;
                left_max = left_max.max(left[c]);

                let here = self.x.get(r, j);
                let next = self.x.get(order[s + 1], j);
                if here >= next {
                    continue;
                }
                let right_mass = total - left_mass;
                let cost = match criterion {
                    Criterion::Misclassification => {
                        let right_max = right.iter().copied().fold(0.0, f64::max);
                        total - left_max - right_max
                    }
                    Criterion::Gini => {
                        if left_mass < MIN_LEAF_MASS || right_mass < MIN_LEAF_MASS {
                            continue;
                        }
                        total - left_sq / left_mass - right_sq.max(0.0) / right_mass
                    }
                };
                if best.is_none_or(|b| cost < b.cost - tol) {
                    best = Some(Split { feature: j, threshold: 0.5 * (here + next), cost });
                }
            }
        }
        best
    }
}

pub(crate) fn fit_tree_rows<R: Rng>(
    x: &FeatureMatrix,
    labels: &[usize],
    weights: &[f64],
    num_classes: usize,
    depth: usize,
    rows: Vec<usize>,
    pool: FeaturePool<'_, R>,
) -> Tree {
    Grower::new(x, labels, weights, num_classes, pool).grow(rows, depth)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand_chacha::ChaCha8Rng;

    fn fit(x: &[Vec<f64>], labels: &[usize], w: &[f64], k: usize, depth: usize) -> Tree {
        let x = FeatureMatrix::from_rows(x).unwrap();
        fit_tree_rows::<ChaCha8Rng>(&x, labels, w, k, depth, (0..labels.len()).collect(), FeaturePool::All)
    }

    #[test]
    fn separable_stump() {
        let t = fit(&[vec![0.0], vec![1.0], vec![2.0], vec![3.0]], &[0, 0, 1, 1], &[0.25; 4], 2, 1);
        assert_eq!(t.nodes[0], Node::Split { feature: 0, threshold: 1.5, left: 1, right: 2 });
    }

    #[test]
    fn pure_node_is_a_leaf() {
        let t = fit(&[vec![0.0], vec![1.0]], &[1, 1], &[0.5; 2], 2, 3);
        assert_eq!(t.nodes, vec![Node::Leaf { class: 1 }]);
    }

    #[test]
    fn xor_needs_depth_two() {
        let x = [vec![0.0, 0.0], vec![0.0, 1.0], vec![1.0, 0.0], vec![1.0, 1.0]];
        let y = [0, 1, 1, 0];
        let t = fit(&x, &y, &[0.25; 4], 2, 2);
        for (row, &c) in x.iter().zip(&y) {
            assert_eq!(t.predict_row(row), c);
        }
    }

    #[test]
    fn constant_feature_gives_weighted_majority() {
        let t = fit(&[vec![1.0], vec![1.0], vec![1.0]], &[0, 1, 1], &[0.6, 0.2, 0.2], 2, 2);
        assert_eq!(t.nodes, vec![Node::Leaf { class: 0 }]);
    }
}
