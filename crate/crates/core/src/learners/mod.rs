//! Weighted weak learners and weighted supervised training (WST).
//!
//! Every learner approximately minimizes the ignorance-weighted 0/1 error
//! over its own model class: stumps exactly, trees and forests greedily,
//! logistic regression through a smooth surrogate. [`wst`] fits one and
//! reports which training samples it got right.
//!
//! Fitted models stay with the agent that trained them. The binary form from
//! [`TrainedWeakModel::to_bytes`] is for local checkpoints only.

mod forest;
pub mod logistic;
mod matrix;
pub mod tree;

use serde::{Deserialize, Serialize};

pub use forest::Forest;
pub use logistic::Logistic;
pub use matrix::FeatureMatrix;
pub use tree::{Node, Tree};

use crate::codec::{DecodeError, Reader, Writer};
use crate::encoding::ClassVector;
use crate::error::{Error, Result};
use crate::weights::{IgnoranceVector, RewardVector};
use forest::ForestParams;
use rand_chacha::ChaCha8Rng;
use tree::{fit_tree_rows, FeaturePool};

fn default_true() -> bool {
    true
}

/// Model class and hyperparameters of an agent's weak learner.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum WeakModelSpec {
    Stump,
    Tree {
        depth: usize,
    },
    Forest {
        num_trees: usize,
        depth: usize,
        #[serde(default = "default_true")]
        bootstrap: bool,
        #[serde(default = "default_true")]
        feature_subsample: bool,
    },
    Logistic {
        learning_rate: f64,
        iterations: usize,
        #[serde(default)]
        l2: f64,
    },
}

impl WeakModelSpec {
    pub fn tree(depth: usize) -> Self {
        Self::Tree { depth }
    }

    pub fn forest(num_trees: usize, depth: usize) -> Self {
        Self::Forest { num_trees, depth, bootstrap: true, feature_subsample: true }
    }

    pub fn logistic(learning_rate: f64, iterations: usize, l2: f64) -> Self {
        Self::Logistic { learning_rate, iterations, l2 }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::invalid(m.to_string()));
        match *self {
            Self::Stump => Ok(()),
            Self::Tree { depth } if depth == 0 => bad("tree depth must be >= 1"),
            Self::Forest { depth, .. } if depth == 0 => bad("forest depth must be >= 1"),
            Self::Forest { num_trees, .. } if num_trees == 0 => bad("forest needs at least one tree"),
            Self::Logistic { iterations, .. } if iterations == 0 => bad("logistic needs at least one iteration"),
            Self::Logistic { learning_rate, l2, .. }
                if !(learning_rate > 0.0 && learning_rate.is_finite()) || !(l2 >= 0.0 && l2.is_finite()) =>
            {
                bad("logistic learning rate must be positive and l2 nonnegative")
            }
            _ => Ok(()),
        }
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            Self::Stump => "stump",
            Self::Tree { .. } => "tree",
            Self::Forest { .. } => "forest",
            Self::Logistic { .. } => "logistic",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ModelBody {
    Stump(Tree),
    Tree(Tree),
    Forest(Forest),
    Logistic(Logistic),
}

/// A fitted weak model mapping a feature row to a class index.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainedWeakModel {
    num_classes: usize,
    body: ModelBody,
}

impl TrainedWeakModel {
    pub fn num_classes(&self) -> usize {
        self.num_classes
    }

    pub fn body(&self) -> &ModelBody {
        &self.body
    }

    pub fn predict_row(&self, row: &[f64]) -> usize {
        match &self.body {
            ModelBody::Stump(t) | ModelBody::Tree(t) => t.predict_row(row),
            ModelBody::Forest(f) => f.predict_row(row),
            ModelBody::Logistic(l) => l.predict_row(row),
        }
    }

    pub fn predict(&self, x: &FeatureMatrix) -> Vec<usize> {
        (0..x.num_rows()).map(|i| self.predict_row(x.row(i))).collect()
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut w = Writer::new();
        w.bytes(MODEL_MAGIC).u16(MODEL_FORMAT_VERSION);
        let kind = match &self.body {
            ModelBody::Stump(_) => 1,
            ModelBody::Tree(_) => 2,
            ModelBody::Forest(_) => 3,
            ModelBody::Logistic(_) => 4,
        };
        w.u8(kind).u32(self.num_classes as u32);
        match &self.body {
            ModelBody::Stump(t) | ModelBody::Tree(t) => write_tree(&mut w, t),
            ModelBody::Forest(f) => {
                w.u32(f.trees.len() as u32);
                for t in &f.trees {
                    write_tree(&mut w, t);
                }
            }
            ModelBody::Logistic(l) => {
                w.u32(l.mean.len() as u32).f64s(&l.mean).f64s(&l.scale).f64s(&l.params);
            }
        }
        w.finish()
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, DecodeError> {
        let mut r = Reader::new(bytes);
        if r.take(4)? != MODEL_MAGIC {
            return Err(DecodeError { offset: 0, reason: "not a weak-model blob".into() });
        }
        let version = r.u16()?;
        if version != MODEL_FORMAT_VERSION {
            return Err(DecodeError { offset: 4, reason: format!("unsupported model version {version}") });
        }
        let kind_at = r.position();
        let kind = r.u8()?;
        let num_classes = r.u32()? as usize;
        let body = match kind {
            1 => ModelBody::Stump(read_tree(&mut r, num_classes)?),
            2 => ModelBody::Tree(read_tree(&mut r, num_classes)?),
            3 => {
                let count = r.u32()? as usize;
                r.len_check(count, 5)?;
                let trees = (0..count).map(|_| read_tree(&mut r, num_classes)).collect::<Result<_, _>>()?;
                ModelBody::Forest(Forest { trees, num_classes })
            }
            4 => {
                let p = r.u32()? as usize;
                let mean = r.f64s(p)?;
                let scale = r.f64s(p)?;
                let params = r.f64s(num_classes * (p + 1))?;
                ModelBody::Logistic(Logistic { mean, scale, params, num_classes })
            }
            other => return Err(DecodeError { offset: kind_at, reason: format!("unknown model kind {other}") }),
        };
        r.expect_end()?;
        Ok(Self { num_classes, body })
    }
}

const MODEL_MAGIC: &[u8; 4] = b"AWM\0";
const MODEL_FORMAT_VERSION: u16 = 1;

fn write_tree(w: &mut Writer, t: &Tree) {
    w.u32(t.nodes.len() as u32);
    for node in &t.nodes {
        match *node {
            Node::Leaf { class } => {
                w.u8(0).u32(class as u32);
            }
            Node::Split { feature, threshold, left, right } => {
                w.u8(1).u32(feature as u32).f64(threshold).u32(left as u32).u32(right as u32);
            }
        }
    }
}

fn read_tree(r: &mut Reader<'_>, num_classes: usize) -> Result<Tree, DecodeError> {
    let count = r.u32()? as usize;
    r.len_check(count, 5)?;
    let mut nodes = Vec::with_capacity(count);
    for _ in 0..count {
        let at = r.position();
        let node = match r.u8()? {
            0 => Node::Leaf { class: r.u32()? as usize },
            1 => Node::Split {
                feature: r.u32()? as usize,
                threshold: r.f64()?,
                left: r.u32()? as usize,
                right: r.u32()? as usize,
            },
            t => return Err(DecodeError { offset: at, reason: format!("unknown node tag {t}") }),
        };
        let ok = match node {
            Node::Leaf { class } => class < num_classes,
            Node::Split { left, right, .. } => left < count && right < count,
        };
        if !ok {
            return Err(DecodeError { offset: at, reason: "node references out of range".into() });
        }
        nodes.push(node);
    }
    if nodes.is_empty() {
        return Err(r.error("empty tree"));
    }
    Ok(Tree { nodes })
}

fn check_inputs(classes: &ClassVector, x: &FeatureMatrix, w: &IgnoranceVector) -> Result<()> {
    if x.num_rows() != classes.len() || w.len() != classes.len() {
        return Err(Error::invalid(format!(
            "misaligned training data: {} labels, {} feature rows, {} weights",
            classes.len(),
            x.num_rows(),
            w.len()
        )));
    }
    Ok(())
}

fn all_rows(n: usize) -> Vec<usize> {
    (0..n).collect()
}

/// Exact weighted-0/1 stump over every (feature, midpoint threshold,
/// left class, right class). Ties go to the lowest feature, then threshold,
/// then class.
pub fn fit_stump(classes: &ClassVector, x: &FeatureMatrix, w: &IgnoranceVector) -> Result<TrainedWeakModel> {
    check_inputs(classes, x, w)?;
    let t = fit_tree_rows::<ChaCha8Rng>(
        x,
        classes.labels(),
        w.as_slice(),
        classes.num_classes(),
        1,
        all_rows(classes.len()),
        FeaturePool::All,
    );
    Ok(TrainedWeakModel { num_classes: classes.num_classes(), body: ModelBody::Stump(t) })
}

pub fn fit_tree(classes: &ClassVector, x: &FeatureMatrix, w: &IgnoranceVector, depth: usize) -> Result<TrainedWeakModel> {
    check_inputs(classes, x, w)?;
    WeakModelSpec::tree(depth).validate()?;
    let t = fit_tree_rows::<ChaCha8Rng>(
        x,
        classes.labels(),
        w.as_slice(),
        classes.num_classes(),
        depth,
        all_rows(classes.len()),
        FeaturePool::All,
    );
    Ok(TrainedWeakModel { num_classes: classes.num_classes(), body: ModelBody::Tree(t) })
}

#[allow(clippy::too_many_arguments)]
pub fn fit_forest(
    classes: &ClassVector,
    x: &FeatureMatrix,
    w: &IgnoranceVector,
    num_trees: usize,
    depth: usize,
    bootstrap: bool,
    feature_subsample: bool,
    seed: u64,
) -> Result<TrainedWeakModel> {
    check_inputs(classes, x, w)?;
    WeakModelSpec::Forest { num_trees, depth, bootstrap, feature_subsample }.validate()?;
    let params = ForestParams { num_trees, depth, bootstrap, feature_subsample };
    let f = forest::fit_forest(x, classes.labels(), w.as_slice(), classes.num_classes(), params, seed);
    Ok(TrainedWeakModel { num_classes: classes.num_classes(), body: ModelBody::Forest(f) })
}

/// `iterations == 0` returns the zero-initialized model.
pub fn fit_logistic(
    classes: &ClassVector,
    x: &FeatureMatrix,
    w: &IgnoranceVector,
    learning_rate: f64,
    iterations: usize,
    l2: f64,
) -> Result<TrainedWeakModel> {
    check_inputs(classes, x, w)?;
    let l = logistic::fit_logistic(x, classes.labels(), w.as_slice(), classes.num_classes(), learning_rate, iterations, l2)?;
    Ok(TrainedWeakModel { num_classes: classes.num_classes(), body: ModelBody::Logistic(l) })
}

/// Weighted supervised training: fit a model of the given class to the
/// ignorance-weighted data and return it with its reward vector.
pub fn wst(
    classes: &ClassVector,
    x: &FeatureMatrix,
    w: &IgnoranceVector,
    spec: &WeakModelSpec,
    seed: u64,
) -> Result<(TrainedWeakModel, RewardVector)> {
    spec.validate()?;
    let model = match *spec {
        WeakModelSpec::Stump => fit_stump(classes, x, w)?,
        WeakModelSpec::Tree { depth } => fit_tree(classes, x, w, depth)?,
        WeakModelSpec::Forest { num_trees, depth, bootstrap, feature_subsample } => {
            fit_forest(classes, x, w, num_trees, depth, bootstrap, feature_subsample, seed)?
        }
        WeakModelSpec::Logistic { learning_rate, iterations, l2 } => {
            fit_logistic(classes, x, w, learning_rate, iterations, l2)?
        }
    };
    let reward = RewardVector::from_predictions(classes.labels(), &model.predict(x));
    Ok((model, reward))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cv(v: &[usize], k: usize) -> ClassVector {
        ClassVector::new(v.to_vec(), k).unwrap()
    }

    fn col(v: &[f64]) -> FeatureMatrix {
        FeatureMatrix::new(v.to_vec(), v.len(), 1).unwrap()
    }

    fn weighted_error(m: &TrainedWeakModel, c: &ClassVector, x: &FeatureMatrix, w: &IgnoranceVector) -> f64 {
        m.predict(x)
            .iter()
            .zip(c.labels())
            .zip(w.as_slice())
            .filter(|((p, t), _)| p != t)
            .map(|(_, w)| w)
            .sum()
    }

    #[test]
    fn single_class_gives_constant_model() {
        let c = cv(&[1, 1, 1], 3);
        let x = col(&[0.0, 5.0, 9.0]);
        let (m, r) = wst(&c, &x, &IgnoranceVector::uniform(3), &WeakModelSpec::Stump, 0).unwrap();
        assert!(r.all_correct());
        assert_eq!(m.predict(&col(&[-100.0, 100.0])), vec![1, 1]);
    }

    #[test]
    fn separable_stump_is_perfect() {
        let c = cv(&[0, 0, 1, 1], 2);
        let x = col(&[0.0, 1.0, 2.0, 3.0]);
        let (m, r) = wst(&c, &x, &IgnoranceVector::uniform(4), &WeakModelSpec::Stump, 0).unwrap();
        assert!(r.all_correct());
        match m.body() {
            ModelBody::Stump(t) => match t.nodes()[0] {
                Node::Split { threshold, .. } => assert!(threshold > 1.0 && threshold < 2.0),
                _ => panic!("expected a split"),
            },
            _ => panic!("expected a stump"),
        }
    }

    #[test]
    fn skewed_weights_isolate_heavy_sample() {
        let c = cv(&[0, 1, 0], 2);
        let x = col(&[0.0, 1.0, 2.0]);
        let w = IgnoranceVector::from_weights(vec![0.1, 0.1, 0.8]).unwrap();
        let m = fit_stump(&c, &x, &w).unwrap();
        assert!(weighted_error(&m, &c, &x, &w) <= 0.1 + 1e-12);
    }

    #[test]
    fn alternating_labels_best_stump_error() {
        let c = cv(&[0, 1, 0, 1], 2);
        let x = col(&[0.0, 1.0, 2.0, 3.0]);
        let w = IgnoranceVector::uniform(4);
        let m = fit_stump(&c, &x, &w).unwrap();
        assert!((weighted_error(&m, &c, &x, &w) - 0.25).abs() < 1e-12);
    }

    #[test]
    fn duplicate_columns_pick_the_first() {
        let c = cv(&[0, 0, 1, 1], 2);
        let x = FeatureMatrix::from_rows(&[vec![0.0, 0.0], vec![1.0, 1.0], vec![2.0, 2.0], vec![3.0, 3.0]]).unwrap();
        let m = fit_stump(&c, &x, &IgnoranceVector::uniform(4)).unwrap();
        let ModelBody::Stump(t) = m.body() else { panic!() };
        assert!(matches!(t.nodes()[0], Node::Split { feature: 0, .. }));
    }

    #[test]
    fn zero_iteration_logistic_predicts_first_class() {
        let c = cv(&[0, 1, 1], 2);
        let x = col(&[0.0, 1.0, 2.0]);
        let m = fit_logistic(&c, &x, &IgnoranceVector::uniform(3), 0.1, 0, 0.0).unwrap();
        assert_eq!(m.predict(&x), vec![0, 0, 0]);
    }

    #[test]
    fn logistic_separates_a_line() {
        let c = cv(&[0, 0, 0, 1, 1, 1], 2);
        let x = col(&[-3.0, -2.0, -1.0, 1.0, 2.0, 3.0]);
        let (_, r) = wst(&c, &x, &IgnoranceVector::uniform(6), &WeakModelSpec::logistic(0.5, 300, 0.0), 0).unwrap();
        assert!(r.all_correct());
    }

    #[test]
    fn misaligned_inputs_rejected() {
        let c = cv(&[0, 1], 2);
        assert!(fit_stump(&c, &col(&[1.0]), &IgnoranceVector::uniform(2)).is_err());
        assert!(wst(&c, &col(&[1.0, 2.0]), &IgnoranceVector::uniform(2), &WeakModelSpec::tree(0), 0).is_err());
    }

    #[test]
    fn blobs_round_trip_through_bytes() {
        let c = cv(&[0, 1, 2, 1, 0, 2], 3);
        let x = FeatureMatrix::from_rows(&[
            vec![0.0, 1.0],
            vec![1.0, 0.5],
            vec![2.0, 2.0],
            vec![1.5, 0.0],
            vec![0.2, 1.2],
            vec![2.5, 2.2],
        ])
        .unwrap();
        let w = IgnoranceVector::uniform(6);
        for spec in [
            WeakModelSpec::Stump,
            WeakModelSpec::tree(3),
            WeakModelSpec::forest(4, 2),
            WeakModelSpec::logistic(0.1, 20, 0.01),
        ] {
            let (m, _) = wst(&c, &x, &w, &spec, 11).unwrap();
            let back = TrainedWeakModel::from_bytes(&m.to_bytes()).unwrap();
            assert_eq!(back, m);
        }
    }

    #[test]
    fn corrupt_model_bytes_rejected() {
        let c = cv(&[0, 1], 2);
        let m = fit_stump(&c, &col(&[0.0, 1.0]), &IgnoranceVector::uniform(2)).unwrap();
        let mut b = m.to_bytes();
        b[6] = 9;
        assert!(TrainedWeakModel::from_bytes(&b).is_err());
        let b = m.to_bytes();
        assert!(TrainedWeakModel::from_bytes(&b[..b.len() - 1]).is_err());
    }
}
