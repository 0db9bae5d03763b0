//! Class labels and their symmetric vector code.
//!
//! A class `k` out of `K` is coded as the length-`K` vector with `1` at
//! position `k` and `-1/(K-1)` everywhere else. Every code vector sums to
//! zero, which keeps additive scores identifiable.
//!
//! Class indices are zero-based throughout the crate.

use crate::error::{Error, Result};

/// Integer class labels in `0..num_classes`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClassVector {
    labels: Vec<usize>,
    num_classes: usize,
}

impl ClassVector {
    pub fn new(labels: Vec<usize>, num_classes: usize) -> Result<Self> {
        if num_classes < 2 {
            return Err(Error::invalid(format!(
                "need at least 2 classes, got {num_classes}"
            )));
        }
        if labels.is_empty() {
            return Err(Error::invalid("label vector is empty"));
        }
        if let Some((i, &c)) = labels.iter().enumerate().find(|(_, &c)| c >= num_classes) {
            return Err(Error::invalid(format!(
                "label {c} at row {i} is outside 0..{num_classes}"
            )));
        }
        Ok(Self { labels, num_classes })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn num_classes(&self) -> usize {
        self.num_classes
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn get(&self, i: usize) -> usize {
        self.labels[i]
    }

    /// Labels of the given rows, in the given order.
    pub fn select(&self, rows: &[usize]) -> Result<Self> {
        Self::new(rows.iter().map(|&r| self.labels[r]).collect(), self.num_classes)
    }
}

/// The `n x K` coded label matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct LabelMatrix {
    data: Vec<f64>,
    num_classes: usize,
}

impl LabelMatrix {
    pub fn num_rows(&self) -> usize {
        self.data.len() / self.num_classes
    }

    pub fn num_classes(&self) -> usize {
        self.num_classes
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.num_classes..(i + 1) * self.num_classes]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks_exact(self.num_classes)
    }
}

pub fn encode_labels(classes: &ClassVector) -> LabelMatrix {
    let k = classes.num_classes();
    let mut data = Vec::with_capacity(classes.len() * k);
    for &c in classes.labels() {
        data.extend(encode_class(c, k));
    }
    LabelMatrix { data, num_classes: k }
}

/// Code vector of a single class.
pub fn encode_class(class: usize, num_classes: usize) -> Vec<f64> {
    let off = -1.0 / (num_classes as f64 - 1.0);
    (0..num_classes)
        .map(|j| if j == class { 1.0 } else { off })
        .collect()
}

/// `y^T g` for the codes of `truth` and `predicted`: `K/(K-1)` on agreement,
/// `-K/(K-1)^2` otherwise.
pub fn code_product(truth: usize, predicted: usize, num_classes: usize) -> f64 {
    let k = num_classes as f64;
    if truth == predicted {
        k / (k - 1.0)
    } else {
        -k / ((k - 1.0) * (k - 1.0))
    }
}

/// Same as [`code_product`] keyed on correctness alone.
pub fn code_product_for_reward(correct: bool, num_classes: usize) -> f64 {
    code_product(0, if correct { 0 } else { 1 }, num_classes)
}

/// Largest magnitude passed to `exp` anywhere in the crate.
pub const EXP_ARG_LIMIT: f64 = 700.0;

pub(crate) fn clamped_exp(x: f64) -> f64 {
    x.clamp(-EXP_ARG_LIMIT, EXP_ARG_LIMIT).exp()
}

/// Multiclass exponential loss `exp(-(1/K) y^T f)`.
pub fn exp_loss(y: &[f64], f: &[f64], num_classes: usize) -> f64 {
    debug_assert_eq!(y.len(), f.len());
    let dot: f64 = y.iter().zip(f).map(|(a, b)| a * b).sum();
    clamped_exp(-dot / num_classes as f64)
}

/// Index of the largest entry; ties go to the lowest index.
pub fn argmax(scores: &[f64]) -> usize {
    let mut best = 0;
    for (j, &s) in scores.iter().enumerate().skip(1) {
        if s > scores[best] {
            best = j;
        }
    }
    best
}
