//! Multinomial logistic regression fit by full-batch gradient descent on the
//! weighted cross-entropy.
//!
//! Features are standardized with the training mean and standard deviation;
//! the scaling is part of the fitted model. Parameters are laid out as the
//! `K x p` weight matrix (row-major) followed by `K` intercepts. Only the
//! weight matrix is L2-penalized.

use super::FeatureMatrix;
use crate::encoding::argmax;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Logistic {
    pub(crate) mean: Vec<f64>,
    pub(crate) scale: Vec<f64>,
    pub(crate) params: Vec<f64>,
    pub(crate) num_classes: usize,
}

impl Logistic {
    pub fn num_features(&self) -> usize {
        self.mean.len()
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn logits(&self, row: &[f64]) -> Vec<f64> {
        let p = self.num_features();
        let z: Vec<f64> = row
            .iter()
            .zip(&self.mean)
            .zip(&self.scale)
            .map(|((v, m), s)| (v - m) / s)
            .collect();
        logits(&self.params, &z, p, self.num_classes)
    }

    pub fn predict_row(&self, row: &[f64]) -> usize {
        argmax(&self.logits(row))
    }
}

fn logits(params: &[f64], z: &[f64], p: usize, k: usize) -> Vec<f64> {
    let mut out = vec![0.0; k];
    logits_into(params, z, p, &mut out);
    out
}

fn logits_into(params: &[f64], z: &[f64], p: usize, out: &mut [f64]) {
    let (weights, bias) = params.split_at(out.len() * p);
    for (c, o) in out.iter_mut().enumerate() {
        *o = bias[c] + weights[c * p..(c + 1) * p].iter().zip(z).map(|(a, b)| a * b).sum::<f64>();
    }
}

/// Column means and standard deviations (1 for constant columns).
pub fn standardization(x: &FeatureMatrix) -> (Vec<f64>, Vec<f64>) {
    let n = x.num_rows().max(1) as f64;
    (0..x.num_cols())
        .map(|j| {
            let mean = x.column(j).sum::<f64>() / n;
            let var = x.column(j).map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
            let sd = var.sqrt();
            (mean, if sd > 1e-12 { sd } else { 1.0 })
        })
        .unzip()
}

/// Weighted cross-entropy plus `l2/2 * ||W||^2`, and its gradient, for
/// already-standardized features. Sample weights are normalized internally.
pub fn objective(
    params: &[f64],
    z: &FeatureMatrix,
    labels: &[usize],
    weights: &[f64],
    num_classes: usize,
    l2: f64,
) -> (f64, Vec<f64>) {
    accumulate(params, z, labels, weights, num_classes, l2, true)
}

fn accumulate(
    params: &[f64],
    z: &FeatureMatrix,
    labels: &[usize],
    weights: &[f64],
    num_classes: usize,
    l2: f64,
    with_loss: bool,
) -> (f64, Vec<f64>) {
    let p = z.num_cols();
    let k = num_classes;
    let total: f64 = weights.iter().sum();
    let mut grad = vec![0.0; params.len()];
    let mut loss = 0.0;
    let mut probs = vec![0.0; k];
    let mut s = vec![0.0; k];
    for (i, (&c, &wi)) in labels.iter().zip(weights).enumerate() {
        if wi == 0.0 {
            continue;
        }
        let wi = wi / total;
        let row = z.row(i);
        logits_into(params, row, p, &mut s);
        let max = s.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mut norm = 0.0;
        for (pk, sk) in probs.iter_mut().zip(&s) {
            *pk = (sk - max).exp();
            norm += *pk;
        }
        if with_loss {
            loss += wi * (max + norm.ln() - s[c]);
        }
        for (class, pk) in probs.iter().enumerate() {
            let d = wi * (pk / norm - if class == c { 1.0 } else { 0.0 });
            for (g, x) in grad[class * p..(class + 1) * p].iter_mut().zip(row) {
                *g += d * x;
            }
            grad[k * p + class] += d;
        }
    }
    for (g, w) in grad[..k * p].iter_mut().zip(&params[..k * p]) {
        *g += l2 * w;
    }
    loss += 0.5 * l2 * params[..k * p].iter().map(|w| w * w).sum::<f64>();
    (loss, grad)
}

pub(crate) fn fit_logistic(
    x: &FeatureMatrix,
    labels: &[usize],
    weights: &[f64],
    num_classes: usize,
    learning_rate: f64,
    iterations: usize,
    l2: f64,
) -> Result<Logistic> {
    let (mean, scale) = standardization(x);
    let p = x.num_cols();
    let mut z = Vec::with_capacity(x.as_slice().len());
    for i in 0..x.num_rows() {
        z.extend(x.row(i).iter().zip(&mean).zip(&scale).map(|((v, m), s)| (v - m) / s));
    }
    let z = FeatureMatrix::new(z, x.num_rows(), p)?;
    let mut params = vec![0.0; num_classes * (p + 1)];
    for it in 0..iterations {
        let (_, grad) = accumulate(&params, &z, labels, weights, num_classes, l2, false);
        if let Some(pos) = grad.iter().position(|g| !g.is_finite()) {
            return Err(Error::Learner(format!(
                "logistic gradient entry {pos} became non-finite at iteration {it}"
            )));
        }
        for (w, g) in params.iter_mut().zip(&grad) {
            *w -= learning_rate * g;
        }
    }
    Ok(Logistic { mean, scale, params, num_classes })
}
