use super::agent::EnsembleComponent;
use crate::encoding::{argmax, ClassVector};
use crate::error::{Error, Result};
use crate::learners::FeatureMatrix;

/// One agent's summed weighted votes `sum_t alpha_t * g_t(x)` in the label
/// code, one row of `K` scores per prediction sample.
#[derive(Debug, Clone, PartialEq)]
pub struct PartialScoreMatrix {
    pub agent: usize,
    pub num_classes: usize,
    /// Row-major `n x K`.
    pub scores: Vec<f64>,
}

impl PartialScoreMatrix {
    pub fn zeros(agent: usize, num_rows: usize, num_classes: usize) -> Self {
        Self { agent, num_classes, scores: vec![0.0; num_rows * num_classes] }
    }

    pub fn num_rows(&self) -> usize {
        self.scores.len() / self.num_classes
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.scores[i * self.num_classes..(i + 1) * self.num_classes]
    }

    /// Adds `alpha` times the coded predictions.
    pub fn add_predictions(&mut self, alpha: f64, predictions: &[usize]) {
        let k = self.num_classes;
        let off = -alpha / (k as f64 - 1.0);
        for (row, &c) in self.scores.chunks_exact_mut(k).zip(predictions) {
            for (j, s) in row.iter_mut().enumerate() {
                *s += if j == c { alpha } else { off };
            }
        }
    }

    pub fn add_component(&mut self, component: &EnsembleComponent, x: &FeatureMatrix) {
        self.add_predictions(component.alpha, &component.model.predict(x));
    }

    pub fn argmax(&self) -> Vec<usize> {
        self.scores.chunks_exact(self.num_classes).map(argmax).collect()
    }
}

/// Scores of one agent's components on its own feature slice.
pub fn partial_scores(agent: usize, components: &[EnsembleComponent], x: &FeatureMatrix, num_classes: usize) -> PartialScoreMatrix {
    let mut m = PartialScoreMatrix::zeros(agent, x.num_rows(), num_classes);
    for c in components {
        m.add_component(c, x);
    }
    m
}

/// Sums partial matrices in the given (agent) order and takes the row-wise
/// argmax, ties to the lowest class.
pub fn combine(parts: &[PartialScoreMatrix]) -> Result<Vec<usize>> {
    let first = parts.first().ok_or_else(|| Error::invalid("no partial scores to combine"))?;
    let mut total = first.scores.clone();
    for p in &parts[1..] {
        if p.num_classes != first.num_classes || p.scores.len() != total.len() {
            return Err(Error::invalid(format!(
                "agent {} scored {} rows x {} classes, agent {} scored {} x {}",
                first.agent,
                first.num_rows(),
                first.num_classes,
                p.agent,
                p.num_rows(),
                p.num_classes
            )));
        }
        for (t, s) in total.iter_mut().zip(&p.scores) {
            *t += s;
        }
    }
    Ok(total.chunks_exact(first.num_classes).map(argmax).collect())
}

/// Joint prediction. `components[m]` and `slices[m]` belong to agent `m`.
pub fn predict(components: &[&[EnsembleComponent]], slices: &[&FeatureMatrix], num_classes: usize) -> Result<ClassVector> {
    if components.len() != slices.len() {
        return Err(Error::invalid(format!(
            "{} agents hold components but {} feature slices were supplied",
            components.len(),
            slices.len()
        )));
    }
    if let Some(s) = slices.iter().find(|s| s.num_rows() != slices[0].num_rows()) {
        return Err(Error::invalid(format!(
            "feature slices disagree on the number of test rows ({} vs {})",
            s.num_rows(),
            slices[0].num_rows()
        )));
    }
    let parts: Vec<PartialScoreMatrix> = components
        .iter()
        .zip(slices)
        .enumerate()
        .map(|(a, (c, x))| partial_scores(a, c, x, num_classes))
        .collect();
    ClassVector::new(combine(&parts)?, num_classes)
}

/// Most frequent label per row across voters; ties to the lowest class.
pub fn plurality_vote(votes: &[Vec<usize>], num_classes: usize) -> Result<Vec<usize>> {
    let n = votes.first().map_or(0, Vec::len);
    if votes.iter().any(|v| v.len() != n) {
        return Err(Error::invalid("voters disagree on the number of rows"));
    }
    let mut counts = vec![0usize; num_classes];
    Ok((0..n)
        .map(|i| {
            counts.iter_mut().for_each(|c| *c = 0);
            for v in votes {
                counts[v[i]] += 1;
            }
            let best = *counts.iter().max().expect("K >= 2");
            counts.iter().position(|&c| c == best).expect("max exists")
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weighted_votes_binary() {
        let mut m = PartialScoreMatrix::zeros(0, 1, 2);
        m.add_predictions(3f64.ln(), &[0]);
        m.add_predictions(2f64.ln(), &[1]);
        assert!((m.row(0)[0] - (3f64.ln() - 2f64.ln())).abs() < 1e-15);
        assert_eq!(m.argmax(), vec![0]);
    }

    #[test]
    fn vote_ties_go_low() {
        let v = plurality_vote(&[vec![2, 1], vec![1, 1], vec![0, 2]], 3).unwrap();
        assert_eq!(v, vec![0, 1]);
    }
}
