//! Library results against independent reference computations.

mod common;

use ascii_learn::learners::logistic::{objective, standardization};
use ascii_learn::learners::{fit_logistic, FeatureMatrix, ModelBody};
use ascii_learn::{ClassVector, IgnoranceVector};
use common::*;
use rand::Rng;

#[test]
fn one_agent_session_is_samme() {
    let ds = blobs(500, 4, 3, 2.5, 11);
    let gap = samme_reduction_gap(&ds, 10).unwrap();
    assert!(gap <= 1e-12, "gap {gap:e}");
}

#[test]
fn samme_reduction_holds_across_seeds() {
    for seed in 0..5 {
        let ds = blobs(200, 3, 4, 3.0, 100 + seed);
        let gap = samme_reduction_gap(&ds, 8).unwrap();
        assert!(gap <= 1e-12, "seed {seed}: gap {gap:e}");
    }
}

#[test]
fn error_and_exponential_loss_share_minimizers() {
    let mut rng = rng(1);
    for i in 0..200 {
        let inst = stump_instance(&mut rng);
        assert!(argmin_sets_agree(&inst), "instance {i}");
    }
}

#[test]
fn fitted_stump_attains_enumerated_minimum() {
    let mut rng = rng(2);
    for i in 0..300 {
        let inst = stump_instance(&mut rng);
        assert!(fit_stump_is_optimal(&inst), "instance {i}");
    }
}

#[test]
fn follow_weight_minimizes_stagewise_objective() {
    let mut rng = rng(3);
    for i in 0..100 {
        let inst = follow_instance(&mut rng);
        let c = check_follow(&inst);
        assert!((c.closed - c.numeric).abs() <= 1e-4, "instance {i}: closed {} numeric {}", c.closed, c.numeric);
    }
}

#[test]
fn lead_weight_minimizes_stagewise_objective() {
    let mut rng = rng(4);
    for i in 0..100 {
        let inst = follow_instance(&mut rng);
        let c = check_lead(&inst);
        assert!((c.closed - c.numeric).abs() <= 1e-4, "instance {i}: closed {} numeric {}", c.closed, c.numeric);
    }
}

#[test]
fn golden_section_finds_a_parabola_vertex() {
    let x = golden_section_min(|a| (a - 1.234).powi(2) + 3.0, -50.0, 50.0, 1e-10);
    assert!((x - 1.234).abs() < 1e-6);
}

#[test]
fn logistic_gradient_matches_finite_differences() {
    let mut rng = rng(5);
    for trial in 0..5 {
        let k = rng.random_range(2..=4);
        let ds = blobs(60, 3, k, 2.0, 40 + trial);
        let (mean, sd) = standardization(&ds.features);
        let n = ds.len();
        let p = ds.num_features();
        let z: Vec<f64> = (0..n).flat_map(|i| (0..p).map(|j| (ds.features.get(i, j) - mean[j]) / sd[j]).collect::<Vec<_>>()).collect();
        let z = FeatureMatrix::new(z, n, p).unwrap();
        let w: Vec<f64> = (0..n).map(|_| rng.random_range(0.1..2.0)).collect();
        let classes = ClassVector::new(ds.labels.labels().to_vec(), k).unwrap();
        let zero = fit_logistic(&classes, &ds.features, &IgnoranceVector::uniform(n), 0.1, 0, 0.0).unwrap();
        let ModelBody::Logistic(m) = zero.body() else { panic!("logistic body") };
        let params: Vec<f64> = (0..m.params().len()).map(|_| rng.random_range(-0.5..0.5)).collect();
        let l2 = if trial % 2 == 0 { 0.0 } else { 0.3 };
        let (_, grad) = objective(&params, &z, ds.labels.labels(), &w, k, l2);
        let numeric = numeric_gradient(|q| objective(q, &z, ds.labels.labels(), &w, k, l2).0, &params, 1e-6);
        for (a, b) in grad.iter().zip(&numeric) {
            assert!((a - b).abs() <= 1e-6 * (1.0 + b.abs()), "trial {trial}: analytic {a} numeric {b}");
        }
    }
}
