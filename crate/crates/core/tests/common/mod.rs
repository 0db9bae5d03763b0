//! Independent reference computations shared by the integration tests and
//! the acceptance runner. Nothing here calls the library's weight formulas,
//! ignorance updates or label codes; those are what gets checked.
#![allow(dead_code)]

use std::path::PathBuf;

use ascii_learn::data::{generate_blobs, BlobSpec, Dataset};
use ascii_learn::learners::{fit_stump, FeatureMatrix};
use ascii_learn::protocol::{AgentState, AlphaRule, ChainOrder, Session, SessionOptions};
use ascii_learn::transport::InProcessTransport;
use ascii_learn::{compute_alpha_follow, compute_alpha_lead, ClassVector, IgnoranceVector, RewardVector, WeakModelSpec};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn repo_path(rel: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../..").join(rel)
}

pub fn blobs(n: usize, d: usize, k: usize, std: f64, seed: u64) -> Dataset {
    let spec = BlobSpec { n, d_informative: d, d_redundant: 0, num_classes: k, cluster_std: std, center_box: (-10.0, 10.0), seed };
    generate_blobs(&spec).expect("valid blob spec")
}

/// Label code written out from its definition: 1 at the class, `-1/(K-1)`
/// elsewhere.
pub fn code(class: usize, k: usize) -> Vec<f64> {
    (0..k).map(|j| if j == class { 1.0 } else { -1.0 / (k as f64 - 1.0) }).collect()
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Minimizer of a unimodal function on `[lo, hi]`.
pub fn golden_section_min(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, tol: f64) -> f64 {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = hi - inv_phi * (hi - lo);
    let mut d = lo + inv_phi * (hi - lo);
    let (mut fc, mut fd) = (f(c), f(d));
    while hi - lo > tol {
        if fc < fd {
            hi = d;
            d = c;
            fd = fc;
            c = hi - inv_phi * (hi - lo);
            fc = f(c);
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + inv_phi * (hi - lo);
            fd = f(d);
        }
    }
    (lo + hi) / 2.0
}

pub struct SammeTrace {
    pub alphas: Vec<f64>,
    /// Normalized weights after each round.
    pub weights: Vec<Vec<f64>>,
    pub predictions: Vec<usize>,
}

/// Textbook multiclass AdaBoost with stumps, written out longhand.
pub fn direct_samme(x: &FeatureMatrix, labels: &ClassVector, rounds: usize) -> SammeTrace {
    let n = labels.len();
    let k = labels.num_classes();
    let mut w = vec![1.0 / n as f64; n];
    let mut scores = vec![vec![0.0; k]; n];
    let mut trace = SammeTrace { alphas: Vec::new(), weights: Vec::new(), predictions: Vec::new() };
    for _ in 0..rounds {
        let h = fit_stump(labels, x, &IgnoranceVector::from_normalized(w.clone()).unwrap()).unwrap().predict(x);
        let total: f64 = w.iter().sum();
        let err: f64 = (0..n).filter(|&i| h[i] != labels.get(i)).map(|i| w[i]).sum::<f64>() / total;
        let alpha = ((1.0 - err) / err).ln() + (k as f64 - 1.0).ln();
        if alpha <= 0.0 {
            break;
        }
        for i in 0..n {
            scores[i][h[i]] += alpha;
            if h[i] != labels.get(i) {
                w[i] *= alpha.exp();
            }
        }
        let s: f64 = w.iter().sum();
        w.iter_mut().for_each(|v| *v /= s);
        trace.alphas.push(alpha);
        trace.weights.push(w.clone());
    }
    trace.predictions = scores
        .iter()
        .map(|row| (0..k).fold(0, |best, j| if row[j] > row[best] { j } else { best }))
        .collect();
    trace
}

pub struct ChainTrace {
    pub alphas: Vec<f64>,
    pub weights: Vec<Vec<f64>>,
    pub predictions: Vec<usize>,
}

/// The one-agent interchange session, metered over the in-process transport.
pub fn one_agent_session(ds: &Dataset, rounds: u32) -> ChainTrace {
    let agent = AgentState::from_dataset(0, ds, WeakModelSpec::Stump, 0).unwrap();
    let opts = SessionOptions { rule: AlphaRule::Chain, order: ChainOrder::Identity, max_rounds: rounds, lean_messages: false, holdout: None };
    let mut s = Session::new(vec![agent], InProcessTransport::new(1), opts).unwrap();
    let mut trace = ChainTrace { alphas: Vec::new(), weights: Vec::new(), predictions: Vec::new() };
    while let Some(rep) = s.step().unwrap() {
        if !rep.steps[0].kept {
            break;
        }
        trace.alphas.push(rep.steps[0].alpha);
        trace.weights.push(rep.closing.ignorance.as_slice().to_vec());
    }
    trace.predictions = s.predict(&[&ds.features], &ds.sample_ids).unwrap().labels().to_vec();
    trace
}

/// Largest deviation between the session and longhand SAMME, or an error
/// when they disagree structurally.
pub fn samme_reduction_gap(ds: &Dataset, rounds: usize) -> Result<f64, String> {
    let direct = direct_samme(&ds.features, &ds.labels, rounds);
    let chain = one_agent_session(ds, rounds as u32);
    if direct.alphas.len() != chain.alphas.len() {
        return Err(format!("{} vs {} rounds", chain.alphas.len(), direct.alphas.len()));
    }
    if direct.predictions != chain.predictions {
        return Err("predictions differ".into());
    }
    let mut gap: f64 = 0.0;
    for (a, b) in direct.alphas.iter().zip(&chain.alphas) {
        gap = gap.max((a - b).abs());
    }
    for (wa, wb) in direct.weights.iter().zip(&chain.weights) {
        for (a, b) in wa.iter().zip(wb) {
            gap = gap.max((a - b).abs());
        }
    }
    Ok(gap)
}

/// Every distinct prediction pattern of a depth-one stump on these rows:
/// all (feature, midpoint threshold) splits plus the no-split case, with
/// every (left class, right class) pair.
pub fn stump_patterns(x: &[Vec<f64>], k: usize) -> Vec<Vec<usize>> {
    let n = x.len();
    let p = x.first().map_or(0, Vec::len);
    let mut sides: Vec<Vec<bool>> = vec![vec![true; n]];
    for j in 0..p {
        let mut vals: Vec<f64> = x.iter().map(|r| r[j]).collect();
        vals.sort_by(f64::total_cmp);
        vals.dedup();
        for t in vals.windows(2).map(|v| (v[0] + v[1]) / 2.0) {
            sides.push(x.iter().map(|r| r[j] <= t).collect());
        }
    }
    let mut out = Vec::new();
    for side in &sides {
        for l in 0..k {
            for r in 0..k {
                out.push(side.iter().map(|&s| if s { l } else { r }).collect());
            }
        }
    }
    out.sort();
    out.dedup();
    out
}

pub fn weighted_error(w: &[f64], y: &[usize], pred: &[usize]) -> f64 {
    w.iter().zip(y).zip(pred).filter(|((_, a), b)| a != b).map(|((w, _), _)| w).sum()
}

/// `sum_i w_i exp(-(alpha/K) y_i^T g(x_i))` with codes built from scratch.
pub fn exp_objective(w: &[f64], y: &[usize], pred: &[usize], alpha: f64, k: usize) -> f64 {
    w.iter()
        .zip(y)
        .zip(pred)
        .map(|((w, &c), &g)| w * (-(alpha / k as f64) * dot(&code(c, k), &code(g, k))).exp())
        .sum()
}

fn argmin_set(values: &[f64]) -> Vec<usize> {
    let best = values.iter().copied().fold(f64::INFINITY, f64::min);
    let tol = 1e-12 * best.abs().max(1e-300);
    (0..values.len()).filter(|&i| values[i] - best <= tol).collect()
}

pub struct StumpInstance {
    pub x: Vec<Vec<f64>>,
    pub y: Vec<usize>,
    pub w: Vec<f64>,
    pub k: usize,
    pub alpha: f64,
}

/// Small instances with integer-valued features and weights so that ties
/// are exact.
pub fn stump_instance(rng: &mut ChaCha8Rng) -> StumpInstance {
    let n = rng.random_range(2..=8);
    let p = rng.random_range(1..=3);
    let k = rng.random_range(2..=3);
    let x = (0..n).map(|_| (0..p).map(|_| f64::from(rng.random_range(0..5u8))).collect()).collect();
    let y = (0..n).map(|_| rng.random_range(0..k)).collect();
    let w = (0..n).map(|_| f64::from(rng.random_range(1..=9u8))).collect();
    let alpha = rng.random_range(0.05..4.0);
    StumpInstance { x, y, w, k, alpha }
}

/// Checks that the two argmin sets over the stump class coincide.
pub fn argmin_sets_agree(inst: &StumpInstance) -> bool {
    let patterns = stump_patterns(&inst.x, inst.k);
    let err: Vec<f64> = patterns.iter().map(|g| weighted_error(&inst.w, &inst.y, g)).collect();
    let exp: Vec<f64> = patterns.iter().map(|g| exp_objective(&inst.w, &inst.y, g, inst.alpha, inst.k)).collect();
    argmin_set(&err) == argmin_set(&exp)
}

/// True when the library's stump attains the enumerated minimum error.
pub fn fit_stump_is_optimal(inst: &StumpInstance) -> bool {
    let fm = FeatureMatrix::from_rows(&inst.x).unwrap();
    let classes = ClassVector::new(inst.y.clone(), inst.k).unwrap();
    let w = IgnoranceVector::from_weights(inst.w.clone()).unwrap();
    let got = fit_stump(&classes, &fm, &w).unwrap().predict(&fm);
    let best = stump_patterns(&inst.x, inst.k).iter().map(|g| weighted_error(&inst.w, &inst.y, g)).fold(f64::INFINITY, f64::min);
    (weighted_error(&inst.w, &inst.y, &got) - best).abs() <= 1e-9
}

pub struct FollowInstance {
    pub w: Vec<f64>,
    pub r_prev: Vec<bool>,
    pub r_own: Vec<bool>,
    pub alpha_prev: f64,
    pub k: usize,
}

/// Random instances where the assisting agent has both right and wrong
/// samples, so the objective has an interior minimum.
pub fn follow_instance(rng: &mut ChaCha8Rng) -> FollowInstance {
    loop {
        let n = rng.random_range(4..=60);
        let k = rng.random_range(2..=10);
        let raw: Vec<f64> = (0..n).map(|_| rng.random_range(0.01..1.0)).collect();
        let s: f64 = raw.iter().sum();
        let w = raw.iter().map(|v| v / s).collect();
        let r_prev = (0..n).map(|_| rng.random_bool(0.6)).collect();
        let r_own: Vec<bool> = (0..n).map(|_| rng.random_bool(0.6)).collect();
        if r_own.iter().all(|&r| r) || r_own.iter().all(|&r| !r) {
            continue;
        }
        let alpha_prev = rng.random_range(-1.0..3.0);
        return FollowInstance { w, r_prev, r_own, alpha_prev, k };
    }
}

/// The stagewise objective for the assisting agent's weight, on the
/// ignorance it received, with the lead's contribution held fixed.
pub fn follow_objective(inst: &FollowInstance, alpha: f64) -> f64 {
    let k = inst.k;
    let (y, wrong) = (code(0, k), code(1, k));
    let yg = |right: bool| dot(&y, if right { &y } else { &wrong });
    inst.w
        .iter()
        .zip(&inst.r_prev)
        .zip(&inst.r_own)
        .map(|((w, &a), &b)| w * (-(inst.alpha_prev * yg(a) + alpha * yg(b)) / k as f64).exp())
        .sum()
}

/// The library's weights drop the positive constant `(K-1)^2/K` of the exact
/// stagewise minimizer (the usual multiclass boosting convention), so the
/// numeric argmin is compared after multiplying by `K/(K-1)^2`.
pub fn weight_scale(k: usize) -> f64 {
    let k = k as f64;
    k / ((k - 1.0) * (k - 1.0))
}

pub struct FollowCheck {
    pub closed: f64,
    pub numeric: f64,
}

pub fn check_follow(inst: &FollowInstance) -> FollowCheck {
    let w = IgnoranceVector::from_normalized(inst.w.clone()).unwrap();
    let closed = compute_alpha_follow(
        &w,
        &RewardVector::new(inst.r_prev.clone()),
        &RewardVector::new(inst.r_own.clone()),
        inst.alpha_prev,
        inst.k,
    )
    .unwrap();
    let argmin = golden_section_min(|a| follow_objective(inst, a), -200.0, 200.0, 1e-11);
    FollowCheck { closed, numeric: argmin * weight_scale(inst.k) }
}

/// The same oracle applied to the lead weight: the objective with no
/// predecessor contribution.
pub fn check_lead(inst: &FollowInstance) -> FollowCheck {
    let lead = FollowInstance { w: inst.w.clone(), r_prev: inst.r_prev.clone(), r_own: inst.r_own.clone(), alpha_prev: 0.0, k: inst.k };
    let r_bar: f64 = lead.w.iter().zip(&lead.r_own).filter(|(_, &r)| r).map(|(w, _)| w).sum();
    let closed = compute_alpha_lead(r_bar, lead.k);
    let argmin = golden_section_min(|a| follow_objective(&lead, a), -200.0, 200.0, 1e-11);
    FollowCheck { closed, numeric: argmin * weight_scale(lead.k) }
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Central finite differences of `f` at `x`.
pub fn numeric_gradient(f: impl Fn(&[f64]) -> f64, x: &[f64], h: f64) -> Vec<f64> {
    let mut probe = x.to_vec();
    (0..x.len())
        .map(|i| {
            probe[i] = x[i] + h;
            let up = f(&probe);
            probe[i] = x[i] - h;
            let down = f(&probe);
            probe[i] = x[i];
            (up - down) / (2.0 * h)
        })
        .collect()
}
