//! Acceptance suite. Prints one PASS or FAIL line per criterion and exits
//! non-zero if any fails.

mod common;

use std::fs;
use std::time::{Duration, Instant};

use ascii_learn::harness::{run_arm, Arm, ExperimentConfig, ExperimentOutcome, RunOptions, TransportKind};
use ascii_learn::learners::logistic::{objective, standardization};
use ascii_learn::learners::{fit_logistic, FeatureMatrix, ModelBody};
use ascii_learn::protocol::{predict, EnsembleComponent, Variant};
use ascii_learn::transport::{deserialize, serialize, Message, RoundMessage};
use ascii_learn::{
    compute_alpha_lead, encode_labels, update_ignorance, wst, ClassVector, IgnoranceVector, RewardVector,
    ScoreAccumulator, WeakModelSpec,
};
use common::*;
use rand::Rng;

type Outcome = Result<String, String>;

fn config(name: &str) -> ExperimentConfig {
    ExperimentConfig::load(repo_path(&format!("configs/{name}.json"))).expect("committed config loads")
}

fn run(cfg: &ExperimentConfig, arm: Arm) -> Result<ExperimentOutcome, String> {
    let out = run_arm(cfg, arm, &RunOptions::default()).map_err(|e| format!("{}: {e}", arm.name()))?;
    if let Some(f) = out.failures.first() {
        return Err(format!("{} replication {} failed: {}", arm.name(), f.replication, f.message));
    }
    Ok(out)
}

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn samme_reduction() -> Outcome {
    let ds = blobs(500, 4, 3, 2.5, 11);
    let direct = direct_samme(&ds.features, &ds.labels, 10);
    let gap = samme_reduction_gap(&ds, 10)?;
    check(
        gap <= 1e-12 && direct.alphas.len() == 10,
        format!("{} rounds, largest alpha/weight deviation {gap:.1e} (limit 1e-12), predictions identical", direct.alphas.len()),
    )
}

fn error_and_exp_loss_argmins() -> Outcome {
    let mut rng = rng(1);
    let bad = (0..200).filter(|_| !argmin_sets_agree(&stump_instance(&mut rng))).count();
    check(bad == 0, format!("{} of 200 instances with equal argmin sets", 200 - bad))
}

fn follow_weight_oracle() -> Outcome {
    let mut rng = rng(3);
    let worst = (0..100).map(|_| check_follow(&follow_instance(&mut rng))).map(|c| (c.closed - c.numeric).abs()).fold(0.0, f64::max);
    check(worst <= 1e-4, format!("largest |closed form - K/(K-1)^2 x golden-section argmin| {worst:.2e} over 100 instances (limit 1e-4)"))
}

fn four_agent_blobs() -> Outcome {
    let cfg = config("blobs-four-agents");
    let ascii = run(&cfg, Arm::Variant(Variant::Ascii))?;
    let single = run(&cfg, Arm::Single)?;
    let oracle = run(&cfg, Arm::Oracle)?;
    let (a, s, o) = (ascii.summary.final_test_accuracy, single.summary.final_test_accuracy, oracle.summary.final_test_accuracy);
    let max_se = [&ascii, &single, &oracle]
        .iter()
        .flat_map(|r| r.summary.rounds.iter().map(|x| x.se_test_accuracy))
        .fold(0.0, f64::max);
    check(
        a >= s + 0.05 && a >= o - 0.05 && max_se <= 0.04,
        format!("ascii {a:.4}, single {s:.4}, oracle {o:.4}; need ascii >= single + 0.05 and >= oracle - 0.05; largest se {max_se:.4} (limit 0.04)"),
    )
}

fn wine_two_agents() -> Outcome {
    let cfg = config("wine-two-agents");
    let a = run(&cfg, Arm::Variant(Variant::Ascii))?.summary.final_test_accuracy;
    let s = run(&cfg, Arm::Single)?.summary.final_test_accuracy;
    check(a >= s, format!("ascii {a:.4} vs single {s:.4} over {} bootstrap replications", cfg.replications))
}

fn transmission_cost() -> Outcome {
    let cfg = config("blobs-cost");
    let ascii = run(&cfg, Arm::Variant(Variant::Ascii))?;
    let oracle = run(&cfg, Arm::Oracle)?;
    let target = 0.9 * oracle.summary.final_test_accuracy;
    let Some(hit) = ascii.summary.rounds.iter().find(|r| r.mean_test_accuracy >= target) else {
        return Err(format!("ascii never reaches 90% of oracle accuracy ({target:.4})"));
    };
    let t = hit.round as usize;
    // Exact ledger bytes; a replication that stopped earlier keeps its total.
    let bytes = ascii
        .replications
        .iter()
        .map(|r| r.cost.bytes_by_round.get(t - 1).or(r.cost.bytes_by_round.last()).copied().unwrap_or(0))
        .max()
        .unwrap_or(0);
    let baseline = ascii.replications[0].cost.baseline_bytes;
    check(
        (bytes as f64) < baseline as f64 / 5.0,
        format!(
            "round {t} reaches {:.4} >= 0.9 x oracle {:.4}; protocol bytes {bytes} vs raw transfer {baseline} ({:.1}x less, need > 5x)",
            hit.mean_test_accuracy,
            oracle.summary.final_test_accuracy,
            baseline as f64 / bytes as f64
        ),
    )
}

fn variants() -> Outcome {
    let cfg = config("blobs-variants");
    let ascii = run(&cfg, Arm::Variant(Variant::Ascii))?;
    let simple = run(&cfg, Arm::Variant(Variant::AsciiSimple))?;
    let ea = run(&cfg, Arm::Variant(Variant::EnsembleAdaboost))?;
    let wins = ascii
        .replications
        .iter()
        .zip(&ea.replications)
        .filter(|(a, e)| a.final_test_accuracy() >= e.final_test_accuracy())
        .count();
    let (a, s) = (ascii.summary.final_test_accuracy, simple.summary.final_test_accuracy);
    check(
        wins >= 15 && a >= s,
        format!(
            "ascii >= ensemble adaboost in {wins}/{} replications (need 15); means ascii {a:.4}, ascii_simple {s:.4}, ensemble adaboost {:.4}",
            ascii.replications.len(),
            ea.summary.final_test_accuracy
        ),
    )
}

fn transport_equivalence() -> Outcome {
    let mut cfg = config("wine-two-agents");
    cfg.replications = 1;
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut files = Vec::new();
    let mut ledgers = Vec::new();
    for t in [TransportKind::Inproc, TransportKind::Socket] {
        let out = dir.path().join(format!("{t:?}"));
        let o = run_arm(&cfg, Arm::Variant(Variant::Ascii), &RunOptions { out_dir: Some(out.clone()), transport: Some(t), ..Default::default() })
            .map_err(|e| e.to_string())?;
        if !o.failures.is_empty() {
            return Err(format!("{t:?}: {}", o.failures[0].message));
        }
        files.push(fs::read(out.join("metrics-ascii.csv")).map_err(|e| e.to_string())?);
        ledgers.push(o.replications[0].ledger.clone());
    }
    check(
        files[0] == files[1] && ledgers[0].total() == ledgers[1].total() && ledgers[0] == ledgers[1],
        format!("metrics csv {} bytes, identical: {}; ledger totals {} and {}", files[0].len(), files[0] == files[1], ledgers[0].total(), ledgers[1].total()),
    )
}

fn random_round_message(rng: &mut rand_chacha::ChaCha8Rng) -> RoundMessage {
    let n = rng.random_range(1..60);
    let w: Vec<f64> = (0..n).map(|_| rng.random_range(1e-6..5.0)).collect();
    let round = rng.random();
    RoundMessage {
        round,
        sender: rng.random(),
        alpha: rng.random_range(-20.0..20.0),
        terminal: rng.random(),
        ignorance: IgnoranceVector::from_weights(w).unwrap(),
        reward: RewardVector::new((0..n).map(|_| rng.random()).collect()),
        accumulator: rng.random_bool(0.5).then(|| ScoreAccumulator { scores: (0..n).map(|_| rng.random_range(-1e3..1e3)).collect(), round }),
    }
}

fn invariants() -> Outcome {
    let mut failures: Vec<String> = Vec::new();
    let mut fail = |what: &str| failures.push(what.to_string());
    let mut rng = rng(9);

    for k in 2..=10usize {
        let kf = k as f64;
        let y = encode_labels(&ClassVector::new((0..k).collect(), k).unwrap());
        for (c, row) in y.rows().enumerate() {
            let geometry = row == code(c, k).as_slice()
                && row.iter().sum::<f64>().abs() < 1e-12
                && (dot(row, row) - kf / (kf - 1.0)).abs() < 1e-12;
            let products = (0..k).all(|g| {
                let e = if g == c { kf / (kf - 1.0) } else { -kf / ((kf - 1.0) * (kf - 1.0)) };
                (dot(row, &code(g, k)) - e).abs() < 1e-12
            });
            if !(geometry && products) {
                fail("label code geometry");
            }
        }
        if compute_alpha_lead(1.0 / kf, k).abs() > 1e-12 {
            fail("lead weight at chance");
        }
        for i in 1..400 {
            let r = f64::from(i) / 400.0;
            if (r - 1.0 / kf).abs() > 1e-12 && (compute_alpha_lead(r, k) > 0.0) != (r > 1.0 / kf) {
                fail("lead weight sign");
            }
        }
    }

    for _ in 0..2000 {
        let n = rng.random_range(1..200);
        let w = IgnoranceVector::from_weights((0..n).map(|_| rng.random_range(1e-6..10.0)).collect()).unwrap();
        let r = RewardVector::new((0..n).map(|_| rng.random()).collect());
        let out = update_ignorance(&w, &r, rng.random_range(-30.0..30.0)).unwrap();
        let s: f64 = out.as_slice().iter().sum();
        if (s - 1.0).abs() > 1e-9 || out.as_slice().iter().any(|&v| v < 0.0) {
            fail("ignorance normalization");
        }
    }

    for _ in 0..500 {
        if !fit_stump_is_optimal(&stump_instance(&mut rng)) {
            fail("stump optimality");
        }
    }

    for trial in 0..4u64 {
        let k = 2 + trial as usize % 3;
        let ds = blobs(60, 3, k, 2.0, 40 + trial);
        let (mean, sd) = standardization(&ds.features);
        let (n, p) = (ds.len(), ds.num_features());
        let z: Vec<f64> = (0..n).flat_map(|i| (0..p).map(|j| (ds.features.get(i, j) - mean[j]) / sd[j]).collect::<Vec<_>>()).collect();
        let z = FeatureMatrix::new(z, n, p).unwrap();
        let w: Vec<f64> = (0..n).map(|_| rng.random_range(0.1..2.0)).collect();
        let zero = fit_logistic(&ds.labels, &ds.features, &IgnoranceVector::uniform(n), 0.1, 0, 0.0).unwrap();
        let ModelBody::Logistic(m) = zero.body() else { unreachable!() };
        let params: Vec<f64> = (0..m.params().len()).map(|_| rng.random_range(-0.5..0.5)).collect();
        let l2 = 0.2 * trial as f64;
        let (_, grad) = objective(&params, &z, ds.labels.labels(), &w, k, l2);
        let numeric = numeric_gradient(|q| objective(q, &z, ds.labels.labels(), &w, k, l2).0, &params, 1e-6);
        if grad.iter().zip(&numeric).any(|(a, b)| (a - b).abs() > 1e-6 * (1.0 + b.abs())) {
            fail("logistic gradient");
        }
    }

    for _ in 0..500 {
        let msg = random_round_message(&mut rng);
        let frame = serialize(&Message::Round(msg.clone())).unwrap();
        if frame.len() != RoundMessage::frame_len(msg.len(), msg.accumulator.is_some()) {
            fail("frame length law");
        }
        match deserialize(&frame) {
            Ok(Message::Round(back)) if back == msg => {}
            _ => fail("round message round trip"),
        }
        let mut bent = frame.clone();
        let i = rng.random_range(0..bent.len());
        bent[i] ^= rng.random_range(1..=255u8);
        if let Ok(m) = deserialize(&bent) {
            if serialize(&m).unwrap() != bent {
                fail("mutated frame accepted non-canonically");
            }
        }
        if deserialize(&frame[..rng.random_range(0..frame.len())]).is_ok() {
            fail("truncated frame accepted");
        }
    }
    for _ in 0..2000 {
        let bytes: Vec<u8> = (0..rng.random_range(0..120)).map(|_| rng.random()).collect();
        if let Ok(m) = deserialize(&bytes) {
            if serialize(&m).unwrap() != bytes {
                fail("random bytes accepted non-canonically");
            }
        }
    }

    let ds = blobs(120, 3, 3, 3.0, 2);
    let mut w = IgnoranceVector::uniform(ds.len());
    let mut comps = Vec::new();
    for t in 1..=5u32 {
        let (model, r) = wst(&ds.labels, &ds.features, &w, &WeakModelSpec::Stump, 0).unwrap();
        let alpha = rng.random_range(0.1..2.0);
        w = update_ignorance(&w, &r, alpha).unwrap();
        comps.push(EnsembleComponent { round: t, agent: 0, alpha, model });
    }
    let base = predict(&[&comps], &[&ds.features], 3).unwrap();
    for c in [1e-3, 0.5, 7.0, 1e3] {
        let scaled: Vec<_> = comps.iter().cloned().map(|mut e| { e.alpha *= c; e }).collect();
        if predict(&[&scaled], &[&ds.features], 3).unwrap() != base {
            fail("prediction under alpha rescaling");
        }
    }

    failures.sort();
    failures.dedup();
    check(
        failures.is_empty(),
        if failures.is_empty() {
            "codes, normalization, weight sign, stump optimality, logistic gradient, wire fuzz and rescaling all hold".into()
        } else {
            format!("violated: {}", failures.join(", "))
        },
    )
}

fn main() {
    let criteria: [(&str, Duration, fn() -> Outcome); 9] = [
        ("one-agent run reduces to SAMME", Duration::from_secs(5), samme_reduction),
        ("weighted error and exponential loss share minimizers", Duration::from_secs(10), error_and_exp_loss_argmins),
        ("closed-form follow weight vs golden-section search", Duration::from_secs(5), follow_weight_oracle),
        ("four-agent blobs beat single agent, near oracle", Duration::from_secs(300), four_agent_blobs),
        ("two-agent wine beats single agent", Duration::from_secs(180), wine_two_agents),
        ("transmission cost below a fifth of raw transfer", Duration::from_secs(300), transmission_cost),
        ("ascii vs variants on five-agent blobs", Duration::from_secs(300), variants),
        ("socket and in-process transports agree", Duration::from_secs(60), transport_equivalence),
        ("invariant suite", Duration::from_secs(60), invariants),
    ];
    let filter: Vec<usize> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let mut failed = 0;
    for (i, (name, limit, f)) in criteria.iter().enumerate() {
        let n = i + 1;
        if !filter.is_empty() && !filter.contains(&n) {
            continue;
        }
        let started = Instant::now();
        let result = f();
        let took = started.elapsed();
        let (pass, detail) = match result {
            Ok(d) if took <= *limit => (true, d),
            Ok(d) => (false, format!("{d}; too slow")),
            Err(d) => (false, d),
        };
        failed += usize::from(!pass);
        println!(
            "{} criterion {n}: {name}: {detail} [{:.1}s, limit {}s]",
            if pass { "PASS" } else { "FAIL" },
            took.as_secs_f64(),
            limit.as_secs()
        );
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
