//! Bytes on the wire versus shipping the assisting agent's raw columns.
//! Every column here past the fifth is noise, so the raw transfer is large
//! while the per-round payload only depends on the number of rows.
//!
//! cargo run --release --example transmission_cost

use ascii_learn::harness::{run_arm, Arm, DatasetSource, ExperimentConfig, RunOptions, TransportKind};
use ascii_learn::data::PartitionStrategy;
use ascii_learn::{Result, StopCriterion, Variant, WeakModelSpec};

fn main() -> Result<()> {
    let cfg = ExperimentConfig {
        name: "cost-demo".into(),
        dataset: DatasetSource::Blobs {
            n_train: 600,
            n_test: 1000,
            d_informative: 5,
            d_redundant: 95,
            num_classes: 5,
            cluster_std: 1.5,
            center_box: (-10.0, 10.0),
        },
        partition: PartitionStrategy::Random { seed: 7 },
        agents: 2,
        learner: WeakModelSpec::Forest { num_trees: 20, depth: 3, bootstrap: true, feature_subsample: false },
        agent_learners: None,
        variant: Variant::Ascii,
        max_rounds: 8,
        stop: StopCriterion::AlphaThreshold,
        replications: 3,
        seed: 1,
        transport: TransportKind::Inproc,
        socket_addrs: None,
        lean_messages: false,
        output_dir: None,
    };
    let ascii = run_arm(&cfg, Arm::Variant(Variant::Ascii), &RunOptions::default())?;
    let oracle = run_arm(&cfg, Arm::Oracle, &RunOptions::default())?;
    let target = 0.9 * oracle.summary.final_test_accuracy;
    println!("oracle accuracy {:.3}, 90% target {target:.3}", oracle.summary.final_test_accuracy);
    println!("raw transfer of the assisting agent's columns: {:.0} bytes", ascii.summary.raw_transfer_bytes);
    for r in &ascii.summary.rounds {
        let mark = if r.mean_test_accuracy >= target { "  <- at target" } else { "" };
        println!(
            "round {:2}  accuracy {:.3}  protocol bytes {:8.0}  ratio {:.3}{mark}",
            r.round,
            r.mean_test_accuracy,
            r.mean_cumulative_bytes,
            r.mean_cost_ratio.unwrap_or(f64::NAN)
        );
    }
    Ok(())
}
