//! Early stopping on held-out rows: after each round the assisting agents
//! send their scores on the holdout rows to the lead, which stops the run
//! once the holdout error has not improved for `patience` rounds.
//!
//! cargo run --release --example holdout_stop

use ascii_learn::data::PartitionStrategy;
use ascii_learn::harness::{run_experiment, DatasetSource, ExperimentConfig, RunOptions, TransportKind};
use ascii_learn::{Result, StopCriterion, Variant, WeakModelSpec};

fn main() -> Result<()> {
    let cfg = ExperimentConfig {
        name: "holdout-demo".into(),
        dataset: DatasetSource::Blobs {
            n_train: 500,
            n_test: 1000,
            d_informative: 4,
            d_redundant: 0,
            num_classes: 4,
            cluster_std: 4.0,
            center_box: (-10.0, 10.0),
        },
        partition: PartitionStrategy::Even,
        agents: 2,
        learner: WeakModelSpec::tree(2),
        agent_learners: None,
        variant: Variant::Ascii,
        max_rounds: 60,
        stop: StopCriterion::Holdout { patience: 5, fraction: 0.2 },
        replications: 4,
        seed: 8,
        transport: TransportKind::Inproc,
        socket_addrs: None,
        lean_messages: false,
        output_dir: None,
    };
    let out = run_experiment(&cfg, &RunOptions::default())?;
    for r in &out.replications {
        println!(
            "replication {}  stopped after round {:2} ({:?})  test accuracy {:.3}  holdout errors {:?}",
            r.replication,
            r.stop_round(),
            r.stop_reason,
            r.final_test_accuracy(),
            r.checkpoint.holdout_history.iter().map(|e| format!("{e:.3}")).collect::<Vec<_>>()
        );
    }
    Ok(())
}
