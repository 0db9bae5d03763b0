//! The protocol variants and baselines on one five-agent problem, every arm
//! seeing the same replications.
//!
//! cargo run --release --example variants

use ascii_learn::data::PartitionStrategy;
use ascii_learn::harness::{run_arm, Arm, DatasetSource, ExperimentConfig, RunOptions, TransportKind};
use ascii_learn::{Result, StopCriterion, Variant, WeakModelSpec};

fn main() -> Result<()> {
    let cfg = ExperimentConfig {
        name: "variants-demo".into(),
        dataset: DatasetSource::Blobs {
            n_train: 400,
            n_test: 1000,
            d_informative: 10,
            d_redundant: 0,
            num_classes: 5,
            cluster_std: 5.0,
            center_box: (-10.0, 10.0),
        },
        partition: PartitionStrategy::Even,
        agents: 5,
        learner: WeakModelSpec::tree(2),
        agent_learners: None,
        variant: Variant::Ascii,
        max_rounds: 15,
        stop: StopCriterion::AlphaThreshold,
        replications: 5,
        seed: 100,
        transport: TransportKind::Inproc,
        socket_addrs: None,
        lean_messages: false,
        output_dir: None,
    };
    let arms = Variant::ALL.into_iter().map(Arm::Variant).chain([Arm::Single, Arm::Oracle]);
    for arm in arms {
        let out = run_arm(&cfg, arm, &RunOptions::default())?;
        let s = &out.summary;
        println!(
            "{:18} accuracy {:.3} (se {:.3})  stop rounds {:?}",
            arm.name(),
            s.final_test_accuracy,
            s.final_test_se,
            s.stop_rounds
        );
    }
    Ok(())
}
