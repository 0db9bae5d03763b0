//! Two agents hold different columns of the same rows. Agent A leads,
//! agent B assists, and only ignorance scores and model weights move
//! between them.
//!
//! cargo run --example two_agent

use ascii_learn::data::{generate_blobs, partition_vertical, split_train_test, BlobSpec, PartitionStrategy};
use ascii_learn::protocol::{initial_message, predict, run_round_two_agent, run_samme, AgentState};
use ascii_learn::{Result, WeakModelSpec};

fn main() -> Result<()> {
    let spec = BlobSpec { n: 1500, d_informative: 4, d_redundant: 0, num_classes: 4, cluster_std: 3.0, center_box: (-10.0, 10.0), seed: 11 };
    let (train, test) = split_train_test(&generate_blobs(&spec)?, 0.7, 11)?;
    let train = partition_vertical(&train, &PartitionStrategy::Even, 2)?;
    let test = partition_vertical(&test, &PartitionStrategy::Even, 2)?;

    let mut a = AgentState::from_dataset(0, &train[0], WeakModelSpec::tree(2), 1)?;
    let mut b = AgentState::from_dataset(1, &train[1], WeakModelSpec::tree(2), 1)?;
    let mut msg = initial_message(a.num_samples(), 0);
    for t in 1..=10 {
        let out = run_round_two_agent(&mut a, &mut b, t, msg)?;
        let pred = predict(&[&a.components, &b.components], &[&test[0].features, &test[1].features], 4)?;
        let acc = pred.labels().iter().zip(test[0].labels.labels()).filter(|(p, y)| p == y).count() as f64 / pred.len() as f64;
        println!(
            "round {t:2}  alpha_A {:6.3}  alpha_B {:6.3}  test accuracy {acc:.3}",
            out.steps[0].alpha, out.steps[1].alpha
        );
        if out.terminal() {
            println!("a model was no better than chance; stopping");
            break;
        }
        msg = out.closing;
    }

    // What A reaches alone with the same budget.
    let mut alone = AgentState::from_dataset(0, &train[0], WeakModelSpec::tree(2), 1)?;
    run_samme(&mut alone, 20)?;
    let pred = predict(&[&alone.components], &[&test[0].features], 4)?;
    let acc = pred.labels().iter().zip(test[0].labels.labels()).filter(|(p, y)| p == y).count() as f64 / pred.len() as f64;
    println!("agent A alone: test accuracy {acc:.3}");
    Ok(())
}
