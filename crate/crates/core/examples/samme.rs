//! With a single agent the protocol is multiclass AdaBoost (SAMME): the
//! agent reweights its own rows and weighs each model by
//! `ln(r / (1 - r)) + ln(K - 1)`.
//!
//! cargo run --example samme

use ascii_learn::data::{generate_blobs, split_train_test, BlobSpec};
use ascii_learn::protocol::{predict, run_samme, AgentState};
use ascii_learn::{Result, WeakModelSpec};

fn main() -> Result<()> {
    let spec = BlobSpec { n: 800, d_informative: 2, d_redundant: 0, num_classes: 3, cluster_std: 2.5, center_box: (-5.0, 5.0), seed: 3 };
    let (train, test) = split_train_test(&generate_blobs(&spec)?, 0.75, 3)?;
    let mut agent = AgentState::from_dataset(0, &train, WeakModelSpec::Stump, 0)?;
    let steps = run_samme(&mut agent, 15)?;
    for s in &steps {
        println!("round {:2}  weighted accuracy {:.3}  alpha {:.3}", s.round, s.weighted_accuracy, s.alpha);
    }
    let pred = predict(&[&agent.components], &[&test.features], 3)?;
    let right = pred.labels().iter().zip(test.labels.labels()).filter(|(p, y)| p == y).count();
    println!("{} stumps, test accuracy {:.3}", agent.components.len(), right as f64 / test.len() as f64);
    Ok(())
}
