//! Every weak learner takes the same ignorance-weighted training call and
//! returns the fitted model plus the per-row reward vector.
//!
//! cargo run --example weak_learners

use ascii_learn::data::{generate_blobs, BlobSpec};
use ascii_learn::{weighted_accuracy, wst, IgnoranceVector, Result, WeakModelSpec};

fn main() -> Result<()> {
    let spec = BlobSpec { n: 600, d_informative: 3, d_redundant: 2, num_classes: 4, cluster_std: 3.0, center_box: (-8.0, 8.0), seed: 5 };
    let ds = generate_blobs(&spec)?;

    // Pretend the first half of the rows is where the ensemble struggles.
    let n = ds.len();
    let w = IgnoranceVector::from_weights((0..n).map(|i| if i < n / 2 { 3.0 } else { 1.0 }).collect())?;

    let specs = [
        WeakModelSpec::Stump,
        WeakModelSpec::tree(3),
        WeakModelSpec::forest(25, 3),
        WeakModelSpec::logistic(0.1, 300, 0.0),
    ];
    for spec in &specs {
        let (model, reward) = wst(&ds.labels, &ds.features, &w, spec, 42)?;
        println!(
            "{:9} weighted accuracy {:.3}  encoded size {:6} bytes",
            spec.kind_name(),
            weighted_accuracy(&w, &reward)?,
            model.to_bytes().len()
        );
    }
    Ok(())
}
