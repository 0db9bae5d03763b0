use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{DataError, Dataset};
use crate::learners::FeatureMatrix;

/// Shuffled row indices split into `round(n * train_fraction)` training rows
/// and the rest. Both sides must be non-empty.
pub fn split_indices(n: usize, train_fraction: f64, seed: u64) -> Result<(Vec<usize>, Vec<usize>), DataError> {
    if !(train_fraction > 0.0 && train_fraction < 1.0) {
        return Err(DataError::Invalid(format!("train fraction {train_fraction} must lie in (0, 1)")));
    }
    split_indices_count(n, (n as f64 * train_fraction).round() as usize, seed)
}

/// Like [`split_indices`] with an exact training-set size.
pub fn split_indices_count(n: usize, n_train: usize, seed: u64) -> Result<(Vec<usize>, Vec<usize>), DataError> {
    if n_train == 0 || n_train >= n {
        return Err(DataError::Invalid(format!("split of {n} rows into {n_train} training rows leaves one side empty")));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let test = order.split_off(n_train);
    Ok((order, test))
}

pub fn split_train_test(ds: &Dataset, train_fraction: f64, seed: u64) -> Result<(Dataset, Dataset), DataError> {
    let (train, test) = split_indices(ds.len(), train_fraction, seed)?;
    Ok((ds.select_rows(&train)?, ds.select_rows(&test)?))
}

/// `count` bootstrap replications. Replication `k` resamples `n` rows with
/// replacement using seed `seed + k`, then splits the resample with the same
/// seed. Resampled IDs carry a `~j` suffix (draw index) so they stay unique.
pub fn bootstrap_replications(
    ds: &Dataset,
    count: usize,
    train_fraction: f64,
    seed: u64,
) -> Result<Vec<(Dataset, Dataset)>, DataError> {
    (0..count as u64)
        .map(|k| {
            let s = seed.wrapping_add(k);
            split_train_test(&bootstrap_resample(ds, s)?, train_fraction, s)
        })
        .collect()
}

/// `n` rows drawn uniformly with replacement.
pub fn bootstrap_resample(ds: &Dataset, seed: u64) -> Result<Dataset, DataError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = ds.len();
    let draws: Vec<usize> = (0..n).map(|_| rng.random_range(0..n)).collect();
    let mut data = Vec::with_capacity(n * ds.num_features());
    for &r in &draws {
        data.extend_from_slice(ds.features.row(r));
    }
    let mut features = FeatureMatrix::new(data, n, ds.num_features())?;
    if let Some(names) = ds.features.column_names() {
        features = features.with_column_names(names.to_vec())?;
    }
    let ids = draws.iter().enumerate().map(|(j, &r)| format!("{}~{j}", ds.sample_ids[r])).collect();
    let mut resampled = Dataset::new(features, ds.labels.select(&draws)?, ids)?;
    resampled.label_names = ds.label_names.clone();
    Ok(resampled)
}
