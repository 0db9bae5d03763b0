use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::{DataError, Dataset};
use crate::encoding::ClassVector;
use crate::learners::FeatureMatrix;

fn default_box() -> (f64, f64) {
    (-10.0, 10.0)
}

/// Isotropic Gaussian blobs, one per class, plus optional pure-noise columns.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BlobSpec {
    pub n: usize,
    pub d_informative: usize,
    #[serde(default)]
    pub d_redundant: usize,
    pub num_classes: usize,
    pub cluster_std: f64,
    #[serde(default = "default_box")]
    pub center_box: (f64, f64),
    #[serde(default)]
    pub seed: u64,
}

impl BlobSpec {
    pub fn validate(&self) -> Result<(), DataError> {
        let fail = |m: String| Err(DataError::Invalid(m));
        if self.num_classes < 2 {
            return fail(format!("blob spec needs >= 2 classes, got {}", self.num_classes));
        }
        if self.n < self.num_classes {
            return fail(format!("blob spec has n={} < K={}", self.n, self.num_classes));
        }
        if self.d_informative == 0 {
            return fail("blob spec needs at least one informative feature".into());
        }
        if !(self.cluster_std >= 0.0 && self.cluster_std.is_finite()) {
            return fail(format!("cluster_std {} must be finite and >= 0", self.cluster_std));
        }
        if !(self.center_box.0 <= self.center_box.1) {
            return fail("center box is empty".into());
        }
        Ok(())
    }
}

/// Centers are uniform in `center_box` per informative coordinate. Class
/// sizes differ by at most one and rows come out shuffled. Redundant columns
/// are independent standard normals appended after the informative ones.
pub fn generate_blobs(spec: &BlobSpec) -> Result<Dataset, DataError> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let (lo, hi) = spec.center_box;
    let d = spec.d_informative;
    let centers: Vec<f64> = (0..spec.num_classes * d)
        .map(|_| if hi > lo { rng.random_range(lo..hi) } else { lo })
        .collect();
    let mut labels: Vec<usize> = (0..spec.n).map(|i| i % spec.num_classes).collect();
    labels.shuffle(&mut rng);

    let p = d + spec.d_redundant;
    let mut data = Vec::with_capacity(spec.n * p);
    for &c in &labels {
        for j in 0..d {
            let z: f64 = rng.sample(StandardNormal);
            data.push(centers[c * d + j] + spec.cluster_std * z);
        }
        for _ in 0..spec.d_redundant {
            data.push(rng.sample::<f64, _>(StandardNormal));
        }
    }
    let names = (0..d)
        .map(|j| format!("x{j}"))
        .chain((0..spec.d_redundant).map(|j| format!("noise{j}")))
        .collect();
    let features = FeatureMatrix::new(data, spec.n, p)?.with_column_names(names)?;
    let ids = (0..spec.n).map(|i| format!("blob-{i:07}")).collect();
    Dataset::new(features, ClassVector::new(labels, spec.num_classes)?, ids)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec() -> BlobSpec {
        BlobSpec {
            n: 103,
            d_informative: 3,
            d_redundant: 2,
            num_classes: 4,
            cluster_std: 1.0,
            center_box: (-10.0, 10.0),
            seed: 5,
        }
    }

    #[test]
    fn deterministic_and_balanced() {
        let a = generate_blobs(&spec()).unwrap();
        assert_eq!(a, generate_blobs(&spec()).unwrap());
        let mut counts = [0; 4];
        for &c in a.labels.labels() {
            counts[c] += 1;
        }
        assert!(counts.iter().max().unwrap() - counts.iter().min().unwrap() <= 1);
        assert_eq!(a.num_features(), 5);
    }

    #[test]
    fn zero_noise_collapses_to_centers() {
        let mut s = spec();
        s.cluster_std = 0.0;
        s.d_redundant = 0;
        let d = generate_blobs(&s).unwrap();
        for i in 0..d.len() {
            for j in 0..d.len() {
                if d.labels.get(i) == d.labels.get(j) {
                    assert_eq!(d.features.row(i), d.features.row(j));
                }
            }
        }
    }

    #[test]
    fn transmission_study_shape() {
        let s = BlobSpec { n: 1000, d_informative: 5, d_redundant: 195, num_classes: 10, ..spec() };
        assert_eq!(generate_blobs(&s).unwrap().num_features(), 200);
    }

    #[test]
    fn invalid_specs_rejected() {
        assert!(generate_blobs(&BlobSpec { n: 3, ..spec() }).is_err());
        assert!(generate_blobs(&BlobSpec { d_informative: 0, ..spec() }).is_err());
        assert!(generate_blobs(&BlobSpec { cluster_std: -1.0, ..spec() }).is_err());
    }
}
