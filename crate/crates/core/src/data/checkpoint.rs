//! Binary dataset snapshots for resuming a run without regenerating data.

use std::path::Path;

use super::{DataError, Dataset};
use crate::codec::{Reader, Writer};
use crate::encoding::ClassVector;
use crate::learners::FeatureMatrix;

const MAGIC: &[u8; 4] = b"ADS\0";
const VERSION: u16 = 1;

impl Dataset {
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut w = Writer::new();
        w.bytes(MAGIC).u16(VERSION);
        w.u64(self.len() as u64).u64(self.num_features() as u64).u32(self.num_classes() as u32);
        let names = self.features.column_names();
        w.u8(u8::from(names.is_some()));
        for n in names.unwrap_or_default() {
            w.str(n);
        }
        w.u8(u8::from(self.label_names.is_some()));
        for n in self.label_names.as_deref().unwrap_or_default() {
            w.str(n);
        }
        for id in &self.sample_ids {
            w.str(id);
        }
        for &c in self.labels.labels() {
            w.u32(c as u32);
        }
        w.f64s(self.features.as_slice());
        w.finish()
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, DataError> {
        let mut r = Reader::new(bytes);
        if r.take(4)? != MAGIC {
            return Err(Reader::new(bytes).error("not a dataset snapshot").into());
        }
        let version = r.u16()?;
        if version != VERSION {
            return Err(r.error(format!("unsupported snapshot version {version}")).into());
        }
        let n = r.u64()? as usize;
        let p = r.u64()? as usize;
        let k = r.u32()? as usize;
        let names = if r.u8()? == 1 {
            r.len_check(p, 4)?;
            Some((0..p).map(|_| r.str()).collect::<Result<Vec<_>, _>>()?)
        } else {
            None
        };
        let label_names = if r.u8()? == 1 {
            r.len_check(k, 4)?;
            Some((0..k).map(|_| r.str()).collect::<Result<Vec<_>, _>>()?)
        } else {
            None
        };
        r.len_check(n, 4)?;
        let ids = (0..n).map(|_| r.str()).collect::<Result<Vec<_>, _>>()?;
        r.len_check(n, 4)?;
        let labels = (0..n).map(|_| r.u32().map(|c| c as usize)).collect::<Result<Vec<_>, _>>()?;
        let data = r.f64s(n.checked_mul(p).ok_or_else(|| r.error("size overflow"))?)?;
        r.expect_end()?;
        let mut features = FeatureMatrix::new(data, n, p)?;
        if let Some(names) = names {
            features = features.with_column_names(names)?;
        }
        let mut ds = Dataset::new(features, ClassVector::new(labels, k)?, ids)?;
        ds.label_names = label_names;
        Ok(ds)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), DataError> {
        Ok(std::fs::write(path, self.to_bytes())?)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, DataError> {
        Self::from_bytes(&std::fs::read(path)?)
    }
}

#[cfg(test)]
mod tests {
    use crate::data::{generate_blobs, BlobSpec, Dataset};

    #[test]
    fn snapshot_round_trip() {
        let ds = generate_blobs(&BlobSpec {
            n: 20,
            d_informative: 2,
            d_redundant: 1,
            num_classes: 3,
            cluster_std: 0.5,
            center_box: (-1.0, 1.0),
            seed: 4,
        })
        .unwrap();
        let bytes = ds.to_bytes();
        assert_eq!(Dataset::from_bytes(&bytes).unwrap(), ds);
        assert!(Dataset::from_bytes(&bytes[..bytes.len() - 1]).is_err());
    }
}
