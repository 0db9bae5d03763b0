use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{DataError, Dataset};

/// How feature columns are dealt out to agents.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PartitionStrategy {
    /// Contiguous blocks; the first `p mod M` agents get one extra column.
    Even,
    /// Shuffle columns with the seed, then deal contiguous blocks.
    Random { seed: u64 },
    /// Exact column indices per agent.
    Explicit { columns: Vec<Vec<usize>> },
}

/// Column indices owned by each agent, disjoint and jointly covering a
/// subset of the original columns.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerticalPartition {
    pub columns: Vec<Vec<usize>>,
}

fn blocks(order: &[usize], m: usize) -> Vec<Vec<usize>> {
    let (base, extra) = (order.len() / m, order.len() % m);
    let mut out = Vec::with_capacity(m);
    let mut at = 0;
    for a in 0..m {
        let size = base + usize::from(a < extra);
        out.push(order[at..at + size].to_vec());
        at += size;
    }
    out
}

pub fn partition_columns(p: usize, m: usize, strategy: &PartitionStrategy) -> Result<VerticalPartition, DataError> {
    if m == 0 {
        return Err(DataError::Invalid("partition needs at least one agent".into()));
    }
    let columns = match strategy {
        PartitionStrategy::Even | PartitionStrategy::Random { .. } => {
            if p < m {
                return Err(DataError::Invalid(format!("cannot give {m} agents a column each from {p} columns")));
            }
            let mut order: Vec<usize> = (0..p).collect();
            if let PartitionStrategy::Random { seed } = strategy {
                order.shuffle(&mut ChaCha8Rng::seed_from_u64(*seed));
            }
            let mut out = blocks(&order, m);
            for cols in &mut out {
                cols.sort_unstable();
            }
            out
        }
        PartitionStrategy::Explicit { columns } => {
            if columns.len() != m {
                return Err(DataError::Invalid(format!("explicit partition lists {} agents, expected {m}", columns.len())));
            }
            let mut seen = vec![false; p];
            for (a, cols) in columns.iter().enumerate() {
                if cols.is_empty() {
                    return Err(DataError::Invalid(format!("agent {a} has no columns")));
                }
                for &c in cols {
                    if c >= p {
                        return Err(DataError::Invalid(format!("column {c} out of range for {p} columns")));
                    }
                    if std::mem::replace(&mut seen[c], true) {
                        return Err(DataError::Invalid(format!("column {c} assigned twice")));
                    }
                }
            }
            columns.clone()
        }
    };
    Ok(VerticalPartition { columns })
}

/// Splits a dataset into one column slice per agent. Every slice keeps all
/// rows, labels and IDs.
pub fn partition_vertical(ds: &Dataset, strategy: &PartitionStrategy, m: usize) -> Result<Vec<Dataset>, DataError> {
    let part = partition_columns(ds.num_features(), m, strategy)?;
    Ok(part.columns.iter().map(|cols| ds.select_cols(cols)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn even_blocks_front_load_remainder() {
        let p = partition_columns(7, 3, &PartitionStrategy::Even).unwrap();
        assert_eq!(p.columns, vec![vec![0, 1, 2], vec![3, 4], vec![5, 6]]);
    }

    #[test]
    fn random_covers_every_column_once() {
        let p = partition_columns(11, 4, &PartitionStrategy::Random { seed: 9 }).unwrap();
        let mut all: Vec<usize> = p.columns.concat();
        all.sort_unstable();
        assert_eq!(all, (0..11).collect::<Vec<_>>());
    }

    #[test]
    fn explicit_validation() {
        let bad = PartitionStrategy::Explicit { columns: vec![vec![0, 1], vec![1]] };
        assert!(partition_columns(3, 2, &bad).is_err());
        let empty = PartitionStrategy::Explicit { columns: vec![vec![0], vec![]] };
        assert!(partition_columns(3, 2, &empty).is_err());
        assert!(partition_columns(2, 3, &PartitionStrategy::Even).is_err());
    }
}
