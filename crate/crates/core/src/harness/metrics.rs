use std::path::Path;

use serde::{Deserialize, Serialize};

use super::ConfigError;

/// One row of the metrics file: the state of one replication after one round.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsRecord {
    pub config_digest: String,
    pub variant: String,
    pub replication: usize,
    pub round: u32,
    pub train_accuracy: f64,
    pub test_accuracy: f64,
    /// Weight of each agent's model this round, by agent index, `;`-separated.
    /// Empty where the agent did not act.
    pub alphas: String,
    pub cumulative_bytes: u64,
    pub raw_transfer_bytes: u64,
}

impl MetricsRecord {
    pub fn format_alphas(alphas: &[Option<f64>]) -> String {
        alphas
            .iter()
            .map(|a| a.map_or_else(String::new, |v| format!("{v:.12e}")))
            .collect::<Vec<_>>()
            .join(";")
    }
}

pub fn write_metrics(path: &Path, records: &[MetricsRecord]) -> Result<(), ConfigError> {
    let mut w = csv::Writer::from_path(path).map_err(|e| ConfigError::Csv { path: path.to_owned(), source: e })?;
    for r in records {
        w.serialize(r).map_err(|e| ConfigError::Csv { path: path.to_owned(), source: e })?;
    }
    w.flush().map_err(|e| ConfigError::Io { path: path.to_owned(), source: e })
}

pub fn read_metrics(path: &Path) -> Result<Vec<MetricsRecord>, ConfigError> {
    let mut r = csv::Reader::from_path(path).map_err(|e| ConfigError::Csv { path: path.to_owned(), source: e })?;
    r.deserialize().map(|rec| rec.map_err(|e| ConfigError::Csv { path: path.to_owned(), source: e })).collect()
}

/// Mean and standard error (sample standard deviation over `sqrt(count)`).
pub fn mean_and_stderr(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    if n < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1) as f64;
    (mean, (var / n as f64).sqrt())
}

/// Per-replication series indexed by round, with each replication's last
/// value carried forward past its stopping round.
pub fn carried_forward(records: &[&MetricsRecord], rounds: u32, value: impl Fn(&MetricsRecord) -> f64) -> Vec<Vec<f64>> {
    let mut reps: Vec<usize> = records.iter().map(|r| r.replication).collect();
    reps.sort_unstable();
    reps.dedup();
    reps.iter()
        .map(|&k| {
            let mut mine: Vec<&&MetricsRecord> = records.iter().filter(|r| r.replication == k).collect();
            mine.sort_by_key(|r| r.round);
            let mut out = Vec::with_capacity(rounds as usize);
            let mut last = f64::NAN;
            let mut it = mine.iter().peekable();
            for t in 1..=rounds {
                while let Some(r) = it.peek() {
                    if r.round <= t {
                        last = value(r);
                        it.next();
                    } else {
                        break;
                    }
                }
                out.push(last);
            }
            out
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stderr_formula() {
        let (m, se) = mean_and_stderr(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(m, 2.5);
        // sample variance 5/3, over 4, square root
        assert!((se - (5.0f64 / 3.0 / 4.0).sqrt()).abs() < 1e-15);
        assert_eq!(mean_and_stderr(&[0.7]), (0.7, 0.0));
    }

    #[test]
    fn carry_forward_fills_later_rounds() {
        let rec = |rep, round, acc| MetricsRecord {
            config_digest: "d".into(),
            variant: "ascii".into(),
            replication: rep,
            round,
            train_accuracy: acc,
            test_accuracy: acc,
            alphas: String::new(),
            cumulative_bytes: 0,
            raw_transfer_bytes: 0,
        };
        let rs = [rec(0, 1, 0.5), rec(0, 2, 0.6), rec(1, 1, 0.4)];
        let refs: Vec<&MetricsRecord> = rs.iter().collect();
        let series = carried_forward(&refs, 3, |r| r.test_accuracy);
        assert_eq!(series, vec![vec![0.5, 0.6, 0.6], vec![0.4, 0.4, 0.4]]);
    }
}
