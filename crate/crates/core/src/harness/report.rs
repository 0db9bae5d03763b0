use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::metrics::{carried_forward, mean_and_stderr, read_metrics, MetricsRecord};
use super::ConfigError;

/// One line of the long-format report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub variant: String,
    pub round: u32,
    pub mean_accuracy: f64,
    pub std_error: f64,
    pub mean_cumulative_bytes: f64,
    /// Mean protocol bytes over raw-transfer bytes; empty when there is no
    /// raw-transfer baseline.
    pub cost_ratio: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VariantFinal {
    pub variant: String,
    pub replications: usize,
    pub rounds: u32,
    pub final_accuracy: f64,
    pub final_std_error: f64,
    pub final_cumulative_bytes: f64,
    pub final_cost_ratio: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportSummary {
    pub config_digests: Vec<String>,
    pub inputs: Vec<PathBuf>,
    pub variants: Vec<VariantFinal>,
    /// Final accuracy of each variant minus the first variant's, by name.
    pub differences_from_first: BTreeMap<String, f64>,
}

/// Merges metrics files into `<out>/report.csv` and `<out>/report.json`.
/// Every variant is reported over the same rounds: up to the longest run in
/// the set, with stopped replications carried forward. Files from different
/// configs are refused unless `force` is set.
pub fn emit_report(files: &[PathBuf], out: &Path, force: bool) -> Result<(Vec<ReportRow>, ReportSummary), ConfigError> {
    if files.is_empty() {
        return Err(ConfigError::Invalid("report needs at least one metrics file".into()));
    }
    let mut records: Vec<MetricsRecord> = Vec::new();
    for f in files {
        records.extend(read_metrics(f)?);
    }
    let mut digests: Vec<String> = records.iter().map(|r| r.config_digest.clone()).collect();
    digests.sort();
    digests.dedup();
    if digests.len() > 1 && !force {
        return Err(ConfigError::Invalid(format!(
            "metrics come from {} different configs ({}); pass --force to merge anyway",
            digests.len(),
            digests.join(", ")
        )));
    }

    let mut variants: Vec<String> = Vec::new();
    for r in &records {
        if !variants.contains(&r.variant) {
            variants.push(r.variant.clone());
        }
    }
    let rounds = records.iter().map(|r| r.round).max().unwrap_or(0);
    let mut rows = Vec::new();
    let mut finals = Vec::new();
    for v in &variants {
        let mine: Vec<&MetricsRecord> = records.iter().filter(|r| &r.variant == v).collect();
        let acc = carried_forward(&mine, rounds, |r| r.test_accuracy);
        let bytes = carried_forward(&mine, rounds, |r| r.cumulative_bytes as f64);
        let ratio = carried_forward(&mine, rounds, |r| {
            if r.raw_transfer_bytes == 0 { f64::NAN } else { r.cumulative_bytes as f64 / r.raw_transfer_bytes as f64 }
        });
        for t in 0..rounds as usize {
            let col = |s: &[Vec<f64>]| s.iter().map(|v| v[t]).collect::<Vec<_>>();
            let (mean_accuracy, std_error) = mean_and_stderr(&col(&acc));
            let rc = col(&ratio);
            rows.push(ReportRow {
                variant: v.clone(),
                round: t as u32 + 1,
                mean_accuracy,
                std_error,
                mean_cumulative_bytes: mean_and_stderr(&col(&bytes)).0,
                cost_ratio: rc.iter().all(|x| x.is_finite()).then(|| mean_and_stderr(&rc).0),
            });
        }
        let last = rows.last().expect("at least one round").clone();
        finals.push(VariantFinal {
            variant: v.clone(),
            replications: acc.len(),
            rounds,
            final_accuracy: last.mean_accuracy,
            final_std_error: last.std_error,
            final_cumulative_bytes: last.mean_cumulative_bytes,
            final_cost_ratio: last.cost_ratio,
        });
    }
    let differences_from_first =
        finals.iter().map(|f| (f.variant.clone(), f.final_accuracy - finals[0].final_accuracy)).collect();
    let summary = ReportSummary { config_digests: digests, inputs: files.to_vec(), variants: finals, differences_from_first };

    fs::create_dir_all(out).map_err(|e| ConfigError::Io { path: out.to_owned(), source: e })?;
    let csv_path = out.join("report.csv");
    let mut w = csv::Writer::from_path(&csv_path).map_err(|e| ConfigError::Csv { path: csv_path.clone(), source: e })?;
    for r in &rows {
        w.serialize(r).map_err(|e| ConfigError::Csv { path: csv_path.clone(), source: e })?;
    }
    w.flush().map_err(|e| ConfigError::Io { path: csv_path.clone(), source: e })?;
    let json_path = out.join("report.json");
    let json = serde_json::to_string_pretty(&summary).expect("report serializes");
    fs::write(&json_path, json + "\n").map_err(|e| ConfigError::Io { path: json_path, source: e })?;
    Ok((rows, summary))
}
