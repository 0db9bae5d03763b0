//! Config-driven run on the red wine data: ASCII against the lead agent
//! alone and against pooling all columns, merged into one report.
//!
//! cargo run --release --example wine_experiment -- /tmp/wine-out

use std::path::{Path, PathBuf};

use ascii_learn::harness::{emit_report, run_arm, Arm, ExperimentConfig, RunOptions};
use ascii_learn::Result;

fn main() -> Result<()> {
    let out = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| std::env::temp_dir().join("wine-out").display().to_string()));
    let config = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs/wine-two-agents.json");
    let mut cfg = ExperimentConfig::load(config)?;
    cfg.replications = 5;

    let opts = RunOptions { out_dir: Some(out.clone()), ..RunOptions::default() };
    let mut files = Vec::new();
    for arm in [Arm::Variant(cfg.variant), Arm::Single, Arm::Oracle] {
        let res = run_arm(&cfg, arm, &opts)?;
        println!("{:7} final accuracy {:.3}", arm.name(), res.summary.final_test_accuracy);
        files.push(out.join(format!("metrics-{}.csv", arm.name())));
    }
    let (rows, summary) = emit_report(&files, &out.join("report"), false)?;
    println!("{} report rows in {}", rows.len(), out.join("report").display());
    for (variant, diff) in summary.differences_from_first.iter().filter(|(v, _)| *v != "ascii") {
        println!("{variant:7} minus ascii: {diff:+.3}");
    }
    Ok(())
}
