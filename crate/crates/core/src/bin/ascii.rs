use std::path::{Path, PathBuf};
use std::process::ExitCode;

use ascii_learn::data::{generate_blobs, write_csv};
use ascii_learn::harness::{
    emit_report, run_baseline, run_experiment, BaselineKind, ConfigError, ExperimentConfig, ExperimentOutcome,
    RunOptions, TransportKind,
};
use ascii_learn::Error;
use clap::{Args, Parser, Subcommand};

/// Assisted classification across agents holding vertical data slices.
#[derive(Parser)]
#[command(name = "ascii", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    config: PathBuf,
    /// Output directory; overrides the config's.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_enum)]
    transport: Option<TransportKind>,
    /// Replications run in parallel.
    #[arg(long)]
    jobs: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Sample the config's blob dataset and write it (CSV, or binary for other extensions).
    Generate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Run the config's protocol variant.
    Run(RunArgs),
    /// Run a reference method on the same replications.
    Baseline {
        #[arg(long, value_enum)]
        kind: BaselineKind,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Merge metrics files into a long-format CSV and a JSON summary.
    Report {
        #[arg(long)]
        out: PathBuf,
        /// Merge metrics from different configs.
        #[arg(long)]
        force: bool,
        #[arg(required = true)]
        metrics: Vec<PathBuf>,
    },
}

const EXIT_CONFIG: u8 = 2;
const EXIT_PROTOCOL: u8 = 3;

fn exit_code(e: &Error) -> ExitCode {
    match e {
        Error::Protocol(_) => ExitCode::from(EXIT_PROTOCOL),
        Error::Learner(_) | Error::Io(_) => ExitCode::FAILURE,
        _ => ExitCode::from(EXIT_CONFIG),
    }
}

fn options(a: &RunArgs) -> RunOptions {
    RunOptions { out_dir: a.out.clone(), jobs: a.jobs, transport: a.transport, seed: a.seed }
}

fn finish(out: ExperimentOutcome) -> ExitCode {
    let s = &out.summary;
    println!(
        "{} {}: {}/{} replications, final test accuracy {:.4} (se {:.4}), mean stop round {:.1}, mean protocol bytes {:.0}",
        s.name,
        s.variant,
        s.replications_completed,
        s.replications_requested,
        s.final_test_accuracy,
        s.final_test_se,
        s.stop_rounds.iter().map(|&r| f64::from(r)).sum::<f64>() / s.stop_rounds.len().max(1) as f64,
        s.mean_protocol_bytes,
    );
    for f in &out.failures {
        eprintln!("replication {} failed: {}", f.replication, f.message);
    }
    if out.has_protocol_failure() {
        ExitCode::from(EXIT_PROTOCOL)
    } else if out.failures.is_empty() {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

fn generate(config: &Path, out: &Path, seed: Option<u64>) -> Result<(), Error> {
    let cfg = ExperimentConfig::load(config)?;
    let spec = cfg
        .dataset
        .blob_spec(seed.unwrap_or(cfg.seed))
        .ok_or_else(|| ConfigError::Invalid("generate needs a blob dataset source".into()))?;
    let ds = generate_blobs(&spec)?;
    if out.extension().is_some_and(|e| e == "csv") {
        write_csv(&ds, out, ',')?;
    } else {
        ds.save(out)?;
    }
    println!("wrote {} rows x {} features to {}", ds.len(), ds.num_features(), out.display());
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Generate { config, out, seed } => generate(&config, &out, seed).map(|()| ExitCode::SUCCESS),
        Command::Run(a) => ExperimentConfig::load(&a.config)
            .map_err(Error::from)
            .and_then(|cfg| run_experiment(&cfg, &options(&a)))
            .map(finish),
        Command::Baseline { kind, run } => ExperimentConfig::load(&run.config)
            .map_err(Error::from)
            .and_then(|cfg| run_baseline(kind, &cfg, &options(&run)))
            .map(finish),
        Command::Report { out, force, metrics } => emit_report(&metrics, &out, force).map_err(Error::from).map(|(rows, _)| {
            println!("wrote {} rows to {}", rows.len(), out.join("report.csv").display());
            ExitCode::SUCCESS
        }),
    };
    result.unwrap_or_else(|e| {
        eprintln!("error: {e}");
        exit_code(&e)
    })
}
