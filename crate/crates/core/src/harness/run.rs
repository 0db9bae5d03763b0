use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{DatasetSource, ExperimentConfig, TransportKind};
use super::metrics::{carried_forward, mean_and_stderr, write_metrics, MetricsRecord};
use super::ConfigError;
use crate::alpha::{StopCriterion, StopReason};
use crate::data::{generate_blobs, load_csv, partition_vertical, split_indices, split_indices_count, bootstrap_resample, CsvOptions, Dataset};
use crate::encoding::ClassVector;
use crate::error::{Error, Result};
use crate::learners::FeatureMatrix;
use crate::protocol::{
    combine, plurality_vote, run_ensemble_adaboost, AgentState, AlphaRule, ChainOrder, HoldoutStop, PartialScoreMatrix,
    Session, SessionCheckpoint, SessionOptions, Variant,
};
use crate::transport::{
    align, measure_cost, CostLedger, CostReport, InProcessTransport, MessageKind, ProtocolError, RawTransferBaseline,
    SessionLog, SessionLogRecord, SocketTransport, Transport,
};

/// Reference methods run on the same replications as the protocol.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum BaselineKind {
    /// Boosting on the lead agent's slice alone.
    Single,
    /// Boosting on all slices joined back together.
    Oracle,
    /// Independent boosting per agent, plurality vote.
    EnsembleAda,
}

/// What one replication runs: a protocol variant or a pooled/isolated baseline.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Arm {
    Variant(Variant),
    Single,
    Oracle,
}

impl Arm {
    pub fn name(self) -> &'static str {
        match self {
            Arm::Variant(v) => v.name(),
            Arm::Single => "single",
            Arm::Oracle => "oracle",
        }
    }
}

impl From<BaselineKind> for Arm {
    fn from(b: BaselineKind) -> Self {
        match b {
            BaselineKind::Single => Arm::Single,
            BaselineKind::Oracle => Arm::Oracle,
            BaselineKind::EnsembleAda => Arm::Variant(Variant::EnsembleAdaboost),
        }
    }
}

/// Overrides and output location for a run.
#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    /// Where to write outputs; falls back to the config's `output_dir`, then
    /// to nothing.
    pub out_dir: Option<PathBuf>,
    /// Worker threads for replications; all cores when absent.
    pub jobs: Option<usize>,
    pub transport: Option<TransportKind>,
    pub seed: Option<u64>,
}

/// One replication's aligned data, split per agent.
#[derive(Debug, Clone)]
pub struct ReplicationData {
    pub seed: u64,
    pub train: Vec<Dataset>,
    pub holdout: Option<Vec<Dataset>>,
    pub test: Vec<Dataset>,
    /// Handshake traffic of the two alignments.
    pub ledger: CostLedger,
}

impl ReplicationData {
    pub fn raw_transfer(&self) -> RawTransferBaseline {
        RawTransferBaseline {
            n_train: self.train[0].len(),
            assisting_dims: self.train[1..].iter().map(Dataset::num_features).collect(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ReplicationFailure {
    pub replication: usize,
    /// True for transport and message errors, false for data and learner errors.
    pub protocol: bool,
    pub message: String,
}

#[derive(Debug, Clone)]
pub struct ReplicationResult {
    pub replication: usize,
    pub records: Vec<MetricsRecord>,
    pub ledger: CostLedger,
    pub cost: CostReport,
    pub stop_reason: Option<StopReason>,
    /// Final ensemble, enough to recompute every metrics row.
    pub checkpoint: SessionCheckpoint,
    pub seconds: f64,
}

impl ReplicationResult {
    pub fn stop_round(&self) -> u32 {
        self.records.last().map_or(0, |r| r.round)
    }

    pub fn final_test_accuracy(&self) -> f64 {
        self.records.last().map_or(f64::NAN, |r| r.test_accuracy)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundSummary {
    pub round: u32,
    pub mean_test_accuracy: f64,
    pub se_test_accuracy: f64,
    pub mean_train_accuracy: f64,
    pub se_train_accuracy: f64,
    pub mean_cumulative_bytes: f64,
    /// Mean of protocol bytes over raw-transfer bytes; absent without a baseline.
    pub mean_cost_ratio: Option<f64>,
}

/// Summary across replications. Replications that stopped early contribute
/// their last values to later rounds. Standard errors are the sample
/// standard deviation over the square root of the replication count.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub name: String,
    pub config_digest: String,
    pub variant: String,
    pub replications_requested: usize,
    pub replications_completed: usize,
    pub failures: Vec<(usize, String)>,
    pub stop_rounds: Vec<u32>,
    pub final_test_accuracy: f64,
    pub final_test_se: f64,
    pub mean_protocol_bytes: f64,
    pub raw_transfer_bytes: f64,
    pub mean_reduction_factor: Option<f64>,
    pub mean_cost_ratio: Option<f64>,
    pub rounds: Vec<RoundSummary>,
}

#[derive(Debug, Clone)]
pub struct ExperimentOutcome {
    pub arm: Arm,
    pub config_digest: String,
    pub replications: Vec<ReplicationResult>,
    pub failures: Vec<ReplicationFailure>,
    pub summary: RunSummary,
}

impl ExperimentOutcome {
    /// All metrics rows, by replication then round.
    pub fn records(&self) -> Vec<MetricsRecord> {
        self.replications.iter().flat_map(|r| r.records.iter().cloned()).collect()
    }

    pub fn has_protocol_failure(&self) -> bool {
        self.failures.iter().any(|f| f.protocol)
    }
}

/// Runs the config's protocol variant.
pub fn run_experiment(cfg: &ExperimentConfig, opts: &RunOptions) -> Result<ExperimentOutcome> {
    run_arm(cfg, Arm::Variant(cfg.variant), opts)
}

pub fn run_baseline(kind: BaselineKind, cfg: &ExperimentConfig, opts: &RunOptions) -> Result<ExperimentOutcome> {
    run_arm(cfg, kind.into(), opts)
}

/// Runs every replication of one arm and writes its outputs when an output
/// directory is set. A failing replication is recorded and the rest go on.
pub fn run_arm(cfg: &ExperimentConfig, arm: Arm, opts: &RunOptions) -> Result<ExperimentOutcome> {
    let mut cfg = cfg.clone();
    if let Some(s) = opts.seed {
        cfg.seed = s;
    }
    if let Some(t) = opts.transport {
        cfg.transport = t;
    }
    cfg.validate()?;
    let digest = cfg.comparison_digest();
    // Fixed socket addresses cannot be shared by concurrent replications.
    let jobs = if cfg.transport == TransportKind::Socket && cfg.socket_addrs.is_some() { Some(1) } else { opts.jobs };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.unwrap_or(0))
        .build()
        .map_err(|e| Error::invalid(format!("cannot start worker pool: {e}")))?;

    let outcomes: Vec<Result<ReplicationResult>> =
        pool.install(|| (0..cfg.replications).into_par_iter().map(|k| run_replication(&cfg, arm, k, &digest)).collect());

    let mut replications = Vec::new();
    let mut failures = Vec::new();
    for (k, o) in outcomes.into_iter().enumerate() {
        match o {
            Ok(r) => replications.push(r),
            Err(e) => failures.push(ReplicationFailure {
                replication: k,
                protocol: matches!(e, Error::Protocol(_)),
                message: e.to_string(),
            }),
        }
    }
    let summary = summarize(&cfg, arm, &digest, &replications, &failures);
    let outcome = ExperimentOutcome { arm, config_digest: digest, replications, failures, summary };
    if let Some(dir) = opts.out_dir.as_ref().or(cfg.output_dir.as_ref()) {
        write_outputs(dir, &outcome)?;
    }
    Ok(outcome)
}

fn new_transport(cfg: &ExperimentConfig) -> Result<Box<dyn Transport + Send>> {
    Ok(match cfg.transport {
        TransportKind::Inproc => Box::new(InProcessTransport::new(cfg.agents)),
        TransportKind::Socket => Box::new(match &cfg.socket_addrs {
            Some(addrs) => SocketTransport::bind(addrs).map_err(ProtocolError::from)?,
            None => SocketTransport::local(cfg.agents).map_err(ProtocolError::from)?,
        }),
    })
}

/// Builds replication `k`: fresh data from seed `base + k`, split into
/// train and test, partitioned by column and ID-aligned over `transport`.
/// With a holdout stop, the last rows of the aligned training set (which is
/// in ID order) are held out.
pub fn replication_data<T: Transport + ?Sized>(cfg: &ExperimentConfig, k: usize, transport: &mut T) -> Result<ReplicationData> {
    let seed = cfg.seed.wrapping_add(k as u64);
    let (train, test) = match &cfg.dataset {
        DatasetSource::Blobs { n_train, .. } => {
            let ds = generate_blobs(&cfg.dataset.blob_spec(seed).expect("blob source"))?;
            let (tr, te) = split_indices_count(ds.len(), *n_train, seed)?;
            (ds.select_rows(&tr)?, ds.select_rows(&te)?)
        }
        DatasetSource::Csv { path, label_column, id_column, delimiter, train_fraction } => {
            let mut opts = CsvOptions::new(label_column.clone()).delimiter(*delimiter);
            if let Some(id) = id_column {
                opts = opts.id_column(id.clone());
            }
            let ds = bootstrap_resample(&load_csv(path, &opts)?, seed)?;
            let (tr, te) = split_indices(ds.len(), *train_fraction, seed)?;
            (ds.select_rows(&tr)?, ds.select_rows(&te)?)
        }
    };
    let mut ledger = CostLedger::default();
    let train = align(&partition_vertical(&train, &cfg.partition, cfg.agents)?, transport, &mut ledger)?;
    let test = align(&partition_vertical(&test, &cfg.partition, cfg.agents)?, transport, &mut ledger)?;

    let (train, holdout) = match cfg.stop {
        StopCriterion::AlphaThreshold => (train, None),
        StopCriterion::Holdout { fraction, .. } => {
            let n = train[0].len();
            let held = ((n as f64 * fraction).round() as usize).clamp(1, n.saturating_sub(1).max(1));
            let keep: Vec<usize> = (0..n - held).collect();
            let rest: Vec<usize> = (n - held..n).collect();
            let fit = train.iter().map(|d| d.select_rows(&keep)).collect::<Result<Vec<_>, _>>()?;
            let hold = train.iter().map(|d| d.select_rows(&rest)).collect::<Result<Vec<_>, _>>()?;
            (fit, Some(hold))
        }
    };
    Ok(ReplicationData { seed, train, holdout, test, ledger })
}

fn hstack(slices: &[Dataset]) -> Result<Dataset> {
    let x = FeatureMatrix::hstack(&slices.iter().map(|d| &d.features).collect::<Vec<_>>())?;
    Ok(Dataset::new(x, slices[0].labels.clone(), slices[0].sample_ids.clone())?)
}

/// Per-agent partial scores on one row set, kept current round by round.
struct Scoreboard {
    parts: Vec<PartialScoreMatrix>,
    slices: Vec<FeatureMatrix>,
    labels: ClassVector,
}

impl Scoreboard {
    fn new(slices: Vec<FeatureMatrix>, labels: ClassVector) -> Self {
        let k = labels.num_classes();
        let parts = slices.iter().enumerate().map(|(a, x)| PartialScoreMatrix::zeros(a, x.num_rows(), k)).collect();
        Self { parts, slices, labels }
    }

    fn add_round(&mut self, agents: &[AgentState], round: u32) {
        for a in agents {
            for c in a.components.iter().filter(|c| c.round == round) {
                self.parts[a.index].add_component(c, &self.slices[a.index]);
            }
        }
    }

    fn joint(&self) -> Result<Vec<usize>> {
        combine(&self.parts)
    }

    fn vote(&self) -> Result<Vec<usize>> {
        let votes: Vec<Vec<usize>> = self.parts.iter().map(PartialScoreMatrix::argmax).collect();
        plurality_vote(&votes, self.labels.num_classes())
    }

    fn accuracy(&self, pred: &[usize]) -> f64 {
        let right = pred.iter().zip(self.labels.labels()).filter(|(p, y)| p == y).count();
        right as f64 / self.labels.len().max(1) as f64
    }
}

fn run_replication(cfg: &ExperimentConfig, arm: Arm, k: usize, digest: &str) -> Result<ReplicationResult> {
    let started = Instant::now();
    let mut transport = new_transport(cfg)?;
    let data = replication_data(cfg, k, &mut transport)?;
    let raw = data.raw_transfer();
    let raw_bytes = raw.bytes();

    let (train, test, holdout, specs): (Vec<Dataset>, Vec<Dataset>, Option<Vec<Dataset>>, Vec<usize>) = match arm {
        Arm::Variant(_) => (data.train.clone(), data.test.clone(), data.holdout.clone(), (0..cfg.agents).collect()),
        Arm::Single => (
            vec![data.train[0].clone()],
            vec![data.test[0].clone()],
            data.holdout.as_ref().map(|h| vec![h[0].clone()]),
            vec![0],
        ),
        Arm::Oracle => (
            vec![hstack(&data.train)?],
            vec![hstack(&data.test)?],
            data.holdout.as_ref().map(|h| hstack(h).map(|d| vec![d])).transpose()?,
            vec![0],
        ),
    };
    let agents = train
        .iter()
        .zip(&specs)
        .enumerate()
        .map(|(i, (d, &s))| AgentState::from_dataset(i, d, cfg.learner_for(s).clone(), data.seed))
        .collect::<Result<Vec<_>>>()?;
    let mut board_train = Scoreboard::new(train.iter().map(|d| d.features.clone()).collect(), train[0].labels.clone());
    let mut board_test = Scoreboard::new(test.iter().map(|d| d.features.clone()).collect(), test[0].labels.clone());
    let m = agents.len();
    let record = |round: u32, train_accuracy: f64, test_accuracy: f64, alphas: &[Option<f64>], bytes: u64| MetricsRecord {
        config_digest: digest.to_string(),
        variant: arm.name().to_string(),
        replication: k,
        round,
        train_accuracy,
        test_accuracy,
        alphas: MetricsRecord::format_alphas(alphas),
        cumulative_bytes: bytes,
        raw_transfer_bytes: raw_bytes,
    };
    let mut records = Vec::new();

    let (ledger, checkpoint, stop_reason) = if arm == Arm::Variant(Variant::EnsembleAdaboost) {
        let mut agents = agents;
        let mut stopped = false;
        let rounds = run_ensemble_adaboost(&mut agents, cfg.max_rounds, |t, agents, steps| {
            board_train.add_round(agents, t);
            board_test.add_round(agents, t);
            let alphas: Vec<Option<f64>> = steps.iter().map(|s| s.as_ref().map(|s| s.alpha)).collect();
            stopped = steps.iter().all(|s| s.as_ref().is_none_or(|s| !s.kept));
            let (tr, te) = (board_train.accuracy(&board_train.vote()?), board_test.accuracy(&board_test.vote()?));
            records.push(record(t, tr, te, &alphas, 0));
            Ok(())
        })?;
        let checkpoint = SessionCheckpoint {
            round: rounds,
            pending: None,
            components: agents.iter().map(|a| a.components.clone()).collect(),
            ledger: data.ledger.clone(),
            transcript: [0; 32],
            holdout_history: Vec::new(),
            stop: stopped.then_some(StopReason::NoBetterThanChance),
        };
        let stop = checkpoint.stop;
        (data.ledger, checkpoint, stop)
    } else {
        let (rule, order) = match arm {
            Arm::Variant(v) => (v.alpha_rule().expect("interchange variant"), v.chain_order(data.seed)),
            _ => (AlphaRule::Chain, ChainOrder::Identity),
        };
        let holdout = match (cfg.stop, holdout) {
            (StopCriterion::Holdout { patience, .. }, Some(h)) => Some(HoldoutStop {
                patience,
                labels: h[0].labels.clone(),
                sample_ids: h[0].sample_ids.clone(),
                slices: h.into_iter().map(|d| d.features).collect(),
            }),
            _ => None,
        };
        let opts = SessionOptions {
            rule,
            order,
            max_rounds: cfg.max_rounds,
            lean_messages: cfg.lean_messages && m > 1,
            holdout,
        };
        let mut session = Session::with_ledger(agents, transport, opts, data.ledger)?;
        while let Some(rep) = session.step()? {
            board_train.add_round(session.agents(), rep.round);
            board_test.add_round(session.agents(), rep.round);
            let mut alphas = vec![None; m];
            for s in &rep.steps {
                alphas[s.agent] = Some(s.alpha);
            }
            let (tr, te) = (board_train.accuracy(&board_train.joint()?), board_test.accuracy(&board_test.joint()?));
            records.push(record(rep.round, tr, te, &alphas, session.ledger().total_of(MessageKind::Round)));
        }
        // The prediction stage over the transport must agree with the
        // incremental evaluation.
        let slices: Vec<&FeatureMatrix> = test.iter().map(|d| &d.features).collect();
        let pred = session.predict(&slices, &test[0].sample_ids)?;
        if pred.labels() != board_test.joint()?.as_slice() {
            return Err(ProtocolError::Step("prediction stage disagrees with the per-round evaluation".into()).into());
        }
        let mut checkpoint = session.checkpoint().clone();
        checkpoint.ledger = session.ledger().clone();
        (session.ledger().clone(), checkpoint, session.stop_reason())
    };

    let cost = measure_cost(&ledger, &raw);
    Ok(ReplicationResult {
        replication: k,
        records,
        ledger,
        cost,
        stop_reason,
        checkpoint,
        seconds: started.elapsed().as_secs_f64(),
    })
}

fn mean(values: impl Iterator<Item = f64>) -> f64 {
    let v: Vec<f64> = values.collect();
    mean_and_stderr(&v).0
}

fn mean_opt(values: impl Iterator<Item = Option<f64>>) -> Option<f64> {
    let v: Option<Vec<f64>> = values.collect();
    v.filter(|v| !v.is_empty()).map(|v| mean_and_stderr(&v).0)
}

fn summarize(
    cfg: &ExperimentConfig,
    arm: Arm,
    digest: &str,
    reps: &[ReplicationResult],
    failures: &[ReplicationFailure],
) -> RunSummary {
    let rounds = reps.iter().map(ReplicationResult::stop_round).max().unwrap_or(0);
    let all: Vec<&MetricsRecord> = reps.iter().flat_map(|r| &r.records).collect();
    let test = carried_forward(&all, rounds, |r| r.test_accuracy);
    let train = carried_forward(&all, rounds, |r| r.train_accuracy);
    let bytes = carried_forward(&all, rounds, |r| r.cumulative_bytes as f64);
    let ratio = carried_forward(&all, rounds, |r| {
        if r.raw_transfer_bytes == 0 { f64::NAN } else { r.cumulative_bytes as f64 / r.raw_transfer_bytes as f64 }
    });
    let column = |s: &[Vec<f64>], t: usize| s.iter().map(|v| v[t]).collect::<Vec<_>>();
    let per_round = (0..rounds as usize)
        .map(|t| {
            let (mt, st) = mean_and_stderr(&column(&test, t));
            let (mr, sr) = mean_and_stderr(&column(&train, t));
            let mb = mean_and_stderr(&column(&bytes, t)).0;
            let rc = column(&ratio, t);
            RoundSummary {
                round: t as u32 + 1,
                mean_test_accuracy: mt,
                se_test_accuracy: st,
                mean_train_accuracy: mr,
                se_train_accuracy: sr,
                mean_cumulative_bytes: mb,
                mean_cost_ratio: rc.iter().all(|v| v.is_finite()).then(|| mean_and_stderr(&rc).0),
            }
        })
        .collect();
    let finals: Vec<f64> = reps.iter().map(ReplicationResult::final_test_accuracy).collect();
    let (final_test_accuracy, final_test_se) = mean_and_stderr(&finals);
    RunSummary {
        name: cfg.name.clone(),
        config_digest: digest.to_string(),
        variant: arm.name().to_string(),
        replications_requested: cfg.replications,
        replications_completed: reps.len(),
        failures: failures.iter().map(|f| (f.replication, f.message.clone())).collect(),
        stop_rounds: reps.iter().map(ReplicationResult::stop_round).collect(),
        final_test_accuracy,
        final_test_se,
        mean_protocol_bytes: mean(reps.iter().map(|r| r.cost.protocol_bytes as f64)),
        raw_transfer_bytes: mean(reps.iter().map(|r| r.cost.baseline_bytes as f64)),
        mean_reduction_factor: mean_opt(reps.iter().map(|r| r.cost.reduction_factor)),
        mean_cost_ratio: mean_opt(reps.iter().map(|r| r.cost.cost_ratio)),
        rounds: per_round,
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> Error + '_ {
    move |source| ConfigError::Io { path: path.to_owned(), source }.into()
}

/// Writes `metrics-<arm>.csv`, `summary-<arm>.json`, `timings-<arm>.csv`,
/// one session log and one model checkpoint per replication.
fn write_outputs(dir: &Path, out: &ExperimentOutcome) -> Result<()> {
    let arm = out.arm.name();
    let sessions = dir.join(format!("sessions-{arm}"));
    let models = dir.join(format!("models-{arm}"));
    for d in [dir, &sessions, &models] {
        fs::create_dir_all(d).map_err(io_err(d))?;
    }
    write_metrics(&dir.join(format!("metrics-{arm}.csv")), &out.records())?;

    let summary = dir.join(format!("summary-{arm}.json"));
    let json = serde_json::to_string_pretty(&out.summary).expect("summary serializes");
    fs::write(&summary, json + "\n").map_err(io_err(&summary))?;

    let timings = dir.join(format!("timings-{arm}.csv"));
    let mut w = csv::Writer::from_path(&timings).map_err(|e| ConfigError::Csv { path: timings.clone(), source: e })?;
    w.write_record(["replication", "rounds", "seconds"]).map_err(|e| ConfigError::Csv { path: timings.clone(), source: e })?;
    for r in &out.replications {
        w.write_record([r.replication.to_string(), r.stop_round().to_string(), format!("{:.6}", r.seconds)])
            .map_err(|e| ConfigError::Csv { path: timings.clone(), source: e })?;
    }
    w.flush().map_err(io_err(&timings))?;

    for r in &out.replications {
        let path = sessions.join(format!("rep-{:03}.jsonl", r.replication));
        let mut log = SessionLog::create(&path).map_err(io_err(&path))?;
        for e in r.ledger.entries() {
            let rec = SessionLogRecord { round: e.round, sender: e.sender, receiver: e.receiver, kind: e.kind, bytes: e.bytes };
            log.append(&rec).map_err(io_err(&path))?;
        }
        log.flush().map_err(io_err(&path))?;
        let path = models.join(format!("rep-{:03}.ckpt", r.replication));
        fs::write(&path, r.checkpoint.to_bytes()?).map_err(io_err(&path))?;
    }
    Ok(())
}
