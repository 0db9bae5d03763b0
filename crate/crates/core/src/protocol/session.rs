//! The interchange run over a real transport: every hand-off is serialized,
//! metered, sent, received, decoded and sequence-checked.

use sha2::{Digest, Sha256};

use super::agent::{initial_message, AgentState, AlphaRule, EnsembleComponent};
use super::predict::{combine, PartialScoreMatrix};
use super::rounds::ChainOrder;
use crate::alpha::{should_stop, StopReason};
use crate::codec::{Reader, Writer};
use crate::encoding::ClassVector;
use crate::learners::{FeatureMatrix, TrainedWeakModel};
use crate::transport::{
    deserialize, serialize, CostLedger, Message, MessageKind, PredictMessage, ProtocolError, RoundMessage, Transport,
};

/// Early stopping on a held-out slice of the training rows.
#[derive(Debug, Clone)]
pub struct HoldoutStop {
    pub patience: usize,
    /// Holdout features per agent, row-aligned.
    pub slices: Vec<FeatureMatrix>,
    pub labels: ClassVector,
    pub sample_ids: Vec<String>,
}

#[derive(Debug, Clone)]
pub struct SessionOptions {
    pub rule: AlphaRule,
    pub order: ChainOrder,
    pub max_rounds: u32,
    /// Drop the score accumulator from messages.
    pub lean_messages: bool,
    pub holdout: Option<HoldoutStop>,
}

/// Per-agent summary of one round.
#[derive(Debug, Clone, PartialEq)]
pub struct StepSummary {
    pub agent: usize,
    pub alpha: f64,
    pub weighted_accuracy: f64,
    pub kept: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RoundReport {
    pub round: u32,
    pub order: Vec<usize>,
    pub steps: Vec<StepSummary>,
    /// Ignorance handed to the next round.
    pub closing: RoundMessage,
    pub holdout_error: Option<f64>,
    pub stop: Option<StopReason>,
}

/// Everything needed to continue after the last completed round.
#[derive(Debug, Clone, PartialEq)]
pub struct SessionCheckpoint {
    pub round: u32,
    pub pending: Option<RoundMessage>,
    pub components: Vec<Vec<EnsembleComponent>>,
    pub ledger: CostLedger,
    pub transcript: [u8; 32],
    pub holdout_history: Vec<f64>,
    pub stop: Option<StopReason>,
}

pub struct Session<T: Transport> {
    agents: Vec<AgentState>,
    transport: T,
    opts: SessionOptions,
    ledger: CostLedger,
    transcript: [u8; 32],
    round: u32,
    pending: Option<RoundMessage>,
    holdout_history: Vec<f64>,
    holdout_scores: Vec<PartialScoreMatrix>,
    stop: Option<StopReason>,
    checkpoint: SessionCheckpoint,
}

fn out_of_order(expected: String, found: String) -> ProtocolError {
    ProtocolError::OutOfOrder { expected, found }
}

impl<T: Transport> Session<T> {
    pub fn new(agents: Vec<AgentState>, transport: T, opts: SessionOptions) -> Result<Self, ProtocolError> {
        Self::with_ledger(agents, transport, opts, CostLedger::default())
    }

    /// Starts with an existing ledger, e.g. one holding the handshake.
    pub fn with_ledger(agents: Vec<AgentState>, transport: T, opts: SessionOptions, ledger: CostLedger) -> Result<Self, ProtocolError> {
        let m = agents.len();
        if m == 0 {
            return Err(ProtocolError::Step("a session needs at least one agent".into()));
        }
        opts.order.validate(m)?;
        let n = agents[0].num_samples();
        for (i, a) in agents.iter().enumerate() {
            if a.index != i {
                return Err(ProtocolError::Step(format!("agent at position {i} has index {}", a.index)));
            }
            if a.num_samples() != n || a.classes != agents[0].classes {
                return Err(ProtocolError::Step(format!("agent {i} is not aligned with agent 0")));
            }
        }
        if opts.lean_messages && opts.rule == AlphaRule::Chain {
            return Err(ProtocolError::Step("chain weights need the accumulator; lean messages drop it".into()));
        }
        if let Some(h) = &opts.holdout {
            if h.slices.len() != m || h.slices.iter().any(|s| s.num_rows() != h.labels.len()) || h.patience == 0 {
                return Err(ProtocolError::Step("holdout needs one aligned slice per agent and patience >= 1".into()));
            }
        }
        let holdout_scores = Self::fresh_holdout_scores(&opts, &agents);
        let mut s = Self {
            agents,
            transport,
            opts,
            ledger,
            transcript: [0; 32],
            round: 0,
            pending: None,
            holdout_history: Vec::new(),
            holdout_scores,
            stop: None,
            checkpoint: SessionCheckpoint {
                round: 0,
                pending: None,
                components: Vec::new(),
                ledger: CostLedger::default(),
                transcript: [0; 32],
                holdout_history: Vec::new(),
                stop: None,
            },
        };
        s.checkpoint = s.snapshot();
        Ok(s)
    }

    fn fresh_holdout_scores(opts: &SessionOptions, agents: &[AgentState]) -> Vec<PartialScoreMatrix> {
        let Some(h) = &opts.holdout else { return Vec::new() };
        agents
            .iter()
            .map(|a| {
                let mut p = PartialScoreMatrix::zeros(a.index, h.labels.len(), a.classes.num_classes());
                for c in &a.components {
                    p.add_component(c, &h.slices[a.index]);
                }
                p
            })
            .collect()
    }

    /// Continues from a checkpoint on a fresh transport. `agents` supplies the
    /// private data; their components are replaced by the checkpoint's.
    pub fn resume(
        mut agents: Vec<AgentState>,
        transport: T,
        opts: SessionOptions,
        checkpoint: SessionCheckpoint,
    ) -> Result<Self, ProtocolError> {
        if checkpoint.components.len() != agents.len() {
            return Err(ProtocolError::Step(format!(
                "checkpoint holds {} agents, {} supplied",
                checkpoint.components.len(),
                agents.len()
            )));
        }
        for (a, comps) in agents.iter_mut().zip(&checkpoint.components) {
            a.components = comps.clone();
        }
        let mut s = Self::with_ledger(agents, transport, opts, checkpoint.ledger.clone())?;
        s.round = checkpoint.round;
        s.pending = checkpoint.pending.clone();
        s.transcript = checkpoint.transcript;
        s.holdout_history = checkpoint.holdout_history.clone();
        s.stop = checkpoint.stop;
        s.checkpoint = checkpoint;
        Ok(s)
    }

    fn snapshot(&self) -> SessionCheckpoint {
        SessionCheckpoint {
            round: self.round,
            pending: self.pending.clone(),
            components: self.agents.iter().map(|a| a.components.clone()).collect(),
            ledger: self.ledger.clone(),
            transcript: self.transcript,
            holdout_history: self.holdout_history.clone(),
            stop: self.stop,
        }
    }

    pub fn agents(&self) -> &[AgentState] {
        &self.agents
    }

    pub fn ledger(&self) -> &CostLedger {
        &self.ledger
    }

    pub fn rounds_completed(&self) -> u32 {
        self.round
    }

    pub fn stop_reason(&self) -> Option<StopReason> {
        self.stop
    }

    /// State after the last completed round.
    pub fn checkpoint(&self) -> &SessionCheckpoint {
        &self.checkpoint
    }

    /// Chained SHA-256 over every frame sent, in order.
    pub fn transcript_digest(&self) -> [u8; 32] {
        self.transcript
    }

    pub fn is_finished(&self) -> bool {
        self.stop.is_some() || self.round >= self.opts.max_rounds
    }

    pub fn into_agents(self) -> Vec<AgentState> {
        self.agents
    }

    fn transmit(&mut self, from: usize, to: usize, round: u32, msg: Message) -> Result<Message, ProtocolError> {
        let frame = serialize(&msg)?;
        self.ledger.record(round, from as u32, to as u32, msg.kind(), frame.len());
        let mut h = Sha256::new();
        h.update(self.transcript);
        h.update(&frame);
        self.transcript = h.finalize().into();
        self.transport.send(from, to, &frame)?;
        deserialize(&self.transport.recv(to)?)
    }

    /// Hands a round message from one agent to the next. Self-hand-offs stay
    /// in memory and cost nothing.
    fn deliver(&mut self, from: usize, to: usize, round: u32, msg: RoundMessage) -> Result<RoundMessage, ProtocolError> {
        if from == to {
            return Ok(msg);
        }
        match self.transmit(from, to, round, Message::Round(msg))? {
            Message::Round(m) if m.round == round && m.sender == from as u32 => Ok(m),
            Message::Round(m) => Err(out_of_order(
                format!("round {round} from agent {from}"),
                format!("round {} from agent {}", m.round, m.sender),
            )),
            other => Err(out_of_order("round message".into(), format!("{:?} message", other.kind()))),
        }
    }

    /// Runs one round. Returns `None` once the session is finished.
    pub fn step(&mut self) -> Result<Option<RoundReport>, ProtocolError> {
        if self.is_finished() {
            return Ok(None);
        }
        let m = self.agents.len();
        let t = self.round + 1;
        let order = self.opts.order.order(m, t);
        let rule = self.opts.rule;
        let lean = self.opts.lean_messages;
        let mut msg = match self.pending.take() {
            Some(p) => p,
            None => {
                let mut init = initial_message(self.agents[0].num_samples(), order[0]);
                if lean {
                    init.accumulator = None;
                }
                init
            }
        };
        let mut steps = Vec::with_capacity(m);
        let mut first_step = None;
        for (pos, &a) in order.iter().enumerate() {
            if pos > 0 {
                msg = self.deliver(order[pos - 1], a, t, msg)?;
            }
            let step = self.agents[a].act(&msg, t, pos == 0, rule, lean)?;
            if pos == 0 {
                first_step = Some((step.weighted_accuracy, step.alpha));
            }
            steps.push(StepSummary { agent: a, alpha: step.alpha, weighted_accuracy: step.weighted_accuracy, kept: step.kept });
            msg = step.outgoing;
        }
        let next_first = self.opts.order.order(m, t + 1)[0];
        let closing = self.deliver(order[m - 1], next_first, t, msg)?;

        let holdout_error = match self.opts.holdout.is_some() {
            true => Some(self.holdout_round(t)?),
            false => None,
        };
        if holdout_error.is_some() {
            self.holdout_history.push(holdout_error.expect("checked"));
        }
        let k = self.agents[0].classes.num_classes();
        let (r_first, a_first) = first_step.expect("at least one agent acted");
        let stop = if closing.terminal {
            Some(StopReason::NoBetterThanChance)
        } else {
            let patience = self.opts.holdout.as_ref().map_or(1, |h| h.patience);
            let history = self.opts.holdout.as_ref().map(|_| self.holdout_history.as_slice());
            should_stop(r_first, a_first, k, history, patience)
        };

        self.round = t;
        self.stop = stop;
        self.pending = Some(closing.clone());
        self.checkpoint = self.snapshot();
        Ok(Some(RoundReport { round: t, order, steps, closing, holdout_error, stop }))
    }

    /// Runs to completion and returns every round's report.
    pub fn run(&mut self) -> Result<Vec<RoundReport>, ProtocolError> {
        let mut out = Vec::new();
        while let Some(r) = self.step()? {
            out.push(r);
        }
        Ok(out)
    }

    /// Assisting agents send their holdout scores to the lead, which sums
    /// them and measures the error.
    fn holdout_round(&mut self, t: u32) -> Result<f64, ProtocolError> {
        let h = self.opts.holdout.clone().expect("holdout configured");
        for a in 0..self.agents.len() {
            for c in self.agents[a].components.iter().filter(|c| c.round == t) {
                self.holdout_scores[a].add_component(c, &h.slices[a]);
            }
        }
        let parts = self.exchange_scores(t, &self.holdout_scores.clone(), &h.sample_ids)?;
        let pred = combine(&parts)?;
        let wrong = pred.iter().zip(h.labels.labels()).filter(|(p, c)| p != c).count();
        Ok(wrong as f64 / h.labels.len().max(1) as f64)
    }

    fn exchange_scores(
        &mut self,
        round: u32,
        local: &[PartialScoreMatrix],
        ids: &[String],
    ) -> Result<Vec<PartialScoreMatrix>, ProtocolError> {
        let mut parts = vec![local[0].clone()];
        for p in &local[1..] {
            let msg = Message::Predict(PredictMessage {
                sender: p.agent as u32,
                sample_ids: ids.to_vec(),
                num_classes: p.num_classes as u32,
                scores: p.scores.clone(),
            });
            match self.transmit(p.agent, 0, round, msg)? {
                Message::Predict(r) if r.sender == p.agent as u32 && r.sample_ids == ids => parts.push(PartialScoreMatrix {
                    agent: p.agent,
                    num_classes: r.num_classes as usize,
                    scores: r.scores,
                }),
                other => {
                    return Err(out_of_order(format!("scores from agent {}", p.agent), format!("{:?} message", other.kind())))
                }
            }
        }
        Ok(parts)
    }

    /// Prediction stage: every agent scores its own slice of the new rows and
    /// the assisting agents send their scores to the lead.
    pub fn predict(&mut self, slices: &[&FeatureMatrix], sample_ids: &[String]) -> Result<ClassVector, ProtocolError> {
        if slices.len() != self.agents.len() {
            return Err(ProtocolError::Step(format!(
                "{} feature slices for {} agents",
                slices.len(),
                self.agents.len()
            )));
        }
        if slices.iter().any(|s| s.num_rows() != sample_ids.len()) {
            return Err(ProtocolError::Step("every agent must supply a slice for every prediction row".into()));
        }
        let k = self.agents[0].classes.num_classes();
        let local: Vec<PartialScoreMatrix> = self
            .agents
            .iter()
            .zip(slices)
            .map(|(a, x)| super::predict::partial_scores(a.index, &a.components, x, k))
            .collect();
        let parts = self.exchange_scores(self.round, &local, sample_ids)?;
        Ok(ClassVector::new(combine(&parts)?, k)?)
    }
}

const CHECKPOINT_MAGIC: &[u8; 4] = b"ACP\0";
const CHECKPOINT_VERSION: u16 = 1;

impl SessionCheckpoint {
    pub fn to_bytes(&self) -> Result<Vec<u8>, ProtocolError> {
        let mut w = Writer::new();
        w.bytes(CHECKPOINT_MAGIC).u16(CHECKPOINT_VERSION).u32(self.round);
        match self.stop {
            None => w.u8(0).u64(0),
            Some(StopReason::NoBetterThanChance) => w.u8(1).u64(0),
            Some(StopReason::HoldoutStalled(k)) => w.u8(2).u64(k as u64),
        };
        w.bytes(&self.transcript);
        w.u32(self.holdout_history.len() as u32).f64s(&self.holdout_history);
        w.u32(self.ledger.entries().len() as u32);
        for e in self.ledger.entries() {
            w.u32(e.round).u32(e.sender).u32(e.receiver).u8(e.kind.tag()).u64(e.bytes);
        }
        match &self.pending {
            Some(p) => {
                let frame = serialize(&Message::Round(p.clone()))?;
                w.u8(1).u32(frame.len() as u32).bytes(&frame);
            }
            None => {
                w.u8(0);
            }
        }
        w.u32(self.components.len() as u32);
        for comps in &self.components {
            w.u32(comps.len() as u32);
            for c in comps {
                let model = c.model.to_bytes();
                w.u32(c.round).u32(c.agent as u32).f64(c.alpha).u32(model.len() as u32).bytes(&model);
            }
        }
        Ok(w.finish())
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, ProtocolError> {
        let mut r = Reader::new(bytes);
        if r.take(4)? != CHECKPOINT_MAGIC {
            return Err(Reader::new(bytes).error("not a session checkpoint").into());
        }
        let version = r.u16()?;
        if version != CHECKPOINT_VERSION {
            return Err(r.error(format!("unsupported checkpoint version {version}")).into());
        }
        let round = r.u32()?;
        let stop_at = r.position();
        let (tag, arg) = (r.u8()?, r.u64()?);
        let stop = match tag {
            0 => None,
            1 => Some(StopReason::NoBetterThanChance),
            2 => Some(StopReason::HoldoutStalled(arg as usize)),
            t => return Err(Reader::with_offset(bytes, stop_at).error(format!("unknown stop tag {t}")).into()),
        };
        let transcript: [u8; 32] = r.take(32)?.try_into().expect("took 32 bytes");
        let h = r.u32()? as usize;
        let holdout_history = r.f64s(h)?;
        let entries = r.u32()? as usize;
        r.len_check(entries, 21)?;
        let mut ledger = CostLedger::default();
        for _ in 0..entries {
            let (round, sender, receiver) = (r.u32()?, r.u32()?, r.u32()?);
            let kind_at = r.position();
            let kind = MessageKind::from_tag(r.u8()?)
                .ok_or_else(|| Reader::with_offset(bytes, kind_at).error("unknown message kind"))?;
            ledger.record(round, sender, receiver, kind, r.u64()? as usize);
        }
        let pending = match r.u8()? {
            0 => None,
            _ => {
                let len = r.u32()? as usize;
                match deserialize(r.take(len)?)? {
                    Message::Round(m) => Some(m),
                    _ => return Err(r.error("pending message is not a round message").into()),
                }
            }
        };
        let agents = r.u32()? as usize;
        r.len_check(agents, 4)?;
        let mut components = Vec::with_capacity(agents);
        for _ in 0..agents {
            let count = r.u32()? as usize;
            r.len_check(count, 20)?;
            let mut comps = Vec::with_capacity(count);
            for _ in 0..count {
                let (round, agent, alpha) = (r.u32()?, r.u32()? as usize, r.f64()?);
                let len = r.u32()? as usize;
                let model_at = r.position();
                let model = TrainedWeakModel::from_bytes(r.take(len)?).map_err(|mut e| {
                    e.offset += model_at;
                    e
                })?;
                comps.push(EnsembleComponent { round, agent, alpha, model });
            }
            components.push(comps);
        }
        r.expect_end()?;
        Ok(Self { round, pending, components, ledger, transcript, holdout_history, stop })
    }
}
