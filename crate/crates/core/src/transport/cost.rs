use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::MessageKind;

/// One frame as it went on the wire.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LedgerEntry {
    pub round: u32,
    pub sender: u32,
    pub receiver: u32,
    pub kind: MessageKind,
    pub bytes: u64,
}

/// Byte counts of every transmitted frame, in transmission order.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CostLedger {
    entries: Vec<LedgerEntry>,
}

impl CostLedger {
    pub fn record(&mut self, round: u32, sender: u32, receiver: u32, kind: MessageKind, bytes: usize) {
        self.entries.push(LedgerEntry { round, sender, receiver, kind, bytes: bytes as u64 });
    }

    pub fn entries(&self) -> &[LedgerEntry] {
        &self.entries
    }

    pub fn total(&self) -> u64 {
        self.entries.iter().map(|e| e.bytes).sum()
    }

    pub fn total_of(&self, kind: MessageKind) -> u64 {
        self.entries.iter().filter(|e| e.kind == kind).map(|e| e.bytes).sum()
    }

    /// Bytes sent by each agent.
    pub fn per_agent(&self) -> BTreeMap<u32, u64> {
        let mut out = BTreeMap::new();
        for e in &self.entries {
            *out.entry(e.sender).or_default() += e.bytes;
        }
        out
    }

    /// Bytes keyed by (round, sender, kind).
    pub fn by_key(&self) -> BTreeMap<(u32, u32, MessageKind), u64> {
        let mut out = BTreeMap::new();
        for e in &self.entries {
            *out.entry((e.round, e.sender, e.kind)).or_default() += e.bytes;
        }
        out
    }

    /// Cumulative round-message bytes after each of rounds `1..=rounds`.
    pub fn cumulative_round_bytes(&self, rounds: u32) -> Vec<u64> {
        let mut per_round = vec![0u64; rounds as usize];
        for e in self.entries.iter().filter(|e| e.kind == MessageKind::Round) {
            if (1..=rounds).contains(&e.round) {
                per_round[e.round as usize - 1] += e.bytes;
            }
        }
        per_round
            .iter()
            .scan(0u64, |acc, b| {
                *acc += b;
                Some(*acc)
            })
            .collect()
    }

    pub fn rounds(&self) -> u32 {
        self.entries.iter().filter(|e| e.kind == MessageKind::Round).map(|e| e.round).max().unwrap_or(0)
    }
}

/// Cost of pulling every assisting agent's raw features to the lead agent,
/// as 64-bit reals.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RawTransferBaseline {
    pub n_train: usize,
    /// Feature counts of agents 2..M.
    pub assisting_dims: Vec<usize>,
}

impl RawTransferBaseline {
    pub fn bytes(&self) -> u64 {
        self.assisting_dims.iter().map(|&p| (self.n_train * p * 8) as u64).sum()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CostReport {
    /// Round-message bytes: the interchange itself.
    pub protocol_bytes: u64,
    pub handshake_bytes: u64,
    pub predict_bytes: u64,
    pub baseline_bytes: u64,
    pub rounds: u32,
    /// `baseline / protocol`: how many times cheaper the protocol is.
    pub reduction_factor: Option<f64>,
    /// `protocol / baseline`.
    pub cost_ratio: Option<f64>,
    /// Cumulative protocol bytes after each round.
    pub bytes_by_round: Vec<u64>,
}

/// Compares the interchange traffic to shipping raw features. With no
/// completed round the ratios are undefined and left empty.
pub fn measure_cost(ledger: &CostLedger, baseline: &RawTransferBaseline) -> CostReport {
    let rounds = ledger.rounds();
    let protocol_bytes = ledger.total_of(MessageKind::Round);
    let baseline_bytes = baseline.bytes();
    let (reduction_factor, cost_ratio) = if protocol_bytes == 0 {
        (None, None)
    } else {
        (
            Some(baseline_bytes as f64 / protocol_bytes as f64),
            (baseline_bytes > 0).then(|| protocol_bytes as f64 / baseline_bytes as f64),
        )
    };
    CostReport {
        protocol_bytes,
        handshake_bytes: ledger.total_of(MessageKind::Handshake),
        predict_bytes: ledger.total_of(MessageKind::Predict),
        baseline_bytes,
        rounds,
        reduction_factor,
        cost_ratio,
        bytes_by_round: ledger.cumulative_round_bytes(rounds),
    }
}
