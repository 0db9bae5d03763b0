//! Message schema, transports, ID alignment and transmission-cost metering.
//!
//! Both transports move the same canonical frames, so the cost ledger and
//! every downstream result are independent of which one carried them.

mod cost;
mod handshake;
mod inproc;
mod log;
mod message;
mod socket;

use std::io;

use sha2::{Digest, Sha256};
use thiserror::Error;

pub use cost::{measure_cost, CostLedger, CostReport, LedgerEntry, RawTransferBaseline};
pub use handshake::{align, intersect_ids};
pub use inproc::InProcessTransport;
pub use log::{read_session_log, SessionLog, SessionLogRecord};
pub use message::{
    debug_dump, deserialize, serialize, AlignmentHandshake, Message, MessageKind, PredictMessage, RoundMessage,
    FRAME_HEADER_LEN, MAX_FRAME_LEN, PROTOCOL_VERSION,
};
pub use socket::{SocketTransport, BIND_ADDR_ENV};

use crate::codec::DecodeError;

#[derive(Debug, Error)]
pub enum ProtocolError {
    #[error("malformed frame {0}")]
    Decode(#[from] DecodeError),

    #[error("malformed message: {0}")]
    Malformed(String),

    #[error("out of order: expected {expected}, received {found}")]
    OutOfOrder { expected: String, found: String },

    #[error("no overlapping samples")]
    NoOverlap,

    #[error("label digest mismatch for agent {agent}: samples are not aligned")]
    LabelMismatch { agent: u32 },

    #[error("connection to agent {agent} lost: {reason}")]
    ConnectionLost { agent: usize, reason: String },

    #[error("agent {agent} has no pending message")]
    NothingPending { agent: usize },

    #[error("protocol step failed: {0}")]
    Step(String),

    #[error("transport i/o: {0}")]
    Io(#[from] io::Error),
}

impl From<crate::Error> for ProtocolError {
    fn from(e: crate::Error) -> Self {
        match e {
            crate::Error::Protocol(p) => p,
            other => ProtocolError::Step(other.to_string()),
        }
    }
}

/// Point-to-point frame delivery between agents of one session. Frames from
/// one sender arrive in the order they were sent.
pub trait Transport {
    fn send(&mut self, from: usize, to: usize, frame: &[u8]) -> Result<(), ProtocolError>;

    /// Next frame addressed to agent `at`.
    fn recv(&mut self, at: usize) -> Result<Vec<u8>, ProtocolError>;
}

impl<T: Transport + ?Sized> Transport for Box<T> {
    fn send(&mut self, from: usize, to: usize, frame: &[u8]) -> Result<(), ProtocolError> {
        (**self).send(from, to, frame)
    }

    fn recv(&mut self, at: usize) -> Result<Vec<u8>, ProtocolError> {
        (**self).recv(at)
    }
}

/// First eight bytes of SHA-256 over the `(id, label)` sequence.
pub fn label_digest(ids: &[String], labels: &[usize]) -> u64 {
    let mut h = Sha256::new();
    for (id, &c) in ids.iter().zip(labels) {
        h.update((id.len() as u64).to_be_bytes());
        h.update(id.as_bytes());
        h.update((c as u64).to_be_bytes());
    }
    let out = h.finalize();
    u64::from_be_bytes(out[..8].try_into().expect("sha256 output is 32 bytes"))
}
