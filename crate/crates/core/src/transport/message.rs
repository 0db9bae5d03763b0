//! Wire messages and their canonical binary framing.
//!
//! Every frame is a 4-byte big-endian length (counting the bytes after it),
//! a 1-byte kind tag, a 2-byte version and the payload. Integers are
//! big-endian, reals little-endian doubles, rewards packed eight per byte.

use std::fmt::Write as _;

use super::ProtocolError;
use crate::codec::{DecodeError, Reader, Writer};
use crate::weights::{IgnoranceVector, RewardVector, ScoreAccumulator};

pub const PROTOCOL_VERSION: u16 = 1;

/// Bytes in front of the payload: length prefix, kind tag, version.
pub const FRAME_HEADER_LEN: usize = 7;

/// Refuse frames larger than this before allocating for them.
pub const MAX_FRAME_LEN: usize = 1 << 30;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MessageKind {
    Round,
    Predict,
    Handshake,
}

impl MessageKind {
    pub(crate) fn tag(self) -> u8 {
        match self {
            MessageKind::Round => 1,
            MessageKind::Predict => 2,
            MessageKind::Handshake => 3,
        }
    }

    pub(crate) fn from_tag(tag: u8) -> Option<Self> {
        match tag {
            1 => Some(MessageKind::Round),
            2 => Some(MessageKind::Predict),
            3 => Some(MessageKind::Handshake),
            _ => None,
        }
    }
}

/// What one agent hands the next in the interchange chain.
#[derive(Debug, Clone, PartialEq)]
pub struct RoundMessage {
    pub round: u32,
    pub sender: u32,
    pub alpha: f64,
    pub terminal: bool,
    pub ignorance: IgnoranceVector,
    pub reward: RewardVector,
    /// Within-round partial scores; absent in lean mode.
    pub accumulator: Option<ScoreAccumulator>,
}

impl RoundMessage {
    pub fn len(&self) -> usize {
        self.ignorance.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ignorance.is_empty()
    }

    /// Exact frame size for `n` samples.
    pub fn frame_len(n: usize, with_accumulator: bool) -> usize {
        FRAME_HEADER_LEN + 22 + 8 * n + n.div_ceil(8) + if with_accumulator { 8 * n } else { 0 }
    }
}

/// Partial class scores an agent computed for prediction rows.
#[derive(Debug, Clone, PartialEq)]
pub struct PredictMessage {
    pub sender: u32,
    pub sample_ids: Vec<String>,
    pub num_classes: u32,
    /// Row-major, one row of `num_classes` scores per ID.
    pub scores: Vec<f64>,
}

/// Sample IDs an agent can offer plus a checksum of their labels.
#[derive(Debug, Clone, PartialEq)]
pub struct AlignmentHandshake {
    pub sender: u32,
    pub label_digest: u64,
    pub sample_ids: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Message {
    Round(RoundMessage),
    Predict(PredictMessage),
    Handshake(AlignmentHandshake),
}

impl Message {
    pub fn kind(&self) -> MessageKind {
        match self {
            Message::Round(_) => MessageKind::Round,
            Message::Predict(_) => MessageKind::Predict,
            Message::Handshake(_) => MessageKind::Handshake,
        }
    }
}

fn inconsistent(msg: String) -> ProtocolError {
    ProtocolError::Malformed(msg)
}

fn len_u32(n: usize, what: &str) -> Result<u32, ProtocolError> {
    u32::try_from(n).map_err(|_| inconsistent(format!("{what} count {n} exceeds the u32 range")))
}

pub fn serialize(msg: &Message) -> Result<Vec<u8>, ProtocolError> {
    let mut w = Writer::new();
    match msg {
        Message::Round(m) => {
            let n = m.ignorance.len();
            if m.reward.len() != n || m.accumulator.as_ref().is_some_and(|a| a.len() != n) {
                return Err(inconsistent(format!(
                    "round message fields disagree on n: ignorance {n}, reward {}, accumulator {:?}",
                    m.reward.len(),
                    m.accumulator.as_ref().map(ScoreAccumulator::len)
                )));
            }
            w.u32(m.round).u32(m.sender).f64(m.alpha).u8(u8::from(m.terminal)).u32(len_u32(n, "sample")?);
            w.f64s(m.ignorance.as_slice()).bits(m.reward.as_slice());
            match &m.accumulator {
                Some(acc) => w.u8(1).f64s(&acc.scores),
                None => w.u8(0),
            };
        }
        Message::Predict(m) => {
            let n = m.sample_ids.len();
            if m.scores.len() != n * m.num_classes as usize {
                return Err(inconsistent(format!(
                    "predict message has {} scores for {n} ids x {} classes",
                    m.scores.len(),
                    m.num_classes
                )));
            }
            w.u32(m.sender).u32(len_u32(n, "sample")?).u32(m.num_classes);
            for id in &m.sample_ids {
                w.str(id);
            }
            w.f64s(&m.scores);
        }
        Message::Handshake(m) => {
            w.u32(m.sender).u64(m.label_digest).u32(len_u32(m.sample_ids.len(), "sample")?);
            for id in &m.sample_ids {
                w.str(id);
            }
        }
    }
    let payload = w.finish();
    let body = 3 + payload.len();
    let mut frame = Writer::new();
    frame.u32(len_u32(body, "frame byte")?).u8(msg.kind().tag()).u16(PROTOCOL_VERSION).bytes(&payload);
    Ok(frame.finish())
}

pub fn deserialize(frame: &[u8]) -> Result<Message, ProtocolError> {
    let mut r = Reader::new(frame);
    let declared = r.u32()? as usize;
    if declared != r.remaining() {
        return Err(ProtocolError::Decode(DecodeError {
            offset: 0,
            reason: format!("length prefix says {declared} bytes, frame has {}", r.remaining()),
        }));
    }
    let tag_at = r.position();
    let tag = r.u8()?;
    let kind = MessageKind::from_tag(tag)
        .ok_or_else(|| DecodeError { offset: tag_at, reason: format!("unknown message kind {tag}") })?;
    let version_at = r.position();
    let version = r.u16()?;
    if version != PROTOCOL_VERSION {
        return Err(DecodeError { offset: version_at, reason: format!("unsupported protocol version {version}") }.into());
    }
    let msg = match kind {
        MessageKind::Round => {
            let round = r.u32()?;
            let sender = r.u32()?;
            let alpha = r.f64()?;
            let flag_at = r.position();
            let terminal = match r.u8()? {
                0 => false,
                1 => true,
                b => return Err(DecodeError { offset: flag_at, reason: format!("terminal flag {b}") }.into()),
            };
            let n = r.u32()? as usize;
            r.len_check(n, 8)?;
            let w_at = r.position();
            let ignorance = IgnoranceVector::from_normalized(r.f64s(n)?)
                .map_err(|e| DecodeError { offset: w_at, reason: e.to_string() })?;
            let reward = RewardVector::new(r.bits(n)?);
            let acc_at = r.position();
            let accumulator = match r.u8()? {
                0 => None,
                1 => Some(ScoreAccumulator { scores: r.f64s(n)?, round }),
                b => return Err(DecodeError { offset: acc_at, reason: format!("accumulator flag {b}") }.into()),
            };
            Message::Round(RoundMessage { round, sender, alpha, terminal, ignorance, reward, accumulator })
        }
        MessageKind::Predict => {
            let sender = r.u32()?;
            let n = r.u32()? as usize;
            let num_classes = r.u32()?;
            r.len_check(n, 4)?;
            let sample_ids = (0..n).map(|_| r.str()).collect::<Result<Vec<_>, _>>()?;
            let count = n.checked_mul(num_classes as usize).ok_or_else(|| r.error("score count overflows"))?;
            let scores = r.f64s(count)?;
            Message::Predict(PredictMessage { sender, sample_ids, num_classes, scores })
        }
        MessageKind::Handshake => {
            let sender = r.u32()?;
            let label_digest = r.u64()?;
            let n = r.u32()? as usize;
            r.len_check(n, 4)?;
            let sample_ids = (0..n).map(|_| r.str()).collect::<Result<Vec<_>, _>>()?;
            Message::Handshake(AlignmentHandshake { sender, label_digest, sample_ids })
        }
    };
    r.expect_end()?;
    Ok(msg)
}

/// Human-readable rendering for inspection. Never used for cost accounting.
pub fn debug_dump(msg: &Message) -> String {
    let mut s = String::new();
    match msg {
        Message::Round(m) => {
            let _ = writeln!(s, "round t={} sender={} alpha={} terminal={} n={}", m.round, m.sender, m.alpha, m.terminal, m.len());
            for i in 0..m.len() {
                let _ = write!(s, "  {i}: w={:.6e} r={}", m.ignorance.as_slice()[i], u8::from(m.reward.get(i)));
                if let Some(acc) = &m.accumulator {
                    let _ = write!(s, " acc={:.6}", acc.scores[i]);
                }
                s.push('\n');
            }
        }
        Message::Predict(m) => {
            let _ = writeln!(s, "predict sender={} n={} K={}", m.sender, m.sample_ids.len(), m.num_classes);
            let k = m.num_classes as usize;
            for (i, id) in m.sample_ids.iter().enumerate() {
                let _ = writeln!(s, "  {id}: {:?}", &m.scores[i * k..(i + 1) * k]);
            }
        }
        Message::Handshake(m) => {
            let _ = writeln!(s, "handshake sender={} digest={:016x} n={}", m.sender, m.label_digest, m.sample_ids.len());
            for id in &m.sample_ids {
                let _ = writeln!(s, "  {id}");
            }
        }
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    fn round(n: usize, acc: bool) -> RoundMessage {
        RoundMessage {
            round: 3,
            sender: 1,
            alpha: 0.75,
            terminal: false,
            ignorance: IgnoranceVector::uniform(n),
            reward: RewardVector::new((0..n).map(|i| i % 3 == 0).collect()),
            accumulator: acc.then(|| ScoreAccumulator { scores: (0..n).map(|i| i as f64 * 0.5).collect(), round: 3 }),
        }
    }

    #[test]
    fn frame_size_matches_layout() {
        for (n, acc) in [(0, true), (1, false), (9, true), (1000, true)] {
            let bytes = serialize(&Message::Round(round(n, acc))).unwrap();
            assert_eq!(bytes.len(), RoundMessage::frame_len(n, acc));
        }
        assert_eq!(RoundMessage::frame_len(1000, true), 16_154);
    }

    #[test]
    fn round_trip_and_corruption() {
        let msg = Message::Round(round(13, true));
        let bytes = serialize(&msg).unwrap();
        assert_eq!(deserialize(&bytes).unwrap(), msg);
        assert!(deserialize(&bytes[..bytes.len() - 1]).is_err());
        let mut bad = bytes.clone();
        bad[4] = 9;
        let err = deserialize(&bad).unwrap_err();
        assert!(err.to_string().contains("offset 4"), "{err}");
        let mut old = bytes;
        old[6] = 2;
        assert!(deserialize(&old).is_err());
    }

    #[test]
    fn mismatched_lengths_rejected() {
        let mut m = round(4, true);
        m.reward = RewardVector::new(vec![true; 3]);
        assert!(serialize(&Message::Round(m)).is_err());
    }

    #[test]
    fn predict_and_handshake_round_trip() {
        let p = Message::Predict(PredictMessage {
            sender: 2,
            sample_ids: vec!["a".into(), "é".into()],
            num_classes: 2,
            scores: vec![1.0, -1.0, 0.5, -0.5],
        });
        assert_eq!(deserialize(&serialize(&p).unwrap()).unwrap(), p);
        let h = Message::Handshake(AlignmentHandshake { sender: 0, label_digest: 42, sample_ids: vec!["x".into()] });
        assert_eq!(deserialize(&serialize(&h).unwrap()).unwrap(), h);
        assert!(debug_dump(&h).contains("digest=000000000000002a"));
    }
}
