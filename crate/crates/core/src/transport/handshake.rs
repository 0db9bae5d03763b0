use std::collections::{BTreeSet, HashMap};

use super::{deserialize, serialize, AlignmentHandshake, CostLedger, Message, MessageKind, ProtocolError, Transport};
use crate::data::Dataset;

/// IDs present in every list, sorted.
pub fn intersect_ids<S: AsRef<str>>(lists: &[&[S]]) -> Vec<String> {
    let Some((first, rest)) = lists.split_first() else { return Vec::new() };
    let mut common: BTreeSet<&str> = first.iter().map(AsRef::as_ref).collect();
    for list in rest {
        let other: BTreeSet<&str> = list.iter().map(AsRef::as_ref).collect();
        common.retain(|id| other.contains(id));
    }
    common.into_iter().map(str::to_owned).collect()
}

fn restrict(ds: &Dataset, ids: &[String]) -> Result<Dataset, ProtocolError> {
    let index: HashMap<&str, usize> = ds.sample_ids.iter().enumerate().map(|(i, id)| (id.as_str(), i)).collect();
    let rows: Vec<usize> = ids.iter().map(|id| index[id.as_str()]).collect();
    ds.select_rows(&rows).map_err(|e| ProtocolError::Step(e.to_string()))
}

fn expect_handshake(frame: &[u8]) -> Result<AlignmentHandshake, ProtocolError> {
    match deserialize(frame)? {
        Message::Handshake(h) => Ok(h),
        other => Err(ProtocolError::OutOfOrder { expected: "handshake".into(), found: format!("{:?}", other.kind()) }),
    }
}

/// ID-alignment exchange. Every assisting agent sends its IDs to the lead
/// (agent 0), which replies with the sorted intersection and a label
/// checksum over it. Each agent keeps only the agreed rows, in that order,
/// and verifies its own labels against the checksum.
pub fn align<T: Transport + ?Sized>(
    datasets: &[Dataset],
    transport: &mut T,
    ledger: &mut CostLedger,
) -> Result<Vec<Dataset>, ProtocolError> {
    let m = datasets.len();
    if m == 0 {
        return Err(ProtocolError::Step("alignment needs at least one agent".into()));
    }
    for (a, ds) in datasets.iter().enumerate().skip(1) {
        let hello = AlignmentHandshake {
            sender: a as u32,
            label_digest: ds.alignment_digest(),
            sample_ids: ds.sample_ids.clone(),
        };
        let frame = serialize(&Message::Handshake(hello))?;
        ledger.record(0, a as u32, 0, MessageKind::Handshake, frame.len());
        transport.send(a, 0, &frame)?;
    }
    let mut offers: Vec<AlignmentHandshake> =
        (1..m).map(|_| transport.recv(0).and_then(|f| expect_handshake(&f))).collect::<Result<_, _>>()?;
    offers.sort_by_key(|h| h.sender);
    if offers.iter().map(|h| h.sender as usize).ne(1..m) {
        return Err(ProtocolError::Malformed("handshake senders do not match the agent set".into()));
    }

    let mut lists: Vec<&[String]> = vec![&datasets[0].sample_ids];
    lists.extend(offers.iter().map(|h| h.sample_ids.as_slice()));
    let common = intersect_ids(&lists);
    if common.is_empty() {
        return Err(ProtocolError::NoOverlap);
    }
    let lead = restrict(&datasets[0], &common)?;
    let reply = AlignmentHandshake { sender: 0, label_digest: lead.alignment_digest(), sample_ids: common };
    let frame = serialize(&Message::Handshake(reply))?;
    for a in 1..m {
        ledger.record(0, 0, a as u32, MessageKind::Handshake, frame.len());
        transport.send(0, a, &frame)?;
    }

    let mut aligned = vec![lead];
    for (a, ds) in datasets.iter().enumerate().skip(1) {
        let agreed = expect_handshake(&transport.recv(a)?)?;
        let mine = restrict(ds, &agreed.sample_ids)?;
        if mine.alignment_digest() != agreed.label_digest {
            return Err(ProtocolError::LabelMismatch { agent: a as u32 });
        }
        aligned.push(mine);
    }
    Ok(aligned)
}
