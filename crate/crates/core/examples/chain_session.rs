//! Four agents pass the ignorance chain over an in-process transport. Every
//! hand-off is serialized, metered and checked. Halfway through, the
//! session is checkpointed and resumed on a fresh transport.
//!
//! cargo run --example chain_session

use ascii_learn::data::{generate_blobs, partition_vertical, BlobSpec, PartitionStrategy};
use ascii_learn::protocol::{AgentState, AlphaRule, ChainOrder, Session, SessionCheckpoint, SessionOptions};
use ascii_learn::transport::{align, CostLedger, InProcessTransport, MessageKind};
use ascii_learn::{Result, WeakModelSpec};

fn main() -> Result<()> {
    let spec = BlobSpec { n: 1000, d_informative: 8, d_redundant: 0, num_classes: 6, cluster_std: 3.0, center_box: (-10.0, 10.0), seed: 21 };
    let slices = partition_vertical(&generate_blobs(&spec)?, &PartitionStrategy::Even, 4)?;

    let mut transport = InProcessTransport::new(4);
    let mut ledger = CostLedger::default();
    let slices = align(&slices, &mut transport, &mut ledger)?;
    let agents = || -> Result<Vec<AgentState>> {
        slices.iter().enumerate().map(|(i, d)| AgentState::from_dataset(i, d, WeakModelSpec::tree(2), 7)).collect()
    };
    let opts = SessionOptions { rule: AlphaRule::Chain, order: ChainOrder::Identity, max_rounds: 12, lean_messages: false, holdout: None };

    let mut session = Session::with_ledger(agents()?, transport, opts.clone(), ledger)?;
    for _ in 0..6 {
        if let Some(r) = session.step()? {
            let alphas: Vec<String> = r.steps.iter().map(|s| format!("{:.2}", s.alpha)).collect();
            println!("round {:2}  alphas [{}]", r.round, alphas.join(", "));
        }
    }
    let saved = session.checkpoint().to_bytes()?;
    drop(session);
    println!("checkpoint after round 6: {} bytes", saved.len());

    let ckpt = SessionCheckpoint::from_bytes(&saved)?;
    let mut session = Session::resume(agents()?, InProcessTransport::new(4), opts, ckpt)?;
    for r in session.run()? {
        let alphas: Vec<String> = r.steps.iter().map(|s| format!("{:.2}", s.alpha)).collect();
        println!("round {:2}  alphas [{}]  stop {:?}", r.round, alphas.join(", "), r.stop);
    }
    let l = session.ledger();
    println!(
        "round bytes {}  handshake bytes {}  transcript {:02x?}",
        l.total_of(MessageKind::Round),
        l.total_of(MessageKind::Handshake),
        &session.transcript_digest()[..6]
    );
    Ok(())
}
