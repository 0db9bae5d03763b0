//! The same chain over TCP on loopback. Each agent listens on its own port;
//! frames are identical to the in-process ones, so the cost ledger and the
//! fitted ensemble match an in-process run byte for byte.
//!
//! cargo run --example socket_session

use ascii_learn::data::{generate_blobs, partition_vertical, BlobSpec, PartitionStrategy};
use ascii_learn::protocol::{AgentState, AlphaRule, ChainOrder, Session, SessionOptions};
use ascii_learn::transport::{InProcessTransport, SocketTransport, Transport};
use ascii_learn::{Result, WeakModelSpec};

fn run<T: Transport>(transport: T) -> Result<(u64, [u8; 32], Vec<f64>)> {
    let spec = BlobSpec { n: 400, d_informative: 6, d_redundant: 0, num_classes: 3, cluster_std: 3.0, center_box: (-10.0, 10.0), seed: 2 };
    let slices = partition_vertical(&generate_blobs(&spec)?, &PartitionStrategy::Even, 3)?;
    let agents = slices
        .iter()
        .enumerate()
        .map(|(i, d)| AgentState::from_dataset(i, d, WeakModelSpec::tree(2), 5))
        .collect::<Result<Vec<_>>>()?;
    let opts = SessionOptions { rule: AlphaRule::Chain, order: ChainOrder::Identity, max_rounds: 8, lean_messages: false, holdout: None };
    let mut session = Session::new(agents, transport, opts)?;
    session.run()?;
    let alphas = session.agents().iter().flat_map(|a| a.components.iter().map(|c| c.alpha)).collect();
    Ok((session.ledger().total(), session.transcript_digest(), alphas))
}

fn main() -> Result<()> {
    let socket = SocketTransport::local(3)?;
    println!("agents listening on {:?}", socket.addresses());
    let over_tcp = run(socket)?;
    let in_process = run(InProcessTransport::new(3))?;
    println!("bytes over tcp {}  in process {}", over_tcp.0, in_process.0);
    assert_eq!(over_tcp, in_process);
    println!("transcripts and model weights match");
    Ok(())
}
