//! What actually crosses the wire in one hand-off: a length-prefixed binary
//! frame holding the round, the sender, the model weight, the ignorance
//! vector and a packed bit per row for the reward.
//!
//! cargo run --example wire_format

use ascii_learn::transport::{debug_dump, deserialize, serialize, Message, RoundMessage};
use ascii_learn::{IgnoranceVector, Result, RewardVector, ScoreAccumulator};

fn main() -> Result<()> {
    let msg = RoundMessage {
        round: 3,
        sender: 1,
        alpha: 0.75,
        terminal: false,
        ignorance: IgnoranceVector::from_weights(vec![1.0, 4.0, 2.0, 1.0, 2.0])?,
        reward: RewardVector::new(vec![true, false, true, true, false]),
        accumulator: Some(ScoreAccumulator { scores: vec![0.5, -0.25, 0.5, 0.5, -0.25], round: 3 }),
    };
    let frame = serialize(&Message::Round(msg.clone()))?;
    println!("{} bytes (formula: {})", frame.len(), RoundMessage::frame_len(5, true));
    for chunk in frame.chunks(16) {
        let hex: Vec<String> = chunk.iter().map(|b| format!("{b:02x}")).collect();
        println!("  {}", hex.join(" "));
    }
    print!("{}", debug_dump(&deserialize(&frame)?));
    assert_eq!(deserialize(&frame)?, Message::Round(msg));

    for n in [100, 1000, 10_000] {
        println!(
            "n = {n:6}: {:7} bytes with the accumulator, {:7} without",
            RoundMessage::frame_len(n, true),
            RoundMessage::frame_len(n, false)
        );
    }
    Ok(())
}
