use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::agent::{AgentState, AlphaRule, EnsembleComponent, Step};
use crate::error::{Error, Result};
use crate::seed::derive_seed;
use crate::transport::RoundMessage;
use crate::weights::IgnoranceVector;

/// Stream tag for per-round order permutations.
const ORDER_STREAM: u64 = 0x6f72_6465_72;

/// Which agent acts when within each round.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ChainOrder {
    /// 0, 1, ..., M-1 every round.
    Identity,
    /// The same permutation every round.
    Fixed { order: Vec<usize> },
    /// A fresh permutation per round derived from (seed, round).
    Shuffled { seed: u64 },
}

impl ChainOrder {
    pub fn order(&self, num_agents: usize, round: u32) -> Vec<usize> {
        match self {
            ChainOrder::Identity => (0..num_agents).collect(),
            ChainOrder::Fixed { order } => order.clone(),
            ChainOrder::Shuffled { seed } => {
                let mut o: Vec<usize> = (0..num_agents).collect();
                o.shuffle(&mut ChaCha8Rng::seed_from_u64(derive_seed(*seed, &[ORDER_STREAM, u64::from(round)])));
                o
            }
        }
    }

    pub fn validate(&self, num_agents: usize) -> Result<()> {
        if let ChainOrder::Fixed { order } = self {
            let mut sorted = order.clone();
            sorted.sort_unstable();
            if sorted != (0..num_agents).collect::<Vec<_>>() {
                return Err(Error::invalid(format!("order {order:?} is not a permutation of {num_agents} agents")));
            }
        }
        Ok(())
    }
}

/// Result of one pass through the chain.
#[derive(Debug, Clone, PartialEq)]
pub struct RoundOutcome {
    pub round: u32,
    pub steps: Vec<Step>,
    /// Components kept this round, in acting order.
    pub components: Vec<EnsembleComponent>,
    /// Message for the first agent of the next round.
    pub closing: RoundMessage,
}

impl RoundOutcome {
    pub fn next_ignorance(&self) -> &IgnoranceVector {
        &self.closing.ignorance
    }

    /// Some agent dropped its model; the run should end after this round.
    pub fn terminal(&self) -> bool {
        self.closing.terminal
    }
}

/// One round of the chain without any transport: each agent in `order`
/// receives the previous agent's message, acts, and hands on its own.
pub fn run_round_chain(
    agents: &mut [AgentState],
    order: &[usize],
    round: u32,
    incoming: RoundMessage,
    rule: AlphaRule,
) -> Result<RoundOutcome> {
    if order.is_empty() {
        return Err(Error::invalid("a round needs at least one agent"));
    }
    let mut msg = incoming;
    let mut steps = Vec::with_capacity(order.len());
    let mut components = Vec::new();
    for (pos, &a) in order.iter().enumerate() {
        let agent = agents.get_mut(a).ok_or_else(|| Error::invalid(format!("order names unknown agent {a}")))?;
        let step = agent.act(&msg, round, pos == 0, rule, false)?;
        if step.kept {
            components.push(agent.components.last().expect("kept step pushed a component").clone());
        }
        msg = step.outgoing.clone();
        steps.push(step);
    }
    Ok(RoundOutcome { round, steps, components, closing: msg })
}

/// Lead agent `a` then assisting agent `b` with the two-agent closed forms.
pub fn run_round_two_agent(a: &mut AgentState, b: &mut AgentState, round: u32, incoming: RoundMessage) -> Result<RoundOutcome> {
    let step_a = a.act(&incoming, round, true, AlphaRule::TwoAgent, false)?;
    let step_b = b.act(&step_a.outgoing, round, false, AlphaRule::TwoAgent, false)?;
    let mut components = Vec::new();
    if step_a.kept {
        components.push(a.components.last().expect("kept").clone());
    }
    if step_b.kept {
        components.push(b.components.last().expect("kept").clone());
    }
    let closing = step_b.outgoing.clone();
    Ok(RoundOutcome { round, steps: vec![step_a, step_b], components, closing })
}
