use serde::{Deserialize, Serialize};

use super::agent::{initial_message, AgentState, AlphaRule, Step};
use super::rounds::ChainOrder;
use crate::error::Result;

/// Protocol flavours compared in the experiments.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    /// Fixed chain, stagewise-optimal weights.
    Ascii,
    /// Fixed chain, each agent weighs its model by its own accuracy.
    AsciiSimple,
    /// Stagewise-optimal weights, chain order reshuffled every round.
    AsciiRandom,
    /// No interchange: independent boosting per agent, plurality vote.
    EnsembleAdaboost,
}

impl Variant {
    pub const ALL: [Variant; 4] = [Variant::Ascii, Variant::AsciiSimple, Variant::AsciiRandom, Variant::EnsembleAdaboost];

    pub fn name(self) -> &'static str {
        match self {
            Variant::Ascii => "ascii",
            Variant::AsciiSimple => "ascii_simple",
            Variant::AsciiRandom => "ascii_random",
            Variant::EnsembleAdaboost => "ensemble_adaboost",
        }
    }

    /// `None` for the variant that never interchanges.
    pub fn alpha_rule(self) -> Option<AlphaRule> {
        match self {
            Variant::Ascii | Variant::AsciiRandom => Some(AlphaRule::Chain),
            Variant::AsciiSimple => Some(AlphaRule::Simple),
            Variant::EnsembleAdaboost => None,
        }
    }

    pub fn chain_order(self, seed: u64) -> ChainOrder {
        match self {
            Variant::AsciiRandom => ChainOrder::Shuffled { seed },
            _ => ChainOrder::Identity,
        }
    }
}

/// Single-agent multiclass boosting: the chain with one agent.
pub fn run_samme(agent: &mut AgentState, max_rounds: u32) -> Result<Vec<Step>> {
    let mut msg = initial_message(agent.num_samples(), agent.index);
    let mut steps = Vec::new();
    for t in 1..=max_rounds {
        let step = agent.act(&msg, t, true, AlphaRule::Chain, false)?;
        let stop = !step.kept;
        msg = step.outgoing.clone();
        steps.push(step);
        if stop {
            break;
        }
    }
    Ok(steps)
}

/// Every agent boosts alone on its own slice. `on_round` sees the agents
/// after each round; agents that stopped early simply stop adding models.
pub fn run_ensemble_adaboost(
    agents: &mut [AgentState],
    max_rounds: u32,
    mut on_round: impl FnMut(u32, &[AgentState], &[Option<Step>]) -> Result<()>,
) -> Result<u32> {
    let mut msgs: Vec<_> = agents.iter().map(|a| Some(initial_message(a.num_samples(), a.index))).collect();
    let mut rounds = 0;
    for t in 1..=max_rounds {
        if msgs.iter().all(Option::is_none) {
            break;
        }
        let mut steps = Vec::with_capacity(agents.len());
        for (agent, slot) in agents.iter_mut().zip(msgs.iter_mut()) {
            let Some(msg) = slot.as_ref() else {
                steps.push(None);
                continue;
            };
            let step = agent.act(msg, t, true, AlphaRule::Chain, false)?;
            *slot = step.kept.then(|| step.outgoing.clone());
            steps.push(Some(step));
        }
        rounds = t;
        on_round(t, agents, &steps)?;
    }
    Ok(rounds)
}
