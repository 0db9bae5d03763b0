//! Round orchestration: agents, the interchange chain, prediction and the
//! protocol variants.

mod agent;
mod predict;
mod rounds;
mod session;
mod variant;

pub use agent::{initial_message, AgentState, AlphaRule, EnsembleComponent, Step};
pub use predict::{combine, partial_scores, plurality_vote, predict, PartialScoreMatrix};
pub use rounds::{run_round_chain, run_round_two_agent, ChainOrder, RoundOutcome};
pub use session::{HoldoutStop, RoundReport, Session, SessionCheckpoint, SessionOptions, StepSummary};
pub use variant::{run_ensemble_adaboost, run_samme, Variant};
