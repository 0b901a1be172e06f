//! Baseline policies: scripted, heuristic placement, model-predictive control and ReAct.

pub mod heuristic;
pub mod mpc;
pub mod react;
pub mod remote;
pub mod scripted;

use serde::{Deserialize, Serialize};

use crate::catalog::Catalog;
use crate::observe::Observation;
use crate::protocol::ActionError;
use crate::world::ParkState;

pub use heuristic::{heuristic_position, HeuristicWrapper, PlacementClass};
pub use mpc::{Mpc, OracleWorldModel, StubWorldModel, WorldModel};
pub use react::{ChatBackend, ChatMessage, ReactPolicy, ReplayBackend};
pub use remote::{state_from_observation, ReconstructError};
pub use scripted::{GreedyStochastic, Growth, RandomLegal, WaitOnly};

/// Everything a policy may look at when choosing the morning action.
pub struct TurnContext<'a> {
    pub observation_text: &'a str,
    pub observation: &'a Observation,
    /// The park state behind the observation. Remote play passes a reconstruction.
    pub state: &'a ParkState,
    pub catalog: &'a Catalog,
}

/// Feedback after an action was played.
pub struct Outcome<'a> {
    pub action: &'a str,
    pub error: Option<&'a ActionError>,
    pub observation_text: &'a str,
}

/// Calls to an external model and the tokens they used.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Usage {
    pub calls: u64,
    pub prompt_tokens: u64,
    pub completion_tokens: u64,
}

impl Usage {
    pub fn add(&mut self, other: Usage) {
        self.calls += other.calls;
        self.prompt_tokens += other.prompt_tokens;
        self.completion_tokens += other.completion_tokens;
    }
}

#[derive(Debug, Clone, thiserror::Error)]
pub enum PolicyError {
    #[error("policy transport failed: {0}")]
    Transport(String),
}

/// A decision maker that turns observations into action text.
pub trait Policy: Send {
    fn name(&self) -> String;

    fn next_action(&mut self, ctx: &TurnContext<'_>) -> Result<String, PolicyError>;

    fn notify(&mut self, _outcome: &Outcome<'_>) {}

    /// An independent copy with its random stream reseeded. Planners use forks
    /// so their rollouts never touch the live policy.
    fn fork(&self, seed: u64) -> Box<dyn Policy>;

    fn usage(&self) -> Usage {
        Usage::default()
    }
}

/// Policy names accepted by `build_policy`.
pub const POLICY_NAMES: [&str; 8] =
    ["wait", "random", "greedy", "growth", "heuristic-random", "heuristic-greedy", "mpc-greedy", "heuristic-growth"];

/// Builds a scripted policy (optionally wrapped) by name.
pub fn build_policy(name: &str, seed: u64) -> Option<Box<dyn Policy>> {
    let policy: Box<dyn Policy> = match name {
        "wait" => Box::new(WaitOnly),
        "random" => Box::new(RandomLegal::new(seed)),
        "greedy" => Box::new(GreedyStochastic::new(seed)),
        "growth" => Box::new(Growth::new()),
        "heuristic-random" => Box::new(HeuristicWrapper::new(Box::new(RandomLegal::new(seed)))),
        "heuristic-greedy" => Box::new(HeuristicWrapper::new(Box::new(GreedyStochastic::new(seed)))),
        "heuristic-growth" => Box::new(HeuristicWrapper::new(Box::new(Growth::new()))),
        "mpc-greedy" => Box::new(Mpc::new(Box::new(GreedyStochastic::new(seed)), Box::new(OracleWorldModel), seed)),
        _ => return None,
    };
    Some(policy)
}
