//! Request and response bodies of the HTTP game service.
//!
//! Observations travel as the exact observation text of a local game, NOTE
//! line included, so remote and in-process play see identical bytes.

use serde::{Deserialize, Serialize};

use crate::game::Mode;
use crate::protocol::ActionError;
use crate::world::Difficulty;
use crate::DayStats;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CreateGame {
    pub layout: String,
    pub difficulty: Difficulty,
    #[serde(default = "default_mode")]
    pub mode: Mode,
    /// Chosen by the server when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

fn default_mode() -> Mode {
    Mode::Evaluation
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GameCreated {
    pub id: String,
    /// Bearer token for actions and score submission. Shown once.
    pub token: String,
    pub layout: String,
    pub difficulty: Difficulty,
    pub mode: Mode,
    pub seed: u64,
    pub observation: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObservationResponse {
    pub id: String,
    pub day: u32,
    pub finished: bool,
    pub observation: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PostAction {
    pub action: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActionResponse {
    pub day: u32,
    pub finished: bool,
    /// The in-band game error, also embedded as a NOTE in `observation`.
    pub error: Option<ActionError>,
    /// Present when a day was simulated.
    pub stats: Option<DayStats>,
    pub observation: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubmitScore {
    pub player: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LeaderboardEntry {
    pub player: String,
    pub layout: String,
    pub difficulty: Difficulty,
    pub final_value: i64,
    /// Recomputed by the server from the final value and its reference table.
    pub normalized_score: f64,
    /// RFC 3339 submission time.
    pub timestamp: String,
    /// Session whose trace backs the entry.
    pub game_id: String,
    /// How many entries this player has submitted on this layout and difficulty, this one included.
    pub attempt: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Leaderboard {
    pub entries: Vec<LeaderboardEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayoutInfo {
    pub name: String,
    pub evaluation: bool,
    pub rows: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorBody {
    pub code: String,
    pub message: String,
}

/// Every non-2xx response carries this envelope.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorEnvelope {
    pub error: ErrorBody,
}
