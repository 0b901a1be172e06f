//! Mini Amusement Parks: a deterministic, seed-replayable theme-park business
//! simulator with its text wire protocol, sandbox sessions, evaluation harness
//! and baseline agents.

pub mod agents;
pub mod api;
pub mod catalog;
pub mod engine;
pub mod game;
pub mod harness;
pub mod observe;
pub mod protocol;
pub mod sandbox;
pub mod world;

pub use catalog::{Catalog, EntityKey, EntitySpec, Kind, ResearchSpeed, Subclass, Subtype};
pub use engine::{apply_action, compute_park_value, simulate_day, step, DayStats};
pub use protocol::{parse, Action, ActionError, Command, SandboxAction};
pub use world::{new_park, Difficulty, Layout, ParkState, Pos};
