//! Clients for the game service and for OpenAI-compatible chat services.

pub mod openai;
pub mod service;

pub use openai::{OpenAiBackend, OpenAiConfig};
pub use service::{run_remote_episode, ClientError, GameClient, RemoteGame};
