//! Blocking client for the game service and an `Environment` over it.

use std::sync::Arc;
use std::thread;
use std::time::{Duration, Instant};

use maps_core::agents::{state_from_observation, Policy};
use maps_core::api::{
    ActionResponse, CreateGame, ErrorEnvelope, GameCreated, LayoutInfo, Leaderboard, LeaderboardEntry,
    ObservationResponse, PostAction, SubmitScore,
};
use maps_core::game::Mode;
use maps_core::harness::{drive, EpisodeResult, Environment, HarnessError, HumanReferenceTable, Submitted, View};
use maps_core::observe::parse_observation;
use maps_core::{Catalog, Difficulty};
use reqwest::blocking::{Client, RequestBuilder, Response};
use reqwest::StatusCode;
use serde::de::DeserializeOwned;

/// How many times a rate-limited request is retried before giving up.
pub const RATE_LIMIT_RETRIES: u32 = 20;

#[derive(Debug, thiserror::Error)]
pub enum ClientError {
    #[error("transport error: {0}")]
    Transport(String),
    #[error("server returned {status} {code}: {message}")]
    Api { status: u16, code: String, message: String },
    #[error("unexpected response body: {0}")]
    Decode(String),
}

impl From<ClientError> for HarnessError {
    fn from(e: ClientError) -> HarnessError {
        HarnessError::Environment(e.to_string())
    }
}

#[derive(Debug, Clone)]
pub struct GameClient {
    base: String,
    http: Client,
}

fn retry_after(res: &Response) -> Duration {
    res.headers()
        .get(reqwest::header::RETRY_AFTER)
        .and_then(|v| v.to_str().ok())
        .and_then(|v| v.parse::<u64>().ok())
        .map_or(Duration::from_secs(1), Duration::from_secs)
}

impl GameClient {
    pub fn new(base_url: &str) -> Result<GameClient, ClientError> {
        let http = Client::builder()
            .timeout(Duration::from_secs(120))
            .build()
            .map_err(|e| ClientError::Transport(e.to_string()))?;
        Ok(GameClient { base: base_url.trim_end_matches('/').to_string(), http })
    }

    pub fn base_url(&self) -> &str {
        &self.base
    }

    fn url(&self, path: &str) -> String {
        format!("{}{path}", self.base)
    }

    /// Sends the request, waiting out rate limits. A 429 is returned before the
    /// server does any work, so resending is safe for every endpoint.
    fn send(&self, build: impl Fn() -> RequestBuilder) -> Result<Response, ClientError> {
        for _ in 0..RATE_LIMIT_RETRIES {
            let res = build().send().map_err(|e| ClientError::Transport(e.to_string()))?;
            if res.status() != StatusCode::TOO_MANY_REQUESTS {
                return Self::check(res);
            }
            thread::sleep(retry_after(&res));
        }
        Err(ClientError::Api {
            status: 429,
            code: "rate_limited".into(),
            message: format!("still rate limited after {RATE_LIMIT_RETRIES} attempts"),
        })
    }

    fn check(res: Response) -> Result<Response, ClientError> {
        if res.status().is_success() {
            return Ok(res);
        }
        let status = res.status().as_u16();
        let text = res.text().map_err(|e| ClientError::Transport(e.to_string()))?;
        Err(match serde_json::from_str::<ErrorEnvelope>(&text) {
            Ok(env) => ClientError::Api { status, code: env.error.code, message: env.error.message },
            Err(_) => ClientError::Api { status, code: "unknown".into(), message: text },
        })
    }

    fn json<T: DeserializeOwned>(res: Response) -> Result<T, ClientError> {
        res.json().map_err(|e| ClientError::Decode(e.to_string()))
    }

    fn text(res: Response) -> Result<String, ClientError> {
        res.text().map_err(|e| ClientError::Transport(e.to_string()))
    }

    pub fn create_game(&self, req: &CreateGame) -> Result<GameCreated, ClientError> {
        Self::json(self.send(|| self.http.post(self.url("/games")).json(req))?)
    }

    pub fn observation(&self, id: &str) -> Result<ObservationResponse, ClientError> {
        Self::json(self.send(|| self.http.get(self.url(&format!("/games/{id}/observation"))))?)
    }

    pub fn act(&self, id: &str, token: &str, action: &str) -> Result<ActionResponse, ClientError> {
        let body = PostAction { action: action.to_string() };
        Self::json(self.send(|| self.http.post(self.url(&format!("/games/{id}/action"))).bearer_auth(token).json(&body))?)
    }

    pub fn trace(&self, id: &str) -> Result<String, ClientError> {
        Self::text(self.send(|| self.http.get(self.url(&format!("/games/{id}/trace"))))?)
    }

    pub fn submit_score(&self, id: &str, token: &str, player: &str) -> Result<LeaderboardEntry, ClientError> {
        let body = SubmitScore { player: player.to_string() };
        Self::json(self.send(|| self.http.post(self.url(&format!("/games/{id}/score"))).bearer_auth(token).json(&body))?)
    }

    pub fn leaderboard(&self, layout: Option<&str>, difficulty: Option<Difficulty>) -> Result<Leaderboard, ClientError> {
        let mut query = Vec::new();
        if let Some(l) = layout {
            query.push(("layout", l.to_string()));
        }
        if let Some(d) = difficulty {
            query.push(("difficulty", d.to_string()));
        }
        Self::json(self.send(|| self.http.get(self.url("/leaderboard")).query(&query))?)
    }

    pub fn layouts(&self) -> Result<Vec<LayoutInfo>, ClientError> {
        Self::json(self.send(|| self.http.get(self.url("/layouts")))?)
    }

    pub fn manual(&self, sandbox: bool) -> Result<String, ClientError> {
        let mode = if sandbox { "sandbox" } else { "evaluation" };
        Self::text(self.send(|| self.http.get(self.url("/docs/manual")).query(&[("mode", mode)]))?)
    }

    /// Waits until the service answers, for callers that just started it.
    pub fn wait_until_ready(&self, timeout: Duration) -> Result<(), ClientError> {
        let started = Instant::now();
        loop {
            match self.layouts() {
                Ok(_) => return Ok(()),
                Err(ClientError::Transport(_)) if started.elapsed() < timeout => {
                    thread::sleep(Duration::from_millis(50));
                }
                Err(e) => return Err(e),
            }
        }
    }
}

/// A game session on the service, driven like a local game.
pub struct RemoteGame {
    client: GameClient,
    catalog: Arc<Catalog>,
    pub created: GameCreated,
    observation: String,
    finished: bool,
}

impl RemoteGame {
    pub fn start(client: GameClient, catalog: Arc<Catalog>, req: &CreateGame) -> Result<RemoteGame, ClientError> {
        let created = client.create_game(req)?;
        let observation = created.observation.clone();
        Ok(RemoteGame { client, catalog, created, observation, finished: false })
    }

    pub fn id(&self) -> &str {
        &self.created.id
    }

    pub fn token(&self) -> &str {
        &self.created.token
    }
}

impl Environment for RemoteGame {
    /// Policies get a park rebuilt from the observation; hidden quantities such
    /// as guest state take fresh-park defaults.
    fn view(&mut self) -> Result<View, HarnessError> {
        let observation = parse_observation(&self.observation).map_err(|e| HarnessError::Environment(e.to_string()))?;
        let state = state_from_observation(&observation, &self.catalog).map_err(|e| HarnessError::Environment(e.to_string()))?;
        Ok(View { text: self.observation.clone(), observation, state })
    }

    fn submit(&mut self, action: &str) -> Result<Submitted, HarnessError> {
        let r = self.client.act(&self.created.id, &self.created.token, action)?;
        self.observation = r.observation.clone();
        self.finished = r.finished;
        Ok(Submitted { error: r.error, observation_text: r.observation })
    }

    fn finished(&mut self) -> Result<bool, HarnessError> {
        Ok(self.finished)
    }

    fn trace_jsonl(&mut self) -> Result<String, HarnessError> {
        Ok(self.client.trace(&self.created.id)?)
    }
}

/// Plays one evaluation episode on the service. Returns the result and the
/// session so callers can submit the score.
pub fn run_remote_episode(
    client: &GameClient,
    catalog: Arc<Catalog>,
    policy: &mut dyn Policy,
    layout: &str,
    difficulty: Difficulty,
    seed: u64,
    references: &HumanReferenceTable,
) -> Result<(EpisodeResult, RemoteGame), HarnessError> {
    let started = Instant::now();
    let req = CreateGame { layout: layout.to_string(), difficulty, mode: Mode::Evaluation, seed: Some(seed) };
    let mut game = RemoteGame::start(client.clone(), catalog.clone(), &req)?;
    let (last, invalid_actions, days) = drive(policy, &mut game, &catalog)?;
    let result = EpisodeResult {
        layout: layout.to_string(),
        difficulty,
        seed,
        policy: policy.name(),
        final_value: last.value,
        normalized_score: references.get(layout, difficulty).map(|r| 100.0 * last.value as f64 / r as f64),
        invalid_actions,
        days,
        trace: game.trace_jsonl()?,
        usage: policy.usage(),
        runtime: started.elapsed(),
    };
    Ok((result, game))
}
