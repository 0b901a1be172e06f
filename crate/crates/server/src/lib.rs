//! HTTP/JSON game service. Each session runs one game, accepts one action at a
//! time from its token holder, and appends every turn to a trace file from
//! which it can be rebuilt after a restart.

pub mod error;
pub mod limiter;
pub mod store;

use std::collections::HashMap;
use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::{Arc, RwLock};

use axum::extract::rejection::{JsonRejection, QueryRejection};
use axum::extract::{Path, Query, State};
use axum::http::{header, HeaderMap, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use maps_core::api::{
    ActionResponse, CreateGame, GameCreated, LayoutInfo, Leaderboard, LeaderboardEntry, ObservationResponse, PostAction,
    SubmitScore,
};
use maps_core::game::{manual, Game, Mode};
use maps_core::harness::HumanReferenceTable;
use maps_core::world::layout::shipped_layout_names;
use maps_core::{Catalog, Difficulty, Layout};
use serde::Deserialize;
use sha2::{Digest, Sha256};
use tokio::sync::Mutex;

pub use error::ApiError;
pub use limiter::RateLimit;
use limiter::Limiter;
use store::{IndexRecord, Store};

/// Longest accepted player name, in characters.
pub const MAX_PLAYER_NAME: usize = 64;

#[derive(Debug, Clone)]
pub struct ServerConfig {
    pub data_dir: PathBuf,
    pub rate_limit: RateLimit,
    pub references: HumanReferenceTable,
}

impl ServerConfig {
    pub fn new(data_dir: impl Into<PathBuf>) -> ServerConfig {
        ServerConfig {
            data_dir: data_dir.into(),
            rate_limit: RateLimit::default(),
            references: HumanReferenceTable::shipped(),
        }
    }
}

struct Session {
    token_sha256: String,
    game: Game,
    trace: std::fs::File,
    scored: bool,
}

struct AppState {
    catalog: Arc<Catalog>,
    store: Store,
    references: HumanReferenceTable,
    limiter: Limiter,
    sessions: RwLock<HashMap<String, Arc<Mutex<Session>>>>,
    leaderboard: Mutex<Vec<LeaderboardEntry>>,
}

type Shared = Arc<AppState>;

fn token_hash(token: &str) -> String {
    hex::encode(Sha256::digest(token.as_bytes()))
}

fn new_token() -> String {
    format!("{}{}", uuid::Uuid::new_v4().simple(), uuid::Uuid::new_v4().simple())
}

/// Builds the service, rebuilding persisted sessions from their traces.
pub fn app(config: ServerConfig) -> std::io::Result<Router> {
    let catalog = Arc::new(Catalog::shipped());
    let store = Store::open(&config.data_dir)?;
    let entries = store.entries()?;
    let mut sessions = HashMap::new();
    for r in store.recover(&catalog)? {
        let scored = entries.iter().any(|e| e.game_id == r.record.id);
        let session = Session { token_sha256: r.record.token_sha256, game: r.game, trace: r.trace, scored };
        sessions.insert(r.record.id, Arc::new(Mutex::new(session)));
    }
    tracing::info!(sessions = sessions.len(), entries = entries.len(), dir = %config.data_dir.display(), "store opened");
    let state = Arc::new(AppState {
        catalog,
        store,
        references: config.references,
        limiter: Limiter::new(config.rate_limit),
        sessions: RwLock::new(sessions),
        leaderboard: Mutex::new(entries),
    });
    Ok(Router::new()
        .route("/games", post(create_game))
        .route("/games/{id}/observation", get(observation))
        .route("/games/{id}/action", post(post_action))
        .route("/games/{id}/trace", get(trace))
        .route("/games/{id}/score", post(submit_score))
        .route("/leaderboard", get(leaderboard))
        .route("/layouts", get(layouts))
        .route("/docs/manual", get(docs_manual))
        .fallback(|| async { ApiError::NotFound("no such endpoint".into()) })
        .with_state(state))
}

/// Serves `router` on an already bound listener until the future is dropped.
pub async fn serve(listener: tokio::net::TcpListener, router: Router) -> std::io::Result<()> {
    axum::serve(listener, router).await
}

/// Binds `addr` and serves until Ctrl-C.
pub async fn run(addr: SocketAddr, config: ServerConfig) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    tracing::info!(addr = %listener.local_addr()?, "listening");
    let router = app(config)?;
    axum::serve(listener, router)
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
}

fn session(state: &AppState, id: &str) -> Result<Arc<Mutex<Session>>, ApiError> {
    state
        .sessions
        .read()
        .expect("session table lock")
        .get(id)
        .cloned()
        .ok_or_else(|| ApiError::NotFound(format!("no game with id {id}")))
}

fn bearer(headers: &HeaderMap) -> Result<&str, ApiError> {
    headers
        .get(header::AUTHORIZATION)
        .and_then(|v| v.to_str().ok())
        .and_then(|v| v.strip_prefix("Bearer "))
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .ok_or(ApiError::Unauthorized)
}

/// Checks the caller's token against the session and charges its rate bucket.
fn authorize(state: &AppState, headers: &HeaderMap, session: &Session) -> Result<(), ApiError> {
    let hash = token_hash(bearer(headers)?);
    if hash != session.token_sha256 {
        return Err(ApiError::Unauthorized);
    }
    state.limiter.check(&hash).map_err(ApiError::RateLimited)
}

fn body<T>(payload: Result<Json<T>, JsonRejection>) -> Result<T, ApiError> {
    payload.map(|Json(v)| v).map_err(|e| ApiError::BadRequest(e.body_text()))
}

async fn create_game(
    State(state): State<Shared>,
    payload: Result<Json<CreateGame>, JsonRejection>,
) -> Result<(StatusCode, Json<GameCreated>), ApiError> {
    let req = body(payload)?;
    let seed = req.seed.unwrap_or_else(|| uuid::Uuid::new_v4().as_u64_pair().0);
    let game = Game::new(state.catalog.clone(), &req.layout, req.difficulty, seed, req.mode).map_err(|e| match e {
        maps_core::game::GameError::Layout(e) => ApiError::NotFound(e.to_string()),
        other => ApiError::Unprocessable(other.to_string()),
    })?;
    let id = uuid::Uuid::new_v4().to_string();
    let token = new_token();
    let record = IndexRecord {
        id: id.clone(),
        token_sha256: token_hash(&token),
        layout: req.layout.clone(),
        difficulty: req.difficulty,
        mode: req.mode,
        seed,
        created: chrono::Utc::now().to_rfc3339(),
    };
    let trace = state.store.create(&record, game.header())?;
    let observation = game.observation_text();
    let session = Session { token_sha256: record.token_sha256, game, trace, scored: false };
    state.sessions.write().expect("session table lock").insert(id.clone(), Arc::new(Mutex::new(session)));
    tracing::info!(%id, layout = %req.layout, difficulty = %req.difficulty, mode = req.mode.as_str(), seed, "game created");
    let created = GameCreated { id, token, layout: req.layout, difficulty: req.difficulty, mode: req.mode, seed, observation };
    Ok((StatusCode::CREATED, Json(created)))
}

async fn observation(State(state): State<Shared>, Path(id): Path<String>) -> Result<Json<ObservationResponse>, ApiError> {
    let session = session(&state, &id)?;
    let s = session.lock().await;
    Ok(Json(ObservationResponse {
        id,
        day: s.game.state().day,
        finished: s.game.finished(),
        observation: s.game.observation_text(),
    }))
}

async fn post_action(
    State(state): State<Shared>,
    Path(id): Path<String>,
    headers: HeaderMap,
    payload: Result<Json<PostAction>, JsonRejection>,
) -> Result<Json<ActionResponse>, ApiError> {
    let session = session(&state, &id)?;
    let mut guard = session.lock_owned().await;
    authorize(&state, &headers, &guard)?;
    let req = body(payload)?;
    if guard.game.finished() {
        return Err(ApiError::Conflict("the game is finished".into()));
    }
    tokio::task::spawn_blocking(move || {
        let s = &mut *guard;
        let turn = s.game.submit(&req.action).map_err(|e| ApiError::Conflict(e.to_string()))?;
        Store::append_turn(&mut s.trace, s.game.records().last().expect("a turn was recorded"))?;
        Ok(Json(ActionResponse {
            day: s.game.state().day,
            finished: s.game.finished(),
            error: turn.error,
            stats: turn.stats,
            observation: turn.observation,
        }))
    })
    .await
    .map_err(|e| ApiError::Internal(format!("action worker failed: {e}")))?
}

async fn trace(State(state): State<Shared>, Path(id): Path<String>) -> Result<Response, ApiError> {
    let session = session(&state, &id)?;
    let text = session.lock().await.game.trace_jsonl();
    Ok(([(header::CONTENT_TYPE, "application/x-ndjson")], text).into_response())
}

async fn submit_score(
    State(state): State<Shared>,
    Path(id): Path<String>,
    headers: HeaderMap,
    payload: Result<Json<SubmitScore>, JsonRejection>,
) -> Result<(StatusCode, Json<LeaderboardEntry>), ApiError> {
    let session = session(&state, &id)?;
    let mut s = session.lock().await;
    authorize(&state, &headers, &s)?;
    let req = body(payload)?;
    let player = req.player.trim().to_string();
    if player.is_empty() || player.chars().count() > MAX_PLAYER_NAME || player.chars().any(char::is_control) {
        return Err(ApiError::BadRequest(format!("player name must be 1 to {MAX_PLAYER_NAME} printable characters")));
    }
    if s.game.mode() != Mode::Evaluation {
        return Err(ApiError::Unprocessable("sandbox games cannot be scored".into()));
    }
    if !s.game.finished() {
        return Err(ApiError::Conflict("the game is not finished".into()));
    }
    if s.scored {
        return Err(ApiError::Conflict("this game was already submitted".into()));
    }
    let header = s.game.header();
    let (layout, difficulty) = (header.layout.clone(), header.difficulty);
    let final_value = s.game.value();
    let normalized_score = state
        .references
        .normalize(final_value, &layout, difficulty)
        .map_err(|e| ApiError::Unprocessable(e.to_string()))?;
    let mut board = state.leaderboard.lock().await;
    let attempt = 1 + board.iter().filter(|e| e.player == player && e.layout == layout && e.difficulty == difficulty).count() as u32;
    let entry = LeaderboardEntry {
        player,
        layout,
        difficulty,
        final_value,
        normalized_score,
        timestamp: chrono::Utc::now().to_rfc3339(),
        game_id: id,
        attempt,
    };
    state.store.append_entry(&entry)?;
    board.push(entry.clone());
    s.scored = true;
    Ok((StatusCode::CREATED, Json(entry)))
}

#[derive(Debug, Deserialize)]
struct LeaderboardQuery {
    layout: Option<String>,
    difficulty: Option<String>,
}

async fn leaderboard(
    State(state): State<Shared>,
    query: Result<Query<LeaderboardQuery>, QueryRejection>,
) -> Result<Json<Leaderboard>, ApiError> {
    let Query(q) = query.map_err(|e| ApiError::BadRequest(e.body_text()))?;
    let layout = q.layout.filter(|l| !l.is_empty());
    let difficulty = match q.difficulty.filter(|d| !d.is_empty()) {
        Some(d) => Some(d.parse::<Difficulty>().map_err(|e| ApiError::BadRequest(e.to_string()))?),
        None => None,
    };
    let mut entries: Vec<LeaderboardEntry> = state
        .leaderboard
        .lock()
        .await
        .iter()
        .filter(|e| layout.as_ref().map_or(true, |l| &e.layout == l))
        .filter(|e| difficulty.map_or(true, |d| e.difficulty == d))
        .cloned()
        .collect();
    entries.sort_by(|a, b| {
        b.normalized_score
            .total_cmp(&a.normalized_score)
            .then(b.final_value.cmp(&a.final_value))
            .then(a.timestamp.cmp(&b.timestamp))
    });
    Ok(Json(Leaderboard { entries }))
}

async fn layouts() -> Result<Json<Vec<LayoutInfo>>, ApiError> {
    shipped_layout_names()
        .map(|name| {
            let layout = Layout::shipped(name).map_err(|e| ApiError::Internal(e.to_string()))?;
            Ok(LayoutInfo { name: name.to_string(), evaluation: layout.is_evaluation(), rows: layout.rows() })
        })
        .collect::<Result<Vec<_>, _>>()
        .map(Json)
}

#[derive(Debug, Deserialize)]
struct ManualQuery {
    mode: Option<Mode>,
}

async fn docs_manual(
    State(state): State<Shared>,
    query: Result<Query<ManualQuery>, QueryRejection>,
) -> Result<Response, ApiError> {
    let Query(q) = query.map_err(|e| ApiError::BadRequest(e.body_text()))?;
    let text = manual(&state.catalog, q.mode == Some(Mode::Sandbox));
    Ok(([(header::CONTENT_TYPE, "text/markdown; charset=utf-8")], text).into_response())
}
