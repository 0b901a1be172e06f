//! Durable state: an index of sessions, one append-only trace per session and
//! the leaderboard, all line-delimited JSON under the data directory.
//!
//! Traces are the source of truth. On startup every indexed session is rebuilt
//! by replaying its recorded actions on the recorded seed.

use std::fs::{self, File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex};

use maps_core::api::LeaderboardEntry;
use maps_core::game::{Game, Mode, TraceHeader, TraceRecord};
use maps_core::{Catalog, Difficulty};
use serde::{Deserialize, Serialize};

/// One line of `index.jsonl`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndexRecord {
    pub id: String,
    /// Hex SHA-256 of the session's bearer token.
    pub token_sha256: String,
    pub layout: String,
    pub difficulty: Difficulty,
    pub mode: Mode,
    pub seed: u64,
    pub created: String,
}

/// A session rebuilt from disk.
pub struct Recovered {
    pub record: IndexRecord,
    pub game: Game,
    pub trace: File,
}

pub struct Store {
    dir: PathBuf,
    index: Mutex<File>,
    leaderboard: Mutex<File>,
}

fn append_line(file: &mut File, value: &impl Serialize) -> std::io::Result<()> {
    let mut line = serde_json::to_string(value).map_err(std::io::Error::other)?;
    line.push('\n');
    file.write_all(line.as_bytes())?;
    file.flush()
}

fn open_append(path: &Path) -> std::io::Result<File> {
    OpenOptions::new().create(true).append(true).open(path)
}

/// Reads JSON lines until the first one that does not parse, which can only be
/// a write cut short by a crash. Returns the values and the byte length of the
/// valid prefix.
fn read_lines<T: for<'de> Deserialize<'de>>(path: &Path) -> std::io::Result<(Vec<T>, u64)> {
    let file = match File::open(path) {
        Ok(f) => f,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok((Vec::new(), 0)),
        Err(e) => return Err(e),
    };
    let mut reader = BufReader::new(file);
    let mut out = Vec::new();
    let mut valid = 0u64;
    let mut line = String::new();
    loop {
        line.clear();
        let n = reader.read_line(&mut line)?;
        if n == 0 || !line.ends_with('\n') {
            break;
        }
        match serde_json::from_str(line.trim_end()) {
            Ok(v) => out.push(v),
            Err(_) => break,
        }
        valid += n as u64;
    }
    Ok((out, valid))
}

/// Drops a torn final line so later appends start on a fresh line.
fn truncate_to(path: &Path, len: u64) -> std::io::Result<()> {
    if fs::metadata(path).map(|m| m.len() > len).unwrap_or(false) {
        tracing::warn!(path = %path.display(), "discarding a partially written line");
        OpenOptions::new().write(true).open(path)?.set_len(len)?;
    }
    Ok(())
}

impl Store {
    pub fn open(dir: &Path) -> std::io::Result<Store> {
        fs::create_dir_all(dir.join("traces"))?;
        for name in ["index.jsonl", "leaderboard.jsonl"] {
            let (_, valid) = read_lines::<serde_json::Value>(&dir.join(name))?;
            truncate_to(&dir.join(name), valid)?;
        }
        Ok(Store {
            dir: dir.to_path_buf(),
            index: Mutex::new(open_append(&dir.join("index.jsonl"))?),
            leaderboard: Mutex::new(open_append(&dir.join("leaderboard.jsonl"))?),
        })
    }

    pub fn trace_path(&self, id: &str) -> PathBuf {
        self.dir.join("traces").join(format!("{id}.jsonl"))
    }

    /// Persists a new session: its trace header first, then its index line.
    pub fn create(&self, record: &IndexRecord, header: &TraceHeader) -> std::io::Result<File> {
        let mut trace = OpenOptions::new().create_new(true).append(true).open(self.trace_path(&record.id))?;
        append_line(&mut trace, header)?;
        append_line(&mut self.index.lock().expect("index lock"), record)?;
        Ok(trace)
    }

    pub fn append_turn(trace: &mut File, record: &TraceRecord) -> std::io::Result<()> {
        append_line(trace, record)
    }

    pub fn append_entry(&self, entry: &LeaderboardEntry) -> std::io::Result<()> {
        append_line(&mut self.leaderboard.lock().expect("leaderboard lock"), entry)
    }

    pub fn entries(&self) -> std::io::Result<Vec<LeaderboardEntry>> {
        Ok(read_lines(&self.dir.join("leaderboard.jsonl"))?.0)
    }

    /// Rebuilds every indexed session. Sessions whose trace is missing or no
    /// longer replays to the recorded observations are skipped with a warning.
    pub fn recover(&self, catalog: &Arc<Catalog>) -> std::io::Result<Vec<Recovered>> {
        let (records, _) = read_lines::<IndexRecord>(&self.dir.join("index.jsonl"))?;
        let mut out = Vec::with_capacity(records.len());
        for record in records {
            match self.recover_one(catalog, &record) {
                Ok(Some((game, trace))) => out.push(Recovered { record, game, trace }),
                Ok(None) => {}
                Err(e) => tracing::warn!(id = %record.id, error = %e, "session not recovered"),
            }
        }
        Ok(out)
    }

    fn recover_one(&self, catalog: &Arc<Catalog>, record: &IndexRecord) -> std::io::Result<Option<(Game, File)>> {
        let path = self.trace_path(&record.id);
        let (lines, valid) = read_lines::<serde_json::Value>(&path)?;
        let Some((header, turns)) = lines.split_first() else {
            tracing::warn!(id = %record.id, "trace has no header; session dropped");
            return Ok(None);
        };
        let header: TraceHeader = serde_json::from_value(header.clone()).map_err(std::io::Error::other)?;
        let mut game = Game::new(catalog.clone(), &record.layout, record.difficulty, record.seed, record.mode)
            .map_err(std::io::Error::other)?;
        if game.header().observation != header.observation {
            tracing::warn!(id = %record.id, "initial observation differs; session dropped");
            return Ok(None);
        }
        for (i, turn) in turns.iter().enumerate() {
            let turn: TraceRecord = serde_json::from_value(turn.clone()).map_err(std::io::Error::other)?;
            let replayed = game.submit(&turn.action).map_err(std::io::Error::other)?;
            if replayed.observation != turn.observation {
                tracing::warn!(id = %record.id, turn = i, "replay diverged; session dropped");
                return Ok(None);
            }
        }
        truncate_to(&path, valid)?;
        Ok(Some((game, open_append(&path)?)))
    }
}
