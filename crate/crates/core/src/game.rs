//! One playable game: evaluation or sandbox mode, the NOTE feedback loop and the trace.

use std::fmt::Write as _;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::catalog::{Catalog, Kind, ResearchSpeed, Subclass, Subtype};
use crate::engine::{apply_action, compute_park_value, simulate_day, DayStats};
use crate::observe::{build_observation, serialize, Observation};
use crate::protocol::{messages, note_line, parse, ActionError, Command};
use crate::sandbox::{SandboxSession, SANDBOX_DOCS};
use crate::world::{new_park, Difficulty, Layout, LayoutError, ParkState};

const MANUAL_TEMPLATE: &str = include_str!("../assets/manual.md");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Evaluation,
    Sandbox,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Evaluation => "evaluation",
            Mode::Sandbox => "sandbox",
        }
    }
}

impl std::str::FromStr for Mode {
    type Err = crate::catalog::UnknownName;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "evaluation" => Ok(Mode::Evaluation),
            "sandbox" => Ok(Mode::Sandbox),
            other => Err(crate::catalog::UnknownName(other.to_string())),
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum GameError {
    #[error(transparent)]
    Layout(#[from] LayoutError),
    #[error("{0}")]
    Refused(String),
    #[error("the game is finished")]
    Finished,
}

/// First line of a trace file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceHeader {
    pub layout: String,
    pub difficulty: Difficulty,
    pub seed: u64,
    pub mode: Mode,
    pub observation: String,
}

/// One played turn of a trace file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub day: u32,
    pub action: String,
    pub observation: String,
}

/// What one submitted action did.
#[derive(Debug, Clone)]
pub struct Turn {
    pub action: String,
    pub error: Option<ActionError>,
    /// Present when a day was simulated.
    pub stats: Option<DayStats>,
    pub observation: String,
}

#[derive(Debug, Clone)]
enum Inner {
    Evaluation(Box<ParkState>),
    Sandbox(Box<SandboxSession>),
}

#[derive(Debug, Clone)]
pub struct Game {
    catalog: Arc<Catalog>,
    inner: Inner,
    note: Option<String>,
    header: TraceHeader,
    records: Vec<TraceRecord>,
}

impl Game {
    pub fn new(catalog: Arc<Catalog>, layout: &str, difficulty: Difficulty, seed: u64, mode: Mode) -> Result<Game, GameError> {
        let inner = match mode {
            Mode::Evaluation => Inner::Evaluation(Box::new(new_park(&catalog, Layout::shipped(layout)?, difficulty, seed))),
            Mode::Sandbox => Inner::Sandbox(Box::new(
                SandboxSession::new(&catalog, layout, difficulty, seed).map_err(|e| GameError::Refused(e.message))?,
            )),
        };
        Ok(Game::assemble(catalog, inner, layout, difficulty, seed, mode))
    }

    /// An evaluation game on a layout that is not shipped.
    pub fn with_layout(catalog: Arc<Catalog>, layout: Layout, difficulty: Difficulty, seed: u64) -> Game {
        let name = layout.name.clone();
        let state = new_park(&catalog, layout, difficulty, seed);
        Game::assemble(catalog, Inner::Evaluation(Box::new(state)), &name, difficulty, seed, Mode::Evaluation)
    }

    fn assemble(catalog: Arc<Catalog>, inner: Inner, layout: &str, difficulty: Difficulty, seed: u64, mode: Mode) -> Game {
        let mut game = Game {
            catalog,
            inner,
            note: None,
            header: TraceHeader { layout: layout.to_string(), difficulty, seed, mode, observation: String::new() },
            records: Vec::new(),
        };
        game.header.observation = game.observation_text();
        game
    }

    pub fn catalog(&self) -> &Arc<Catalog> {
        &self.catalog
    }

    pub fn mode(&self) -> Mode {
        self.header.mode
    }

    pub fn state(&self) -> &ParkState {
        match &self.inner {
            Inner::Evaluation(s) => s,
            Inner::Sandbox(s) => &s.state,
        }
    }

    pub fn sandbox(&self) -> Option<&SandboxSession> {
        match &self.inner {
            Inner::Sandbox(s) => Some(s),
            Inner::Evaluation(_) => None,
        }
    }

    pub fn finished(&self) -> bool {
        match &self.inner {
            Inner::Evaluation(s) => s.finished(),
            Inner::Sandbox(s) => s.finished(),
        }
    }

    pub fn value(&self) -> i64 {
        compute_park_value(self.state(), &self.catalog)
    }

    pub fn note(&self) -> Option<&str> {
        self.note.as_deref()
    }

    pub fn observation(&self) -> Observation {
        build_observation(self.state(), &self.catalog)
    }

    /// The observation text, with the sandbox section and any NOTE line.
    pub fn observation_text(&self) -> String {
        let obs = self.observation();
        match &self.inner {
            Inner::Evaluation(_) => serialize(&obs, self.note.as_deref()),
            Inner::Sandbox(s) => {
                let mut text = serialize(&obs, None);
                text.push_str("\n\n");
                text.push_str(SANDBOX_DOCS.trim_end());
                text.push_str("\n\n");
                text.push_str(&s.budget_line());
                if let Some(n) = &self.note {
                    text.push_str("\n\n");
                    text.push_str(n);
                }
                text
            }
        }
    }

    /// Plays one action text. Invalid actions consume the day as a wait and put a
    /// NOTE on the next observation; a refused sandbox action consumes nothing.
    pub fn submit(&mut self, action_text: &str) -> Result<Turn, GameError> {
        if self.finished() {
            return Err(GameError::Finished);
        }
        let text = action_text.trim();
        let catalog = self.catalog.clone();
        let (error, stats) = match (&mut self.inner, parse(text)) {
            (Inner::Evaluation(state), parsed) => {
                let error = match parsed {
                    Ok(Command::Game(a)) => apply_action(state, &catalog, &a).err(),
                    Ok(Command::Sandbox(s)) => Some(ActionError::new(messages::sandbox_only(s.name()))),
                    Err(e) => Some(e.into()),
                };
                (error, Some(simulate_day(state, &catalog)))
            }
            (Inner::Sandbox(session), Ok(Command::Sandbox(a))) => {
                (session.apply_sandbox_action(&catalog, &a).err(), None)
            }
            (Inner::Sandbox(session), parsed) => {
                let action = match &parsed {
                    Ok(Command::Game(a)) => a.clone(),
                    _ => crate::protocol::Action::Wait,
                };
                match session.step_sandbox(&catalog, &action) {
                    Ok((stats, err)) => (parsed.err().map(ActionError::from).or(err), Some(stats)),
                    Err(e) => (Some(e), None),
                }
            }
        };
        self.note = error.as_ref().map(|e| note_line(text, e));
        let observation = self.observation_text();
        self.records.push(TraceRecord { day: self.state().day, action: text.to_string(), observation: observation.clone() });
        Ok(Turn { action: text.to_string(), error, stats, observation })
    }

    pub fn header(&self) -> &TraceHeader {
        &self.header
    }

    pub fn records(&self) -> &[TraceRecord] {
        &self.records
    }

    /// The trace as line-delimited JSON: the header, then one line per turn.
    pub fn trace_jsonl(&self) -> String {
        let mut out = serde_json::to_string(&self.header).expect("header serializes");
        out.push('\n');
        for r in &self.records {
            out.push_str(&serde_json::to_string(r).expect("record serializes"));
            out.push('\n');
        }
        out
    }
}

/// Parses a line-delimited trace into its header and records.
pub fn parse_trace(text: &str) -> Result<(TraceHeader, Vec<TraceRecord>), serde_json::Error> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let header: TraceHeader = serde_json::from_str(lines.next().unwrap_or(""))?;
    let records = lines.map(serde_json::from_str).collect::<Result<Vec<_>, _>>()?;
    Ok((header, records))
}

/// The game manual with tables generated from the catalog. The sandbox section
/// is included only for sandbox play.
pub fn manual(catalog: &Catalog, sandbox: bool) -> String {
    let mut research = String::from("| Speed | Days per subclass | Cost per day |\n|---|---|---|\n");
    for speed in [ResearchSpeed::Slow, ResearchSpeed::Medium, ResearchSpeed::Fast] {
        let s = catalog.research_speed(speed).expect("speeds are configured");
        let _ = writeln!(research, "| {} | {} | ${} |", speed, s.days_to_unlock, s.cost_per_day);
    }
    let mut table = String::new();
    for kind in [Kind::Ride, Kind::Shop, Kind::Staff] {
        let header = match kind {
            Kind::Ride => "### Rides\n\n| Subtype | Subclass | Build cost | Max ticket | Capacity | Excitement | Intensity | Duration | Breakdown rate | Cost per operation |\n|---|---|---|---|---|---|---|---|---|---|\n",
            Kind::Shop => "### Shops\n\n| Subtype | Subclass | Build cost | Max price | Item cost | Default order |\n|---|---|---|---|---|---|\n",
            Kind::Staff => "### Staff\n\n| Subtype | Subclass | Hire cost | Salary per day | Operating cost per day | Work rate |\n|---|---|---|---|---|---|\n",
        };
        table.push_str(header);
        for subtype in Subtype::ALL.iter().filter(|s| s.kind() == kind) {
            for subclass in Subclass::ALL {
                let e = catalog.spec(*subtype, subclass);
                let _ = match kind {
                    Kind::Ride => writeln!(
                        table,
                        "| {subtype} | {subclass} | ${} | ${} | {} | {} | {} | {} | {} | ${} |",
                        e.build_cost,
                        e.max_price,
                        e.capacity,
                        e.base_excitement,
                        e.intensity,
                        e.ride_duration,
                        e.breakdown_rate,
                        e.cost_per_operation
                    ),
                    Kind::Shop => writeln!(
                        table,
                        "| {subtype} | {subclass} | ${} | ${} | ${} | {} |",
                        e.build_cost, e.max_price, e.item_cost, e.default_order_quantity
                    ),
                    Kind::Staff => writeln!(
                        table,
                        "| {subtype} | {subclass} | ${} | ${} | ${} | {} |",
                        e.build_cost, e.salary, e.operating_cost, e.work_rate
                    ),
                };
            }
        }
        table.push('\n');
    }
    let mut text = MANUAL_TEMPLATE.replace("{RESEARCH_TABLE}", research.trim_end()).replace("{ENTITY_TABLE}", table.trim_end());
    if sandbox {
        text.push('\n');
        text.push_str(SANDBOX_DOCS);
    }
    text
}
