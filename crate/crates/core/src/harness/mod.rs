//! Episode runner, human-normalized scoring, replay, variance studies and report files.

pub mod cv;
pub mod report;

use std::collections::BTreeMap;
use std::sync::Arc;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::agents::{Outcome, Policy, PolicyError, TurnContext, Usage};
use crate::catalog::Catalog;
use crate::game::{parse_trace, Game, GameError, Mode};
use crate::observe::{parse_observation, Observation};
use crate::protocol::ActionError;
use crate::world::{Difficulty, ParkState};

pub use cv::{cv, per_day_cv, trajectory_cv, CvTriple, DayCv, TrajectoryCv};
pub use report::emit_report;

/// Attempts per turn before a policy transport failure is surfaced.
pub const TRANSPORT_ATTEMPTS: u32 = 3;

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error("no human reference for {layout} on {difficulty}")]
    UnknownReference { layout: String, difficulty: Difficulty },
    #[error(transparent)]
    Game(#[from] GameError),
    #[error("{0}")]
    Policy(#[from] PolicyError),
    #[error("environment failed: {0}")]
    Environment(String),
    #[error("malformed trace: {0}")]
    Trace(String),
    #[error("malformed reference table: {0}")]
    References(String),
    #[error("cannot write report: {0}")]
    Io(#[from] std::io::Error),
}

/// Human park values per evaluation layout and difficulty.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HumanReferenceTable {
    values: BTreeMap<(String, Difficulty), i64>,
}

impl Default for HumanReferenceTable {
    fn default() -> Self {
        HumanReferenceTable::shipped()
    }
}

impl HumanReferenceTable {
    pub fn shipped() -> HumanReferenceTable {
        let rows = [
            ("the_islands", Difficulty::Easy, 760_954),
            ("the_islands", Difficulty::Medium, 4_262_963),
            ("ribs", Difficulty::Easy, 1_263_302),
            ("ribs", Difficulty::Medium, 1_037_310),
            ("zig_zag", Difficulty::Easy, 481_700),
            ("zig_zag", Difficulty::Medium, 887_772),
        ];
        HumanReferenceTable { values: rows.into_iter().map(|(l, d, v)| ((l.to_string(), d), v)).collect() }
    }

    pub fn empty() -> HumanReferenceTable {
        HumanReferenceTable { values: BTreeMap::new() }
    }

    pub fn get(&self, layout: &str, difficulty: Difficulty) -> Option<i64> {
        self.values.get(&(layout.to_string(), difficulty)).copied()
    }

    pub fn set(&mut self, layout: &str, difficulty: Difficulty, value: i64) {
        self.values.insert((layout.to_string(), difficulty), value);
    }

    pub fn entries(&self) -> impl Iterator<Item = (&str, Difficulty, i64)> {
        self.values.iter().map(|((l, d), v)| (l.as_str(), *d, *v))
    }

    /// Overrides entries from a TOML table of the form `[layout] easy = 1 medium = 2`.
    pub fn apply_overrides(&mut self, text: &str) -> Result<(), HarnessError> {
        let table: BTreeMap<String, BTreeMap<String, i64>> =
            toml::from_str(text).map_err(|e| HarnessError::References(e.to_string()))?;
        for (layout, row) in table {
            for (difficulty, value) in row {
                let d = difficulty.parse().map_err(|e| HarnessError::References(format!("{layout}: {e}")))?;
                if value <= 0 {
                    return Err(HarnessError::References(format!("{layout}/{difficulty}: reference must be positive")));
                }
                self.set(&layout, d, value);
            }
        }
        Ok(())
    }

    pub fn normalize(&self, value: i64, layout: &str, difficulty: Difficulty) -> Result<f64, HarnessError> {
        normalize_score(self, value, layout, difficulty)
    }
}

/// `100 · value / reference`, in percent.
pub fn normalize_score(
    table: &HumanReferenceTable,
    value: i64,
    layout: &str,
    difficulty: Difficulty,
) -> Result<f64, HarnessError> {
    let reference = table
        .get(layout, difficulty)
        .ok_or_else(|| HarnessError::UnknownReference { layout: layout.to_string(), difficulty })?;
    Ok(100.0 * value as f64 / reference as f64)
}

/// What a policy sees at the start of a day.
pub struct View {
    pub text: String,
    pub observation: Observation,
    pub state: ParkState,
}

/// The result of submitting one action.
pub struct Submitted {
    pub error: Option<ActionError>,
    pub observation_text: String,
}

/// A game the episode loop can drive, either in-process or over the network.
pub trait Environment {
    fn view(&mut self) -> Result<View, HarnessError>;
    fn submit(&mut self, action: &str) -> Result<Submitted, HarnessError>;
    fn finished(&mut self) -> Result<bool, HarnessError>;
    fn trace_jsonl(&mut self) -> Result<String, HarnessError>;
}

/// An in-process game.
pub struct LocalEnvironment {
    pub game: Game,
}

impl Environment for LocalEnvironment {
    fn view(&mut self) -> Result<View, HarnessError> {
        Ok(View {
            text: self.game.observation_text(),
            observation: self.game.observation(),
            state: self.game.state().clone(),
        })
    }

    fn submit(&mut self, action: &str) -> Result<Submitted, HarnessError> {
        let turn = self.game.submit(action)?;
        Ok(Submitted { error: turn.error, observation_text: turn.observation })
    }

    fn finished(&mut self) -> Result<bool, HarnessError> {
        Ok(self.game.finished())
    }

    fn trace_jsonl(&mut self) -> Result<String, HarnessError> {
        Ok(self.game.trace_jsonl())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeResult {
    pub layout: String,
    pub difficulty: Difficulty,
    pub seed: u64,
    pub policy: String,
    pub final_value: i64,
    /// Absent when the layout has no human reference.
    pub normalized_score: Option<f64>,
    pub invalid_actions: u32,
    pub days: u32,
    pub trace: String,
    pub usage: Usage,
    #[serde(skip)]
    pub runtime: Duration,
}

fn next_action_with_retries(policy: &mut dyn Policy, ctx: &TurnContext<'_>) -> Result<String, PolicyError> {
    let mut last = None;
    for _ in 0..TRANSPORT_ATTEMPTS {
        match policy.next_action(ctx) {
            Ok(a) => return Ok(a),
            Err(e) => last = Some(e),
        }
    }
    Err(last.expect("at least one attempt"))
}

/// Plays until the horizon. Invalid actions consume the day and the error NOTE
/// reaches the policy through the next observation.
pub fn drive(
    policy: &mut dyn Policy,
    env: &mut dyn Environment,
    catalog: &Catalog,
) -> Result<(Observation, u32, u32), HarnessError> {
    let mut invalid = 0;
    let mut days = 0;
    while !env.finished()? {
        let view = env.view()?;
        let ctx = TurnContext {
            observation_text: &view.text,
            observation: &view.observation,
            state: &view.state,
            catalog,
        };
        let action = next_action_with_retries(policy, &ctx)?;
        let submitted = env.submit(&action)?;
        if submitted.error.is_some() {
            invalid += 1;
        }
        days += 1;
        policy.notify(&Outcome {
            action: &action,
            error: submitted.error.as_ref(),
            observation_text: &submitted.observation_text,
        });
    }
    Ok((env.view()?.observation, invalid, days))
}

/// Runs one evaluation episode in-process.
pub fn run_episode(
    policy: &mut dyn Policy,
    catalog: Arc<Catalog>,
    layout: &str,
    difficulty: Difficulty,
    seed: u64,
    references: &HumanReferenceTable,
) -> Result<EpisodeResult, HarnessError> {
    let started = Instant::now();
    let game = Game::new(catalog.clone(), layout, difficulty, seed, Mode::Evaluation)?;
    let mut env = LocalEnvironment { game };
    let (last, invalid_actions, days) = drive(policy, &mut env, &catalog)?;
    Ok(EpisodeResult {
        layout: layout.to_string(),
        difficulty,
        seed,
        policy: policy.name(),
        final_value: last.value,
        normalized_score: references.get(layout, difficulty).map(|r| 100.0 * last.value as f64 / r as f64),
        invalid_actions,
        days,
        trace: env.trace_jsonl()?,
        usage: policy.usage(),
        runtime: started.elapsed(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplayReport {
    pub days: u32,
    /// Days whose regenerated observation differs from the recorded one.
    pub mismatched_days: Vec<u32>,
    pub header_matches: bool,
    pub final_value: i64,
}

impl ReplayReport {
    pub fn faithful(&self) -> bool {
        self.header_matches && self.mismatched_days.is_empty()
    }
}

/// Replays a trace's actions with its seed and compares every observation byte for byte.
pub fn replay_trace(catalog: Arc<Catalog>, trace: &str) -> Result<ReplayReport, HarnessError> {
    let (header, records) = parse_trace(trace).map_err(|e| HarnessError::Trace(e.to_string()))?;
    let mut game = Game::new(catalog, &header.layout, header.difficulty, header.seed, header.mode)?;
    let header_matches = game.header().observation == header.observation;
    let mut mismatched_days = Vec::new();
    for r in &records {
        let turn = game.submit(&r.action)?;
        if turn.observation != r.observation {
            mismatched_days.push(r.day);
        }
    }
    Ok(ReplayReport { days: records.len() as u32, mismatched_days, header_matches, final_value: game.value() })
}

/// The action texts of a trace, in order.
pub fn trace_actions(trace: &str) -> Result<Vec<String>, HarnessError> {
    let (_, records) = parse_trace(trace).map_err(|e| HarnessError::Trace(e.to_string()))?;
    Ok(records.into_iter().map(|r| r.action).collect())
}

/// The final observation recorded in a trace.
pub fn trace_final_observation(trace: &str) -> Result<Observation, HarnessError> {
    let (header, records) = parse_trace(trace).map_err(|e| HarnessError::Trace(e.to_string()))?;
    let text = records.last().map(|r| r.observation.as_str()).unwrap_or(&header.observation);
    parse_observation(text).map_err(|e| HarnessError::Trace(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::agents::{build_policy, WaitOnly};

    #[test]
    fn shipped_references_normalize_to_one_hundred() {
        let t = HumanReferenceTable::shipped();
        assert_eq!(t.entries().count(), 6);
        for (layout, d, v) in t.entries() {
            assert_eq!(format!("{:.2}", normalize_score(&t, v, layout, d).unwrap()), "100.00");
        }
        assert_eq!(normalize_score(&t, 0, "ribs", Difficulty::Easy).unwrap(), 0.0);
        assert!(matches!(
            normalize_score(&t, 1, "starter_loop", Difficulty::Easy),
            Err(HarnessError::UnknownReference { .. })
        ));
    }

    #[test]
    fn overrides_replace_entries() {
        let mut t = HumanReferenceTable::shipped();
        t.apply_overrides("[ribs]\neasy = 1000\n[starter_loop]\nmedium = 50\n").unwrap();
        assert_eq!(t.get("ribs", Difficulty::Easy), Some(1000));
        assert_eq!(t.get("starter_loop", Difficulty::Medium), Some(50));
        assert!(t.apply_overrides("[ribs]\nhard = 3\n").is_err());
    }

    #[test]
    fn wait_only_episode_keeps_starting_money() {
        let c = Arc::new(Catalog::shipped());
        let r = run_episode(&mut WaitOnly, c.clone(), "ribs", Difficulty::Easy, 1, &HumanReferenceTable::shipped())
            .unwrap();
        assert_eq!(r.days, 50);
        assert_eq!(r.final_value, c.params.starting_money);
        assert_eq!(r.invalid_actions, 0);
    }

    struct OneBadLine(bool);

    impl Policy for OneBadLine {
        fn name(&self) -> String {
            "one-bad-line".into()
        }
        fn next_action(&mut self, _ctx: &TurnContext<'_>) -> Result<String, PolicyError> {
            let first = !self.0;
            self.0 = true;
            Ok(if first { "build a ride please".into() } else { "wait()".into() })
        }
        fn fork(&self, _seed: u64) -> Box<dyn Policy> {
            Box::new(OneBadLine(self.0))
        }
    }

    #[test]
    fn one_unparsable_line_gives_one_note() {
        let c = Arc::new(Catalog::shipped());
        let r = run_episode(&mut OneBadLine(false), c, "ribs", Difficulty::Easy, 1, &HumanReferenceTable::empty())
            .unwrap();
        assert_eq!(r.invalid_actions, 1);
        let (_, records) = parse_trace(&r.trace).unwrap();
        assert_eq!(records.iter().filter(|rec| rec.observation.contains("\nNOTE: ")).count(), 1);
        assert!(records[0].observation.contains("NOTE: "));
        assert_eq!(r.normalized_score, None);
    }

    #[test]
    fn identical_runs_give_identical_traces_and_replay_faithfully() {
        let c = Arc::new(Catalog::shipped());
        let refs = HumanReferenceTable::shipped();
        let run = || {
            let mut p = build_policy("heuristic-greedy", 5).unwrap();
            run_episode(p.as_mut(), c.clone(), "zig_zag", Difficulty::Easy, 5, &refs).unwrap()
        };
        let (a, b) = (run(), run());
        assert_eq!(a.trace, b.trace);
        let report = replay_trace(c, &a.trace).unwrap();
        assert!(report.faithful(), "{report:?}");
        assert_eq!(report.final_value, a.final_value);
        assert_eq!(trace_actions(&a.trace).unwrap().len(), 50);
        assert_eq!(trace_final_observation(&a.trace).unwrap().value, a.final_value);
    }

    struct Flaky(u32);

    impl Policy for Flaky {
        fn name(&self) -> String {
            "flaky".into()
        }
        fn next_action(&mut self, _ctx: &TurnContext<'_>) -> Result<String, PolicyError> {
            self.0 += 1;
            if self.0 % 3 == 0 {
                Ok("wait()".into())
            } else {
                Err(PolicyError::Transport("connection reset".into()))
            }
        }
        fn fork(&self, _seed: u64) -> Box<dyn Policy> {
            Box::new(Flaky(0))
        }
    }

    struct Down;

    impl Policy for Down {
        fn name(&self) -> String {
            "down".into()
        }
        fn next_action(&mut self, _ctx: &TurnContext<'_>) -> Result<String, PolicyError> {
            Err(PolicyError::Transport("unreachable".into()))
        }
        fn fork(&self, _seed: u64) -> Box<dyn Policy> {
            Box::new(Down)
        }
    }

    #[test]
    fn transport_failures_are_retried_then_surfaced() {
        let c = Arc::new(Catalog::shipped());
        let refs = HumanReferenceTable::shipped();
        let r = run_episode(&mut Flaky(0), c.clone(), "ribs", Difficulty::Easy, 2, &refs).unwrap();
        assert_eq!(r.days, 50);
        let e = run_episode(&mut Down, c, "ribs", Difficulty::Easy, 2, &refs).unwrap_err();
        assert!(matches!(e, HarnessError::Policy(_)));
    }
}
