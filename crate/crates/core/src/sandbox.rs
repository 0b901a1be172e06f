//! Sandbox sessions: auxiliary actions, action budgets and per-day snapshots.

use serde::{Deserialize, Serialize};

use crate::catalog::Catalog;
use crate::engine::{apply_action, simulate_day, DayStats, RngStream};
use crate::protocol::{Action, ActionError, SandboxAction};
use crate::world::{new_park, Difficulty, Layout, ParkState, TRAINING_LAYOUTS};

pub const STANDARD_BUDGET: u32 = 100;
pub const SANDBOX_SOFT_CAP: u32 = 250;

/// Documentation section appended to sandbox observations and the sandbox manual.
pub const SANDBOX_DOCS: &str = include_str!("../assets/sandbox_docs.md");

pub mod messages {
    pub const NOTHING_TO_UNDO: &str = "There is no previous day to undo";
    pub const BUDGET_EXHAUSTED: &str = "The sandbox action budget is exhausted";

    pub fn evaluation_layout(name: &str) -> String {
        format!("Layout {name} is an evaluation layout and is not available in sandbox mode")
    }

    pub fn unknown_layout(name: &str) -> String {
        format!("Unknown layout: {name}")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SandboxSession {
    pub state: ParkState,
    /// Serialized pre-day states, one per completed standard day.
    snapshots: Vec<Vec<u8>>,
    pub standard_actions_used: u32,
    pub sandbox_actions_used: u32,
    master: RngStream,
    difficulty: Difficulty,
}

/// Resolves a layout a sandbox may use; evaluation layouts are refused.
pub fn training_layout(name: &str) -> Result<Layout, ActionError> {
    let layout = Layout::shipped(name).map_err(|_| ActionError::new(messages::unknown_layout(name)))?;
    if layout.is_evaluation() || !TRAINING_LAYOUTS.contains(&name) {
        return Err(ActionError::new(messages::evaluation_layout(name)));
    }
    Ok(layout)
}

impl SandboxSession {
    pub fn new(catalog: &Catalog, layout: &str, difficulty: Difficulty, seed: u64) -> Result<SandboxSession, ActionError> {
        let layout = training_layout(layout)?;
        let mut master = RngStream::new(seed);
        let park_seed = master.next_seed();
        Ok(SandboxSession {
            state: new_park(catalog, layout, difficulty, park_seed),
            snapshots: Vec::new(),
            standard_actions_used: 0,
            sandbox_actions_used: 0,
            master,
            difficulty,
        })
    }

    pub fn finished(&self) -> bool {
        self.standard_actions_used >= STANDARD_BUDGET
    }

    pub fn standard_actions_left(&self) -> u32 {
        STANDARD_BUDGET.saturating_sub(self.standard_actions_used)
    }

    pub fn undo_depth(&self) -> usize {
        self.snapshots.len()
    }

    fn check_active(&self) -> Result<(), ActionError> {
        if self.finished() {
            return Err(ActionError::new(messages::BUDGET_EXHAUSTED));
        }
        Ok(())
    }

    /// Applies an auxiliary action. Failed actions change nothing and consume no budget.
    pub fn apply_sandbox_action(&mut self, catalog: &Catalog, action: &SandboxAction) -> Result<(), ActionError> {
        self.check_active()?;
        match action {
            SandboxAction::UndoDay => {
                let bytes = self.snapshots.pop().ok_or_else(|| ActionError::new(messages::NOTHING_TO_UNDO))?;
                self.state = ParkState::from_bytes(&bytes).expect("snapshots deserialize");
            }
            SandboxAction::MaxMoney => self.state.money = catalog.params.sandbox_max_money,
            SandboxAction::MaxResearch => {
                let research = crate::world::ResearchState::all_unlocked();
                self.state.research.unlocked = research.unlocked;
            }
            SandboxAction::Reset => self.restart(catalog, self.state.layout.clone()),
            SandboxAction::SwitchLayout { name } => {
                let layout = training_layout(name)?;
                self.restart(catalog, layout);
            }
        }
        self.sandbox_actions_used += 1;
        if self.sandbox_actions_used > SANDBOX_SOFT_CAP {
            self.standard_actions_used += 1;
        }
        Ok(())
    }

    fn restart(&mut self, catalog: &Catalog, layout: Layout) {
        let seed = self.master.next_seed();
        self.state = new_park(catalog, layout, self.difficulty, seed);
        self.snapshots.clear();
    }

    /// Runs one standard day. An invalid action still consumes the day as a wait.
    pub fn step_sandbox(&mut self, catalog: &Catalog, action: &Action) -> Result<(DayStats, Option<ActionError>), ActionError> {
        self.check_active()?;
        if self.state.finished() {
            return Err(ActionError::new(crate::protocol::messages::game_over(self.state.day, self.state.horizon)));
        }
        self.snapshots.push(self.state.to_bytes());
        let error = apply_action(&mut self.state, catalog, action).err();
        let stats = simulate_day(&mut self.state, catalog);
        self.standard_actions_used += 1;
        Ok((stats, error))
    }

    /// Budget line shown under the sandbox documentation.
    pub fn budget_line(&self) -> String {
        format!(
            "Sandbox budget: {} of {} standard actions used, {} of {} sandbox actions used.",
            self.standard_actions_used, STANDARD_BUDGET, self.sandbox_actions_used, SANDBOX_SOFT_CAP
        )
    }
}
