//! Random-shooting model-predictive control over a world model.

use super::{Outcome, Policy, PolicyError, TurnContext, Usage};
use crate::catalog::Catalog;
use crate::engine::{apply_action, compute_park_value, simulate_day, RngStream};
use crate::observe::{build_observation, serialize, Observation};
use crate::protocol::{note_line, parse_action, ActionError};
use crate::world::ParkState;

pub const DEFAULT_ROLLOUTS: usize = 5;
pub const DEFAULT_DEPTH: usize = 4;
pub const MAX_RESAMPLES: usize = 10;

/// A predicted transition. `invalid` is set when the model judges the action
/// illegal; the handle is then unchanged.
pub struct Prediction {
    pub observation: Observation,
    pub value: i64,
    pub invalid: Option<ActionError>,
}

/// Predicts the next morning for an action on a forked park.
pub trait WorldModel: Send {
    fn name(&self) -> String;

    fn fork(&self, state: &ParkState) -> ParkState {
        state.clone()
    }

    fn predict(&self, handle: &mut ParkState, catalog: &Catalog, action: &str, rng: &mut RngStream) -> Prediction;

    fn clone_box(&self) -> Box<dyn WorldModel>;
}

/// Delegates to the real engine on the fork, with a fresh random stream.
#[derive(Debug, Clone, Copy, Default)]
pub struct OracleWorldModel;

impl WorldModel for OracleWorldModel {
    fn name(&self) -> String {
        "oracle".into()
    }

    fn clone_box(&self) -> Box<dyn WorldModel> {
        Box::new(*self)
    }

    fn predict(&self, handle: &mut ParkState, catalog: &Catalog, action: &str, rng: &mut RngStream) -> Prediction {
        let parsed = parse_action(action).map_err(ActionError::from);
        let applied = parsed.and_then(|a| {
            let mut trial = handle.clone();
            apply_action(&mut trial, catalog, &a).map(|_| trial)
        });
        match applied {
            Err(e) => Prediction {
                observation: build_observation(handle, catalog),
                value: compute_park_value(handle, catalog),
                invalid: Some(e),
            },
            Ok(mut next) => {
                next.rng = RngStream::new(rng.next_seed());
                simulate_day(&mut next, catalog);
                *handle = next;
                Prediction {
                    observation: build_observation(handle, catalog),
                    value: compute_park_value(handle, catalog),
                    invalid: None,
                }
            }
        }
    }
}

/// A deterministic table-driven model for tests: every valid action adds the
/// value listed for its name (zero otherwise) and only the day advances.
#[derive(Debug, Clone, Default)]
pub struct StubWorldModel {
    pub gains: Vec<(String, i64)>,
}

impl WorldModel for StubWorldModel {
    fn name(&self) -> String {
        "stub".into()
    }

    fn clone_box(&self) -> Box<dyn WorldModel> {
        Box::new(self.clone())
    }

    fn predict(&self, handle: &mut ParkState, catalog: &Catalog, action: &str, _rng: &mut RngStream) -> Prediction {
        match parse_action(action) {
            Err(e) => Prediction {
                observation: build_observation(handle, catalog),
                value: compute_park_value(handle, catalog),
                invalid: Some(e.into()),
            },
            Ok(a) => {
                let gain = self.gains.iter().find(|(n, _)| n == a.name()).map(|(_, g)| *g).unwrap_or(0);
                handle.money += gain;
                handle.day += 1;
                Prediction {
                    observation: build_observation(handle, catalog),
                    value: compute_park_value(handle, catalog),
                    invalid: None,
                }
            }
        }
    }
}

/// Result of one planning step, kept for inspection.
#[derive(Debug, Clone, PartialEq)]
pub struct Plan {
    pub first_actions: Vec<String>,
    pub scores: Vec<i64>,
    pub chosen: usize,
    pub resamples: usize,
}

/// Samples `k` rollouts of depth `h` from forks of the base policy and plays
/// the first action of the rollout with the highest predicted park value.
pub struct Mpc {
    policy: Box<dyn Policy>,
    model: Box<dyn WorldModel>,
    rng: RngStream,
    pub rollouts: usize,
    pub depth: usize,
    usage: Usage,
    pub last_plan: Option<Plan>,
}

impl Mpc {
    pub fn new(policy: Box<dyn Policy>, model: Box<dyn WorldModel>, seed: u64) -> Mpc {
        Mpc {
            policy,
            model,
            rng: RngStream::new(seed),
            rollouts: DEFAULT_ROLLOUTS,
            depth: DEFAULT_DEPTH,
            usage: Usage::default(),
            last_plan: None,
        }
    }

    /// Samples an action the model accepts, resampling up to the cap and then waiting.
    fn sample(
        &self,
        policy: &mut dyn Policy,
        handle: &mut ParkState,
        catalog: &Catalog,
        note: Option<&str>,
        rng: &mut RngStream,
        resamples: &mut usize,
    ) -> Result<(String, Prediction), PolicyError> {
        let observation = build_observation(handle, catalog);
        let text = serialize(&observation, note);
        for attempt in 0..=MAX_RESAMPLES {
            let ctx = TurnContext { observation_text: &text, observation: &observation, state: handle, catalog };
            let action = policy.next_action(&ctx)?;
            let mut trial = handle.clone();
            let prediction = self.model.predict(&mut trial, catalog, &action, rng);
            match &prediction.invalid {
                None => {
                    *handle = trial;
                    return Ok((action, prediction));
                }
                Some(e) => {
                    let rejected = note_line(&action, e);
                    policy.notify(&Outcome { action: &action, error: Some(e), observation_text: &rejected });
                    if attempt < MAX_RESAMPLES {
                        *resamples += 1;
                    }
                }
            }
        }
        let wait = "wait()".to_string();
        let prediction = self.model.predict(handle, catalog, &wait, rng);
        Ok((wait, prediction))
    }

    /// Plans one morning. Never touches `state`.
    pub fn plan(&mut self, state: &ParkState, catalog: &Catalog) -> Result<(String, Box<dyn Policy>), PolicyError> {
        let depth = self.depth.min(state.horizon.saturating_sub(state.day) as usize).max(1);
        let mut best: Option<(i64, usize, String, Box<dyn Policy>)> = None;
        let mut first_actions = Vec::with_capacity(self.rollouts);
        let mut scores = Vec::with_capacity(self.rollouts);
        let mut resamples = 0;
        for i in 0..self.rollouts {
            let mut policy = self.policy.fork(self.rng.next_seed());
            let mut rng = RngStream::new(self.rng.next_seed());
            let mut handle = self.model.fork(state);
            let mut first: Option<(String, Box<dyn Policy>)> = None;
            let mut value = compute_park_value(&handle, catalog);
            for _ in 0..depth {
                if handle.finished() {
                    break;
                }
                let (action, prediction) = self.sample(policy.as_mut(), &mut handle, catalog, None, &mut rng, &mut resamples)?;
                let text = serialize(&prediction.observation, None);
                policy.notify(&Outcome { action: &action, error: None, observation_text: &text });
                value = prediction.value;
                if first.is_none() {
                    first = Some((action, policy.fork(self.rng.next_seed())));
                }
            }
            self.usage.add(policy.usage());
            let (action, snapshot) = first.unwrap_or_else(|| ("wait()".to_string(), policy.fork(0)));
            first_actions.push(action.clone());
            scores.push(value);
            if best.as_ref().map_or(true, |(v, _, _, _)| value > *v) {
                best = Some((value, i, action, snapshot));
            }
        }
        let (_, chosen, action, snapshot) = best.expect("at least one rollout");
        self.last_plan = Some(Plan { first_actions, scores, chosen, resamples });
        Ok((action, snapshot))
    }
}

impl Policy for Mpc {
    fn name(&self) -> String {
        format!("mpc({}, {}, k={}, h={})", self.policy.name(), self.model.name(), self.rollouts, self.depth)
    }

    fn next_action(&mut self, ctx: &TurnContext<'_>) -> Result<String, PolicyError> {
        match self.plan(ctx.state, ctx.catalog) {
            Ok((action, snapshot)) => {
                self.policy = snapshot;
                Ok(action)
            }
            Err(_) => self.policy.next_action(ctx),
        }
    }

    fn notify(&mut self, outcome: &Outcome<'_>) {
        self.policy.notify(outcome)
    }

    fn fork(&self, seed: u64) -> Box<dyn Policy> {
        let mut m = Mpc::new(self.policy.fork(seed), self.model.clone_box(), seed);
        m.rollouts = self.rollouts;
        m.depth = self.depth;
        Box::new(m)
    }

    fn usage(&self) -> Usage {
        let mut u = self.usage;
        u.add(self.policy.usage());
        u
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::agents::scripted::GreedyStochastic;
    use crate::agents::WaitOnly;
    use crate::world::{new_park, Difficulty, Layout};

    fn setup() -> (Catalog, ParkState) {
        let c = Catalog::shipped();
        let s = new_park(&c, Layout::shipped("ribs").unwrap(), Difficulty::Easy, 5);
        (c, s)
    }

    /// Alternates between waiting and a fixed carousel build, starting from its seed's parity.
    struct Alternating {
        build: bool,
    }

    impl Policy for Alternating {
        fn name(&self) -> String {
            "alternating".into()
        }
        fn next_action(&mut self, _ctx: &TurnContext<'_>) -> Result<String, PolicyError> {
            self.build = !self.build;
            Ok(if self.build {
                "place(x=2, y=5, type=\"ride\", subtype=\"carousel\", subclass=\"yellow\")".into()
            } else {
                "wait()".into()
            })
        }
        fn fork(&self, seed: u64) -> Box<dyn Policy> {
            Box::new(Alternating { build: seed % 2 == 0 })
        }
    }

    #[test]
    fn defaults() {
        let m = Mpc::new(Box::new(WaitOnly), Box::new(OracleWorldModel), 0);
        assert_eq!((m.rollouts, m.depth), (5, 4));
    }

    #[test]
    fn equal_scores_pick_the_first_rollout() {
        let (c, s) = setup();
        let mut m = Mpc::new(Box::new(WaitOnly), Box::new(StubWorldModel::default()), 3);
        let (action, _) = m.plan(&s, &c).unwrap();
        assert_eq!(action, "wait()");
        assert_eq!(m.last_plan.unwrap().chosen, 0);
    }

    #[test]
    fn toy_model_prefers_the_build() {
        let (c, s) = setup();
        let model = StubWorldModel { gains: vec![("place".into(), 100)] };
        let mut m = Mpc::new(Box::new(Alternating { build: false }), Box::new(model), 9);
        m.depth = 1;
        let (action, _) = m.plan(&s, &c).unwrap();
        assert!(action.starts_with("place("));
    }

    #[test]
    fn planning_never_touches_the_live_state() {
        let (c, s) = setup();
        let before = s.to_bytes();
        let mut m = Mpc::new(Box::new(GreedyStochastic::new(1)), Box::new(OracleWorldModel), 1);
        m.plan(&s, &c).unwrap();
        assert_eq!(s.to_bytes(), before);
    }

    #[test]
    fn oracle_matches_the_engine_and_flags_invalid_actions() {
        let (c, s) = setup();
        let mut handle = s.clone();
        let mut rng = RngStream::new(4);
        let mut expected = s.clone();
        expected.rng = RngStream::new(RngStream::new(4).next_seed());
        simulate_day(&mut expected, &c);
        let p = OracleWorldModel.predict(&mut handle, &c, "wait()", &mut rng);
        assert!(p.invalid.is_none());
        assert_eq!(serialize(&p.observation, None), serialize(&build_observation(&expected, &c), None));

        let mut handle = s.clone();
        let p = OracleWorldModel.predict(&mut handle, &c, "remove(x=0, y=0)", &mut rng);
        assert!(p.invalid.is_some());
        assert_eq!(handle.to_bytes(), s.to_bytes());
    }

    #[test]
    fn invalid_policies_fall_back_to_wait() {
        struct Broken;
        impl Policy for Broken {
            fn name(&self) -> String {
                "broken".into()
            }
            fn next_action(&mut self, _ctx: &TurnContext<'_>) -> Result<String, PolicyError> {
                Ok("remove(x=0, y=0)".into())
            }
            fn fork(&self, _seed: u64) -> Box<dyn Policy> {
                Box::new(Broken)
            }
        }
        let (c, s) = setup();
        let mut m = Mpc::new(Box::new(Broken), Box::new(OracleWorldModel), 2);
        let (action, _) = m.plan(&s, &c).unwrap();
        assert_eq!(action, "wait()");
        assert_eq!(m.last_plan.unwrap().resamples, 5 * 4 * MAX_RESAMPLES);
    }

    proptest::proptest! {
        #![proptest_config(proptest::prelude::ProptestConfig { cases: 6, ..Default::default() })]
        #[test]
        fn rollouts_are_isolated(park_seed in 0u64..1000, mpc_seed in 0u64..1000, money in 1000i64..50_000) {
            let c = Catalog::shipped();
            let mut s = new_park(&c, Layout::shipped("zig_zag").unwrap(), Difficulty::Easy, park_seed);
            s.money = money;
            let before = s.to_bytes();
            let mut m = Mpc::new(Box::new(GreedyStochastic::new(mpc_seed)), Box::new(OracleWorldModel), mpc_seed);
            m.plan(&s, &c).unwrap();
            proptest::prop_assert_eq!(s.to_bytes(), before);
        }
    }
}
