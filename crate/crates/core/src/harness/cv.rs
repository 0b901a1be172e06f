//! Coefficient-of-variation studies over repeated simulation.

use serde::{Deserialize, Serialize};

use crate::catalog::Catalog;
use crate::engine::{apply_action, compute_park_value, simulate_day, RngStream};
use crate::protocol::{parse, Command};
use crate::world::{new_park, Difficulty, Layout, ParkState};

/// Population standard deviation over the mean; 0 when the mean is 0.
pub fn cv(samples: &[f64]) -> f64 {
    if samples.is_empty() {
        return 0.0;
    }
    let n = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / n;
    if mean == 0.0 {
        return 0.0;
    }
    let var = samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
    var.sqrt() / mean.abs()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CvTriple {
    pub revenue: f64,
    pub money: f64,
    pub value: f64,
}

/// Simulates the same day `n` times from identical state with fresh seeds drawn
/// from `rng`. All three metrics come from the same `n` runs.
pub fn per_day_cv(
    state: &ParkState,
    catalog: &Catalog,
    action: &crate::protocol::Action,
    n: usize,
    rng: &mut RngStream,
) -> Result<CvTriple, crate::protocol::ActionError> {
    assert!(n >= 2, "per-day CV needs at least two samples");
    let mut revenue = Vec::with_capacity(n);
    let mut money = Vec::with_capacity(n);
    let mut value = Vec::with_capacity(n);
    for _ in 0..n {
        let mut s = state.clone();
        s.rng = RngStream::new(rng.next_seed());
        apply_action(&mut s, catalog, action)?;
        let stats = simulate_day(&mut s, catalog);
        revenue.push(stats.revenue as f64);
        money.push(s.money as f64);
        value.push(compute_park_value(&s, catalog) as f64);
    }
    Ok(CvTriple { revenue: cv(&revenue), money: cv(&money), value: cv(&value) })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DayCv {
    pub day: u32,
    pub cv: CvTriple,
    pub mean_revenue: f64,
    pub mean_value: f64,
    pub mean_guests: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryCv {
    pub layout: String,
    pub difficulty: Difficulty,
    pub requested_runs: usize,
    pub kept_runs: usize,
    pub discarded_runs: usize,
    /// Set when the retry cap ran out before `requested_runs` valid runs were found.
    pub partial: bool,
    pub seeds: Vec<u64>,
    pub days: Vec<DayCv>,
}

struct RunSeries {
    revenue: Vec<f64>,
    value: Vec<f64>,
    money: Vec<f64>,
    guests: Vec<f64>,
}

/// Plays the whole sequence on one seed; `None` when any action is invalid.
fn replay_run(actions: &[String], catalog: &Catalog, layout: &Layout, difficulty: Difficulty, seed: u64) -> Option<RunSeries> {
    let mut s = new_park(catalog, layout.clone(), difficulty, seed);
    let mut out = RunSeries { revenue: vec![], value: vec![], money: vec![], guests: vec![] };
    for text in actions.iter().take(s.horizon as usize) {
        let Ok(Command::Game(action)) = parse(text) else {
            return None;
        };
        apply_action(&mut s, catalog, &action).ok()?;
        let stats = simulate_day(&mut s, catalog);
        out.revenue.push(stats.revenue as f64);
        out.money.push(s.money as f64);
        out.value.push(compute_park_value(&s, catalog) as f64);
        out.guests.push(stats.total_guests as f64);
    }
    Some(out)
}

/// Replays an action sequence on `n` distinct seeds and reports per-day CVs.
/// Runs where an action turns invalid are discarded and replaced; after `3n`
/// attempts the report is marked partial.
pub fn trajectory_cv(
    actions: &[String],
    catalog: &Catalog,
    layout: &Layout,
    difficulty: Difficulty,
    n: usize,
    base_seed: u64,
) -> TrajectoryCv {
    assert!(n >= 2, "trajectory CV needs at least two runs");
    let mut seeds_rng = RngStream::new(base_seed);
    let mut runs = Vec::with_capacity(n);
    let mut seeds = Vec::with_capacity(n);
    let mut discarded = 0;
    for _ in 0..3 * n {
        if runs.len() == n {
            break;
        }
        let seed = seeds_rng.next_seed();
        match replay_run(actions, catalog, layout, difficulty, seed) {
            Some(r) => {
                runs.push(r);
                seeds.push(seed);
            }
            None => discarded += 1,
        }
    }
    let len = runs.first().map_or(0, |r| r.revenue.len());
    let mean = |xs: &[f64]| if xs.is_empty() { 0.0 } else { xs.iter().sum::<f64>() / xs.len() as f64 };
    let days = (0..len)
        .map(|d| {
            let col = |f: fn(&RunSeries) -> &Vec<f64>| runs.iter().map(|r| f(r)[d]).collect::<Vec<f64>>();
            let (revenue, money, value, guests) = (col(|r| &r.revenue), col(|r| &r.money), col(|r| &r.value), col(|r| &r.guests));
            DayCv {
                day: d as u32 + 1,
                cv: CvTriple { revenue: cv(&revenue), money: cv(&money), value: cv(&value) },
                mean_revenue: mean(&revenue),
                mean_value: mean(&value),
                mean_guests: mean(&guests),
            }
        })
        .collect();
    TrajectoryCv {
        layout: layout.name.clone(),
        difficulty,
        requested_runs: n,
        kept_runs: runs.len(),
        discarded_runs: discarded,
        partial: runs.len() < n,
        seeds,
        days,
    }
}
