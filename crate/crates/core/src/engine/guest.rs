//! Guests: latent variables, initial sampling and the target-choice rule.

use serde::{Deserialize, Serialize};

use super::rng::RngStream;
use crate::catalog::SimParams;
use crate::world::Pos;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GuestState {
    Walking,
    Queueing,
    Riding,
    Shopping,
    Leaving,
}

impl GuestState {
    pub fn code(self) -> f64 {
        match self {
            GuestState::Walking => 0.0,
            GuestState::Queueing => 1.0,
            GuestState::Riding => 2.0,
            GuestState::Shopping => 3.0,
            GuestState::Leaving => 4.0,
        }
    }
}

/// Names of the latent variables, in the order `Guest::latents` reports them.
pub const GUEST_LATENTS: [&str; 14] = [
    "money",
    "energy",
    "hunger",
    "thirst",
    "happiness",
    "patience",
    "preferred_intensity",
    "bank_reserve",
    "position_x",
    "position_y",
    "time_in_park",
    "behavioural_state",
    "current_target",
    "souvenir_desire",
];

#[derive(Debug, Clone, PartialEq)]
pub struct Guest {
    pub money: i64,
    pub energy: f64,
    pub hunger: f64,
    pub thirst: f64,
    pub happiness: f64,
    pub patience: f64,
    pub preferred_intensity: f64,
    pub bank_reserve: i64,
    pub pos: Pos,
    pub time_in_park: u32,
    pub state: GuestState,
    /// Index into the day's attraction table.
    pub current_target: Option<usize>,
    pub souvenir_desire: f64,

    // bookkeeping, not part of the behavioural model
    pub walk: u16,
    pub money_spent: i64,
    pub rides_visited: u32,
    pub food_shops_visited: u32,
    pub drink_shops_visited: u32,
    pub specialty_shops_visited: u32,
    pub visited: Vec<usize>,
    pub queue_ticks: u32,
    pub avoid: Option<usize>,
    /// Passed an info booth: walking distance weighs less in choices.
    pub informed: bool,
    pub exit_reason: Option<&'static str>,
}

impl Guest {
    /// Draws a new guest at the entrance. Consumes exactly nine uniforms.
    pub fn sample(p: &SimParams, rng: &mut RngStream, entrance: Pos, walk: u16) -> Guest {
        let money = rng.range(p.guest_money[0], p.guest_money[1]).floor() as i64;
        let bank_reserve = rng.range(p.guest_bank_reserve[0], p.guest_bank_reserve[1]).floor() as i64;
        let energy = rng.range(p.guest_energy[0], p.guest_energy[1]);
        let hunger = rng.range(p.guest_hunger[0], p.guest_hunger[1]);
        let thirst = rng.range(p.guest_thirst[0], p.guest_thirst[1]);
        let happiness = rng.range(p.guest_happiness[0], p.guest_happiness[1]);
        let patience = rng.range(p.guest_patience[0], p.guest_patience[1]);
        let preferred_intensity = rng.range(p.guest_preferred_intensity[0], p.guest_preferred_intensity[1]);
        let souvenir_desire = rng.range(p.guest_souvenir_desire[0], p.guest_souvenir_desire[1]);
        Guest {
            money,
            energy,
            hunger,
            thirst,
            happiness,
            patience,
            preferred_intensity,
            bank_reserve,
            pos: entrance,
            time_in_park: 0,
            state: GuestState::Walking,
            current_target: None,
            souvenir_desire,
            walk,
            money_spent: 0,
            rides_visited: 0,
            food_shops_visited: 0,
            drink_shops_visited: 0,
            specialty_shops_visited: 0,
            visited: Vec::new(),
            queue_ticks: 0,
            avoid: None,
            informed: false,
            exit_reason: None,
        }
    }

    /// The latent variables as numbers, aligned with `GUEST_LATENTS`.
    pub fn latents(&self) -> [f64; 14] {
        [
            self.money as f64,
            self.energy,
            self.hunger,
            self.thirst,
            self.happiness,
            self.patience,
            self.preferred_intensity,
            self.bank_reserve as f64,
            self.pos.x as f64,
            self.pos.y as f64,
            self.time_in_park as f64,
            self.state.code(),
            self.current_target.map_or(-1.0, |t| t as f64),
            self.souvenir_desire,
        ]
    }

    pub fn has_visited(&self, attraction: usize) -> bool {
        self.visited.contains(&attraction)
    }

    pub fn spend(&mut self, amount: i64) {
        self.money -= amount;
        self.money_spent += amount;
    }

    pub fn clamp(&mut self) {
        self.energy = self.energy.clamp(0.0, 1.0);
        self.hunger = self.hunger.clamp(0.0, 1.0);
        self.thirst = self.thirst.clamp(0.0, 1.0);
        self.happiness = self.happiness.clamp(0.0, 1.0);
        self.money = self.money.max(0);
        self.bank_reserve = self.bank_reserve.max(0);
    }
}

/// Inputs to the utility of one candidate target.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CandidateFeatures {
    /// How well the target satisfies a current need, in [0, 1].
    pub need: f64,
    /// Walking distance in tiles.
    pub distance: f64,
    /// Effective excitement; 0 for shops.
    pub excitement: f64,
    pub price: f64,
    pub max_price: f64,
}

/// utility = need_w·need − dist_w·factor·distance + exc_w·excitement − price_w·price/max.
pub fn utility(p: &SimParams, c: &CandidateFeatures, distance_factor: f64) -> f64 {
    let price_term = if c.max_price > 0.0 { c.price / c.max_price } else { 0.0 };
    p.choice_need_weight * c.need - p.choice_distance_weight * distance_factor * c.distance
        + p.choice_excitement_weight * c.excitement
        - p.choice_price_weight * price_term
}

/// Softmax probabilities with the configured temperature.
pub fn softmax(utilities: &[f64], temperature: f64) -> Vec<f64> {
    if utilities.is_empty() {
        return Vec::new();
    }
    let t = if temperature > 0.0 { temperature } else { 1.0 };
    let max = utilities.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = utilities.iter().map(|u| ((u - max) / t).exp()).collect();
    let sum: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / sum).collect()
}

/// Ride appeal for a guest: intensity match, halved once the ride has been visited.
pub fn ride_fun(preferred_intensity: f64, intensity: f64, visited: bool, repeat_novelty: f64) -> f64 {
    let fit = (1.0 - (preferred_intensity - intensity / 10.0).abs()).clamp(0.0, 1.0);
    if visited {
        fit * repeat_novelty
    } else {
        fit
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::Catalog;

    #[test]
    fn exactly_fourteen_latents() {
        let c = Catalog::shipped();
        let mut rng = RngStream::new(5);
        let g = Guest::sample(&c.params, &mut rng, Pos::new(0, 1), 0);
        assert_eq!(g.latents().len(), GUEST_LATENTS.len());
        assert_eq!(GUEST_LATENTS.len(), 14);
        for v in &g.latents()[1..5] {
            assert!((0.0..=1.0).contains(v));
        }
    }

    #[test]
    fn equal_candidates_split_evenly() {
        let c = Catalog::shipped();
        let f = CandidateFeatures { need: 0.9, distance: 4.0, excitement: 0.0, price: 3.0, max_price: 6.0 };
        let u = [utility(&c.params, &f, 1.0), utility(&c.params, &f, 1.0)];
        let probs = softmax(&u, 1.0);
        let mut rng = RngStream::new(11);
        let n = 10_000;
        let first = (0..n).filter(|_| rng.weighted(&probs) == 0).count() as f64 / n as f64;
        assert!((first - 0.5).abs() <= 0.05, "{first}");
    }

    #[test]
    fn singleton_choice_is_certain() {
        assert_eq!(softmax(&[-3.0], 1.0), vec![1.0]);
    }

    #[test]
    fn utility_prefers_closer_and_cheaper() {
        let c = Catalog::shipped();
        let near = CandidateFeatures { need: 0.5, distance: 2.0, excitement: 1.0, price: 2.0, max_price: 4.0 };
        let far = CandidateFeatures { distance: 10.0, ..near };
        let pricey = CandidateFeatures { price: 4.0, ..near };
        assert!(utility(&c.params, &near, 1.0) > utility(&c.params, &far, 1.0));
        assert!(utility(&c.params, &near, 1.0) > utility(&c.params, &pricey, 1.0));
        assert!(utility(&c.params, &far, 0.5) > utility(&c.params, &far, 1.0));
    }
}
