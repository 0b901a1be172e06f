//! End-of-day aggregates and per-guest records.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

/// Final record of one guest's visit.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct GuestRecord {
    pub happiness: f64,
    pub hunger: f64,
    pub thirst: f64,
    pub money_remaining: i64,
    /// "exit" or "stayed".
    pub exit_or_stay: String,
    pub reason: String,
    pub time_in_park: u32,
    pub money_spent: i64,
    pub rides_visited: u32,
    pub food_shops_visited: u32,
    pub drink_shops_visited: u32,
    pub specialty_shops_visited: u32,
}

pub const EXITED: &str = "exit";
pub const STAYED: &str = "stayed";
pub const PARK_CLOSED: &str = "park closed";

/// Itemized daily expenses. Their sum is the day's `expenses` before any shortfall.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ExpenseBreakdown {
    pub salaries: i64,
    pub staff_operating: i64,
    pub ride_operating: i64,
    pub shop_stock: i64,
    pub research: i64,
}

impl ExpenseBreakdown {
    pub fn total(&self) -> i64 {
        self.salaries + self.staff_operating + self.ride_operating + self.shop_stock + self.research
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct DayStats {
    pub day: u32,
    pub revenue: i64,
    /// Amount actually paid; equals `breakdown.total() - unpaid`.
    pub expenses: i64,
    pub profit: i64,
    pub breakdown: ExpenseBreakdown,
    pub unpaid: i64,

    pub arrivals: u32,
    pub total_guests: u32,
    pub exited: u32,
    pub stayed: u32,
    pub avg_time_in_park: f64,
    pub avg_money_spent: f64,
    pub avg_rides_visited: f64,
    pub avg_food_shops_visited: f64,
    pub avg_drink_shops_visited: f64,
    pub avg_specialty_shops_visited: f64,
    pub exit_reasons: BTreeMap<String, u32>,

    /// Minimum over attractions and path tiles at close.
    pub min_cleanliness: f64,
    /// Mean over attractions and path tiles at close.
    pub mean_cleanliness: f64,
    pub min_ride_uptime: f64,
    pub min_shop_uptime: f64,
    /// Mean over attractions; 0 when there are none.
    pub mean_uptime: f64,
    /// Mean final happiness over every guest of the day; 0 without guests.
    pub mean_happiness: f64,
    pub total_effective_excitement: f64,
    pub distinct_attraction_subtypes: u32,
    pub breakdowns: u32,
}

impl DayStats {
    /// Fills the guest averages from the day's records.
    pub fn absorb_guests(&mut self, guests: &[GuestRecord]) {
        let n = guests.len();
        self.total_guests = n as u32;
        self.exited = guests.iter().filter(|g| g.exit_or_stay == EXITED).count() as u32;
        self.stayed = n as u32 - self.exited;
        self.exit_reasons.clear();
        for g in guests.iter().filter(|g| g.exit_or_stay == EXITED) {
            *self.exit_reasons.entry(g.reason.clone()).or_insert(0) += 1;
        }
        if n == 0 {
            self.avg_time_in_park = 0.0;
            self.avg_money_spent = 0.0;
            self.avg_rides_visited = 0.0;
            self.avg_food_shops_visited = 0.0;
            self.avg_drink_shops_visited = 0.0;
            self.avg_specialty_shops_visited = 0.0;
            self.mean_happiness = 0.0;
            return;
        }
        let mean = |f: &dyn Fn(&GuestRecord) -> f64| guests.iter().map(f).sum::<f64>() / n as f64;
        self.avg_time_in_park = mean(&|g| g.time_in_park as f64);
        self.avg_money_spent = mean(&|g| g.money_spent as f64);
        self.avg_rides_visited = mean(&|g| g.rides_visited as f64);
        self.avg_food_shops_visited = mean(&|g| g.food_shops_visited as f64);
        self.avg_drink_shops_visited = mean(&|g| g.drink_shops_visited as f64);
        self.avg_specialty_shops_visited = mean(&|g| g.specialty_shops_visited as f64);
        self.mean_happiness = mean(&|g| g.happiness);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_guests_give_zero_averages() {
        let mut s = DayStats { avg_time_in_park: 3.0, ..Default::default() };
        s.absorb_guests(&[]);
        assert_eq!(s.total_guests, 0);
        assert_eq!(s.avg_time_in_park, 0.0);
        assert!(s.exit_reasons.is_empty());
    }

    #[test]
    fn stayed_guests_are_not_exit_reasons() {
        let g = |e: &str, r: &str, t| GuestRecord {
            exit_or_stay: e.into(),
            reason: r.into(),
            time_in_park: t,
            ..Default::default()
        };
        let mut s = DayStats::default();
        s.absorb_guests(&[g(EXITED, "tired", 100), g(STAYED, PARK_CLOSED, 50), g(EXITED, "tired", 30)]);
        assert_eq!(s.total_guests, 3);
        assert_eq!(s.exited, 2);
        assert_eq!(s.stayed, 1);
        assert_eq!(s.exit_reasons.get("tired"), Some(&2));
        assert_eq!(s.exit_reasons.len(), 1);
        assert_eq!(s.avg_time_in_park, 60.0);
    }
}
