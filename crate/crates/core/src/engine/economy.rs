//! Money, research progress, the park rating and the park value.

use std::collections::BTreeSet;

use super::stats::{DayStats, ExpenseBreakdown};
use crate::catalog::{Catalog, ResearchSpeed, SimParams, Subtype};
use crate::world::placement::effective_excitement;
use crate::world::state::RESEARCH_UNITS;
use crate::world::{ParkState, Tile};

/// Morning stock order for every shop. Perishable leftovers above the carryover
/// share of the order are wasted; free stock is never wasted.
pub fn morning_orders(state: &mut ParkState, catalog: &Catalog) {
    let carry_fraction = catalog.params.waste_carryover_fraction;
    for e in state.entities.iter_mut().filter(|e| e.is_shop()) {
        let spec = catalog.spec(e.key.subtype, e.key.subclass);
        let leftover = e.inventory.max(0);
        let carry = if spec.item_cost == 0 {
            leftover
        } else {
            leftover.min((carry_fraction * e.order_quantity as f64).floor() as i64)
        };
        e.day.wasted_units = leftover - carry;
        e.day.stock_purchased = e.order_quantity;
        e.inventory = carry + e.order_quantity;
        e.day.out_of_service = e.inventory == 0;
    }
}

/// Rating in [0, 100] from one day's statistics and nothing else.
pub fn compute_rating(yesterday: &DayStats, p: &SimParams) -> f64 {
    let exc = yesterday.total_effective_excitement.max(0.0);
    let e_hat = exc / (exc + p.rating_excitement_softness);
    let diversity = (yesterday.distinct_attraction_subtypes as f64 / p.rating_diversity_norm).min(1.0);
    let score = p.rating_excitement_weight * e_hat
        + p.rating_cleanliness_weight * yesterday.mean_cleanliness
        + p.rating_uptime_weight * yesterday.mean_uptime
        + p.rating_happiness_weight * yesterday.mean_happiness
        + p.rating_diversity_weight * diversity;
    100.0 * score.clamp(0.0, 1.0)
}

/// Money on hand plus resale value of rides and shops plus the research credit.
pub fn compute_park_value(state: &ParkState, catalog: &Catalog) -> i64 {
    let resale: i64 = state.entities.iter().map(|e| catalog.spec(e.key.subtype, e.key.subclass).refund()).sum();
    let ip = (catalog.params.ip_fraction * state.research.cumulative_spend as f64).floor() as i64;
    state.money + resale + ip
}

/// Fills the attraction, cleanliness and excitement aggregates of `stats`.
pub fn absorb_park(stats: &mut DayStats, state: &ParkState, catalog: &Catalog) {
    let mut cleanliness: Vec<f64> = state.entities.iter().map(|e| e.cleanliness).collect();
    cleanliness.extend(state.layout.positions_of(Tile::Path).map(|p| state.path_cleanliness[p.index()]));
    stats.min_cleanliness = cleanliness.iter().cloned().fold(1.0, f64::min);
    stats.mean_cleanliness =
        if cleanliness.is_empty() { 1.0 } else { cleanliness.iter().sum::<f64>() / cleanliness.len() as f64 };
    stats.min_ride_uptime = state.rides().map(|e| e.day.uptime).fold(1.0, f64::min);
    stats.min_shop_uptime = state.shops().map(|e| e.day.uptime).fold(1.0, f64::min);
    stats.mean_uptime = if state.entities.is_empty() {
        0.0
    } else {
        state.entities.iter().map(|e| e.day.uptime).sum::<f64>() / state.entities.len() as f64
    };
    stats.total_effective_excitement =
        state.rides().filter_map(|r| effective_excitement(state, catalog, r.id)).sum::<f64>();
    let subtypes: BTreeSet<Subtype> = state.entities.iter().map(|e| e.key.subtype).collect();
    stats.distinct_attraction_subtypes = subtypes.len() as u32;
}

/// Itemized costs of the day just simulated.
pub fn day_costs(state: &ParkState, catalog: &Catalog) -> ExpenseBreakdown {
    let mut b = ExpenseBreakdown::default();
    for m in &state.staff {
        let spec = catalog.spec(m.key.subtype, m.key.subclass);
        b.salaries += spec.salary;
        b.staff_operating += m.day.operating_cost;
    }
    for e in &state.entities {
        let spec = catalog.spec(e.key.subtype, e.key.subclass);
        if e.is_ride() {
            b.ride_operating += spec.cost_per_operation * e.day.times_operated as i64;
        } else {
            b.shop_stock += spec.item_cost * (e.day.stock_purchased + e.day.restocked_units);
        }
    }
    if let (Some(_), Some(speed)) = (state.research.active_topic, catalog.research_speed(state.research.speed)) {
        b.research = speed.cost_per_day;
    }
    b
}

/// Pays the day's costs out of money plus revenue, never going below zero.
pub fn settle_economy(state: &mut ParkState, catalog: &Catalog, stats: &mut DayStats) {
    let breakdown = day_costs(state, catalog);
    let total = breakdown.total();
    let available = state.money + stats.revenue;
    let paid = total.min(available.max(0));
    state.money = available - paid;
    stats.breakdown = breakdown;
    stats.expenses = paid;
    stats.unpaid = total - paid;
    stats.profit = stats.revenue - paid;
    state.staff_unpaid = stats.unpaid > 0;
    advance_research(state, catalog);
}

/// One day of research at the active speed; unlocks the next tier when complete.
pub fn advance_research(state: &mut ParkState, catalog: &Catalog) {
    let r = &mut state.research;
    r.days_since_last_new_entity.slow += 1;
    r.days_since_last_new_entity.medium += 1;
    r.days_since_last_new_entity.fast += 1;
    r.new_entity_available = false;
    let (Some(topic), Some(spec)) = (r.active_topic, catalog.research_speed(r.speed)) else {
        return;
    };
    r.cumulative_spend += spec.cost_per_day;
    r.progress += RESEARCH_UNITS.div_ceil(spec.days_to_unlock.max(1));
    if r.progress < RESEARCH_UNITS {
        return;
    }
    r.progress = 0;
    if r.unlock_next(topic).is_some() {
        r.new_entity_available = true;
        match r.speed {
            ResearchSpeed::Slow => r.days_since_last_new_entity.slow = 0,
            ResearchSpeed::Medium => r.days_since_last_new_entity.medium = 0,
            ResearchSpeed::Fast => r.days_since_last_new_entity.fast = 0,
            ResearchSpeed::None => {}
        }
    }
    if r.fully_researched(topic) {
        r.active_topic = None;
        r.speed = ResearchSpeed::None;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::world::{new_park, Difficulty, Layout};

    fn park(d: Difficulty) -> (Catalog, ParkState) {
        let c = Catalog::shipped();
        let s = new_park(&c, Layout::shipped("ribs").unwrap(), d, 3);
        (c, s)
    }

    #[test]
    fn perfect_park_rates_100() {
        let c = Catalog::shipped();
        let stats = DayStats {
            total_effective_excitement: 1e12,
            mean_cleanliness: 1.0,
            mean_uptime: 1.0,
            mean_happiness: 1.0,
            distinct_attraction_subtypes: 6,
            ..Default::default()
        };
        assert!((compute_rating(&stats, &c.params) - 100.0).abs() < 1e-6);
        assert_eq!(compute_rating(&DayStats::default(), &c.params), 0.0);
    }

    #[test]
    fn value_of_bare_park_is_money() {
        let (c, s) = park(Difficulty::Easy);
        assert_eq!(compute_park_value(&s, &c), s.money);
    }

    #[test]
    fn research_fast_unlocks_next_day() {
        let (c, mut s) = park(Difficulty::Medium);
        s.research.active_topic = Some(Subtype::RollerCoaster);
        s.research.speed = ResearchSpeed::Fast;
        advance_research(&mut s, &c);
        assert_eq!(s.research.highest_unlocked(Subtype::RollerCoaster), crate::catalog::Subclass::Blue);
        assert!(s.research.new_entity_available);
        assert_eq!(s.research.days_since_last_new_entity.fast, 0);
        assert_eq!(s.research.cumulative_spend, 2000);
    }

    #[test]
    fn research_slow_takes_seven_days() {
        let (c, mut s) = park(Difficulty::Medium);
        s.research.active_topic = Some(Subtype::Food);
        s.research.speed = ResearchSpeed::Slow;
        for day in 1..=7 {
            advance_research(&mut s, &c);
            let unlocked = s.research.highest_unlocked(Subtype::Food) == crate::catalog::Subclass::Blue;
            assert_eq!(unlocked, day == 7, "day {day}");
        }
    }

    #[test]
    fn shortfall_floors_money_at_zero() {
        let (c, mut s) = park(Difficulty::Easy);
        s.money = 10;
        s.research.active_topic = Some(Subtype::Food);
        s.research.speed = ResearchSpeed::Fast;
        let mut stats = DayStats { revenue: 5, ..Default::default() };
        settle_economy(&mut s, &c, &mut stats);
        assert_eq!(s.money, 0);
        assert_eq!(stats.expenses, 15);
        assert_eq!(stats.unpaid, 2000 - 15);
        assert!(s.staff_unpaid);
    }

    #[test]
    fn free_drink_stock_costs_nothing_and_is_kept() {
        let (c, mut s) = park(Difficulty::Easy);
        let key = crate::catalog::EntityKey::of(Subtype::Drink, crate::catalog::Subclass::Yellow);
        s.entities.push(crate::world::PlacedEntity {
            id: 1,
            key,
            pos: crate::world::Pos::new(2, 9),
            price: 3,
            order_quantity: 100,
            inventory: 40,
            cleanliness: 1.0,
            broken: false,
            repair_points_remaining: 0.0,
            day: Default::default(),
        });
        morning_orders(&mut s, &c);
        assert_eq!(s.entities[0].inventory, 140);
        assert_eq!(s.entities[0].day.wasted_units, 0);
        assert_eq!(day_costs(&s, &c).shop_stock, 0);
    }
}
