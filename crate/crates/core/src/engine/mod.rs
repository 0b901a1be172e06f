//! The authoritative day loop: morning action, intra-day ticks, settlement.

pub mod day;
pub mod economy;
pub mod guest;
pub mod rng;
pub mod stats;

use crate::catalog::{Catalog, Kind, ResearchSpeed};
use crate::protocol::{validate, Action, ActionError};
use crate::world::{ParkState, PlacedEntity, Pos, StaffMember, SurveyRecord};

pub use day::{breakdown_draw, TickProbe, EXIT_REASONS};
pub use economy::{compute_park_value, compute_rating, settle_economy};
pub use rng::RngStream;
pub use stats::{DayStats, GuestRecord};

fn pos(x: i64, y: i64) -> Pos {
    Pos::new(x as i32, y as i32)
}

/// Validates and applies the morning action. Nothing changes on error.
///
/// Capital flows (build and hire costs, refunds, surveys) move money here and
/// stay out of the day's revenue and expenses.
pub fn apply_action(state: &mut ParkState, catalog: &Catalog, action: &Action) -> Result<(), ActionError> {
    validate(state, catalog, action)?;
    match *action {
        Action::Place { x, y, kind, subtype, subclass, price, order_quantity } => {
            let spec = catalog.spec(subtype, subclass);
            state.money -= spec.build_cost;
            let id = state.allocate_id();
            let key = spec.key;
            if kind == Kind::Staff {
                state.staff.push(StaffMember { id, key, pos: pos(x, y), day: Default::default() });
            } else {
                state.entities.push(PlacedEntity {
                    id,
                    key,
                    pos: pos(x, y),
                    price: price.unwrap_or(spec.max_price),
                    order_quantity: if kind == Kind::Shop {
                        order_quantity.unwrap_or(spec.default_order_quantity)
                    } else {
                        0
                    },
                    inventory: 0,
                    cleanliness: 1.0,
                    broken: false,
                    repair_points_remaining: 0.0,
                    day: Default::default(),
                });
            }
        }
        Action::Move { x, y, new_x, new_y } => {
            let (from, to) = (pos(x, y), pos(new_x, new_y));
            if let Some(e) = state.entities.iter_mut().find(|e| e.pos == from) {
                e.pos = to;
            } else if let Some(m) = state.staff.iter_mut().find(|m| m.pos == from) {
                m.pos = to;
            }
        }
        Action::Remove { x, y } => {
            let at = pos(x, y);
            if let Some(i) = state.entities.iter().position(|e| e.pos == at) {
                let e = state.entities.remove(i);
                state.money += catalog.spec(e.key.subtype, e.key.subclass).refund();
            } else if let Some(i) = state.staff.iter().position(|m| m.pos == at) {
                let m = state.staff.remove(i);
                state.money += catalog.spec(m.key.subtype, m.key.subclass).refund();
            }
        }
        Action::Modify { x, y, price, order_quantity } => {
            let at = pos(x, y);
            if let Some(e) = state.entities.iter_mut().find(|e| e.pos == at) {
                if let Some(p) = price {
                    e.price = p;
                }
                if let Some(q) = order_quantity {
                    e.order_quantity = q;
                }
            }
        }
        Action::SetResearch { topic, speed } => {
            let r = &mut state.research;
            if speed == ResearchSpeed::None {
                r.active_topic = None;
                r.progress = 0;
            } else if r.active_topic != Some(topic) {
                r.active_topic = Some(topic);
                r.progress = 0;
            }
            r.speed = speed;
        }
        Action::SurveyGuests { n } => {
            state.money -= n * catalog.params.survey_cost_per_guest;
            let mut pool: Vec<usize> = (0..state.last_guests.len()).collect();
            let take = (n as usize).min(pool.len());
            for i in 0..take {
                let j = i + state.rng.below(pool.len() - i);
                pool.swap(i, j);
            }
            state.survey.results = pool[..take]
                .iter()
                .map(|&i| {
                    let g = &state.last_guests[i];
                    SurveyRecord {
                        happiness: g.happiness,
                        hunger: g.hunger,
                        thirst: g.thirst,
                        money_remaining: g.money_remaining,
                        exit_or_stay: g.exit_or_stay.clone(),
                        reason: g.reason.clone(),
                    }
                })
                .collect();
            state.survey.age_of_results = 0;
        }
        Action::Wait => {}
    }
    Ok(())
}

/// Simulates one full day and settles it.
pub fn simulate_day(state: &mut ParkState, catalog: &Catalog) -> DayStats {
    run_day(state, catalog, None)
}

/// `simulate_day` with an observer called after every tick.
pub fn simulate_day_with_probe(
    state: &mut ParkState,
    catalog: &Catalog,
    probe: &mut dyn FnMut(&TickProbe),
) -> DayStats {
    run_day(state, catalog, Some(probe))
}

fn run_day(state: &mut ParkState, catalog: &Catalog, probe: Option<&mut dyn FnMut(&TickProbe)>) -> DayStats {
    assert!(!state.finished(), "simulate_day called after the horizon");
    for e in state.entities.iter_mut() {
        e.day = Default::default();
    }
    for m in state.staff.iter_mut() {
        m.day = Default::default();
    }
    economy::morning_orders(state, catalog);
    let (records, breakdowns) = {
        let mut sim = day::DaySim::new(state, catalog);
        sim.run(probe);
        (std::mem::take(&mut sim.records), sim.breakdowns)
    };
    for m in state.staff.iter_mut() {
        m.day.operating_cost = catalog.spec(m.key.subtype, m.key.subclass).operating_cost;
    }
    let mut stats = DayStats { day: state.day, arrivals: records.len() as u32, breakdowns, ..Default::default() };
    stats.revenue = state.entities.iter().map(|e| e.day.revenue).sum();
    stats.absorb_guests(&records);
    economy::absorb_park(&mut stats, state, catalog);
    settle_economy(state, catalog, &mut stats);
    state.park_rating = compute_rating(&stats, &catalog.params);
    state.survey.age_of_results += 1;
    state.last_guests = records;
    state.last_day = Some(stats.clone());
    state.day += 1;
    stats
}

/// Applies `action` and simulates the day. On error the state is untouched.
pub fn step(state: &mut ParkState, catalog: &Catalog, action: &Action) -> Result<DayStats, ActionError> {
    apply_action(state, catalog, action)?;
    Ok(simulate_day(state, catalog))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::agents::{heuristic_position, GreedyStochastic, PlacementClass, Policy, TurnContext};
    use crate::catalog::{Subclass, Subtype};
    use crate::observe::build_observation;
    use crate::protocol::{format, parse, Command};
    use crate::world::{new_park, Difficulty, Layout, Tile};
    use proptest::prelude::*;

    fn park(layout: &str, difficulty: Difficulty, seed: u64) -> (Catalog, ParkState) {
        let c = Catalog::shipped();
        let s = new_park(&c, Layout::shipped(layout).unwrap(), difficulty, seed);
        (c, s)
    }

    fn place(state: &ParkState, subtype: Subtype, subclass: Subclass) -> Action {
        let class = match subtype.kind() {
            Kind::Ride => PlacementClass::Ride,
            _ => PlacementClass::Shop,
        };
        let p = heuristic_position(state, class).unwrap();
        Action::Place {
            x: p.x as i64,
            y: p.y as i64,
            kind: subtype.kind(),
            subtype,
            subclass,
            price: None,
            order_quantity: None,
        }
    }

    fn greedy_action(policy: &mut GreedyStochastic, state: &ParkState, catalog: &Catalog) -> Action {
        let obs = build_observation(state, catalog);
        let text = String::new();
        let ctx = TurnContext { observation_text: &text, observation: &obs, state, catalog };
        match parse(&policy.next_action(&ctx).unwrap()) {
            Ok(Command::Game(a)) => a,
            _ => Action::Wait,
        }
    }

    #[test]
    fn build_and_sell_carousel() {
        let (c, mut s) = park("ribs", Difficulty::Easy, 1);
        let a = place(&s, Subtype::Carousel, Subclass::Yellow);
        apply_action(&mut s, &c, &a).unwrap();
        assert_eq!(s.money, 1000 - 250);
        assert_eq!(compute_park_value(&s, &c), 750 + 165);
        let Action::Place { x, y, .. } = a else { unreachable!() };
        apply_action(&mut s, &c, &Action::Remove { x, y }).unwrap();
        assert_eq!(s.money, 1000 - 250 + 165);
        assert!(s.entities.is_empty());
    }

    #[test]
    fn invalid_action_changes_nothing() {
        let (c, mut s) = park("ribs", Difficulty::Medium, 1);
        let before = s.to_bytes();
        let a = place(&s, Subtype::RollerCoaster, Subclass::Red);
        assert!(apply_action(&mut s, &c, &a).is_err());
        assert!(apply_action(&mut s, &c, &Action::Remove { x: 0, y: 0 }).is_err());
        assert_eq!(s.to_bytes(), before);
    }

    #[test]
    fn survey_costs_five_hundred_per_guest() {
        let (c, mut s) = park("ribs", Difficulty::Easy, 1);
        s.money = 10_000;
        simulate_day(&mut s, &c);
        let money = s.money;
        apply_action(&mut s, &c, &Action::SurveyGuests { n: 2 }).unwrap();
        assert_eq!(s.money, money - 1000);
        assert_eq!(s.survey.results.len(), 2.min(s.last_guests.len()));
        assert_eq!(s.survey.age_of_results, 0);
    }

    #[test]
    fn water_adds_one_excitement_per_tile() {
        let (c, mut s, p) = crate::world::layout::shipped_layout_names()
            .find_map(|name| {
                let (c, s) = park(name, Difficulty::Easy, 1);
                let wet = crate::agents::scripted::legal_tiles(&s, Kind::Ride)
                    .into_iter()
                    .find(|&p| crate::world::placement::adjacent_water(&s, p) == 2)?;
                Some((c, s, wet))
            })
            .expect("some shipped layout has a buildable tile touching two water tiles");
        let key = c.spec(Subtype::RollerCoaster, Subclass::Yellow).key;
        s.entities.push(PlacedEntity {
            id: 1,
            key,
            pos: p,
            price: 0,
            order_quantity: 0,
            inventory: 0,
            cleanliness: 1.0,
            broken: false,
            repair_points_remaining: 0.0,
            day: Default::default(),
        });
        let base = c.spec(Subtype::RollerCoaster, Subclass::Yellow).base_excitement;
        assert_eq!(crate::world::effective_excitement(&s, &c, 1), Some(base + 2.0));
    }

    #[test]
    fn yellow_mechanic_repairs_998_points_in_a_day() {
        let (c, mut s) = park("ribs", Difficulty::Easy, 1);
        let a = place(&s, Subtype::Carousel, Subclass::Yellow);
        apply_action(&mut s, &c, &a).unwrap();
        let ride = s.entities[0].pos;
        let path = ride.neighbors().find(|&n| s.layout.tile(n) == Tile::Path).unwrap();
        s.entities[0].broken = true;
        s.entities[0].repair_points_remaining = 998.0;
        s.staff.push(StaffMember {
            id: 9,
            key: c.spec(Subtype::Mechanic, Subclass::Yellow).key,
            pos: path,
            day: Default::default(),
        });
        simulate_day(&mut s, &c);
        assert!(!s.entities[0].broken);
        assert_eq!(s.staff[0].day.metric_value, 998.0);
    }

    #[test]
    fn breakdown_frequency_matches_rate() {
        let mut rng = RngStream::new(11);
        let hits = (0..100_000).filter(|_| breakdown_draw(&mut rng, 0.001)).count();
        let rate = hits as f64 / 100_000.0;
        assert!((0.0007..=0.0013).contains(&rate), "{rate}");
    }

    #[test]
    fn empty_park_rating_starts_at_initial_constant() {
        let (c, s) = park("ribs", Difficulty::Easy, 1);
        assert_eq!(s.park_rating, c.params.initial_rating);
    }

    #[test]
    fn rating_ignores_same_day_events() {
        let (c, mut s) = park("ribs", Difficulty::Easy, 4);
        let a = place(&s, Subtype::Carousel, Subclass::Yellow);
        let stats = step(&mut s, &c, &a).unwrap();
        let rating = compute_rating(&stats, &c.params);
        assert_eq!(s.park_rating, rating);
        for e in s.entities.iter_mut() {
            e.cleanliness = 0.0;
            e.broken = true;
            e.day.revenue += 1000;
        }
        s.path_cleanliness.iter_mut().for_each(|v| *v = 0.0);
        assert_eq!(compute_rating(s.last_day.as_ref().unwrap(), &c.params), rating);
        assert_eq!(s.park_rating, rating);
    }

    #[test]
    fn fast_research_then_place_blue() {
        let (c, mut s) = park("ribs", Difficulty::Medium, 1);
        s.money = 10_000;
        step(&mut s, &c, &Action::SetResearch { topic: Subtype::Carousel, speed: ResearchSpeed::Fast }).unwrap();
        assert_eq!(s.research.highest_unlocked(Subtype::Carousel), Subclass::Blue);
        let a = place(&s, Subtype::Carousel, Subclass::Blue);
        assert!(apply_action(&mut s, &c, &a).is_ok());
        assert!(format(&a).contains("subclass=\"blue\""));
    }

    /// Runs `days` days of a greedy policy and checks every per-day and per-tick invariant.
    fn check_invariants(layout: &str, difficulty: Difficulty, seed: u64, days: u32) {
        let (c, mut s) = park(layout, difficulty, seed);
        s.money = 20_000;
        let mut policy = GreedyStochastic::new(seed ^ 0x5eed);
        let mut morning_rating = s.park_rating;
        for _ in 0..days.min(s.horizon) {
            let a = greedy_action(&mut policy, &s, &c);
            let _ = apply_action(&mut s, &c, &a);
            assert_eq!(s.park_rating, morning_rating, "rating changed before the day ran");
            let before = s.money;
            let mut ok = true;
            let mut last_in_park = 0;
            let mut last_exited = 0;
            let stats = simulate_day_with_probe(&mut s, &c, &mut |t: &TickProbe| {
                ok &= t.spawned == t.in_park + t.exited && t.fractions_in_bounds;
                last_in_park = t.in_park;
                last_exited = t.exited;
            });
            assert!(ok, "per-tick invariant broken on day {}", stats.day);
            assert_eq!(last_exited + last_in_park, stats.arrivals);
            assert_eq!(s.money, before + stats.revenue - stats.expenses, "accounting identity on day {}", stats.day);
            assert!(s.money >= 0);
            assert_eq!(stats.arrivals, stats.total_guests);
            assert_eq!(stats.total_guests, stats.exited + stats.stayed);
            for e in &s.entities {
                assert!((0.0..=1.0).contains(&e.cleanliness));
                assert!((0.0..=1.0).contains(&e.day.uptime));
            }
            assert!(s.path_cleanliness.iter().all(|v| (0.0..=1.0).contains(v)));
            assert!(s.last_guests.iter().all(|g| (0.0..=1.0).contains(&g.happiness)));
            assert!((0.0..=100.0).contains(&s.park_rating));
            assert_eq!(s.park_rating, compute_rating(&stats, &c.params));
            morning_rating = s.park_rating;
        }
    }

    #[test]
    fn invariants_hold_on_a_growing_park() {
        check_invariants("ribs", Difficulty::Easy, 3, 20);
    }

    proptest! {
        #![proptest_config(ProptestConfig { cases: 8, ..ProptestConfig::default() })]
        #[test]
        fn invariants_hold_on_random_days(seed in any::<u64>(), layout in 0usize..8, medium in any::<bool>()) {
            let name = crate::world::layout::shipped_layout_names().nth(layout).unwrap();
            let difficulty = if medium { Difficulty::Medium } else { Difficulty::Easy };
            check_invariants(name, difficulty, seed, 6);
        }

        #[test]
        fn same_seed_same_bytes(seed in any::<u64>()) {
            let run = || {
                let (c, mut s) = park("zig_zag", Difficulty::Easy, seed);
                let mut policy = GreedyStochastic::new(seed);
                let mut out = Vec::new();
                for _ in 0..4 {
                    let a = greedy_action(&mut policy, &s, &c);
                    let _ = step(&mut s, &c, &a);
                    out.push(crate::observe::to_json(&build_observation(&s, &c)));
                }
                out
            };
            prop_assert_eq!(run(), run());
        }
    }
}
