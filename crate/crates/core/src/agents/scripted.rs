//! Scripted baselines that need no external model.

use super::heuristic::{heuristic_position, PlacementClass};
use super::{Policy, PolicyError, TurnContext};
use crate::catalog::{Catalog, EntityKey, EntitySpec, Kind, Subclass, Subtype};
use crate::engine::RngStream;
use crate::protocol::{format, Action};
use crate::world::{placement_legal, ParkState, Pos, GRID};

/// Every tile where an entity of `kind` may be placed, in row-major order.
pub fn legal_tiles(state: &ParkState, kind: Kind) -> Vec<Pos> {
    (0..GRID)
        .flat_map(|y| (0..GRID).map(move |x| Pos::new(x, y)))
        .filter(|&p| placement_legal(state, p, kind).is_ok())
        .collect()
}

/// Unlocked catalog entries whose build or hire cost the park can pay now.
pub fn affordable(state: &ParkState, catalog: &Catalog, kinds: &[Kind]) -> Vec<EntitySpec> {
    catalog
        .specs
        .values()
        .filter(|s| kinds.contains(&s.key.kind) && state.research.is_unlocked(s.key) && s.build_cost <= state.money)
        .cloned()
        .collect()
}

pub fn place_action(key: EntityKey, pos: Pos, price: Option<i64>) -> Action {
    Action::Place {
        x: pos.x as i64,
        y: pos.y as i64,
        kind: key.kind,
        subtype: key.subtype,
        subclass: key.subclass,
        price,
        order_quantity: None,
    }
}

/// Always waits.
#[derive(Debug, Clone, Copy, Default)]
pub struct WaitOnly;

impl Policy for WaitOnly {
    fn name(&self) -> String {
        "wait".into()
    }

    fn next_action(&mut self, _ctx: &TurnContext<'_>) -> Result<String, PolicyError> {
        Ok("wait()".into())
    }

    fn fork(&self, _seed: u64) -> Box<dyn Policy> {
        Box::new(WaitOnly)
    }
}

/// Places a uniformly chosen affordable entity on a uniformly chosen legal tile
/// on half of the days and waits otherwise.
#[derive(Debug, Clone)]
pub struct RandomLegal {
    rng: RngStream,
    pub place_probability: f64,
}

impl RandomLegal {
    pub fn new(seed: u64) -> RandomLegal {
        RandomLegal { rng: RngStream::new(seed), place_probability: 0.5 }
    }
}

impl Policy for RandomLegal {
    fn name(&self) -> String {
        "random".into()
    }

    fn next_action(&mut self, ctx: &TurnContext<'_>) -> Result<String, PolicyError> {
        if !self.rng.bernoulli(self.place_probability) {
            return Ok("wait()".into());
        }
        let options = affordable(ctx.state, ctx.catalog, &Kind::ALL);
        if options.is_empty() {
            return Ok("wait()".into());
        }
        let spec = &options[self.rng.below(options.len())];
        let tiles = legal_tiles(ctx.state, spec.key.kind);
        if tiles.is_empty() {
            return Ok("wait()".into());
        }
        let pos = tiles[self.rng.below(tiles.len())];
        Ok(format(&place_action(spec.key, pos, None)))
    }

    fn fork(&self, seed: u64) -> Box<dyn Policy> {
        Box::new(RandomLegal { rng: RngStream::new(seed), place_probability: self.place_probability })
    }
}

/// Buys one of the three most expensive affordable attractions on a random
/// legal tile at a random price, hires janitors and mechanics as the park
/// grows, and waits on some days.
#[derive(Debug, Clone)]
pub struct GreedyStochastic {
    rng: RngStream,
    pub wait_probability: f64,
}

impl GreedyStochastic {
    pub fn new(seed: u64) -> GreedyStochastic {
        GreedyStochastic { rng: RngStream::new(seed), wait_probability: 0.3 }
    }

    fn hire(&mut self, ctx: &TurnContext<'_>, subtype: Subtype) -> Option<Action> {
        let spec = ctx.catalog.spec(subtype, Subclass::Yellow);
        if spec.build_cost > ctx.state.money {
            return None;
        }
        let tiles = legal_tiles(ctx.state, Kind::Staff);
        if tiles.is_empty() {
            return None;
        }
        let pos = tiles[self.rng.below(tiles.len())];
        Some(place_action(spec.key, pos, None))
    }
}

impl Policy for GreedyStochastic {
    fn name(&self) -> String {
        "greedy".into()
    }

    fn next_action(&mut self, ctx: &TurnContext<'_>) -> Result<String, PolicyError> {
        if self.rng.bernoulli(self.wait_probability) {
            return Ok("wait()".into());
        }
        let state = ctx.state;
        let attractions = state.entities.len();
        let janitors = state.staff.iter().filter(|m| m.key.subtype == Subtype::Janitor).count();
        let mechanics = state.staff.iter().filter(|m| m.key.subtype == Subtype::Mechanic).count();
        if attractions >= 4 * (janitors + 1) {
            if let Some(a) = self.hire(ctx, Subtype::Janitor) {
                return Ok(format(&a));
            }
        }
        if state.rides().count() >= 6 * (mechanics + 1) {
            if let Some(a) = self.hire(ctx, Subtype::Mechanic) {
                return Ok(format(&a));
            }
        }
        let mut options = affordable(state, ctx.catalog, &[Kind::Ride, Kind::Shop]);
        options.sort_by_key(|s| std::cmp::Reverse(s.build_cost));
        options.truncate(3);
        if options.is_empty() {
            return Ok("wait()".into());
        }
        let spec = options[self.rng.below(options.len())].clone();
        let tiles = legal_tiles(state, spec.key.kind);
        if tiles.is_empty() {
            return Ok("wait()".into());
        }
        let pos = tiles[self.rng.below(tiles.len())];
        let price = if spec.max_price > 0 {
            let low = (spec.max_price + 1) / 2;
            Some(low + self.rng.below((spec.max_price - low + 1) as usize) as i64)
        } else {
            None
        };
        Ok(format(&place_action(spec.key, pos, price)))
    }

    fn fork(&self, seed: u64) -> Box<dyn Policy> {
        Box::new(GreedyStochastic { rng: RngStream::new(seed), wait_probability: self.wait_probability })
    }
}

/// Deterministic build order placed with the heuristic. Keeps a cash reserve so
/// replays of its trajectory on other seeds rarely become invalid.
#[derive(Debug, Clone)]
pub struct Growth {
    next: usize,
    pub reserve_factor: f64,
}

const GROWTH_PLAN: [Subtype; 10] = [
    Subtype::Carousel,
    Subtype::Drink,
    Subtype::Food,
    Subtype::FerrisWheel,
    Subtype::Janitor,
    Subtype::RollerCoaster,
    Subtype::Specialty,
    Subtype::Carousel,
    Subtype::Janitor,
    Subtype::Mechanic,
];

impl Growth {
    pub fn new() -> Growth {
        Growth { next: 0, reserve_factor: 1.5 }
    }
}

impl Default for Growth {
    fn default() -> Self {
        Growth::new()
    }
}

impl Policy for Growth {
    fn name(&self) -> String {
        "growth".into()
    }

    fn next_action(&mut self, ctx: &TurnContext<'_>) -> Result<String, PolicyError> {
        let state = ctx.state;
        let subtype = GROWTH_PLAN[self.next % GROWTH_PLAN.len()];
        let spec = Subclass::ALL
            .iter()
            .rev()
            .map(|&t| ctx.catalog.spec(subtype, t))
            .find(|s| state.research.is_unlocked(s.key) && (s.build_cost as f64) * self.reserve_factor <= state.money as f64);
        let Some(spec) = spec else {
            return Ok("wait()".into());
        };
        let pos = match subtype.kind() {
            Kind::Staff => legal_tiles(state, Kind::Staff).first().copied(),
            Kind::Ride => heuristic_position(state, PlacementClass::Ride),
            Kind::Shop if subtype == Subtype::Specialty => heuristic_position(state, PlacementClass::Specialty),
            Kind::Shop => heuristic_position(state, PlacementClass::Shop),
        };
        let Some(pos) = pos else {
            return Ok("wait()".into());
        };
        self.next += 1;
        Ok(format(&place_action(spec.key, pos, None)))
    }

    fn fork(&self, _seed: u64) -> Box<dyn Policy> {
        Box::new(self.clone())
    }
}
