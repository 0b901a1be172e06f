//! Heuristic attraction placement and the wrapper that applies it to any policy.

use super::{Outcome, Policy, PolicyError, TurnContext, Usage};
use crate::catalog::{Kind, Subtype};
use crate::protocol::{format, parse, Action, Command};
use crate::world::geometry::UNREACHABLE;
use crate::world::placement::{adjacent_paths, adjacent_water};
use crate::world::{placement_legal, Geometry, ParkState, Pos, Tile, GRID};

pub const CANDIDATES: usize = 4;
pub const WATER_WEIGHT: f64 = 1.0;
pub const PATH_WEIGHT: f64 = 1.0;
/// Added to the Manhattan fallback when two tiles are not connected by walkways.
pub const DISCONNECTED_PENALTY: i32 = 400;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlacementClass {
    Ride,
    Shop,
    Specialty,
}

impl PlacementClass {
    pub fn of(kind: Kind, subtype: Subtype) -> Option<PlacementClass> {
        match (kind, subtype) {
            (Kind::Ride, _) => Some(PlacementClass::Ride),
            (Kind::Shop, Subtype::Specialty) => Some(PlacementClass::Specialty),
            (Kind::Shop, _) => Some(PlacementClass::Shop),
            (Kind::Staff, _) => None,
        }
    }
}

/// Walking distance between the walkways next to two tiles, counting the step
/// on and off. Falls back to Manhattan plus a penalty when they are not connected.
fn walking_distance(geo: &Geometry, a: Pos, b_access: &[u16], b: Pos) -> i32 {
    let a_access = geo.access_tiles(a);
    let mut best = UNREACHABLE as i32;
    for &u in &a_access {
        for &v in b_access {
            let d = geo.distance(u, v);
            if d != UNREACHABLE {
                best = best.min(d as i32 + 2);
            }
        }
    }
    if best == UNREACHABLE as i32 {
        a.manhattan(b) + DISCONNECTED_PENALTY
    } else {
        best
    }
}

/// Distance rule score: walking distance to the nearest building plus distance
/// to the entrance (entrance only in an empty park).
pub fn density_score(state: &ParkState, geo: &Geometry, p: Pos) -> i32 {
    let entrance = state.layout.entrance;
    let to_entrance = walking_distance(geo, p, &[geo.entrance], entrance) - 1;
    let to_building = state
        .entities
        .iter()
        .map(|e| walking_distance(geo, p, &geo.access_tiles(e.pos), e.pos))
        .min()
        .unwrap_or(0);
    to_entrance + to_building
}

fn row_major(p: Pos) -> (i32, i32) {
    (p.y, p.x)
}

/// The rule-(1) candidate set: the legal tiles with the lowest density score.
pub fn candidate_tiles(state: &ParkState) -> Vec<Pos> {
    let geo = state.geometry();
    let mut scored: Vec<(i32, Pos)> = (0..GRID)
        .flat_map(|y| (0..GRID).map(move |x| Pos::new(x, y)))
        .filter(|&p| placement_legal(state, p, Kind::Ride).is_ok())
        .map(|p| (density_score(state, &geo, p), p))
        .collect();
    scored.sort_by_key(|&(s, p)| (s, row_major(p)));
    scored.into_iter().take(CANDIDATES).map(|(_, p)| p).collect()
}

pub fn placement_score(state: &ParkState, p: Pos, class: PlacementClass) -> f64 {
    let water = adjacent_water(state, p) as f64;
    match class {
        PlacementClass::Ride => WATER_WEIGHT * water,
        PlacementClass::Shop => -WATER_WEIGHT * water,
        PlacementClass::Specialty => -WATER_WEIGHT * water + PATH_WEIGHT * adjacent_paths(state, p) as f64,
    }
}

/// Best candidate tile for a new attraction, or `None` when nothing is legal.
pub fn heuristic_position(state: &ParkState, class: PlacementClass) -> Option<Pos> {
    let mut best: Option<(f64, Pos)> = None;
    for p in candidate_tiles(state) {
        let s = placement_score(state, p, class);
        let better = match best {
            None => true,
            Some((bs, bp)) => s > bs || (s == bs && row_major(p) < row_major(bp)),
        };
        if better {
            best = Some((s, p));
        }
    }
    best.map(|(_, p)| p)
}

/// Nearest path tile to `p` by Manhattan distance, ties to the lowest row then column.
pub fn nearest_path_tile(state: &ParkState, p: Pos) -> Option<Pos> {
    state.layout.positions_of(Tile::Path).min_by_key(|&q| (q.manhattan(p), q.y, q.x))
}

/// Replaces the coordinates of attraction placements with the heuristic's choice
/// and moves staff placements onto the nearest path tile.
pub struct HeuristicWrapper {
    inner: Box<dyn Policy>,
}

impl HeuristicWrapper {
    pub fn new(inner: Box<dyn Policy>) -> HeuristicWrapper {
        HeuristicWrapper { inner }
    }

    pub fn rewrite(state: &ParkState, text: &str) -> String {
        let Ok(Command::Game(Action::Place { x, y, kind, subtype, subclass, price, order_quantity })) = parse(text) else {
            return text.to_string();
        };
        let target = match PlacementClass::of(kind, subtype) {
            Some(class) => heuristic_position(state, class),
            None => {
                let here = Pos::new(x as i32, y as i32);
                if here.in_bounds() && state.layout.tile(here) == Tile::Path {
                    Some(here)
                } else {
                    nearest_path_tile(state, here)
                }
            }
        };
        let Some(pos) = target else {
            return text.to_string();
        };
        format(&Action::Place { x: pos.x as i64, y: pos.y as i64, kind, subtype, subclass, price, order_quantity })
    }
}

impl Policy for HeuristicWrapper {
    fn name(&self) -> String {
        format!("heuristic({})", self.inner.name())
    }

    fn next_action(&mut self, ctx: &TurnContext<'_>) -> Result<String, PolicyError> {
        let text = self.inner.next_action(ctx)?;
        Ok(HeuristicWrapper::rewrite(ctx.state, &text))
    }

    fn notify(&mut self, outcome: &Outcome<'_>) {
        self.inner.notify(outcome)
    }

    fn fork(&self, seed: u64) -> Box<dyn Policy> {
        Box::new(HeuristicWrapper { inner: self.inner.fork(seed) })
    }

    fn usage(&self) -> Usage {
        self.inner.usage()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::Catalog;
    use crate::world::{new_park, Difficulty, Layout};

    /// Builds a layout from the given top rows; missing cells are filled with `fill`.
    fn layout(rows: &[&str], fill: char) -> Layout {
        let mut grid: Vec<String> =
            rows.iter().map(|r| format!("{r}{}", fill.to_string().repeat(20 - r.chars().count()))).collect();
        while grid.len() < 20 {
            grid.push(fill.to_string().repeat(20));
        }
        Layout::parse("test", &grid.join("\n")).unwrap()
    }

    fn park(l: Layout) -> ParkState {
        new_park(&Catalog::shipped(), l, Difficulty::Easy, 1)
    }

    const CORRIDOR: &str = "E##################X";

    #[test]
    fn single_legal_tile() {
        let s = park(layout(&["~", "~.", CORRIDOR], '~'));
        assert_eq!(crate::agents::scripted::legal_tiles(&s, Kind::Ride), vec![Pos::new(1, 1)]);
        assert_eq!(heuristic_position(&s, PlacementClass::Ride), Some(Pos::new(1, 1)));
        assert_eq!(heuristic_position(&s, PlacementClass::Shop), Some(Pos::new(1, 1)));
    }

    #[test]
    fn rides_prefer_water_and_shops_avoid_it() {
        // (1,0) and (1,2) are equally close to the entrance; (1,0) touches two water tiles.
        let s = park(layout(&["~.~~~~~~~~~~~~~~~~~~", CORRIDOR], '.'));
        assert_eq!(candidate_tiles(&s)[..2], [Pos::new(1, 0), Pos::new(1, 2)]);
        assert_eq!(heuristic_position(&s, PlacementClass::Ride), Some(Pos::new(1, 0)));
        assert_eq!(heuristic_position(&s, PlacementClass::Shop), Some(Pos::new(1, 2)));
    }

    #[test]
    fn specialty_prefers_more_paths() {
        // (1,2) is enclosed by three path tiles.
        let s = park(layout(&["~~~~~~~~~~~~~~~~~~~~", CORRIDOR, "#.#"], '.'));
        assert_eq!(adjacent_paths(&s, Pos::new(1, 2)), 3);
        assert!(candidate_tiles(&s).contains(&Pos::new(1, 2)));
        assert_eq!(heuristic_position(&s, PlacementClass::Specialty), Some(Pos::new(1, 2)));
    }

    #[test]
    fn wrapper_passes_through_and_fixes_staff() {
        let c = Catalog::shipped();
        let s = new_park(&c, Layout::shipped("ribs").unwrap(), Difficulty::Easy, 1);
        assert_eq!(HeuristicWrapper::rewrite(&s, "wait()"), "wait()");
        let placed = HeuristicWrapper::rewrite(
            &s,
            "place(x=0, y=0, type=\"ride\", subtype=\"carousel\", subclass=\"yellow\")",
        );
        let expected = heuristic_position(&s, PlacementClass::Ride).unwrap();
        assert!(placed.starts_with(&format!("place(x={}, y={},", expected.x, expected.y)));
        let staff = HeuristicWrapper::rewrite(
            &s,
            "place(x=0, y=0, type=\"staff\", subtype=\"janitor\", subclass=\"yellow\")",
        );
        let Ok(Command::Game(Action::Place { x, y, .. })) = parse(&staff) else { panic!() };
        assert_eq!(s.layout.tile(Pos::new(x as i32, y as i32)), Tile::Path);
    }

    proptest::proptest! {
        #![proptest_config(proptest::prelude::ProptestConfig { cases: 32, ..Default::default() })]
        #[test]
        fn chosen_tiles_are_legal(layout in 0usize..8, seed in 0u64..10_000, builds in 0usize..25) {
            let c = Catalog::shipped();
            let name = crate::world::layout::shipped_layout_names().nth(layout).unwrap();
            let mut s = new_park(&c, Layout::shipped(name).unwrap(), Difficulty::Easy, seed);
            let mut rng = crate::engine::RngStream::new(seed);
            for _ in 0..builds {
                let tiles = crate::agents::scripted::legal_tiles(&s, Kind::Ride);
                if tiles.is_empty() {
                    break;
                }
                let p = tiles[rng.below(tiles.len())];
                let key = c.spec(Subtype::Food, crate::catalog::Subclass::Yellow).key;
                let id = s.allocate_id();
                s.entities.push(crate::world::PlacedEntity {
                    id,
                    key,
                    pos: p,
                    price: 1,
                    order_quantity: 0,
                    inventory: 0,
                    cleanliness: 1.0,
                    broken: false,
                    repair_points_remaining: 0.0,
                    day: Default::default(),
                });
            }
            let any_legal = !crate::agents::scripted::legal_tiles(&s, Kind::Ride).is_empty();
            for class in [PlacementClass::Ride, PlacementClass::Shop, PlacementClass::Specialty] {
                match heuristic_position(&s, class) {
                    Some(p) => proptest::prop_assert!(placement_legal(&s, p, Kind::Shop).is_ok()),
                    None => proptest::prop_assert!(!any_legal),
                }
            }
        }
    }
}
