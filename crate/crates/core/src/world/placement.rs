use std::collections::BTreeSet;
use std::fmt;

use super::geometry::{flood_fill, is_path};
use super::layout::{Pos, Tile};
use super::state::ParkState;
use crate::catalog::{Catalog, Kind};

/// Why a tile cannot take an entity. The `Display` text is embedded in wire errors.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    OutOfBounds,
    Path,
    Water,
    Entrance,
    Exit,
    Occupied(String),
    NotAdjacentToPath,
    StaffNeedsPath,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::OutOfBounds => f.write_str("coordinates are outside of the park"),
            Violation::Path => f.write_str("tile already contains a path"),
            Violation::Water => f.write_str("tile is water"),
            Violation::Entrance => f.write_str("tile is the park entrance"),
            Violation::Exit => f.write_str("tile is the park exit"),
            Violation::Occupied(what) => write!(f, "tile is already occupied by a {what}"),
            Violation::NotAdjacentToPath => f.write_str("must be adjacent to a path"),
            Violation::StaffNeedsPath => f.write_str("staff must be placed on a path tile"),
        }
    }
}

/// Pure legality predicate for placing (or moving) an entity of `kind` onto `pos`.
///
/// `ignore` lets a move treat the mover's own tile as free.
pub fn placement_legal(state: &ParkState, pos: Pos, kind: Kind) -> Result<(), Violation> {
    placement_legal_ignoring(state, pos, kind, None)
}

pub fn placement_legal_ignoring(state: &ParkState, pos: Pos, kind: Kind, ignore: Option<u32>) -> Result<(), Violation> {
    if !pos.in_bounds() {
        return Err(Violation::OutOfBounds);
    }
    let tile = state.layout.tile(pos);
    if kind == Kind::Staff {
        return if tile == Tile::Path { Ok(()) } else { Err(Violation::StaffNeedsPath) };
    }
    match tile {
        Tile::Path => return Err(Violation::Path),
        Tile::Water => return Err(Violation::Water),
        Tile::Entrance => return Err(Violation::Entrance),
        Tile::Exit => return Err(Violation::Exit),
        Tile::Empty => {}
    }
    if let Some(e) = state.entity_at(pos).filter(|e| Some(e.id) != ignore) {
        return Err(Violation::Occupied(e.key.subtype.to_string()));
    }
    if !pos.neighbors().any(|n| is_path(&state.layout, n)) {
        return Err(Violation::NotAdjacentToPath);
    }
    Ok(())
}

pub fn adjacent_water(state: &ParkState, pos: Pos) -> usize {
    pos.neighbors().filter(|&n| state.layout.tile(n) == Tile::Water).count()
}

pub fn adjacent_paths(state: &ParkState, pos: Pos) -> usize {
    pos.neighbors().filter(|&n| is_path(&state.layout, n)).count()
}

/// Excitement after the water bonus and the duplicate discount.
///
/// The discount exponent counts rides of the same subtype and subclass placed earlier.
pub fn effective_excitement(state: &ParkState, catalog: &Catalog, ride_id: u32) -> Option<f64> {
    let idx = state.entities.iter().position(|e| e.id == ride_id && e.is_ride())?;
    let ride = &state.entities[idx];
    let spec = catalog.lookup(ride.key).ok()?;
    let p = &catalog.params;
    let earlier = state.entities[..idx].iter().filter(|e| e.key == ride.key).count();
    let water = adjacent_water(state, ride.pos) as f64;
    Some((spec.base_excitement + p.water_excitement_bonus * water) * p.duplicate_penalty.powi(earlier as i32))
}

/// Attractions with an adjacent walkable tile connected to the entrance.
pub fn reachable_attractions(state: &ParkState) -> BTreeSet<u32> {
    let geo = state.geometry();
    state
        .entities
        .iter()
        .filter(|e| geo.access_tiles(e.pos).iter().any(|&w| geo.connected_to_entrance(w)))
        .map(|e| e.id)
        .collect()
}

/// Same set computed by an independent flood fill over the raw grid.
pub fn reachable_attractions_by_flood_fill(state: &ParkState) -> BTreeSet<u32> {
    let seen = flood_fill(&state.layout, state.layout.entrance);
    state.entities.iter().filter(|e| e.pos.neighbors().any(|n| seen[n.index()])).map(|e| e.id).collect()
}
