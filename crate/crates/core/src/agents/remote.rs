//! Rebuilds an approximate park state from an observation so scripted policies
//! can play through the HTTP service.

use crate::catalog::{Catalog, EntityKey, Kind, ResearchSpeed, Subclass, Subtype};
use crate::engine::RngStream;
use crate::observe::Observation;
use crate::world::{new_park, Difficulty, Layout, ParkState, PlacedEntity, Pos, StaffMember, Tile, GRID};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("observation cannot be turned into a park: {0}")]
pub struct ReconstructError(pub String);

fn key(catalog: &Catalog, subtype: &str, subclass: &str) -> Result<EntityKey, ReconstructError> {
    let subtype: Subtype = subtype.parse().map_err(|e| ReconstructError(format!("{e}")))?;
    let subclass: Subclass = subclass.parse().map_err(|e| ReconstructError(format!("{e}")))?;
    Ok(catalog.spec(subtype, subclass).key)
}

/// Terrain, entities, money, research tiers and path cleanliness come from the
/// observation. Hidden quantities (guest state, rng, repair progress) take
/// fresh-park defaults.
pub fn state_from_observation(obs: &Observation, catalog: &Catalog) -> Result<ParkState, ReconstructError> {
    let mut grid = vec![vec!['.'; GRID as usize]; GRID as usize];
    let mut put = |x: i32, y: i32, t: Tile| -> Result<(), ReconstructError> {
        let p = Pos::new(x, y);
        if !p.in_bounds() {
            return Err(ReconstructError(format!("tile {p} is outside the grid")));
        }
        grid[y as usize][x as usize] = t.to_char();
        Ok(())
    };
    for p in &obs.paths {
        put(p.x, p.y, Tile::Path)?;
    }
    for w in &obs.waters {
        put(w.x, w.y, Tile::Water)?;
    }
    put(obs.entrance[0], obs.entrance[1], Tile::Entrance)?;
    put(obs.exit[0], obs.exit[1], Tile::Exit)?;
    let text: Vec<String> = grid.into_iter().map(|row| row.into_iter().collect()).collect();
    let layout = Layout::parse("remote", &text.join("\n")).map_err(|e| ReconstructError(e.to_string()))?;

    let difficulty = if obs.horizon == catalog.params.horizon_easy { Difficulty::Easy } else { Difficulty::Medium };
    let mut state = new_park(catalog, layout, difficulty, 0);
    state.park_id = obs.park_id.clone();
    state.horizon = obs.horizon;
    state.day = obs.step;
    state.money = obs.money;
    state.park_rating = obs.park_rating;
    state.rng = RngStream::new(0);
    for p in &obs.paths {
        state.path_cleanliness[Pos::new(p.x, p.y).index()] = p.cleanliness;
    }

    for (subtype, tiers) in &obs.available_entities {
        let subtype: Subtype = subtype.parse().map_err(|e| ReconstructError(format!("{e}")))?;
        let top = tiers
            .iter()
            .filter_map(|t| t.parse::<Subclass>().ok())
            .max()
            .ok_or_else(|| ReconstructError(format!("no tiers listed for {subtype}")))?;
        state.research.unlocked.insert(subtype, top);
    }
    state.research.speed = obs.research_speed.parse::<ResearchSpeed>().map_err(|e| ReconstructError(format!("{e}")))?;
    state.research.new_entity_available = obs.new_entity_available;

    for r in &obs.rides.ride_list {
        let id = state.allocate_id();
        state.entities.push(PlacedEntity {
            id,
            key: key(catalog, &r.subtype, &r.subclass)?,
            pos: Pos::new(r.x, r.y),
            price: r.ticket_price,
            order_quantity: 0,
            inventory: 0,
            cleanliness: r.cleanliness,
            broken: r.out_of_service,
            repair_points_remaining: 0.0,
            day: Default::default(),
        });
    }
    for s in &obs.shops.shop_list {
        let id = state.allocate_id();
        state.entities.push(PlacedEntity {
            id,
            key: key(catalog, &s.subtype, &s.subclass)?,
            pos: Pos::new(s.x, s.y),
            price: s.item_price,
            order_quantity: s.order_quantity,
            inventory: s.inventory,
            cleanliness: s.cleanliness,
            broken: false,
            repair_points_remaining: 0.0,
            day: Default::default(),
        });
    }
    for m in &obs.staff.staff_list {
        let k = key(catalog, &m.subtype, &m.subclass)?;
        if k.kind != Kind::Staff {
            return Err(ReconstructError(format!("{} is not staff", m.subtype)));
        }
        let id = state.allocate_id();
        state.staff.push(StaffMember { id, key: k, pos: Pos::new(m.x, m.y), day: Default::default() });
    }
    Ok(state)
}
