use std::collections::VecDeque;

use super::layout::{Layout, Pos, Tile, CELLS};

pub const UNREACHABLE: u16 = u16::MAX;

/// Walking distances over path, entrance and exit tiles. Static per layout.
#[derive(Debug, Clone, PartialEq)]
pub struct Geometry {
    walk_index: Vec<u16>,
    walk_pos: Vec<Pos>,
    neighbors: Vec<Vec<u16>>,
    dist: Vec<u16>,
    pub entrance: u16,
    pub exit: u16,
    entrance_component: Vec<bool>,
}

impl Geometry {
    pub fn new(layout: &Layout) -> Geometry {
        let mut walk_index = vec![UNREACHABLE; CELLS];
        let mut walk_pos = Vec::new();
        for (p, t) in layout.tiles() {
            if t.walkable() {
                walk_index[p.index()] = walk_pos.len() as u16;
                walk_pos.push(p);
            }
        }
        let neighbors: Vec<Vec<u16>> = walk_pos
            .iter()
            .map(|p| p.neighbors().map(|n| walk_index[n.index()]).filter(|&w| w != UNREACHABLE).collect())
            .collect();
        let n = walk_pos.len();
        let mut dist = vec![UNREACHABLE; n * n];
        let mut queue = VecDeque::new();
        for src in 0..n {
            let row = &mut dist[src * n..(src + 1) * n];
            row[src] = 0;
            queue.push_back(src as u16);
            while let Some(u) = queue.pop_front() {
                let d = row[u as usize];
                for &v in &neighbors[u as usize] {
                    if row[v as usize] == UNREACHABLE {
                        row[v as usize] = d + 1;
                        queue.push_back(v);
                    }
                }
            }
        }
        let entrance = walk_index[layout.entrance.index()];
        let exit = walk_index[layout.exit.index()];
        let entrance_component = (0..n).map(|w| dist[entrance as usize * n + w] != UNREACHABLE).collect();
        Geometry { walk_index, walk_pos, neighbors, dist, entrance, exit, entrance_component }
    }

    pub fn len(&self) -> usize {
        self.walk_pos.len()
    }

    pub fn is_empty(&self) -> bool {
        self.walk_pos.is_empty()
    }

    pub fn walk_id(&self, p: Pos) -> Option<u16> {
        if !p.in_bounds() {
            return None;
        }
        let w = self.walk_index[p.index()];
        (w != UNREACHABLE).then_some(w)
    }

    pub fn pos(&self, w: u16) -> Pos {
        self.walk_pos[w as usize]
    }

    pub fn neighbors(&self, w: u16) -> &[u16] {
        &self.neighbors[w as usize]
    }

    pub fn distance(&self, a: u16, b: u16) -> u16 {
        self.dist[a as usize * self.walk_pos.len() + b as usize]
    }

    pub fn connected_to_entrance(&self, w: u16) -> bool {
        self.entrance_component[w as usize]
    }

    /// Walkable tiles 4-adjacent to `p`.
    pub fn access_tiles(&self, p: Pos) -> Vec<u16> {
        p.neighbors().filter_map(|n| self.walk_id(n)).collect()
    }

    /// Distance field from every walkable tile to the nearest of `targets`.
    pub fn field_to(&self, targets: &[u16]) -> Vec<u16> {
        (0..self.len() as u16)
            .map(|w| targets.iter().map(|&t| self.distance(w, t)).min().unwrap_or(UNREACHABLE))
            .collect()
    }

    /// One step from `from` that strictly descends `field`, first in N/E/S/W order.
    pub fn step_down(&self, from: u16, field: &[u16]) -> Option<u16> {
        let here = field[from as usize];
        if here == 0 || here == UNREACHABLE {
            return None;
        }
        self.neighbors(from).iter().copied().find(|&n| field[n as usize] < here)
    }

    /// One step from `from` toward `to`, if reachable.
    pub fn step_toward(&self, from: u16, to: u16) -> Option<u16> {
        let here = self.distance(from, to);
        if here == 0 || here == UNREACHABLE {
            return None;
        }
        self.neighbors(from).iter().copied().find(|&n| self.distance(n, to) < here)
    }
}

/// Positions reachable from `start` over walkable tiles by plain flood fill.
pub fn flood_fill(layout: &Layout, start: Pos) -> Vec<bool> {
    let mut seen = vec![false; CELLS];
    if !layout.tile(start).walkable() {
        return seen;
    }
    let mut queue = VecDeque::from([start]);
    seen[start.index()] = true;
    while let Some(p) = queue.pop_front() {
        for n in p.neighbors() {
            if !seen[n.index()] && layout.tile(n).walkable() {
                seen[n.index()] = true;
                queue.push_back(n);
            }
        }
    }
    seen
}

pub(crate) fn is_path(layout: &Layout, p: Pos) -> bool {
    p.in_bounds() && layout.tile(p) == Tile::Path
}
