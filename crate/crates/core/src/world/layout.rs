use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const GRID: i32 = 20;
pub const CELLS: usize = (GRID * GRID) as usize;

pub const TRAINING_LAYOUTS: [&str; 5] = ["starter_loop", "river_bend", "crossroads", "lakeside", "long_walk"];
pub const EVALUATION_LAYOUTS: [&str; 3] = ["the_islands", "ribs", "zig_zag"];

const SHIPPED: [(&str, &str); 8] = [
    ("starter_loop", include_str!("../../assets/layouts/starter_loop.txt")),
    ("river_bend", include_str!("../../assets/layouts/river_bend.txt")),
    ("crossroads", include_str!("../../assets/layouts/crossroads.txt")),
    ("lakeside", include_str!("../../assets/layouts/lakeside.txt")),
    ("long_walk", include_str!("../../assets/layouts/long_walk.txt")),
    ("the_islands", include_str!("../../assets/layouts/the_islands.txt")),
    ("ribs", include_str!("../../assets/layouts/ribs.txt")),
    ("zig_zag", include_str!("../../assets/layouts/zig_zag.txt")),
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Pos {
    pub x: i32,
    pub y: i32,
}

impl Pos {
    pub const fn new(x: i32, y: i32) -> Pos {
        Pos { x, y }
    }

    pub fn in_bounds(self) -> bool {
        (0..GRID).contains(&self.x) && (0..GRID).contains(&self.y)
    }

    /// Row-major cell index. Only valid for in-bounds positions.
    pub fn index(self) -> usize {
        (self.y * GRID + self.x) as usize
    }

    pub fn from_index(i: usize) -> Pos {
        Pos { x: i as i32 % GRID, y: i as i32 / GRID }
    }

    pub fn manhattan(self, other: Pos) -> i32 {
        (self.x - other.x).abs() + (self.y - other.y).abs()
    }

    /// In-bounds 4-neighbours in N, E, S, W order.
    pub fn neighbors(self) -> impl Iterator<Item = Pos> {
        [(0, -1), (1, 0), (0, 1), (-1, 0)]
            .into_iter()
            .map(move |(dx, dy)| Pos::new(self.x + dx, self.y + dy))
            .filter(|p| p.in_bounds())
    }
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.x, self.y)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Tile {
    Empty,
    Path,
    Water,
    Entrance,
    Exit,
}

impl Tile {
    pub fn from_char(c: char) -> Option<Tile> {
        Some(match c {
            '.' => Tile::Empty,
            '#' => Tile::Path,
            '~' => Tile::Water,
            'E' => Tile::Entrance,
            'X' => Tile::Exit,
            _ => return None,
        })
    }

    pub fn to_char(self) -> char {
        match self {
            Tile::Empty => '.',
            Tile::Path => '#',
            Tile::Water => '~',
            Tile::Entrance => 'E',
            Tile::Exit => 'X',
        }
    }

    /// Guests and staff may stand on this tile.
    pub fn walkable(self) -> bool {
        matches!(self, Tile::Path | Tile::Entrance | Tile::Exit)
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum LayoutError {
    #[error("layout {name}: expected 20 rows, found {rows}")]
    Rows { name: String, rows: usize },
    #[error("layout {name}: row {row} has {len} tiles, expected 20")]
    RowLength { name: String, row: usize, len: usize },
    #[error("layout {name}: unknown tile `{ch}` at {pos}")]
    UnknownTile { name: String, ch: char, pos: Pos },
    #[error("layout {name}: expected exactly one {what}, found {count}")]
    Count { name: String, what: &'static str, count: usize },
    #[error("layout {name}: {what} at {pos} must lie on the grid boundary")]
    NotOnBoundary { name: String, what: &'static str, pos: Pos },
    #[error("layout {name}: {what} at {pos} is not adjacent to a path")]
    Detached { name: String, what: &'static str, pos: Pos },
    #[error("unknown layout `{0}`")]
    Unknown(String),
    #[error("cannot read layout file: {0}")]
    Io(String),
}

/// A validated 20×20 terrain grid.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "LayoutRepr", into = "LayoutRepr")]
pub struct Layout {
    pub name: String,
    grid: Vec<Tile>,
    pub entrance: Pos,
    pub exit: Pos,
}

#[derive(Serialize, Deserialize)]
struct LayoutRepr {
    name: String,
    rows: Vec<String>,
}

impl TryFrom<LayoutRepr> for Layout {
    type Error = LayoutError;
    fn try_from(r: LayoutRepr) -> Result<Self, Self::Error> {
        Layout::parse(&r.name, &r.rows.join("\n"))
    }
}

impl From<Layout> for LayoutRepr {
    fn from(l: Layout) -> Self {
        LayoutRepr { rows: l.rows(), name: l.name }
    }
}

impl Layout {
    pub fn parse(name: &str, text: &str) -> Result<Layout, LayoutError> {
        let name = name.to_string();
        let lines: Vec<&str> = text.lines().map(|l| l.trim_end_matches('\r')).filter(|l| !l.is_empty()).collect();
        if lines.len() != GRID as usize {
            return Err(LayoutError::Rows { name, rows: lines.len() });
        }
        let mut grid = Vec::with_capacity(CELLS);
        for (y, line) in lines.iter().enumerate() {
            let len = line.chars().count();
            if len != GRID as usize {
                return Err(LayoutError::RowLength { name, row: y, len });
            }
            for (x, ch) in line.chars().enumerate() {
                let tile = Tile::from_char(ch).ok_or_else(|| LayoutError::UnknownTile {
                    name: name.clone(),
                    ch,
                    pos: Pos::new(x as i32, y as i32),
                })?;
                grid.push(tile);
            }
        }
        let find = |t: Tile| -> Vec<Pos> {
            grid.iter().enumerate().filter(|(_, &g)| g == t).map(|(i, _)| Pos::from_index(i)).collect()
        };
        let mut ends = [Pos::new(0, 0); 2];
        for (slot, (tile, what)) in [(Tile::Entrance, "entrance"), (Tile::Exit, "exit")].into_iter().enumerate() {
            let found = find(tile);
            if found.len() != 1 {
                return Err(LayoutError::Count { name, what, count: found.len() });
            }
            let pos = found[0];
            if !(pos.x == 0 || pos.y == 0 || pos.x == GRID - 1 || pos.y == GRID - 1) {
                return Err(LayoutError::NotOnBoundary { name, what, pos });
            }
            if !pos.neighbors().any(|n| grid[n.index()] == Tile::Path) {
                return Err(LayoutError::Detached { name, what, pos });
            }
            ends[slot] = pos;
        }
        Ok(Layout { name, grid, entrance: ends[0], exit: ends[1] })
    }

    pub fn tile(&self, p: Pos) -> Tile {
        self.grid[p.index()]
    }

    pub fn tiles(&self) -> impl Iterator<Item = (Pos, Tile)> + '_ {
        self.grid.iter().enumerate().map(|(i, &t)| (Pos::from_index(i), t))
    }

    pub fn positions_of(&self, t: Tile) -> impl Iterator<Item = Pos> + '_ {
        self.tiles().filter(move |&(_, k)| k == t).map(|(p, _)| p)
    }

    pub fn rows(&self) -> Vec<String> {
        self.grid.chunks(GRID as usize).map(|r| r.iter().map(|t| t.to_char()).collect()).collect()
    }

    pub fn is_evaluation(&self) -> bool {
        EVALUATION_LAYOUTS.contains(&self.name.as_str())
    }

    /// A shipped layout by name.
    pub fn shipped(name: &str) -> Result<Layout, LayoutError> {
        SHIPPED
            .iter()
            .find(|(n, _)| *n == name)
            .map(|(n, text)| Layout::parse(n, text))
            .unwrap_or_else(|| Err(LayoutError::Unknown(name.to_string())))
    }
}

pub fn shipped_layout_names() -> impl Iterator<Item = &'static str> {
    SHIPPED.iter().map(|(n, _)| *n)
}

/// Loads a shipped layout by name, or a layout file whose name is its file stem.
pub fn load_layout(name_or_file: &str) -> Result<Layout, LayoutError> {
    if SHIPPED.iter().any(|(n, _)| *n == name_or_file) {
        return Layout::shipped(name_or_file);
    }
    let path = Path::new(name_or_file);
    if !path.exists() {
        return Err(LayoutError::Unknown(name_or_file.to_string()));
    }
    let text = std::fs::read_to_string(path).map_err(|e| LayoutError::Io(e.to_string()))?;
    let name = path.file_stem().and_then(|s| s.to_str()).unwrap_or("custom");
    Layout::parse(name, &text)
}
