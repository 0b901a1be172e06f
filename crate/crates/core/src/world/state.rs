use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use std::sync::{Arc, OnceLock};

use serde::{Deserialize, Serialize};

use super::geometry::Geometry;
use super::layout::{Layout, Pos, CELLS};
use crate::catalog::{Catalog, EntityKey, Kind, ResearchSpeed, Subclass, Subtype, UnknownName};
use crate::engine::rng::RngStream;
use crate::engine::stats::{DayStats, GuestRecord};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Difficulty {
    Easy,
    Medium,
}

impl Difficulty {
    pub fn as_str(self) -> &'static str {
        match self {
            Difficulty::Easy => "easy",
            Difficulty::Medium => "medium",
        }
    }
}

impl fmt::Display for Difficulty {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Difficulty {
    type Err = UnknownName;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "easy" => Ok(Difficulty::Easy),
            "medium" => Ok(Difficulty::Medium),
            other => Err(UnknownName(other.to_string())),
        }
    }
}

/// Per-day counters an attraction accumulates; reset every morning.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct AttractionDay {
    pub revenue: i64,
    pub guests_served: u32,
    pub times_operated: u32,
    pub riders: u32,
    pub wait_ticks: u64,
    pub waits: u32,
    pub restocks: u32,
    pub stock_purchased: i64,
    pub restocked_units: i64,
    pub wasted_units: i64,
    pub in_service_ticks: u32,
    pub uptime: f64,
    pub out_of_service: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlacedEntity {
    pub id: u32,
    pub key: EntityKey,
    pub pos: Pos,
    pub price: i64,
    pub order_quantity: i64,
    pub inventory: i64,
    pub cleanliness: f64,
    pub broken: bool,
    pub repair_points_remaining: f64,
    pub day: AttractionDay,
}

impl PlacedEntity {
    pub fn is_ride(&self) -> bool {
        self.key.kind == Kind::Ride
    }

    pub fn is_shop(&self) -> bool {
        self.key.kind == Kind::Shop
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct StaffDay {
    pub tiles_traversed: u32,
    pub metric_value: f64,
    pub operating_cost: i64,
    pub work_units: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StaffMember {
    pub id: u32,
    pub key: EntityKey,
    pub pos: Pos,
    pub day: StaffDay,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DaysSinceUnlock {
    pub slow: u32,
    pub medium: u32,
    pub fast: u32,
}

/// Progress is counted in 1/21ths of a tier so slow (7), medium (3) and fast (1)
/// day durations all advance by whole units.
pub const RESEARCH_UNITS: u32 = 21;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResearchState {
    pub active_topic: Option<Subtype>,
    pub speed: ResearchSpeed,
    pub unlocked: BTreeMap<Subtype, Subclass>,
    pub days_since_last_new_entity: DaysSinceUnlock,
    pub new_entity_available: bool,
    pub cumulative_spend: i64,
    pub progress: u32,
}

impl ResearchState {
    pub fn all_unlocked() -> ResearchState {
        ResearchState::with_top(Subclass::Red)
    }

    pub fn yellow_only() -> ResearchState {
        ResearchState::with_top(Subclass::Yellow)
    }

    fn with_top(top: Subclass) -> ResearchState {
        ResearchState {
            active_topic: None,
            speed: ResearchSpeed::None,
            unlocked: Subtype::ALL.iter().map(|&s| (s, top)).collect(),
            days_since_last_new_entity: DaysSinceUnlock::default(),
            new_entity_available: false,
            cumulative_spend: 0,
            progress: 0,
        }
    }

    pub fn highest_unlocked(&self, subtype: Subtype) -> Subclass {
        self.unlocked.get(&subtype).copied().unwrap_or(Subclass::Yellow)
    }

    pub fn is_unlocked(&self, key: EntityKey) -> bool {
        key.subclass <= self.highest_unlocked(key.subtype)
    }

    /// Advances `subtype` by exactly one tier. Returns the newly unlocked tier.
    pub fn unlock_next(&mut self, subtype: Subtype) -> Option<Subclass> {
        let next = self.highest_unlocked(subtype).next()?;
        self.unlocked.insert(subtype, next);
        Some(next)
    }

    pub fn fully_researched(&self, subtype: Subtype) -> bool {
        self.highest_unlocked(subtype) == Subclass::Red
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SurveyRecord {
    pub happiness: f64,
    pub hunger: f64,
    pub thirst: f64,
    pub money_remaining: i64,
    pub exit_or_stay: String,
    pub reason: String,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SurveyCache {
    pub age_of_results: u32,
    pub results: Vec<SurveyRecord>,
}

#[derive(Debug, Clone, Default)]
struct GeometryCache(OnceLock<Arc<Geometry>>);

impl PartialEq for GeometryCache {
    fn eq(&self, _: &Self) -> bool {
        true
    }
}

/// The single source of truth for one park.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParkState {
    pub park_id: String,
    pub layout: Layout,
    pub difficulty: Difficulty,
    pub seed: u64,
    pub day: u32,
    pub horizon: u32,
    pub money: i64,
    pub entities: Vec<PlacedEntity>,
    pub staff: Vec<StaffMember>,
    pub research: ResearchState,
    pub path_cleanliness: Vec<f64>,
    pub last_day: Option<DayStats>,
    pub park_rating: f64,
    pub survey: SurveyCache,
    pub last_guests: Vec<GuestRecord>,
    pub rng: RngStream,
    pub next_id: u32,
    pub staff_unpaid: bool,
    #[serde(skip)]
    geometry: GeometryCache,
}

/// Deterministic park id: a name-based UUID over (layout, difficulty, seed).
pub fn park_id(layout: &str, difficulty: Difficulty, seed: u64) -> String {
    const NAMESPACE: uuid::Uuid = uuid::Uuid::from_u128(0x6d61_7073_2d70_6172_6b2d_6964_2d6e_7331);
    uuid::Uuid::new_v5(&NAMESPACE, format!("{layout}/{difficulty}/{seed}").as_bytes()).to_string()
}

pub fn new_park(catalog: &Catalog, layout: Layout, difficulty: Difficulty, seed: u64) -> ParkState {
    let p = &catalog.params;
    let horizon = match difficulty {
        Difficulty::Easy => p.horizon_easy,
        Difficulty::Medium => p.horizon_medium,
    };
    let research = match difficulty {
        Difficulty::Easy => ResearchState::all_unlocked(),
        Difficulty::Medium => ResearchState::yellow_only(),
    };
    ParkState {
        park_id: park_id(&layout.name, difficulty, seed),
        layout,
        difficulty,
        seed,
        day: 0,
        horizon,
        money: p.starting_money,
        entities: Vec::new(),
        staff: Vec::new(),
        research,
        path_cleanliness: vec![1.0; CELLS],
        last_day: None,
        park_rating: p.initial_rating,
        survey: SurveyCache::default(),
        last_guests: Vec::new(),
        rng: RngStream::new(seed),
        next_id: 1,
        staff_unpaid: false,
        geometry: GeometryCache::default(),
    }
}

impl ParkState {
    pub fn geometry(&self) -> Arc<Geometry> {
        self.geometry.0.get_or_init(|| Arc::new(Geometry::new(&self.layout))).clone()
    }

    pub fn finished(&self) -> bool {
        self.day >= self.horizon
    }

    pub fn entity(&self, id: u32) -> Option<&PlacedEntity> {
        self.entities.iter().find(|e| e.id == id)
    }

    pub fn entity_at(&self, p: Pos) -> Option<&PlacedEntity> {
        self.entities.iter().find(|e| e.pos == p)
    }

    pub fn staff_at(&self, p: Pos) -> Option<&StaffMember> {
        self.staff.iter().find(|s| s.pos == p)
    }

    pub fn rides(&self) -> impl Iterator<Item = &PlacedEntity> {
        self.entities.iter().filter(|e| e.is_ride())
    }

    pub fn shops(&self) -> impl Iterator<Item = &PlacedEntity> {
        self.entities.iter().filter(|e| e.is_shop())
    }

    pub fn occupied(&self, p: Pos) -> bool {
        self.entity_at(p).is_some()
    }

    pub fn allocate_id(&mut self) -> u32 {
        let id = self.next_id;
        self.next_id += 1;
        id
    }

    /// Serialized state bytes; equal states serialize identically.
    pub fn to_bytes(&self) -> Vec<u8> {
        serde_json::to_vec(self).expect("park state serializes")
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<ParkState, serde_json::Error> {
        serde_json::from_slice(bytes)
    }
}
