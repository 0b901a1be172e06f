//! Entity stat tables and the versioned config file they are loaded from.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::world::ResearchState;

/// The catalog shipped with the crate; the reference for every test in the workspace.
pub const DEFAULT_CATALOG_TOML: &str = include_str!("../assets/catalog.toml");

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Kind {
    Ride,
    Shop,
    Staff,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Subtype {
    Carousel,
    FerrisWheel,
    RollerCoaster,
    Drink,
    Food,
    Specialty,
    Janitor,
    Mechanic,
    Specialist,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Subclass {
    Yellow,
    Blue,
    Green,
    Red,
}

/// Behaviour attached to a specific tier of a multi-role subtype.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    Clown,
    Stocker,
    /// Restocks when any shop runs low, otherwise entertains queues.
    Hybrid,
    Souvenir,
    Atm,
    InfoBooth,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ResearchSpeed {
    None,
    Slow,
    Medium,
    Fast,
}

impl Kind {
    pub const ALL: [Kind; 3] = [Kind::Ride, Kind::Shop, Kind::Staff];

    pub fn as_str(self) -> &'static str {
        match self {
            Kind::Ride => "ride",
            Kind::Shop => "shop",
            Kind::Staff => "staff",
        }
    }

    pub fn is_attraction(self) -> bool {
        !matches!(self, Kind::Staff)
    }
}

impl Subtype {
    /// Research topic order as it appears in observations.
    pub const ALL: [Subtype; 9] = [
        Subtype::Carousel,
        Subtype::FerrisWheel,
        Subtype::RollerCoaster,
        Subtype::Drink,
        Subtype::Food,
        Subtype::Specialty,
        Subtype::Janitor,
        Subtype::Mechanic,
        Subtype::Specialist,
    ];

    pub fn kind(self) -> Kind {
        match self {
            Subtype::Carousel | Subtype::FerrisWheel | Subtype::RollerCoaster => Kind::Ride,
            Subtype::Drink | Subtype::Food | Subtype::Specialty => Kind::Shop,
            Subtype::Janitor | Subtype::Mechanic | Subtype::Specialist => Kind::Staff,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Subtype::Carousel => "carousel",
            Subtype::FerrisWheel => "ferris_wheel",
            Subtype::RollerCoaster => "roller_coaster",
            Subtype::Drink => "drink",
            Subtype::Food => "food",
            Subtype::Specialty => "specialty",
            Subtype::Janitor => "janitor",
            Subtype::Mechanic => "mechanic",
            Subtype::Specialist => "specialist",
        }
    }
}

impl Subclass {
    pub const ALL: [Subclass; 4] = [Subclass::Yellow, Subclass::Blue, Subclass::Green, Subclass::Red];

    pub fn tier(self) -> usize {
        self as usize
    }

    pub fn from_tier(tier: usize) -> Option<Subclass> {
        Subclass::ALL.get(tier).copied()
    }

    pub fn next(self) -> Option<Subclass> {
        Subclass::from_tier(self.tier() + 1)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Subclass::Yellow => "yellow",
            Subclass::Blue => "blue",
            Subclass::Green => "green",
            Subclass::Red => "red",
        }
    }
}

impl ResearchSpeed {
    pub fn as_str(self) -> &'static str {
        match self {
            ResearchSpeed::None => "none",
            ResearchSpeed::Slow => "slow",
            ResearchSpeed::Medium => "medium",
            ResearchSpeed::Fast => "fast",
        }
    }
}

macro_rules! str_enum {
    ($ty:ty, $($name:literal => $variant:expr),+ $(,)?) => {
        impl FromStr for $ty {
            type Err = UnknownName;
            fn from_str(s: &str) -> Result<Self, Self::Err> {
                match s {
                    $($name => Ok($variant),)+
                    _ => Err(UnknownName(s.to_string())),
                }
            }
        }
        impl fmt::Display for $ty {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.as_str())
            }
        }
    };
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown name `{0}`")]
pub struct UnknownName(pub String);

str_enum!(Kind, "ride" => Kind::Ride, "shop" => Kind::Shop, "staff" => Kind::Staff);
str_enum!(Subtype,
    "carousel" => Subtype::Carousel,
    "ferris_wheel" => Subtype::FerrisWheel,
    "roller_coaster" => Subtype::RollerCoaster,
    "drink" => Subtype::Drink,
    "food" => Subtype::Food,
    "specialty" => Subtype::Specialty,
    "janitor" => Subtype::Janitor,
    "mechanic" => Subtype::Mechanic,
    "specialist" => Subtype::Specialist,
);
str_enum!(Subclass,
    "yellow" => Subclass::Yellow,
    "blue" => Subclass::Blue,
    "green" => Subclass::Green,
    "red" => Subclass::Red,
);
str_enum!(ResearchSpeed,
    "none" => ResearchSpeed::None,
    "slow" => ResearchSpeed::Slow,
    "medium" => ResearchSpeed::Medium,
    "fast" => ResearchSpeed::Fast,
);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct EntityKey {
    pub kind: Kind,
    pub subtype: Subtype,
    pub subclass: Subclass,
}

impl EntityKey {
    /// Builds a key, rejecting a subtype that belongs to a different kind.
    pub fn new(kind: Kind, subtype: Subtype, subclass: Subclass) -> Option<EntityKey> {
        (subtype.kind() == kind).then_some(EntityKey { kind, subtype, subclass })
    }

    pub fn of(subtype: Subtype, subclass: Subclass) -> EntityKey {
        EntityKey { kind: subtype.kind(), subtype, subclass }
    }
}

impl fmt::Display for EntityKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {})", self.kind, self.subtype, self.subclass)
    }
}

/// Immutable stat block for one buildable entity.
///
/// Fields that do not apply to a kind are zero. For staff, `build_cost` is the
/// hire cost and `operating_cost` is charged per unit of work (tiles walked by
/// janitors, repair points by mechanics).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntitySpec {
    pub key: EntityKey,
    pub build_cost: i64,
    pub max_price: i64,
    pub capacity: u32,
    pub base_excitement: f64,
    pub intensity: f64,
    pub breakdown_rate: f64,
    pub cost_per_operation: i64,
    pub ride_duration: u32,
    pub item_cost: i64,
    pub default_order_quantity: i64,
    pub satisfaction: f64,
    pub salary: i64,
    pub operating_cost: i64,
    pub work_rate: f64,
    pub entertain_rate: f64,
    pub role: Option<Role>,
    pub sell_refund_ratio: f64,
}

impl EntitySpec {
    /// Refund for selling the entity: floor(ratio × build_cost).
    pub fn refund(&self) -> i64 {
        refund_amount(self.build_cost, self.sell_refund_ratio)
    }

    /// Repair points a breakdown of this ride requires.
    pub fn repair_points(&self) -> f64 {
        (self.build_cost as f64 / 100.0).max(1.0)
    }
}

pub(crate) fn refund_amount(build_cost: i64, ratio: f64) -> i64 {
    let percent = (ratio * 100.0).round() as i64;
    build_cost * percent / 100
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResearchSpeedSpec {
    pub days_to_unlock: u32,
    pub cost_per_day: i64,
}

/// Tunable simulation coefficients. Every field has a shipped default in `catalog.toml`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimParams {
    pub starting_money: i64,
    pub horizon_easy: u32,
    pub horizon_medium: u32,
    pub ticks_per_day: u32,
    pub initial_rating: f64,
    pub survey_cost_per_guest: i64,
    pub sandbox_max_money: i64,
    pub ip_fraction: f64,
    pub waste_carryover_fraction: f64,
    pub sell_refund_ratio: f64,

    pub base_trickle: f64,
    pub arrival_alpha: f64,
    pub max_guests_per_day: u32,
    pub arrival_window: f64,

    pub guest_money: [f64; 2],
    pub guest_bank_reserve: [f64; 2],
    pub guest_energy: [f64; 2],
    pub guest_hunger: [f64; 2],
    pub guest_thirst: [f64; 2],
    pub guest_happiness: [f64; 2],
    pub guest_patience: [f64; 2],
    pub guest_preferred_intensity: [f64; 2],
    pub guest_souvenir_desire: [f64; 2],

    pub hunger_rate: f64,
    pub thirst_rate: f64,
    pub energy_rate: f64,
    pub walk_energy: f64,
    pub need_threshold: f64,
    pub shop_interest_threshold: f64,
    pub unmet_need_happiness: f64,
    pub queue_happiness_decay: f64,
    pub queue_patience_ticks: f64,
    pub dirty_tile_happiness: f64,
    pub ride_happiness: f64,
    pub ride_excitement_happiness: f64,
    pub ride_energy_per_intensity: f64,
    pub repeat_ride_novelty: f64,
    pub refused_happiness: f64,
    pub boredom_leave_probability: f64,

    pub choice_need_weight: f64,
    pub choice_distance_weight: f64,
    pub choice_excitement_weight: f64,
    pub choice_price_weight: f64,
    pub choice_temperature: f64,
    pub info_booth_radius: i32,
    pub info_booth_distance_factor: f64,
    pub specialty_impulse_probability: f64,
    pub souvenir_threshold: f64,
    pub souvenir_happiness: f64,
    pub atm_low_money: i64,
    pub atm_transfer: i64,

    pub traffic_dirt: f64,
    pub ride_operation_dirt: f64,
    pub shop_sale_dirt: f64,
    pub refuse_below_cleanliness: f64,

    pub janitor_patrol_radius: i32,
    pub restock_threshold: f64,

    pub rating_excitement_weight: f64,
    pub rating_cleanliness_weight: f64,
    pub rating_uptime_weight: f64,
    pub rating_happiness_weight: f64,
    pub rating_diversity_weight: f64,
    pub rating_excitement_softness: f64,
    pub rating_diversity_norm: f64,

    pub duplicate_penalty: f64,
    pub water_excitement_bonus: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Catalog {
    pub schema_version: u32,
    pub specs: BTreeMap<EntityKey, EntitySpec>,
    pub research_topics: Vec<Subtype>,
    pub research_speeds: BTreeMap<String, ResearchSpeedSpec>,
    pub params: SimParams,
}

#[derive(Debug, Error)]
pub enum CatalogError {
    #[error("cannot read catalog: {0}")]
    Io(#[from] std::io::Error),
    #[error("catalog does not parse: {0}")]
    Parse(String),
    #[error("unsupported schema_version {found} (expected {expected})")]
    SchemaVersion { found: u32, expected: u32 },
    #[error("missing entity {0}")]
    MissingEntity(EntityKey),
    #[error("duplicate key {0}")]
    DuplicateKey(EntityKey),
    #[error("negative stat `{field}` for {key}")]
    NegativeStat { key: EntityKey, field: &'static str },
    #[error("invalid entity {key}: {reason}")]
    InvalidEntity { key: EntityKey, reason: String },
    #[error("invalid research table: {0}")]
    Research(String),
    #[error("entity {0} not found")]
    NotFound(EntityKey),
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCatalog {
    schema_version: u32,
    params: SimParams,
    research: RawResearch,
    #[serde(rename = "entity")]
    entities: Vec<RawEntity>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawResearch {
    topics: Vec<Subtype>,
    slow: ResearchSpeedSpec,
    medium: ResearchSpeedSpec,
    fast: ResearchSpeedSpec,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawEntity {
    kind: Kind,
    subtype: Subtype,
    subclass: Subclass,
    build_cost: i64,
    #[serde(default)]
    max_price: i64,
    #[serde(default)]
    capacity: u32,
    #[serde(default)]
    excitement: f64,
    #[serde(default)]
    intensity: f64,
    #[serde(default)]
    breakdown_rate: f64,
    #[serde(default)]
    cost_per_operation: i64,
    #[serde(default)]
    ride_duration: u32,
    #[serde(default)]
    item_cost: i64,
    #[serde(default)]
    default_order_quantity: i64,
    #[serde(default)]
    satisfaction: f64,
    #[serde(default)]
    salary: i64,
    #[serde(default)]
    operating_cost: i64,
    #[serde(default)]
    work_rate: f64,
    #[serde(default)]
    entertain_rate: f64,
    #[serde(default)]
    role: Option<Role>,
}

impl Catalog {
    /// The shipped reference catalog.
    pub fn shipped() -> Catalog {
        Catalog::from_toml_str(DEFAULT_CATALOG_TOML).expect("shipped catalog is valid")
    }

    pub fn from_toml_str(text: &str) -> Result<Catalog, CatalogError> {
        let raw: RawCatalog = toml::from_str(text).map_err(|e| CatalogError::Parse(e.to_string()))?;
        Catalog::from_raw(raw)
    }

    fn from_raw(raw: RawCatalog) -> Result<Catalog, CatalogError> {
        if raw.schema_version != SCHEMA_VERSION {
            return Err(CatalogError::SchemaVersion { found: raw.schema_version, expected: SCHEMA_VERSION });
        }
        let refund_ratio = raw.params.sell_refund_ratio;
        if !(0.0..=1.0).contains(&refund_ratio) {
            return Err(CatalogError::Parse("sell_refund_ratio must be a fraction".into()));
        }
        let mut specs = BTreeMap::new();
        for e in raw.entities {
            let key = EntityKey::new(e.kind, e.subtype, e.subclass).ok_or_else(|| CatalogError::InvalidEntity {
                key: EntityKey { kind: e.kind, subtype: e.subtype, subclass: e.subclass },
                reason: format!("subtype {} is not a {}", e.subtype, e.kind),
            })?;
            let spec = EntitySpec {
                key,
                build_cost: e.build_cost,
                max_price: e.max_price,
                capacity: e.capacity,
                base_excitement: e.excitement,
                intensity: e.intensity,
                breakdown_rate: e.breakdown_rate,
                cost_per_operation: e.cost_per_operation,
                ride_duration: e.ride_duration,
                item_cost: e.item_cost,
                default_order_quantity: e.default_order_quantity,
                satisfaction: e.satisfaction,
                salary: e.salary,
                operating_cost: e.operating_cost,
                work_rate: e.work_rate,
                entertain_rate: e.entertain_rate,
                role: e.role,
                sell_refund_ratio: refund_ratio,
            };
            check_spec(&spec)?;
            if specs.insert(key, spec).is_some() {
                return Err(CatalogError::DuplicateKey(key));
            }
        }
        for subtype in Subtype::ALL {
            for subclass in Subclass::ALL {
                let key = EntityKey::of(subtype, subclass);
                if !specs.contains_key(&key) {
                    return Err(CatalogError::MissingEntity(key));
                }
            }
        }
        check_tiers(&specs)?;

        if raw.research.topics != Subtype::ALL {
            return Err(CatalogError::Research("topics must list the nine subtypes in canonical order".into()));
        }
        let mut research_speeds = BTreeMap::new();
        for (name, s) in [("slow", raw.research.slow), ("medium", raw.research.medium), ("fast", raw.research.fast)] {
            if s.days_to_unlock == 0 || s.cost_per_day < 0 {
                return Err(CatalogError::Research(format!("speed {name} has a non-positive duration or negative cost")));
            }
            research_speeds.insert(name.to_string(), s);
        }
        if research_speeds["fast"].days_to_unlock != 1 {
            return Err(CatalogError::Research("fast research must unlock in 1 day".into()));
        }

        Ok(Catalog {
            schema_version: raw.schema_version,
            specs,
            research_topics: raw.research.topics,
            research_speeds,
            params: raw.params,
        })
    }

    pub fn lookup(&self, key: EntityKey) -> Result<&EntitySpec, CatalogError> {
        self.specs.get(&key).ok_or(CatalogError::NotFound(key))
    }

    /// Shorthand for keys known to be present (every key of a loaded catalog is).
    pub fn spec(&self, subtype: Subtype, subclass: Subclass) -> &EntitySpec {
        &self.specs[&EntityKey::of(subtype, subclass)]
    }

    pub fn research_speed(&self, speed: ResearchSpeed) -> Option<ResearchSpeedSpec> {
        match speed {
            ResearchSpeed::None => None,
            other => self.research_speeds.get(other.as_str()).copied(),
        }
    }
}

pub fn load_catalog(path: impl AsRef<Path>) -> Result<Catalog, CatalogError> {
    let text = std::fs::read_to_string(path)?;
    Catalog::from_toml_str(&text)
}

pub fn lookup(catalog: &Catalog, key: EntityKey) -> Result<&EntitySpec, CatalogError> {
    catalog.lookup(key)
}

/// Unlocked subclasses per subtype: always a prefix of the tier order starting at yellow.
pub fn unlocked_entities(research: &ResearchState) -> BTreeMap<Subtype, Vec<Subclass>> {
    Subtype::ALL
        .iter()
        .map(|&s| {
            let top = research.highest_unlocked(s);
            (s, Subclass::ALL[..=top.tier()].to_vec())
        })
        .collect()
}

fn check_spec(s: &EntitySpec) -> Result<(), CatalogError> {
    let key = s.key;
    let ints: [(&'static str, i64); 7] = [
        ("build_cost", s.build_cost),
        ("max_price", s.max_price),
        ("cost_per_operation", s.cost_per_operation),
        ("item_cost", s.item_cost),
        ("default_order_quantity", s.default_order_quantity),
        ("salary", s.salary),
        ("operating_cost", s.operating_cost),
    ];
    let floats: [(&'static str, f64); 6] = [
        ("excitement", s.base_excitement),
        ("intensity", s.intensity),
        ("breakdown_rate", s.breakdown_rate),
        ("satisfaction", s.satisfaction),
        ("work_rate", s.work_rate),
        ("entertain_rate", s.entertain_rate),
    ];
    for (field, v) in ints {
        if v < 0 {
            return Err(CatalogError::NegativeStat { key, field });
        }
    }
    for (field, v) in floats {
        if v < 0.0 || !v.is_finite() {
            return Err(CatalogError::NegativeStat { key, field });
        }
    }
    let invalid = |reason: &str| Err(CatalogError::InvalidEntity { key, reason: reason.to_string() });
    if s.breakdown_rate > 1.0 {
        return invalid("breakdown_rate must be a probability");
    }
    match key.kind {
        Kind::Ride => {
            if s.capacity < 1 {
                return invalid("rides need capacity >= 1");
            }
            if s.ride_duration < 1 {
                return invalid("rides need ride_duration >= 1");
            }
        }
        Kind::Shop => {
            if s.role.is_none() && key.subtype == Subtype::Specialty {
                return invalid("specialty shops need a role");
            }
        }
        Kind::Staff => {
            if key.subtype == Subtype::Specialist && s.role.is_none() {
                return invalid("specialists need a role");
            }
        }
    }
    if key.subtype == Subtype::Drink && key.subclass == Subclass::Yellow && s.item_cost != 0 {
        return invalid("yellow drink shops must be free to stock");
    }
    Ok(())
}

fn check_tiers(specs: &BTreeMap<EntityKey, EntitySpec>) -> Result<(), CatalogError> {
    for subtype in Subtype::ALL {
        for pair in Subclass::ALL.windows(2) {
            let lo = &specs[&EntityKey::of(subtype, pair[0])];
            let hi = &specs[&EntityKey::of(subtype, pair[1])];
            if hi.build_cost < lo.build_cost || hi.work_rate < lo.work_rate {
                return Err(CatalogError::InvalidEntity {
                    key: hi.key,
                    reason: format!("build_cost and work_rate must not decrease from {}", pair[0]),
                });
            }
        }
    }
    Ok(())
}
