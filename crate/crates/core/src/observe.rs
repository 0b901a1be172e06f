//! The observation record agents, logs and the UI receive, and its byte-stable text form.
//!
//! Keys are sorted lexicographically, indentation is two spaces, and every
//! fractional number is rounded half-to-even to two decimals.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::catalog::{unlocked_entities, Catalog, Role, Subclass, Subtype};
use crate::engine::compute_park_value;
use crate::world::placement::effective_excitement;
use crate::world::{ParkState, SurveyRecord, Tile};

/// The committed JSON schema for the observation record.
pub const OBSERVATION_SCHEMA: &str = include_str!("../assets/observation.schema.json");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Observation {
    pub available_entities: BTreeMap<String, Vec<String>>,
    pub entrance: [i32; 2],
    pub exit: [i32; 2],
    pub expenses: i64,
    pub fast_days_since_last_new_entity: u32,
    pub guest_survey_results: SurveyResults,
    pub guests: GuestSummary,
    pub horizon: u32,
    pub medium_days_since_last_new_entity: u32,
    pub min_cleanliness: f64,
    pub money: i64,
    pub new_entity_available: bool,
    #[serde(rename = "parkId")]
    pub park_id: String,
    pub park_rating: f64,
    pub paths: Vec<PathTile>,
    pub profit: i64,
    pub research_operating_cost: i64,
    pub research_speed: String,
    pub research_topics: Vec<String>,
    pub revenue: i64,
    pub rides: RideSummary,
    pub shops: ShopSummary,
    pub slow_days_since_last_new_entity: u32,
    pub staff: StaffSummary,
    pub step: u32,
    pub value: i64,
    pub waters: Vec<Coord>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SurveyResults {
    pub age_of_results: u32,
    pub list_of_results: Vec<SurveyRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GuestSummary {
    pub avg_drink_shops_visited: f64,
    pub avg_food_shops_visited: f64,
    pub avg_money_spent: f64,
    pub avg_rides_visited: f64,
    pub avg_specialty_shops_visited: f64,
    pub avg_time_in_park: f64,
    pub total_guests: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PathTile {
    pub cleanliness: f64,
    pub x: i32,
    pub y: i32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Coord {
    pub x: i32,
    pub y: i32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RideObs {
    pub avg_guests_per_operation: f64,
    pub avg_wait_time: f64,
    pub breakdown_rate: f64,
    pub capacity: u32,
    pub cleanliness: f64,
    pub cost_per_operation: i64,
    pub excitement: f64,
    pub guests_entertained: u32,
    pub intensity: f64,
    pub operating_cost: i64,
    pub out_of_service: bool,
    pub revenue_generated: i64,
    pub subclass: String,
    pub subtype: String,
    pub ticket_price: i64,
    pub times_operated: u32,
    pub uptime: f64,
    pub x: i32,
    pub y: i32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RideSummary {
    pub avg_intensity: f64,
    pub min_uptime: f64,
    pub ride_list: Vec<RideObs>,
    pub total_capacity: u32,
    pub total_excitement: f64,
    pub total_operating_cost: i64,
    pub total_revenue_generated: i64,
    pub total_rides: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ShopObs {
    pub cleanliness: f64,
    pub guests_served: u32,
    pub inventory: i64,
    pub item_cost: i64,
    pub item_price: i64,
    pub number_of_restocks: u32,
    pub operating_cost: i64,
    pub order_quantity: i64,
    pub out_of_service: bool,
    pub revenue_generated: i64,
    pub subclass: String,
    pub subtype: String,
    pub uptime: f64,
    pub x: i32,
    pub y: i32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ShopSummary {
    pub min_uptime: f64,
    pub shop_list: Vec<ShopObs>,
    pub total_operating_cost: i64,
    pub total_revenue_generated: i64,
    pub total_shops: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StaffObs {
    pub operating_cost: i64,
    pub salary: i64,
    pub subclass: String,
    pub subtype: String,
    pub success_metric: String,
    pub success_metric_value: f64,
    pub tiles_traversed: u32,
    pub x: i32,
    pub y: i32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StaffSummary {
    pub staff_list: Vec<StaffObs>,
    pub total_janitors: [u32; 4],
    pub total_mechanics: [u32; 4],
    pub total_operating_cost: i64,
    pub total_salary_paid: i64,
    pub total_specialists: [u32; 4],
}

/// Half-to-even rounding to two decimals.
pub fn round2(v: f64) -> f64 {
    let r = (v * 100.0).round_ties_even() / 100.0;
    if r == 0.0 {
        0.0
    } else {
        r
    }
}

fn ratio(num: f64, den: f64) -> f64 {
    if den > 0.0 {
        num / den
    } else {
        0.0
    }
}

pub fn success_metric_name(subtype: Subtype, role: Option<Role>) -> &'static str {
    match (subtype, role) {
        (Subtype::Janitor, _) => "amount_cleaned",
        (Subtype::Mechanic, _) => "amount_repaired",
        (_, Some(Role::Stocker)) => "items_restocked",
        (_, Some(Role::Hybrid)) => "tasks_completed",
        _ => "guests_entertained",
    }
}

/// Builds the observation for the current state. Aggregates come from the
/// latest simulated day; a fresh park reports zeros.
pub fn build_observation(state: &ParkState, catalog: &Catalog) -> Observation {
    let last = state.last_day.clone().unwrap_or_default();
    let research = &state.research;

    let available_entities = unlocked_entities(research)
        .into_iter()
        .map(|(s, tiers)| (s.to_string(), tiers.into_iter().map(|t| t.to_string()).collect()))
        .collect();

    let mut paths: Vec<PathTile> = state
        .layout
        .positions_of(Tile::Path)
        .map(|p| PathTile { cleanliness: round2(state.path_cleanliness[p.index()]), x: p.x, y: p.y })
        .collect();
    paths.sort_by_key(|t| (t.x, t.y));
    let mut waters: Vec<Coord> = state.layout.positions_of(Tile::Water).map(|p| Coord { x: p.x, y: p.y }).collect();
    waters.sort_by_key(|c| (c.x, c.y));

    let mut min_cleanliness = 1.0f64;
    for e in &state.entities {
        min_cleanliness = min_cleanliness.min(e.cleanliness);
    }
    for p in state.layout.positions_of(Tile::Path) {
        min_cleanliness = min_cleanliness.min(state.path_cleanliness[p.index()]);
    }

    let mut ride_list = Vec::new();
    let mut shop_list = Vec::new();
    let mut total_excitement = 0.0;
    for e in &state.entities {
        let spec = catalog.spec(e.key.subtype, e.key.subclass);
        if e.is_ride() {
            let exc = effective_excitement(state, catalog, e.id).unwrap_or(0.0);
            total_excitement += exc;
            ride_list.push(RideObs {
                avg_guests_per_operation: round2(ratio(e.day.riders as f64, e.day.times_operated as f64)),
                avg_wait_time: round2(ratio(e.day.wait_ticks as f64, e.day.waits as f64)),
                breakdown_rate: spec.breakdown_rate,
                capacity: spec.capacity,
                cleanliness: round2(e.cleanliness),
                cost_per_operation: spec.cost_per_operation,
                excitement: round2(exc),
                guests_entertained: e.day.riders,
                intensity: spec.intensity,
                operating_cost: spec.cost_per_operation * e.day.times_operated as i64,
                out_of_service: e.broken,
                revenue_generated: e.day.revenue,
                subclass: e.key.subclass.to_string(),
                subtype: e.key.subtype.to_string(),
                ticket_price: e.price,
                times_operated: e.day.times_operated,
                uptime: round2(e.day.uptime),
                x: e.pos.x,
                y: e.pos.y,
            });
        } else {
            shop_list.push(ShopObs {
                cleanliness: round2(e.cleanliness),
                guests_served: e.day.guests_served,
                inventory: e.inventory,
                item_cost: spec.item_cost,
                item_price: e.price,
                number_of_restocks: e.day.restocks,
                operating_cost: spec.item_cost * (e.day.stock_purchased + e.day.restocked_units),
                order_quantity: e.order_quantity,
                out_of_service: e.day.out_of_service,
                revenue_generated: e.day.revenue,
                subclass: e.key.subclass.to_string(),
                subtype: e.key.subtype.to_string(),
                uptime: round2(e.day.uptime),
                x: e.pos.x,
                y: e.pos.y,
            });
        }
    }
    let rides = RideSummary {
        avg_intensity: round2(ratio(
            state.rides().map(|r| catalog.spec(r.key.subtype, r.key.subclass).intensity).sum(),
            ride_list.len() as f64,
        )),
        min_uptime: round2(ride_list.iter().map(|r| r.uptime).fold(1.0, f64::min)),
        total_capacity: ride_list.iter().map(|r| r.capacity).sum(),
        total_excitement: round2(total_excitement),
        total_operating_cost: ride_list.iter().map(|r| r.operating_cost).sum(),
        total_revenue_generated: ride_list.iter().map(|r| r.revenue_generated).sum(),
        total_rides: ride_list.len() as u32,
        ride_list,
    };
    let shops = ShopSummary {
        min_uptime: round2(shop_list.iter().map(|s| s.uptime).fold(1.0, f64::min)),
        total_operating_cost: shop_list.iter().map(|s| s.operating_cost).sum(),
        total_revenue_generated: shop_list.iter().map(|s| s.revenue_generated).sum(),
        total_shops: shop_list.len() as u32,
        shop_list,
    };

    let mut staff_list = Vec::new();
    let mut totals = [[0u32; 4]; 3];
    for m in &state.staff {
        let spec = catalog.spec(m.key.subtype, m.key.subclass);
        let row = match m.key.subtype {
            Subtype::Janitor => 0,
            Subtype::Mechanic => 1,
            _ => 2,
        };
        totals[row][m.key.subclass.tier()] += 1;
        staff_list.push(StaffObs {
            operating_cost: m.day.operating_cost,
            salary: spec.salary,
            subclass: m.key.subclass.to_string(),
            subtype: m.key.subtype.to_string(),
            success_metric: success_metric_name(m.key.subtype, spec.role).to_string(),
            success_metric_value: round2(m.day.metric_value),
            tiles_traversed: m.day.tiles_traversed,
            x: m.pos.x,
            y: m.pos.y,
        });
    }
    let staff = StaffSummary {
        total_janitors: totals[0],
        total_mechanics: totals[1],
        total_specialists: totals[2],
        total_operating_cost: staff_list.iter().map(|s| s.operating_cost).sum(),
        total_salary_paid: state.staff.iter().map(|m| catalog.spec(m.key.subtype, m.key.subclass).salary).sum(),
        staff_list,
    };

    let research_operating_cost = match (research.active_topic, catalog.research_speed(research.speed)) {
        (Some(_), Some(s)) => s.cost_per_day,
        _ => 0,
    };

    Observation {
        available_entities,
        entrance: [state.layout.entrance.x, state.layout.entrance.y],
        exit: [state.layout.exit.x, state.layout.exit.y],
        expenses: last.expenses,
        fast_days_since_last_new_entity: research.days_since_last_new_entity.fast,
        guest_survey_results: SurveyResults {
            age_of_results: state.survey.age_of_results,
            list_of_results: state
                .survey
                .results
                .iter()
                .map(|r| SurveyRecord {
                    happiness: round2(r.happiness),
                    hunger: round2(r.hunger),
                    thirst: round2(r.thirst),
                    ..r.clone()
                })
                .collect(),
        },
        guests: GuestSummary {
            avg_drink_shops_visited: round2(last.avg_drink_shops_visited),
            avg_food_shops_visited: round2(last.avg_food_shops_visited),
            avg_money_spent: round2(last.avg_money_spent),
            avg_rides_visited: round2(last.avg_rides_visited),
            avg_specialty_shops_visited: round2(last.avg_specialty_shops_visited),
            avg_time_in_park: round2(last.avg_time_in_park),
            total_guests: last.total_guests,
        },
        horizon: state.horizon,
        medium_days_since_last_new_entity: research.days_since_last_new_entity.medium,
        min_cleanliness: round2(min_cleanliness),
        money: state.money,
        new_entity_available: research.new_entity_available,
        park_id: state.park_id.clone(),
        park_rating: round2(state.park_rating),
        paths,
        profit: last.profit,
        research_operating_cost,
        research_speed: research.speed.to_string(),
        research_topics: catalog.research_topics.iter().map(|t| t.to_string()).collect(),
        revenue: last.revenue,
        rides,
        shops,
        slow_days_since_last_new_entity: research.days_since_last_new_entity.slow,
        staff,
        step: state.day,
        value: compute_park_value(state, catalog),
        waters,
    }
}

/// The observation as sorted, two-space-indented JSON.
pub fn to_json(obs: &Observation) -> String {
    let value = serde_json::to_value(obs).expect("observation serializes");
    serde_json::to_string_pretty(&value).expect("value serializes")
}

/// Observation text, followed by the NOTE line when the last action failed.
pub fn serialize(obs: &Observation, note: Option<&str>) -> String {
    let mut text = to_json(obs);
    if let Some(n) = note {
        text.push_str("\n\n");
        text.push_str(n);
    }
    text
}

/// Reads the leading JSON record of an observation text, ignoring any trailing notes.
pub fn parse_observation(text: &str) -> Result<Observation, serde_json::Error> {
    let mut stream = serde_json::Deserializer::from_str(text).into_iter::<Observation>();
    match stream.next() {
        Some(r) => r,
        None => serde_json::from_str(text),
    }
}

/// The leading JSON value of an observation text.
pub fn json_part(text: &str) -> Result<serde_json::Value, serde_json::Error> {
    let mut stream = serde_json::Deserializer::from_str(text).into_iter::<serde_json::Value>();
    match stream.next() {
        Some(r) => r,
        None => serde_json::from_str(text),
    }
}

/// Extracts the NOTE line from an observation text, if any.
pub fn note_of(text: &str) -> Option<&str> {
    text.lines().rev().find(|l| l.starts_with("NOTE: While attempting the action"))
}

/// Tier counts in App order for a subtype row, used by callers that summarise staff.
pub fn tier_index(subclass: Subclass) -> usize {
    subclass.tier()
}
