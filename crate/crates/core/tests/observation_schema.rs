mod common;

use std::sync::Arc;

use maps_core::agents::build_policy;
use maps_core::game::{Game, Mode};
use maps_core::harness::{run_episode, HumanReferenceTable};
use maps_core::observe::{json_part, OBSERVATION_SCHEMA};
use maps_core::{Catalog, Difficulty};
use serde_json::Value;

fn schema() -> Value {
    serde_json::from_str(OBSERVATION_SCHEMA).unwrap()
}

#[test]
fn fresh_observations_validate_on_every_layout() {
    let c = Arc::new(Catalog::shipped());
    let schema = schema();
    for name in maps_core::world::layout::shipped_layout_names() {
        for d in [Difficulty::Easy, Difficulty::Medium] {
            let g = Game::new(c.clone(), name, d, 3, Mode::Evaluation).unwrap();
            let v: Value = serde_json::from_str(&g.observation_text()).unwrap();
            assert_eq!(common::validate_schema(&schema, &v), Vec::<String>::new(), "{name} {d}");
        }
    }
}

#[test]
fn observations_along_an_episode_validate() {
    let c = Arc::new(Catalog::shipped());
    let schema = schema();
    let mut p = build_policy("heuristic-greedy", 8).unwrap();
    let r = run_episode(p.as_mut(), c, "ribs", Difficulty::Easy, 8, &HumanReferenceTable::shipped()).unwrap();
    let (_, records) = maps_core::game::parse_trace(&r.trace).unwrap();
    for rec in records {
        let v = json_part(&rec.observation).unwrap();
        assert_eq!(common::validate_schema(&schema, &v), Vec::<String>::new(), "day {}", rec.day);
    }
}

#[test]
fn validator_catches_violations() {
    let c = Arc::new(Catalog::shipped());
    let g = Game::new(c, "ribs", Difficulty::Easy, 3, Mode::Evaluation).unwrap();
    let schema = schema();
    let good: Value = serde_json::from_str(&g.observation_text()).unwrap();

    let mut extra = good.clone();
    extra["surprise"] = Value::from(1);
    assert!(!common::validate_schema(&schema, &extra).is_empty());

    let mut missing = good.clone();
    missing.as_object_mut().unwrap().remove("money");
    assert!(!common::validate_schema(&schema, &missing).is_empty());

    let mut bad_id = good.clone();
    bad_id["parkId"] = Value::from("not-a-uuid");
    assert!(!common::validate_schema(&schema, &bad_id).is_empty());

    let mut bad_type = good;
    bad_type["park_rating"] = Value::from("high");
    assert!(!common::validate_schema(&schema, &bad_type).is_empty());
}
