//! Helpers shared by the integration and acceptance suites.
#![allow(dead_code)]

use maps_core::catalog::{Kind, ResearchSpeed, Subclass, Subtype};
use maps_core::engine::RngStream;
use maps_core::protocol::{Action, Command, SandboxAction};
use serde_json::Value;

/// Validates `value` against the draft-07 keywords the observation schema uses:
/// type, properties, required, additionalProperties, items, enum, minimum,
/// maximum, minItems, maxItems and pattern. Returns every violation found.
pub fn validate_schema(schema: &Value, value: &Value) -> Vec<String> {
    let mut errors = Vec::new();
    check(schema, value, "$", &mut errors);
    errors
}

fn type_matches(name: &str, v: &Value) -> bool {
    match name {
        "object" => v.is_object(),
        "array" => v.is_array(),
        "string" => v.is_string(),
        "boolean" => v.is_boolean(),
        "null" => v.is_null(),
        "integer" => v.is_i64() || v.is_u64() || v.as_f64().is_some_and(|f| f.fract() == 0.0),
        "number" => v.is_number(),
        _ => false,
    }
}

fn check(schema: &Value, v: &Value, at: &str, errors: &mut Vec<String>) {
    let Some(s) = schema.as_object() else { return };
    if let Some(t) = s.get("type") {
        let ok = match t {
            Value::String(name) => type_matches(name, v),
            Value::Array(names) => names.iter().filter_map(Value::as_str).any(|n| type_matches(n, v)),
            _ => true,
        };
        if !ok {
            errors.push(format!("{at}: expected type {t}, got {v}"));
            return;
        }
    }
    if let Some(Value::Array(options)) = s.get("enum") {
        if !options.contains(v) {
            errors.push(format!("{at}: {v} is not one of {options:?}"));
        }
    }
    if let Some(n) = v.as_f64() {
        if let Some(min) = s.get("minimum").and_then(Value::as_f64) {
            if n < min {
                errors.push(format!("{at}: {n} < minimum {min}"));
            }
        }
        if let Some(max) = s.get("maximum").and_then(Value::as_f64) {
            if n > max {
                errors.push(format!("{at}: {n} > maximum {max}"));
            }
        }
    }
    if let (Some(text), Some(pattern)) = (v.as_str(), s.get("pattern").and_then(Value::as_str)) {
        let re = regex::Regex::new(pattern).expect("schema pattern compiles");
        if !re.is_match(text) {
            errors.push(format!("{at}: {text:?} does not match {pattern}"));
        }
    }
    if let Some(items) = v.as_array() {
        if let Some(min) = s.get("minItems").and_then(Value::as_u64) {
            if (items.len() as u64) < min {
                errors.push(format!("{at}: fewer than {min} items"));
            }
        }
        if let Some(max) = s.get("maxItems").and_then(Value::as_u64) {
            if (items.len() as u64) > max {
                errors.push(format!("{at}: more than {max} items"));
            }
        }
        if let Some(item_schema) = s.get("items") {
            for (i, item) in items.iter().enumerate() {
                check(item_schema, item, &format!("{at}[{i}]"), errors);
            }
        }
    }
    if let Some(obj) = v.as_object() {
        let props = s.get("properties").and_then(Value::as_object);
        if let Some(Value::Array(required)) = s.get("required") {
            for key in required.iter().filter_map(Value::as_str) {
                if !obj.contains_key(key) {
                    errors.push(format!("{at}: missing required key {key}"));
                }
            }
        }
        for (key, child) in obj {
            match props.and_then(|p| p.get(key)) {
                Some(child_schema) => check(child_schema, child, &format!("{at}.{key}"), errors),
                None => match s.get("additionalProperties") {
                    Some(Value::Bool(false)) => errors.push(format!("{at}: unexpected key {key}")),
                    Some(extra @ Value::Object(_)) => check(extra, child, &format!("{at}.{key}"), errors),
                    _ => {}
                },
            }
        }
    }
}

fn pick<T: Clone>(rng: &mut RngStream, items: &[T]) -> T {
    items[rng.below(items.len())].clone()
}

fn coord(rng: &mut RngStream) -> i64 {
    rng.below(30) as i64 - 5
}

fn amount(rng: &mut RngStream) -> Option<i64> {
    if rng.bernoulli(0.5) {
        None
    } else {
        Some(rng.below(2_000_000) as i64 - 1_000)
    }
}

/// A uniformly structured random command covering every action and sandbox verb.
pub fn random_command(rng: &mut RngStream) -> Command {
    let speeds = [ResearchSpeed::None, ResearchSpeed::Slow, ResearchSpeed::Medium, ResearchSpeed::Fast];
    match rng.below(12) {
        0 | 1 => {
            let subtype = pick(rng, &Subtype::ALL);
            Command::Game(Action::Place {
                x: coord(rng),
                y: coord(rng),
                kind: subtype.kind(),
                subtype,
                subclass: pick(rng, &Subclass::ALL),
                price: amount(rng),
                order_quantity: if subtype.kind() == Kind::Shop { amount(rng) } else { None },
            })
        }
        2 => Command::Game(Action::Move { x: coord(rng), y: coord(rng), new_x: coord(rng), new_y: coord(rng) }),
        3 => Command::Game(Action::Remove { x: coord(rng), y: coord(rng) }),
        4 => Command::Game(Action::Modify { x: coord(rng), y: coord(rng), price: amount(rng), order_quantity: amount(rng) }),
        5 => Command::Game(Action::SetResearch { topic: pick(rng, &Subtype::ALL), speed: pick(rng, &speeds) }),
        6 => Command::Game(Action::Wait),
        7 => Command::Game(Action::SurveyGuests { n: rng.below(40) as i64 }),
        8 => Command::Sandbox(pick(rng, &[SandboxAction::UndoDay, SandboxAction::MaxMoney, SandboxAction::MaxResearch])),
        9 => Command::Sandbox(SandboxAction::Reset),
        10 => Command::Sandbox(SandboxAction::SwitchLayout {
            name: pick(rng, &["starter_loop", "river_bend", "crossroads", "lakeside", "long_walk", "ribs"]).to_string(),
        }),
        _ => Command::Game(Action::Wait),
    }
}
