#![allow(dead_code)]

use std::sync::Arc;

use gnomes_core::game::{generate_layout, Cell, MazeLayout, MazeSide, Player, RewardSpec, RoundSpec};
use gnomes_core::language::LanguageModule;
use gnomes_core::PlannerConfig;
use gnomes_server::session::{SessionCore, SessionSettings};
use gnomes_server::SessionCondition;
use serde_json::{json, Value};

pub const SCHEMA: &str = include_str!("../../schemas/wire-v1.schema.json");

/// Validator for one `$defs` entry of the published schema.
pub fn validator(def: &str) -> jsonschema::Validator {
    let mut doc: Value = serde_json::from_str(SCHEMA).unwrap();
    doc["$ref"] = json!(format!("#/$defs/{def}"));
    jsonschema::validator_for(&doc).unwrap()
}

pub fn assert_valid(v: &jsonschema::Validator, value: &Value) {
    let errors: Vec<String> = v.iter_errors(value).map(|e| e.to_string()).collect();
    assert!(errors.is_empty(), "{value}\n{errors:#?}");
}

pub fn settings(condition: SessionCondition, layout: MazeLayout, agent_seed: u64) -> SessionSettings {
    SessionSettings {
        condition,
        layout,
        maze_seed: None,
        planner: PlannerConfig::default(),
        agent_seed,
        reward: RewardSpec::default(),
        turn_cap: 200,
    }
}

pub fn session(condition: SessionCondition, layout: MazeLayout, agent_seed: u64) -> (SessionCore, String) {
    SessionCore::new(
        "test".into(),
        settings(condition, layout, agent_seed),
        Arc::new(LanguageModule::rules_only()),
        None,
    )
    .unwrap()
}

pub fn generated(seed: u64, size: u16) -> MazeLayout {
    generate_layout(seed, size, size, 5).unwrap()
}

/// Open 3×1 board: round 1 treasure one step right for H, round 2 two steps right for E.
pub fn strip() -> MazeLayout {
    MazeLayout {
        ego: MazeSide::open(3, 1),
        human: MazeSide::open(3, 1),
        start: Cell::new(0, 0),
        rounds: vec![
            RoundSpec {
                round: 1,
                treasure: Cell::new(1, 0),
                side: Player::Human,
            },
            RoundSpec {
                round: 2,
                treasure: Cell::new(2, 0),
                side: Player::Ego,
            },
        ],
    }
}

/// Every object key in `value`, recursively, with its value.
pub fn walk<'a>(value: &'a Value, out: &mut Vec<(&'a str, &'a Value)>) {
    match value {
        Value::Object(map) => {
            for (k, v) in map {
                out.push((k, v));
                walk(v, out);
            }
        }
        Value::Array(items) => items.iter().for_each(|v| walk(v, out)),
        _ => {}
    }
}
