//! Fixtures shared by the integration test targets.
#![allow(dead_code)]

use std::path::PathBuf;

use spatialui_core::runtime::{build_demo_world, Config, ReplayScript, World};

pub fn data_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/data").join(name)
}

pub fn read_data(name: &str) -> String {
    std::fs::read_to_string(data_path(name)).unwrap_or_else(|e| panic!("reading {name}: {e}"))
}

pub fn demo_config() -> Config {
    Config::from_toml(&read_data("demo.toml")).expect("fixture config parses")
}

/// The demo world over the charger fixture, built the way the CLI does.
pub fn demo_world() -> World {
    build_demo_world(&demo_config(), &read_data("chargers.csv"), None, None)
        .expect("fixture world builds")
        .world
}

pub fn demo_script() -> ReplayScript {
    ReplayScript::parse(&read_data("demo_script.jsonl")).expect("fixture script parses")
}
