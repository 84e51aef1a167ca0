#![allow(dead_code)]

use std::path::PathBuf;

use asmo_drive::sim::{run_scenario, RunResult, ScenarioConfig};

pub fn scenario_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("scenarios")
        .join(format!("{name}.json"))
}

pub fn scenario(name: &str) -> ScenarioConfig {
    ScenarioConfig::load(&scenario_path(name)).expect("shipped scenario parses")
}

pub fn run(name: &str) -> RunResult {
    run_scenario(&scenario(name)).expect("scenario runs")
}

/// Records with `t` in `[from, to]`.
pub fn window(result: &RunResult, from: f64, to: f64) -> Vec<asmo_drive::sim::Record> {
    result
        .records
        .iter()
        .filter(|r| r.t >= from && r.t <= to)
        .copied()
        .collect()
}
