use rayon::prelude::*;
use serde_json::Value;

use super::config::ScenarioConfig;
use super::scenario::{run_scenario, RunResult};
use crate::error::{Error, Result};

/// Set a dotted path (`observer.gains.k_R`, `profiles.speed.2.1`) inside a
/// JSON config. Intermediate nodes must exist; the leaf may be new.
pub fn set_path(root: &mut Value, path: &str, value: Value) -> Result<()> {
    let parts: Vec<&str> = path.split('.').collect();
    if parts.iter().any(|p| p.is_empty()) {
        return Err(Error::Config(format!("bad parameter path '{path}'")));
    }
    let (leaf, parents) = parts.split_last().expect("non-empty path");
    let mut node = root;
    for part in parents {
        node = match node {
            Value::Object(map) => map
                .get_mut(*part)
                .ok_or_else(|| Error::Config(format!("path '{path}': no key '{part}'")))?,
            Value::Array(items) => {
                let idx: usize = part.parse().map_err(|_| {
                    Error::Config(format!("path '{path}': '{part}' is not an index"))
                })?;
                items.get_mut(idx).ok_or_else(|| {
                    Error::Config(format!("path '{path}': index {idx} out of range"))
                })?
            }
            _ => {
                return Err(Error::Config(format!(
                    "path '{path}': '{part}' is not a container"
                )))
            }
        };
    }
    match node {
        Value::Object(map) => {
            map.insert((*leaf).to_string(), value);
            Ok(())
        }
        Value::Array(items) => {
            let idx: usize = leaf
                .parse()
                .map_err(|_| Error::Config(format!("path '{path}': '{leaf}' is not an index")))?;
            let slot = items
                .get_mut(idx)
                .ok_or_else(|| Error::Config(format!("path '{path}': index {idx} out of range")))?;
            *slot = value;
            Ok(())
        }
        _ => Err(Error::Config(format!(
            "path '{path}': parent is not a container"
        ))),
    }
}

/// Copy of `base` with the numeric value at `path` replaced.
pub fn with_value(base: &ScenarioConfig, path: &str, v: f64) -> Result<ScenarioConfig> {
    let mut j = serde_json::to_value(base)?;
    set_path(&mut j, path, serde_json::json!(v))?;
    // integer fields (seed, pole pairs) accept integral floats
    if v.fract() == 0.0 && v.abs() < 9.0e15 {
        if let Ok(cfg) = ScenarioConfig::from_value(j.clone()) {
            return Ok(cfg);
        }
        set_path(&mut j, path, serde_json::json!(v as i64))?;
    }
    ScenarioConfig::from_value(j)
}

#[derive(Debug, Clone)]
pub struct SweepPoint {
    pub value: f64,
    pub result: RunResult,
}

/// Run `base` once per value of `path`, in parallel. Results keep the order of `values`.
pub fn sweep(base: &ScenarioConfig, path: &str, values: &[f64]) -> Result<Vec<SweepPoint>> {
    let configs = values
        .iter()
        .map(|&v| with_value(base, path, v))
        .collect::<Result<Vec<_>>>()?;
    configs
        .par_iter()
        .zip(values.par_iter())
        .map(|(cfg, &value)| run_scenario(cfg).map(|result| SweepPoint { value, result }))
        .collect()
}
