use serde::{Deserialize, Serialize};

use crate::dsfoc::ControllerConfig;
use crate::error::{Error, Result};
use crate::motor_model::MotorParams;
use crate::observer::ObserverGains;

pub const SCHEMA_VERSION: u32 = 1;

/// Full description of one simulation run. Deserialized from JSON with a
/// strict schema: every top-level section is required and unknown keys are
/// rejected at every level.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub sim: SimSettings,
    pub motor: MotorParams,
    pub observer: ObserverSection,
    pub controller: ControllerConfig,
    pub profiles: Profiles,
    pub mismatch: Mismatch,
    pub noise: NoiseConfig,
    pub mode: FeedbackMode,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SimSettings {
    pub schema_version: u32,
    /// Integration step, s.
    pub dt: f64,
    /// Run length, s.
    pub duration: f64,
    /// Time after which the Lyapunov monitor starts judging the trajectory, s.
    pub transient_window: f64,
}

impl Default for SimSettings {
    fn default() -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            dt: 1e-4,
            duration: 2.0,
            transient_window: 0.5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ObserverSection {
    pub gains: ObserverGains,
    /// Initial speed-estimate offset, mechanical rad/s.
    pub initial_speed_offset: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Profiles {
    /// Piecewise-linear mechanical speed reference, `(t, rad/s)`.
    pub speed: Vec<[f64; 2]>,
    /// Piecewise-constant load torque, `(t, N m)`.
    pub load: Vec<[f64; 2]>,
    /// Optional piecewise-linear stator-flux reference, `(t, Wb)`. When
    /// absent the controller's `psi_s_ref` is used throughout. Zero leaves
    /// the machine de-energized.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub flux: Option<Vec<[f64; 2]>>,
}

impl Default for Profiles {
    fn default() -> Self {
        Self {
            speed: vec![[0.0, 0.0], [0.1, 0.0], [0.3, 100.0]],
            load: vec![[0.0, 0.0]],
            flux: None,
        }
    }
}

fn check_profile(name: &str, p: &[[f64; 2]]) -> Result<()> {
    if p.is_empty() {
        return Err(Error::Config(format!("profile {name} is empty")));
    }
    if p[0][0] != 0.0 {
        return Err(Error::Config(format!("profile {name} must start at t = 0")));
    }
    if p.iter().flatten().any(|v| !v.is_finite()) {
        return Err(Error::Config(format!(
            "profile {name} has non-finite entries"
        )));
    }
    if p.windows(2).any(|w| w[1][0] < w[0][0]) {
        return Err(Error::Config(format!("profile {name} is not time-sorted")));
    }
    Ok(())
}

/// Piecewise-linear interpolation, held constant outside the breakpoints.
pub(crate) fn piecewise_linear(p: &[[f64; 2]], t: f64) -> f64 {
    let idx = p.partition_point(|pt| pt[0] <= t);
    if idx == 0 {
        return p[0][1];
    }
    if idx == p.len() {
        return p[p.len() - 1][1];
    }
    let [t0, v0] = p[idx - 1];
    let [t1, v1] = p[idx];
    if t1 == t0 {
        v1
    } else {
        v0 + (v1 - v0) * (t - t0) / (t1 - t0)
    }
}

pub(crate) fn piecewise_constant(p: &[[f64; 2]], t: f64) -> f64 {
    let idx = p.partition_point(|pt| pt[0] <= t);
    p[idx.saturating_sub(1)][1]
}

impl Profiles {
    pub fn speed_at(&self, t: f64) -> f64 {
        piecewise_linear(&self.speed, t)
    }

    pub fn load_at(&self, t: f64) -> f64 {
        piecewise_constant(&self.load, t)
    }

    pub fn flux_at(&self, t: f64, fallback: f64) -> f64 {
        self.flux
            .as_deref()
            .map_or(fallback, |p| piecewise_linear(p, t))
    }

    pub fn max_speed_ref(&self) -> f64 {
        self.speed.iter().map(|p| p[1].abs()).fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Mismatch {
    /// Plant rotor resistance as a multiple of the observer's nominal value.
    #[serde(rename = "R_r_factor")]
    pub r_r_factor: f64,
    #[serde(rename = "R_s_factor")]
    pub r_s_factor: f64,
}

impl Default for Mismatch {
    fn default() -> Self {
        Self {
            r_r_factor: 1.0,
            r_s_factor: 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NoiseConfig {
    /// Standard deviation of additive current-sensor noise, A.
    pub std: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FeedbackMode {
    #[serde(rename = "sensored")]
    Sensored,
    #[serde(rename = "sensorless-asmo")]
    SensorlessAsmo,
}

impl ScenarioConfig {
    /// Matched-model sensorless run at 100 rad/s with no load.
    pub fn reference() -> Self {
        Self {
            sim: SimSettings::default(),
            motor: MotorParams::default(),
            observer: ObserverSection::default(),
            controller: ControllerConfig::default(),
            profiles: Profiles::default(),
            mismatch: Mismatch::default(),
            noise: NoiseConfig::default(),
            mode: FeedbackMode::SensorlessAsmo,
            seed: 1,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_value(value: serde_json::Value) -> Result<Self> {
        let cfg: Self = serde_json::from_value(value)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        let s = &self.sim;
        if s.schema_version != SCHEMA_VERSION {
            return Err(Error::Config(format!(
                "unsupported schema_version {} (expected {SCHEMA_VERSION})",
                s.schema_version
            )));
        }
        if !(s.dt > 0.0 && s.dt.is_finite()) {
            return Err(Error::Config("sim.dt must be > 0".into()));
        }
        if !(s.duration >= s.dt && s.duration.is_finite()) {
            return Err(Error::Config("sim.duration must be >= dt".into()));
        }
        if !(s.transient_window >= 0.0) {
            return Err(Error::Config("sim.transient_window must be >= 0".into()));
        }
        self.motor
            .validate()
            .map_err(|e| Error::Config(format!("motor: {e}")))?;
        self.observer.gains.validate()?;
        if !self.observer.initial_speed_offset.is_finite() {
            return Err(Error::Config(
                "observer.initial_speed_offset must be finite".into(),
            ));
        }
        self.controller.validate()?;
        check_profile("speed", &self.profiles.speed)?;
        check_profile("load", &self.profiles.load)?;
        if let Some(flux) = &self.profiles.flux {
            check_profile("flux", flux)?;
            if flux.iter().any(|p| !(p[1] >= 0.0)) {
                return Err(Error::Config("flux profile values must be >= 0".into()));
            }
        }
        if !(self.mismatch.r_r_factor > 0.0 && self.mismatch.r_s_factor > 0.0) {
            return Err(Error::Config("mismatch factors must be > 0".into()));
        }
        if !(self.noise.std >= 0.0 && self.noise.std.is_finite()) {
            return Err(Error::Config("noise.std must be >= 0".into()));
        }
        Ok(())
    }

    /// Machine seen by the simulated plant (nominal scaled by the mismatch factors).
    pub fn plant_params(&self) -> MotorParams {
        MotorParams {
            r_r: self.motor.r_r * self.mismatch.r_r_factor,
            r_s: self.motor.r_s * self.mismatch.r_s_factor,
            ..self.motor
        }
    }
}
