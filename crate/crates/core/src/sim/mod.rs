//! Scenario configuration, the coupled plant/observer/controller run loop,
//! metrics and file output.

mod config;
mod metrics;
mod noise;
mod output;
mod scenario;
mod sweep;

pub use crate::integrate::rk4_step as integrate_step;
pub use config::{
    FeedbackMode, Mismatch, NoiseConfig, ObserverSection, Profiles, ScenarioConfig, SimSettings,
    SCHEMA_VERSION,
};
pub use metrics::{metrics, Metrics, MetricsContext, CONVERGENCE_BAND, STEADY_FRACTION};
pub use noise::NoiseSource;
pub use output::{write_metrics_json, write_run_csv, CSV_COLUMNS};
pub use scenario::{run_scenario, Failure, Record, RunResult};
pub use sweep::{set_path, sweep, with_value, SweepPoint};
