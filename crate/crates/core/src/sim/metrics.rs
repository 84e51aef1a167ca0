use serde::Serialize;

use super::scenario::Record;
use crate::error::{Error, Result};
use crate::lyapunov::{monitor_trajectory, StabilityClass};

/// Convergence band as a fraction of the largest speed reference.
pub const CONVERGENCE_BAND: f64 = 0.02;
/// Steady-state metrics are taken over this final fraction of the run.
pub const STEADY_FRACTION: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricsContext {
    /// Rotor resistance of the simulated plant, ohm.
    pub rr_true: f64,
    pub dt: f64,
    pub transient_window: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Metrics {
    /// RMS of `omega_hat - omega_true` over the final half, mechanical rad/s.
    pub speed_rms_error: f64,
    /// Largest `|omega_hat - omega_true|` over the final half.
    pub speed_max_error: f64,
    /// First time after which the speed error stays within 2 % of the largest
    /// reference; `None` if it is outside the band at the end of the run.
    pub convergence_time: Option<f64>,
    /// RMS rotor-flux estimation error magnitude over the final half, Wb.
    pub flux_rms_error: f64,
    /// RMS true rotor-flux magnitude over the same window, Wb.
    pub flux_rms_magnitude: f64,
    /// `|R_r_hat - R_r|` at the last sample, ohm.
    pub rr_final_error: f64,
    pub max_vdot_after_transient: Option<f64>,
    /// `None` when the run is too short for the Lyapunov monitor.
    pub stability_classification: Option<StabilityClass>,
}

fn rms(values: impl Iterator<Item = f64>) -> f64 {
    let (sum, n) = values.fold((0.0, 0usize), |(s, n), v| (s + v * v, n + 1));
    if n == 0 {
        0.0
    } else {
        (sum / n as f64).sqrt()
    }
}

pub fn metrics(records: &[Record], ctx: &MetricsContext) -> Result<Metrics> {
    if records.is_empty() {
        return Err(Error::InvalidInput("no records".into()));
    }
    let start = ((records.len() as f64) * (1.0 - STEADY_FRACTION)).floor() as usize;
    let tail = &records[start.min(records.len() - 1)..];
    let speed_err = |r: &Record| r.omega_hat - r.omega_true;
    let flux_err = |r: &Record| (r.psi_ra_hat - r.psi_ra).hypot(r.psi_rb_hat - r.psi_rb);

    let max_ref = records
        .iter()
        .map(|r| r.omega_ref.abs())
        .fold(0.0, f64::max);
    let band = CONVERGENCE_BAND * max_ref;
    let convergence_time = match records.iter().rposition(|r| speed_err(r).abs() > band) {
        None => Some(records[0].t),
        Some(k) if k + 1 < records.len() => Some(records[k + 1].t),
        Some(_) => None,
    };

    let v: Vec<f64> = records.iter().map(|r| r.v_lyap).collect();
    let report = monitor_trajectory(&v, ctx.dt, ctx.transient_window).ok();
    let last = records.last().expect("non-empty");

    Ok(Metrics {
        speed_rms_error: rms(tail.iter().map(speed_err)),
        speed_max_error: tail.iter().map(|r| speed_err(r).abs()).fold(0.0, f64::max),
        convergence_time,
        flux_rms_error: rms(tail.iter().map(flux_err)),
        flux_rms_magnitude: rms(tail.iter().map(|r| r.psi_ra.hypot(r.psi_rb))),
        rr_final_error: (last.rr_hat - ctx.rr_true).abs(),
        max_vdot_after_transient: report.as_ref().and_then(|r| r.max_vdot_after_transient),
        stability_classification: report.map(|r| r.classification),
    })
}
