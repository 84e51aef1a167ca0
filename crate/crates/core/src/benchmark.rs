//! Second-order test system `G(s) = 1/(s^2 + 5s + 6)` used to exercise the
//! sliding-mode machinery: state feedback, the same loop under a matched
//! sinusoidal disturbance, and the disturbed loop with a sliding-mode term.
//!
//! Realization is controllable canonical, `A = [[0, 1], [-6, -5]]`,
//! `B = [0, 1]^T`, `y = x1`.

use nalgebra::{Complex, Matrix2};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::integrate::rk4_step;
use crate::observer::switching_term;

pub const PLANT_A: [[f64; 2]; 2] = [[0.0, 1.0], [-6.0, -5.0]];
pub const PLANT_B: [f64; 2] = [0.0, 1.0];

/// Mode-1 terminal-state threshold; mode 3 must stay within five times it.
pub const SETTLED_NORM: f64 = 1e-3;
pub const SMC_BOUND_FACTOR: f64 = 5.0;
/// Minimum steady oscillation amplitude that counts as "oscillating".
pub const OSCILLATION_AMPLITUDE: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SecondOrderPlant {
    pub a: [[f64; 2]; 2],
    pub b: [f64; 2],
    pub x: [f64; 2],
}

impl SecondOrderPlant {
    pub fn new(x0: [f64; 2]) -> Self {
        Self {
            a: PLANT_A,
            b: PLANT_B,
            x: x0,
        }
    }

    pub fn output(&self) -> f64 {
        self.x[0]
    }

    pub fn eigenvalues(&self) -> Vec<Complex<f64>> {
        let m = Matrix2::new(self.a[0][0], self.a[0][1], self.a[1][0], self.a[1][1]);
        m.complex_eigenvalues().iter().cloned().collect()
    }
}

/// One fixed step of `x' = A x + B (u + d)` with `u` and `d` held.
pub fn plant_step(x: [f64; 2], u: f64, d: f64, dt: f64) -> Result<[f64; 2]> {
    if !(dt > 0.0) {
        return Err(Error::InvalidInput(format!("dt must be > 0, got {dt}")));
    }
    let a = PLANT_A;
    let b = PLANT_B;
    rk4_step(
        |s: &[f64; 2]| {
            Ok([
                a[0][0] * s[0] + a[0][1] * s[1] + b[0] * (u + d),
                a[1][0] * s[0] + a[1][1] * s[1] + b[1] * (u + d),
            ])
        },
        &x,
        dt,
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SmcController {
    /// Surface slope, `s = c x1 + x2`.
    pub c: f64,
    pub k_smc: f64,
    pub phi_smc: f64,
}

impl SmcController {
    pub fn surface(&self, x: [f64; 2]) -> f64 {
        self.c * x[0] + x[1]
    }

    pub fn control(&self, x: [f64; 2]) -> f64 {
        -switching_term(self.surface(x), self.k_smc, self.phi_smc)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DemoMode {
    StateFeedback,
    Disturbed,
    DisturbedWithSmc,
}

impl std::str::FromStr for DemoMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "1" | "state-feedback" => Ok(DemoMode::StateFeedback),
            "2" | "disturbed" => Ok(DemoMode::Disturbed),
            "3" | "disturbed-with-smc" => Ok(DemoMode::DisturbedWithSmc),
            other => Err(Error::UnknownMode(other.to_string())),
        }
    }
}

impl DemoMode {
    pub fn number(&self) -> u8 {
        match self {
            DemoMode::StateFeedback => 1,
            DemoMode::Disturbed => 2,
            DemoMode::DisturbedWithSmc => 3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DemoConfig {
    pub duration: f64,
    pub dt: f64,
    pub x0: [f64; 2],
    /// State-feedback gains; the defaults place the closed-loop poles at -4 and -5.
    pub feedback: [f64; 2],
    pub disturbance_amplitude: f64,
    /// rad/s
    pub disturbance_frequency: f64,
    pub smc: SmcController,
}

impl Default for DemoConfig {
    fn default() -> Self {
        Self {
            duration: 10.0,
            dt: 1e-3,
            x0: [1.0, 0.0],
            feedback: [14.0, 4.0],
            disturbance_amplitude: 2.0,
            disturbance_frequency: 5.0,
            smc: SmcController {
                c: 5.0,
                k_smc: 5.0,
                phi_smc: 0.005,
            },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DemoSample {
    pub t: f64,
    pub x1: f64,
    pub x2: f64,
    pub u: f64,
    pub d: f64,
    pub s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DemoVerdict {
    pub mode: u8,
    pub pass: bool,
    pub terminal_norm: f64,
    /// Half peak-to-peak of x1 over the second half of the run.
    pub steady_amplitude: f64,
    /// Largest state norm over the second half of the run.
    pub ultimate_bound: f64,
    /// RMS of x1 over the second half of the run.
    pub rms_x1: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DemoResult {
    pub samples: Vec<DemoSample>,
    pub verdict: DemoVerdict,
}

pub fn run_demo(mode: DemoMode, cfg: &DemoConfig) -> Result<DemoResult> {
    if !(cfg.dt > 0.0) || !(cfg.duration >= cfg.dt) {
        return Err(Error::InvalidInput(
            "demo needs dt > 0 and duration >= dt".into(),
        ));
    }
    let steps = (cfg.duration / cfg.dt).round() as usize;
    let mut x = cfg.x0;
    let mut samples = Vec::with_capacity(steps + 1);
    for n in 0..=steps {
        let t = n as f64 * cfg.dt;
        let d = match mode {
            DemoMode::StateFeedback => 0.0,
            _ => cfg.disturbance_amplitude * (cfg.disturbance_frequency * t).sin(),
        };
        let mut u = -(cfg.feedback[0] * x[0] + cfg.feedback[1] * x[1]);
        if mode == DemoMode::DisturbedWithSmc {
            u += cfg.smc.control(x);
        }
        samples.push(DemoSample {
            t,
            x1: x[0],
            x2: x[1],
            u,
            d,
            s: cfg.smc.surface(x),
        });
        if n < steps {
            x = plant_step(x, u, d, cfg.dt)?;
        }
    }

    let tail = &samples[samples.len() / 2..];
    let (lo, hi) = tail
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), s| {
            (lo.min(s.x1), hi.max(s.x1))
        });
    let steady_amplitude = 0.5 * (hi - lo);
    let ultimate_bound = tail.iter().map(|s| s.x1.hypot(s.x2)).fold(0.0, f64::max);
    let rms_x1 = (tail.iter().map(|s| s.x1 * s.x1).sum::<f64>() / tail.len() as f64).sqrt();
    let last = samples.last().expect("at least one sample");
    let terminal_norm = last.x1.hypot(last.x2);
    let pass = match mode {
        DemoMode::StateFeedback => terminal_norm < SETTLED_NORM,
        DemoMode::Disturbed => steady_amplitude > OSCILLATION_AMPLITUDE,
        DemoMode::DisturbedWithSmc => ultimate_bound < SMC_BOUND_FACTOR * SETTLED_NORM,
    };
    Ok(DemoResult {
        samples,
        verdict: DemoVerdict {
            mode: mode.number(),
            pass,
            terminal_norm,
            steady_amplitude,
            ultimate_bound,
            rms_x1,
        },
    })
}

pub fn write_demo_csv<W: std::io::Write>(samples: &[DemoSample], mut w: W) -> Result<()> {
    writeln!(w, "t,x1,x2,u,d,s")?;
    for s in samples {
        writeln!(w, "{},{},{},{},{},{}", s.t, s.x1, s.x2, s.u, s.d, s.s)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn equilibrium_holds() {
        assert_eq!(plant_step([0.0, 0.0], 0.0, 0.0, 1e-3).unwrap(), [0.0, 0.0]);
        assert!(plant_step([0.0, 0.0], 0.0, 0.0, 0.0).is_err());
    }

    #[test]
    fn poles_factor() {
        let mut eig: Vec<f64> = SecondOrderPlant::new([0.0, 0.0])
            .eigenvalues()
            .iter()
            .map(|c| {
                assert!(c.im.abs() < 1e-12);
                c.re
            })
            .collect();
        eig.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert!((eig[0] + 3.0).abs() < 1e-12 && (eig[1] + 2.0).abs() < 1e-12);
    }

    #[test]
    fn dc_gain() {
        let mut x = [0.0, 0.0];
        for _ in 0..20_000 {
            x = plant_step(x, 1.0, 0.0, 1e-3).unwrap();
        }
        assert!((x[0] - 1.0 / 6.0).abs() < 1e-9);
    }

    #[test]
    fn parse_modes() {
        assert_eq!("1".parse::<DemoMode>().unwrap(), DemoMode::StateFeedback);
        assert_eq!("3".parse::<DemoMode>().unwrap(), DemoMode::DisturbedWithSmc);
        assert!(matches!(
            "4".parse::<DemoMode>(),
            Err(Error::UnknownMode(_))
        ));
    }

    #[test]
    fn feedback_closes_poles_at_four_and_five() {
        let k = DemoConfig::default().feedback;
        // characteristic polynomial s^2 + (5 + k2) s + (6 + k1) = (s + 4)(s + 5)
        assert_eq!(5.0 + k[1], 9.0);
        assert_eq!(6.0 + k[0], 20.0);
    }
}
