//! Direct stator-field-oriented control.
//!
//! The control frame is aligned with the stator-flux vector
//! `psi_s = (L_m/L_r) psi_r + sigma L_s i_s`. A speed PI produces the torque
//! reference, a flux PI the d-axis current reference, and two current PIs
//! the d/q voltages, which are rotated back to the stationary frame and
//! clamped to the voltage limit.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::motor_model::{derived, MotorParams, MotorState};
use crate::observer::ObserverState;
use crate::transforms::{rotate_to_alpha_beta, rotate_to_dq, AlphaBetaPair, DqPair};

/// Lower bound on |psi_s| in the torque-to-current division, Wb.
pub const FLUX_FLOOR: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PiGains {
    pub kp: f64,
    pub ki: f64,
    /// Symmetric output limit.
    pub limit: f64,
}

/// PI controller with clamping anti-windup.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PiController {
    pub kp: f64,
    pub ki: f64,
    pub integrator: f64,
    pub output_limits: (f64, f64),
    pub anti_windup: bool,
}

impl PiController {
    pub fn new(kp: f64, ki: f64, output_limits: (f64, f64)) -> Result<Self> {
        if !(output_limits.0 < output_limits.1) {
            return Err(Error::Config(format!(
                "PI output limits must satisfy min < max, got {output_limits:?}"
            )));
        }
        if !(kp.is_finite() && ki.is_finite()) {
            return Err(Error::Config("PI gains must be finite".into()));
        }
        Ok(Self {
            kp,
            ki,
            integrator: 0.0,
            output_limits,
            anti_windup: true,
        })
    }

    pub fn from_gains(g: &PiGains) -> Result<Self> {
        Self::new(g.kp, g.ki, (-g.limit, g.limit))
    }

    pub fn step(&mut self, error: f64, dt: f64) -> f64 {
        let (lo, hi) = self.output_limits;
        let candidate = self.integrator + self.ki * error * dt;
        let raw = self.kp * error + candidate;
        let out = raw.clamp(lo, hi);
        // freeze the integrator while saturated in the direction of the error
        let winding = (raw > hi && error > 0.0) || (raw < lo && error < 0.0);
        if !(self.anti_windup && winding) {
            self.integrator = candidate;
        }
        if self.anti_windup {
            self.integrator = self.integrator.clamp(lo, hi);
        }
        out
    }

    /// Output the controller would produce for `error` without advancing state.
    pub fn peek(&self, error: f64) -> f64 {
        (self.kp * error + self.integrator).clamp(self.output_limits.0, self.output_limits.1)
    }

    pub fn reset(&mut self) {
        self.integrator = 0.0;
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ControllerConfig {
    pub speed_pi: PiGains,
    pub flux_pi: PiGains,
    pub id_pi: PiGains,
    pub iq_pi: PiGains,
    /// Stator-flux magnitude reference, Wb.
    pub psi_s_ref: f64,
    /// Magnitude limit on the commanded stator-voltage vector, V.
    pub voltage_limit: f64,
    /// d-axis pre-fluxing interval before the speed loop is released, s.
    pub preflux_time: f64,
}

impl Default for ControllerConfig {
    fn default() -> Self {
        Self {
            speed_pi: PiGains {
                kp: 2.5,
                ki: 25.0,
                limit: 30.0,
            },
            flux_pi: PiGains {
                kp: 30.0,
                ki: 3000.0,
                limit: 25.0,
            },
            id_pi: PiGains {
                kp: 21.0,
                ki: 4000.0,
                limit: 400.0,
            },
            iq_pi: PiGains {
                kp: 21.0,
                ki: 4000.0,
                limit: 400.0,
            },
            psi_s_ref: 0.9,
            voltage_limit: 400.0,
            preflux_time: 0.1,
        }
    }
}

impl ControllerConfig {
    pub fn validate(&self) -> Result<()> {
        for (name, g) in [
            ("speed_pi", &self.speed_pi),
            ("flux_pi", &self.flux_pi),
            ("id_pi", &self.id_pi),
            ("iq_pi", &self.iq_pi),
        ] {
            if !(g.limit > 0.0) || g.kp < 0.0 || g.ki < 0.0 {
                return Err(Error::Config(format!(
                    "{name}: gains must be >= 0 and limit > 0"
                )));
            }
        }
        if !(self.psi_s_ref > 0.0) {
            return Err(Error::Config("psi_s_ref must be > 0".into()));
        }
        if !(self.voltage_limit > 0.0) {
            return Err(Error::Config("voltage_limit must be > 0".into()));
        }
        if !(self.preflux_time >= 0.0) {
            return Err(Error::Config("preflux_time must be >= 0".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ControllerRefs {
    /// Mechanical speed reference, rad/s.
    pub omega_ref: f64,
    /// Stator-flux magnitude reference, Wb.
    pub psi_s_ref: f64,
}

/// Signals the loops close on. In sensored operation these come from the
/// plant; sensorless, from the observer (currents are always measured).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Feedback {
    /// Mechanical speed, rad/s.
    pub omega_m: f64,
    pub psi_s: AlphaBetaPair,
    pub currents: AlphaBetaPair,
}

impl Feedback {
    pub fn sensored(state: &MotorState, measured: AlphaBetaPair, params: &MotorParams) -> Self {
        Self {
            omega_m: state.omega_m,
            psi_s: stator_flux(
                AlphaBetaPair::new(state.psi_alpha, state.psi_beta),
                AlphaBetaPair::new(state.i_alpha, state.i_beta),
                params,
            ),
            currents: measured,
        }
    }

    pub fn sensorless(obs: &ObserverState, measured: AlphaBetaPair, params: &MotorParams) -> Self {
        Self {
            omega_m: obs.omega_hat / params.pole_pairs as f64,
            psi_s: stator_flux_from_estimates(obs, params),
            currents: measured,
        }
    }

    fn is_finite(&self) -> bool {
        [
            self.omega_m,
            self.psi_s.alpha,
            self.psi_s.beta,
            self.currents.alpha,
            self.currents.beta,
        ]
        .iter()
        .all(|v| v.is_finite())
    }
}

/// `psi_s = (L_m/L_r) psi_r + sigma L_s i_s`.
pub fn stator_flux(
    psi_r: AlphaBetaPair,
    i_s: AlphaBetaPair,
    params: &MotorParams,
) -> AlphaBetaPair {
    let sigma = 1.0 - params.l_m * params.l_m / (params.l_s * params.l_r);
    let kr = params.l_m / params.l_r;
    let sls = sigma * params.l_s;
    AlphaBetaPair::new(
        kr * psi_r.alpha + sls * i_s.alpha,
        kr * psi_r.beta + sls * i_s.beta,
    )
}

pub fn stator_flux_from_estimates(obs: &ObserverState, params: &MotorParams) -> AlphaBetaPair {
    stator_flux(
        AlphaBetaPair::new(obs.psi_alpha_hat, obs.psi_beta_hat),
        AlphaBetaPair::new(obs.i_alpha_hat, obs.i_beta_hat),
        params,
    )
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ControlOutput {
    pub v: AlphaBetaPair,
    pub torque_ref: f64,
    pub current_ref: DqPair,
    pub theta_s: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ControllerState {
    pub speed_pi: PiController,
    pub flux_pi: PiController,
    pub id_pi: PiController,
    pub iq_pi: PiController,
    pub theta_s: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dsfoc {
    cfg: ControllerConfig,
    pole_pairs: f64,
    elapsed: f64,
    state: ControllerState,
}

impl Dsfoc {
    pub fn new(cfg: ControllerConfig, params: &MotorParams) -> Result<Self> {
        cfg.validate()?;
        derived(params)?;
        let state = ControllerState {
            speed_pi: PiController::from_gains(&cfg.speed_pi)?,
            flux_pi: PiController::from_gains(&cfg.flux_pi)?,
            id_pi: PiController::from_gains(&cfg.id_pi)?,
            iq_pi: PiController::from_gains(&cfg.iq_pi)?,
            theta_s: 0.0,
        };
        Ok(Self {
            cfg,
            pole_pairs: params.pole_pairs as f64,
            elapsed: 0.0,
            state,
        })
    }

    pub fn config(&self) -> &ControllerConfig {
        &self.cfg
    }

    pub fn state(&self) -> &ControllerState {
        &self.state
    }

    pub fn state_mut(&mut self) -> &mut ControllerState {
        &mut self.state
    }

    pub fn control_step(
        &mut self,
        refs: &ControllerRefs,
        fb: &Feedback,
        dt: f64,
    ) -> Result<ControlOutput> {
        if !(dt > 0.0) {
            return Err(Error::ControllerFault(format!("dt must be > 0, got {dt}")));
        }
        if !fb.is_finite() || !refs.omega_ref.is_finite() || !refs.psi_s_ref.is_finite() {
            return Err(Error::ControllerFault(format!(
                "non-finite controller input: refs {refs:?}, feedback {fb:?}"
            )));
        }
        let st = &mut self.state;
        let flux_mag = fb.psi_s.norm();
        let theta_s = if flux_mag > 0.0 {
            fb.psi_s.angle()
        } else {
            st.theta_s
        };
        st.theta_s = theta_s;
        let i_dq = rotate_to_dq(fb.currents, theta_s);

        let torque_ref = if self.elapsed < self.cfg.preflux_time {
            0.0
        } else {
            st.speed_pi.step(refs.omega_ref - fb.omega_m, dt)
        };
        let iq_ref = torque_ref / (1.5 * self.pole_pairs * flux_mag.max(FLUX_FLOOR));
        let id_ref = st.flux_pi.step(refs.psi_s_ref - flux_mag, dt);

        let v_d = st.id_pi.step(id_ref - i_dq.d, dt);
        let v_q = st.iq_pi.step(iq_ref - i_dq.q, dt);
        let mut v = rotate_to_alpha_beta(DqPair::new(v_d, v_q), theta_s);
        let mag = v.norm();
        if mag > self.cfg.voltage_limit {
            let s = self.cfg.voltage_limit / mag;
            v = AlphaBetaPair::new(v.alpha * s, v.beta * s);
        }
        self.elapsed += dt;
        if !(v.alpha.is_finite() && v.beta.is_finite()) {
            return Err(Error::ControllerFault("non-finite voltage command".into()));
        }
        Ok(ControlOutput {
            v,
            torque_ref,
            current_ref: DqPair::new(id_ref, iq_ref),
            theta_s,
        })
    }
}
