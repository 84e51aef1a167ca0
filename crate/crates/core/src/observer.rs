//! Adaptive sliding mode observer for stator currents, rotor flux, rotor
//! speed and rotor resistance.
//!
//! The observer is a copy of the current/flux model evaluated at the speed
//! and resistance estimates. The current error `e = i_hat - i` drives a
//! switching term `v = M sat(e / phi)` that is subtracted from the current
//! equations and enters the flux equations through an independent gain
//! matrix `L`. Speed follows a PI law on the flux/current-error cross
//! product; rotor resistance follows a gradient law on the current error
//! projected onto the rotor current direction.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::motor_model::{current_flux_rates, derived, DerivedParams, MotorParams, MotorState};

/// Limits applied to the rotor-resistance estimate, as multiples of nominal.
pub const RR_MIN_FACTOR: f64 = 0.2;
pub const RR_MAX_FACTOR: f64 = 5.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ObserverGains {
    /// Flux correction gain, maps the switching vector into flux rates (H).
    #[serde(rename = "L")]
    pub flux_gain: [[f64; 2]; 2],
    /// Switching magnitude, A/s.
    #[serde(rename = "M")]
    pub switching_magnitude: f64,
    /// Boundary-layer half-width, A. Zero selects the pure sign law.
    #[serde(rename = "phi")]
    pub boundary_layer: f64,
    pub k_omega_p: f64,
    pub k_omega_i: f64,
    #[serde(rename = "k_R")]
    pub k_r: f64,
    #[serde(rename = "P_weight")]
    pub p_weight: [[f64; 4]; 4],
    pub d_weight: f64,
    /// Weight of the rotor-resistance error in the Lyapunov function.
    pub alpha_weight: f64,
}

impl Default for ObserverGains {
    fn default() -> Self {
        Self {
            flux_gain: [[0.0, 0.0], [0.0, 0.0]],
            switching_magnitude: 50.0,
            boundary_layer: 0.5,
            k_omega_p: 20.0,
            k_omega_i: 1_000_000.0,
            k_r: 2.0,
            p_weight: identity4(),
            d_weight: 1e-3,
            alpha_weight: 1e-3,
        }
    }
}

pub(crate) fn identity4() -> [[f64; 4]; 4] {
    let mut m = [[0.0; 4]; 4];
    for (i, row) in m.iter_mut().enumerate() {
        row[i] = 1.0;
    }
    m
}

impl ObserverGains {
    pub fn validate(&self) -> Result<()> {
        let scalars = [
            ("M", self.switching_magnitude),
            ("phi", self.boundary_layer),
            ("k_omega_p", self.k_omega_p),
            ("k_omega_i", self.k_omega_i),
            ("k_R", self.k_r),
            ("d_weight", self.d_weight),
            ("alpha_weight", self.alpha_weight),
        ];
        for (name, v) in scalars {
            if !v.is_finite() {
                return Err(Error::Config(format!("observer {name} is not finite")));
            }
        }
        if self.switching_magnitude <= 0.0 {
            return Err(Error::Config("observer M must be > 0".into()));
        }
        if self.boundary_layer < 0.0 {
            return Err(Error::Config("observer phi must be >= 0".into()));
        }
        if self.d_weight <= 0.0 || self.alpha_weight <= 0.0 {
            return Err(Error::Config("Lyapunov weights must be > 0".into()));
        }
        if self.k_omega_p < 0.0 || self.k_omega_i < 0.0 || self.k_r < 0.0 {
            return Err(Error::Config("adaptation gains must be >= 0".into()));
        }
        if self.flux_gain.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::Config("observer L is not finite".into()));
        }
        let p = nalgebra::DMatrix::from_fn(4, 4, |r, c| self.p_weight[r][c]);
        match crate::lyapunov::is_positive_definite(&p) {
            Ok(true) => Ok(()),
            Ok(false) => Err(Error::Config("P_weight is not positive definite".into())),
            Err(e) => Err(Error::Config(format!("P_weight: {e}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ObserverState {
    pub i_alpha_hat: f64,
    pub i_beta_hat: f64,
    pub psi_alpha_hat: f64,
    pub psi_beta_hat: f64,
    /// Estimated electrical rotor speed, rad/s.
    pub omega_hat: f64,
    pub r_r_hat: f64,
    /// Integral part of the speed law, rad/s (the integrator carries `k_omega_i` already).
    pub speed_integrator: f64,
}

impl ObserverState {
    /// Observer started at rest with nominal rotor resistance.
    pub fn at_rest(params: &MotorParams) -> Self {
        Self {
            r_r_hat: params.r_r,
            ..Self::default()
        }
    }

    /// Estimates equal to a plant state (used for equilibrium checks).
    pub fn matching(state: &MotorState, params: &MotorParams) -> Self {
        let omega_e = params.electrical_speed(state.omega_m);
        Self {
            i_alpha_hat: state.i_alpha,
            i_beta_hat: state.i_beta,
            psi_alpha_hat: state.psi_alpha,
            psi_beta_hat: state.psi_beta,
            omega_hat: omega_e,
            r_r_hat: params.r_r,
            speed_integrator: omega_e,
        }
    }

    pub fn is_finite(&self) -> bool {
        [
            self.i_alpha_hat,
            self.i_beta_hat,
            self.psi_alpha_hat,
            self.psi_beta_hat,
            self.omega_hat,
            self.r_r_hat,
            self.speed_integrator,
        ]
        .iter()
        .all(|v| v.is_finite())
    }

    /// Current estimation error `i_hat - i`.
    pub fn current_error(&self, measured: (f64, f64)) -> (f64, f64) {
        (self.i_alpha_hat - measured.0, self.i_beta_hat - measured.1)
    }
}

/// Estimation errors in the stationary frame, estimate minus truth.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ErrorVector {
    pub e_id: f64,
    pub e_iq: f64,
    pub e_psi_d: f64,
    pub e_psi_q: f64,
}

impl ErrorVector {
    pub fn between(obs: &ObserverState, truth: &MotorState) -> Self {
        Self {
            e_id: obs.i_alpha_hat - truth.i_alpha,
            e_iq: obs.i_beta_hat - truth.i_beta,
            e_psi_d: obs.psi_alpha_hat - truth.psi_alpha,
            e_psi_q: obs.psi_beta_hat - truth.psi_beta,
        }
    }

    pub fn as_array(&self) -> [f64; 4] {
        [self.e_id, self.e_iq, self.e_psi_d, self.e_psi_q]
    }
}

/// `M sgn(e)` for `phi == 0` (with `sgn(0) = 0`), otherwise `M sat(e / phi)`.
pub fn switching_term(error: f64, magnitude: f64, boundary_layer: f64) -> f64 {
    if boundary_layer > 0.0 {
        magnitude * (error / boundary_layer).clamp(-1.0, 1.0)
    } else if error > 0.0 {
        magnitude
    } else if error < 0.0 {
        -magnitude
    } else {
        0.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpeedAdaptation {
    /// Cross product `e_beta psi_alpha_hat - e_alpha psi_beta_hat`.
    pub error_signal: f64,
    /// Rate of the integral term, rad/s^2.
    pub integrator_rate: f64,
    /// Resulting speed estimate `k_p * error_signal + integrator`, rad/s.
    pub omega_hat: f64,
}

pub fn speed_adaptation_rate(
    obs: &ObserverState,
    current_error: (f64, f64),
    gains: &ObserverGains,
) -> SpeedAdaptation {
    let eps = current_error.1 * obs.psi_alpha_hat - current_error.0 * obs.psi_beta_hat;
    SpeedAdaptation {
        error_signal: eps,
        integrator_rate: gains.k_omega_i * eps,
        omega_hat: gains.k_omega_p * eps + obs.speed_integrator,
    }
}

/// Rotor-resistance estimate rate, Ω/s.
///
/// `nominal` supplies `L_m` and the nominal `R_r` that anchors the clamp
/// range. At either clamp bound, rates pushing further out are zeroed.
pub fn resistance_adaptation_rate(
    obs: &ObserverState,
    current_error: (f64, f64),
    nominal: &MotorParams,
    gains: &ObserverGains,
) -> f64 {
    let ra = obs.i_alpha_hat - obs.psi_alpha_hat / nominal.l_m;
    let rb = obs.i_beta_hat - obs.psi_beta_hat / nominal.l_m;
    let rate = gains.k_r * (current_error.0 * ra + current_error.1 * rb);
    let (lo, hi) = resistance_bounds(nominal);
    if (obs.r_r_hat <= lo && rate < 0.0) || (obs.r_r_hat >= hi && rate > 0.0) {
        0.0
    } else {
        rate
    }
}

pub fn resistance_bounds(nominal: &MotorParams) -> (f64, f64) {
    (RR_MIN_FACTOR * nominal.r_r, RR_MAX_FACTOR * nominal.r_r)
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ObserverRates {
    pub di_alpha_hat: f64,
    pub di_beta_hat: f64,
    pub dpsi_alpha_hat: f64,
    pub dpsi_beta_hat: f64,
    pub dspeed_integrator: f64,
    pub dr_r_hat: f64,
    /// Speed estimate at which the rates were evaluated.
    pub omega_hat: f64,
}

pub fn observer_derivatives(
    obs: &ObserverState,
    measured: (f64, f64),
    v: (f64, f64),
    nominal: &MotorParams,
    gains: &ObserverGains,
) -> Result<ObserverRates> {
    if !(measured.0.is_finite() && measured.1.is_finite() && v.0.is_finite() && v.1.is_finite()) {
        return Err(Error::InvalidInput(
            "non-finite observer measurement".into(),
        ));
    }
    let dp = derived_at(nominal, obs.r_r_hat)?;
    Ok(rates_with(obs, measured, v, nominal, &dp, gains))
}

/// Derived coefficients with the rotor resistance replaced by an estimate.
pub(crate) fn derived_at(nominal: &MotorParams, r_r_hat: f64) -> Result<DerivedParams> {
    derived(&nominal.with_rotor_resistance(r_r_hat))
}

pub(crate) fn rates_with(
    obs: &ObserverState,
    measured: (f64, f64),
    v: (f64, f64),
    nominal: &MotorParams,
    dp_hat: &DerivedParams,
    gains: &ObserverGains,
) -> ObserverRates {
    let e = obs.current_error(measured);
    let speed = speed_adaptation_rate(obs, e, gains);
    let model = current_flux_rates(
        (obs.i_alpha_hat, obs.i_beta_hat),
        (obs.psi_alpha_hat, obs.psi_beta_hat),
        speed.omega_hat,
        v,
        nominal,
        dp_hat,
    );
    let m = gains.switching_magnitude;
    let phi = gains.boundary_layer;
    let va = switching_term(e.0, m, phi);
    let vb = switching_term(e.1, m, phi);
    let l = &gains.flux_gain;
    ObserverRates {
        di_alpha_hat: model.di_alpha - va,
        di_beta_hat: model.di_beta - vb,
        dpsi_alpha_hat: model.dpsi_alpha + l[0][0] * va + l[0][1] * vb,
        dpsi_beta_hat: model.dpsi_beta + l[1][0] * va + l[1][1] * vb,
        dspeed_integrator: speed.integrator_rate,
        dr_r_hat: resistance_adaptation_rate(obs, e, nominal, gains),
        omega_hat: speed.omega_hat,
    }
}

/// An observer instance: nominal machine model, gains and current estimate.
#[derive(Debug, Clone)]
pub struct Asmo {
    nominal: MotorParams,
    gains: ObserverGains,
    state: ObserverState,
}

impl Asmo {
    pub fn new(nominal: MotorParams, gains: ObserverGains) -> Result<Self> {
        nominal.validate()?;
        gains.validate()?;
        Ok(Self {
            state: ObserverState::at_rest(&nominal),
            nominal,
            gains,
        })
    }

    /// Start with the speed estimate offset from zero, rad/s electrical.
    pub fn with_speed_offset(mut self, offset: f64) -> Self {
        self.state.speed_integrator = offset;
        self.state.omega_hat = offset;
        self
    }

    pub fn nominal(&self) -> &MotorParams {
        &self.nominal
    }

    pub fn gains(&self) -> &ObserverGains {
        &self.gains
    }

    pub fn state(&self) -> &ObserverState {
        &self.state
    }

    pub fn set_state(&mut self, state: ObserverState) {
        self.state = state;
    }

    pub fn rates(
        &self,
        obs: &ObserverState,
        measured: (f64, f64),
        v: (f64, f64),
    ) -> Result<ObserverRates> {
        observer_derivatives(obs, measured, v, &self.nominal, &self.gains)
    }

    /// Rotor-resistance clamp applied after each integration step.
    pub fn clamp(&self, obs: &mut ObserverState) {
        let (lo, hi) = resistance_bounds(&self.nominal);
        obs.r_r_hat = obs.r_r_hat.clamp(lo, hi);
    }
}
