//! Squirrel-cage induction machine in the stationary frame, with stator
//! currents and rotor flux linkages as electrical states.
//!
//! Linear magnetics, single magnetizing inductance, no iron losses. The
//! electrical speed is `pole_pairs * omega_m`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MotorParams {
    /// Stator resistance, ohm.
    #[serde(rename = "R_s")]
    pub r_s: f64,
    /// Rotor resistance, ohm.
    #[serde(rename = "R_r")]
    pub r_r: f64,
    /// Stator inductance, henry.
    #[serde(rename = "L_s")]
    pub l_s: f64,
    /// Rotor inductance, henry.
    #[serde(rename = "L_r")]
    pub l_r: f64,
    /// Magnetizing inductance, henry.
    #[serde(rename = "L_m")]
    pub l_m: f64,
    #[serde(rename = "P")]
    pub pole_pairs: u32,
    /// Rotor inertia, kg m^2.
    #[serde(rename = "J")]
    pub inertia: f64,
    /// Viscous friction, N m s/rad.
    #[serde(rename = "B")]
    pub friction: f64,
}

impl Default for MotorParams {
    /// Electrical constants of the reference machine. Pole pairs, inertia
    /// and friction are not given for it and default to 2, 0.05 and 0.005.
    fn default() -> Self {
        Self {
            r_s: 1.54,
            r_r: 1.294,
            l_s: 0.1004,
            l_r: 0.0969,
            l_m: 0.0915,
            pole_pairs: 2,
            inertia: 0.05,
            friction: 0.005,
        }
    }
}

impl MotorParams {
    pub fn validate(&self) -> Result<()> {
        let named = [
            ("R_s", self.r_s),
            ("R_r", self.r_r),
            ("L_s", self.l_s),
            ("L_r", self.l_r),
            ("L_m", self.l_m),
            ("J", self.inertia),
            ("B", self.friction),
        ];
        for (name, v) in named {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::ParameterConsistency(format!(
                    "{name} must be finite and > 0, got {v}"
                )));
            }
        }
        if self.pole_pairs == 0 {
            return Err(Error::ParameterConsistency("P must be >= 1".into()));
        }
        if self.l_m * self.l_m >= self.l_s * self.l_r {
            return Err(Error::ParameterConsistency(format!(
                "L_m^2 = {} must be below L_s*L_r = {}",
                self.l_m * self.l_m,
                self.l_s * self.l_r
            )));
        }
        Ok(())
    }

    /// Same machine with the rotor resistance replaced.
    pub fn with_rotor_resistance(&self, r_r: f64) -> Self {
        Self { r_r, ..*self }
    }

    pub fn electrical_speed(&self, omega_m: f64) -> f64 {
        self.pole_pairs as f64 * omega_m
    }
}

/// Coefficients of the current/flux model that follow from [`MotorParams`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DerivedParams {
    /// Leakage coefficient `1 - L_m^2 / (L_s L_r)`.
    pub sigma: f64,
    /// Rotor time constant `L_r / R_r`, seconds.
    pub tau_r: f64,
    /// Flux coupling gain `L_m / (sigma L_s L_r)`.
    pub k: f64,
    /// Current decay coefficient `R_s/(sigma L_s) + R_r L_m^2/(sigma L_s L_r^2)`.
    pub gamma: f64,
}

impl DerivedParams {
    /// `sigma * L_s`, the transient stator inductance.
    pub fn sigma_ls(&self, params: &MotorParams) -> f64 {
        self.sigma * params.l_s
    }
}

pub fn derived(params: &MotorParams) -> Result<DerivedParams> {
    let sigma = 1.0 - params.l_m * params.l_m / (params.l_s * params.l_r);
    if !(sigma > 0.0 && sigma < 1.0) {
        return Err(Error::ParameterConsistency(format!(
            "leakage coefficient sigma = {sigma} outside (0, 1)"
        )));
    }
    if !(params.r_r > 0.0 && params.l_r > 0.0 && params.l_s > 0.0) {
        return Err(Error::ParameterConsistency(
            "resistances and inductances must be positive".into(),
        ));
    }
    let sigma_ls = sigma * params.l_s;
    Ok(DerivedParams {
        sigma,
        tau_r: params.l_r / params.r_r,
        k: params.l_m / (sigma_ls * params.l_r),
        gamma: params.r_s / sigma_ls
            + params.r_r * params.l_m * params.l_m / (sigma_ls * params.l_r * params.l_r),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct MotorState {
    pub i_alpha: f64,
    pub i_beta: f64,
    pub psi_alpha: f64,
    pub psi_beta: f64,
    /// Mechanical speed, rad/s.
    pub omega_m: f64,
    /// Mechanical angle, rad. Unwrapped internally; see [`MotorState::wrapped_angle`].
    pub theta_m: f64,
}

impl MotorState {
    pub fn is_finite(&self) -> bool {
        [
            self.i_alpha,
            self.i_beta,
            self.psi_alpha,
            self.psi_beta,
            self.omega_m,
            self.theta_m,
        ]
        .iter()
        .all(|v| v.is_finite())
    }

    pub fn wrapped_angle(&self) -> f64 {
        self.theta_m.rem_euclid(std::f64::consts::TAU)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct MotorInputs {
    pub v_alpha: f64,
    pub v_beta: f64,
    /// Load torque, N m.
    pub load_torque: f64,
}

/// Time derivatives of the electrical states.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ElectricalRates {
    pub di_alpha: f64,
    pub di_beta: f64,
    pub dpsi_alpha: f64,
    pub dpsi_beta: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct MechanicalRates {
    pub domega_m: f64,
    pub dtheta_m: f64,
}

/// Model right-hand side for given currents, fluxes and electrical speed.
/// Shared by the plant and the observer (which evaluates it at its own
/// speed and resistance estimates).
#[inline]
pub(crate) fn current_flux_rates(
    i: (f64, f64),
    psi: (f64, f64),
    omega_e: f64,
    v: (f64, f64),
    params: &MotorParams,
    dp: &DerivedParams,
) -> ElectricalRates {
    let inv_tau = 1.0 / dp.tau_r;
    let inv_sls = 1.0 / dp.sigma_ls(params);
    ElectricalRates {
        di_alpha: -dp.gamma * i.0 + dp.k * (psi.0 * inv_tau + omega_e * psi.1) + v.0 * inv_sls,
        di_beta: -dp.gamma * i.1 + dp.k * (psi.1 * inv_tau - omega_e * psi.0) + v.1 * inv_sls,
        dpsi_alpha: params.l_m * inv_tau * i.0 - psi.0 * inv_tau - omega_e * psi.1,
        dpsi_beta: params.l_m * inv_tau * i.1 - psi.1 * inv_tau + omega_e * psi.0,
    }
}

pub fn electrical_derivatives(
    state: &MotorState,
    inputs: &MotorInputs,
    params: &MotorParams,
    dp: &DerivedParams,
) -> Result<ElectricalRates> {
    if !state.is_finite() {
        return Err(Error::InvalidState(format!(
            "non-finite motor state {state:?}"
        )));
    }
    if !(inputs.v_alpha.is_finite() && inputs.v_beta.is_finite()) {
        return Err(Error::InvalidInput("non-finite stator voltage".into()));
    }
    Ok(current_flux_rates(
        (state.i_alpha, state.i_beta),
        (state.psi_alpha, state.psi_beta),
        params.electrical_speed(state.omega_m),
        (inputs.v_alpha, inputs.v_beta),
        params,
        dp,
    ))
}

/// Electromagnetic torque `(3/2) P (L_m/L_r) (psi_alpha i_beta - psi_beta i_alpha)`.
pub fn torque(state: &MotorState, params: &MotorParams) -> f64 {
    1.5 * params.pole_pairs as f64
        * (params.l_m / params.l_r)
        * (state.psi_alpha * state.i_beta - state.psi_beta * state.i_alpha)
}

pub fn mechanical_derivative(
    state: &MotorState,
    electromagnetic_torque: f64,
    load_torque: f64,
    params: &MotorParams,
) -> MechanicalRates {
    MechanicalRates {
        domega_m: (electromagnetic_torque - load_torque - params.friction * state.omega_m)
            / params.inertia,
        dtheta_m: state.omega_m,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn nominal() -> (MotorParams, DerivedParams) {
        let p = MotorParams::default();
        let dp = derived(&p).unwrap();
        (p, dp)
    }

    #[test]
    fn derived_reference_machine() {
        let (_, dp) = nominal();
        // hand arithmetic: 1 - 0.0915^2/(0.1004*0.0969), 0.0969/1.294
        let sigma = 1.0 - 0.008_372_25 / 0.009_728_76;
        assert!((dp.sigma - sigma).abs() < 1e-12);
        assert!((dp.sigma - 0.1394).abs() < 5e-4);
        assert!((dp.tau_r - 0.0749).abs() < 5e-4);
    }

    #[test]
    fn derived_weak_coupling_limit() {
        let p = MotorParams {
            l_m: 1e-9,
            ..MotorParams::default()
        };
        let dp = derived(&p).unwrap();
        assert!((dp.sigma - 1.0).abs() < 1e-12);
        assert!(dp.k.abs() < 1e-6);
    }

    #[test]
    fn derived_rejects_perfect_coupling() {
        let p = MotorParams {
            l_s: 0.1,
            l_r: 0.1,
            l_m: 0.1,
            ..MotorParams::default()
        };
        assert!(matches!(derived(&p), Err(Error::ParameterConsistency(_))));
        assert!(p.validate().is_err());
    }

    #[test]
    fn validate_rejects_nonpositive() {
        let p = MotorParams {
            inertia: 0.0,
            ..MotorParams::default()
        };
        assert!(p.validate().is_err());
        let p = MotorParams {
            pole_pairs: 0,
            ..MotorParams::default()
        };
        assert!(p.validate().is_err());
        assert!(MotorParams::default().validate().is_ok());
    }

    #[test]
    fn equilibrium_at_origin() {
        let (p, dp) = nominal();
        let r = electrical_derivatives(&MotorState::default(), &MotorInputs::default(), &p, &dp)
            .unwrap();
        assert_eq!(r, ElectricalRates::default());
    }

    #[test]
    fn unit_voltage_step_response() {
        let (p, dp) = nominal();
        let inputs = MotorInputs {
            v_alpha: 1.0,
            ..MotorInputs::default()
        };
        let r = electrical_derivatives(&MotorState::default(), &inputs, &p, &dp).unwrap();
        let expected = 1.0 / (dp.sigma * 0.1004);
        assert!((r.di_alpha - expected).abs() < 1e-9);
        assert!((r.di_alpha - 71.4).abs() < 0.1);
        assert_eq!((r.di_beta, r.dpsi_alpha, r.dpsi_beta), (0.0, 0.0, 0.0));
    }

    #[test]
    fn flux_equilibrium_locked_rotor() {
        let (p, dp) = nominal();
        let state = MotorState {
            i_alpha: 1.0,
            psi_alpha: 0.0915,
            ..MotorState::default()
        };
        let r = electrical_derivatives(&state, &MotorInputs::default(), &p, &dp).unwrap();
        assert!(r.dpsi_alpha.abs() < 1e-12);
        assert!(r.dpsi_beta.abs() < 1e-12);
    }

    #[test]
    fn non_finite_state_rejected() {
        let (p, dp) = nominal();
        let state = MotorState {
            psi_beta: f64::NAN,
            ..MotorState::default()
        };
        assert!(matches!(
            electrical_derivatives(&state, &MotorInputs::default(), &p, &dp),
            Err(Error::InvalidState(_))
        ));
    }

    #[test]
    fn torque_examples() {
        let p = MotorParams::default();
        assert_eq!(torque(&MotorState::default(), &p), 0.0);

        let s = MotorState {
            psi_alpha: 1.0,
            i_beta: 1.0,
            ..MotorState::default()
        };
        let t = torque(&s, &p);
        assert!((t - 3.0 * 0.0915 / 0.0969).abs() < 1e-12);
        assert!((t - 2.833).abs() < 1e-3);

        let s = MotorState {
            i_alpha: 0.3,
            i_beta: -1.1,
            psi_alpha: 0.7,
            psi_beta: 0.2,
            ..MotorState::default()
        };
        let swapped = MotorState {
            i_alpha: 0.7,
            i_beta: 0.2,
            psi_alpha: 0.3,
            psi_beta: -1.1,
            ..MotorState::default()
        };
        assert!((torque(&s, &p) + torque(&swapped, &p)).abs() < 1e-12);
    }

    #[test]
    fn mechanical_examples() {
        let p = MotorParams::default();
        let r = mechanical_derivative(&MotorState::default(), 2.0, 2.0, &p);
        assert_eq!(r.domega_m, 0.0);

        let s = MotorState {
            omega_m: (3.0 - 1.0) / p.friction,
            ..MotorState::default()
        };
        assert!(mechanical_derivative(&s, 3.0, 1.0, &p).domega_m.abs() < 1e-12);
        assert_eq!(mechanical_derivative(&s, 3.0, 1.0, &p).dtheta_m, s.omega_m);

        let p = MotorParams { friction: 0.0, ..p };
        let r = mechanical_derivative(&MotorState::default(), 1.0, 0.0, &p);
        assert!((r.domega_m - 20.0).abs() < 1e-12);
    }

    #[test]
    fn wrapped_angle_in_range() {
        let s = MotorState {
            theta_m: -0.5,
            ..MotorState::default()
        };
        let w = s.wrapped_angle();
        assert!((0.0..std::f64::consts::TAU).contains(&w));
        assert!((w - (std::f64::consts::TAU - 0.5)).abs() < 1e-12);
    }
}
