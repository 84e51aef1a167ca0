//! Numerical Lyapunov checks for the observer error dynamics.
//!
//! The candidate is
//! `V = 1/2 e^T P e + d/2 dw^2 + a^T alpha a + b^T beta b`
//! with `e` the current/flux estimation error, `dw` the speed error and
//! `a`, `b` parameter-error vectors weighted by positive diagonals.
//! Certification is numerical: trajectory monitoring plus the spectrum of
//! the error dynamics linearized inside the boundary layer.

use nalgebra::{Complex, DMatrix};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::motor_model::{derived, MotorParams, MotorState};
use crate::observer::{ErrorVector, ObserverGains};
use crate::transforms::AlphaBetaPair;

pub const SYMMETRY_TOL: f64 = 1e-12;
pub const PD_EIGEN_TOL: f64 = 1e-10;
/// Moving-average window for the finite-difference derivative of V, seconds.
pub const VDOT_WINDOW: f64 = 0.010;
/// Below this, V is treated as converged and its derivative ignored.
pub const V_FLOOR: f64 = 1e-6;
/// Relative growth after the transient window that counts as unstable.
pub const GROWTH_LIMIT: f64 = 0.10;

#[derive(Debug, Clone, PartialEq)]
pub struct LyapunovWeights {
    pub p: DMatrix<f64>,
    pub d: f64,
    pub alpha_w: Vec<f64>,
    pub beta_w: Vec<f64>,
}

impl LyapunovWeights {
    pub fn new(p: DMatrix<f64>, d: f64, alpha_w: Vec<f64>, beta_w: Vec<f64>) -> Result<Self> {
        if p.nrows() != 4 || p.ncols() != 4 {
            return Err(Error::DimensionMismatch {
                expected: 4,
                got: p.nrows().max(p.ncols()),
            });
        }
        if !is_positive_definite(&p)? {
            return Err(Error::InvalidInput("P must be positive definite".into()));
        }
        if !(d > 0.0) || alpha_w.iter().chain(&beta_w).any(|w| !(*w > 0.0)) {
            return Err(Error::InvalidInput(
                "weights must be strictly positive".into(),
            ));
        }
        Ok(Self {
            p,
            d,
            alpha_w,
            beta_w,
        })
    }

    /// Weights taken from observer gains, with one adapted parameter (rotor resistance).
    pub fn from_gains(gains: &ObserverGains) -> Result<Self> {
        let p = DMatrix::from_fn(4, 4, |r, c| gains.p_weight[r][c]);
        Self::new(p, gains.d_weight, vec![gains.alpha_weight], Vec::new())
    }
}

#[allow(non_snake_case)]
pub fn evaluate_V(
    e: &ErrorVector,
    delta_omega: f64,
    delta_a: &[f64],
    delta_b: &[f64],
    w: &LyapunovWeights,
) -> Result<f64> {
    if delta_a.len() != w.alpha_w.len() {
        return Err(Error::DimensionMismatch {
            expected: w.alpha_w.len(),
            got: delta_a.len(),
        });
    }
    if delta_b.len() != w.beta_w.len() {
        return Err(Error::DimensionMismatch {
            expected: w.beta_w.len(),
            got: delta_b.len(),
        });
    }
    let ex = e.as_array();
    let mut quad = 0.0;
    for r in 0..4 {
        for c in 0..4 {
            quad += ex[r] * w.p[(r, c)] * ex[c];
        }
    }
    let weighted = |x: &[f64], wt: &[f64]| x.iter().zip(wt).map(|(v, k)| v * k * v).sum::<f64>();
    Ok(0.5 * quad
        + 0.5 * w.d * delta_omega * delta_omega
        + weighted(delta_a, &w.alpha_w)
        + weighted(delta_b, &w.beta_w))
}

fn max_asymmetry(m: &DMatrix<f64>) -> f64 {
    let mut worst = 0.0f64;
    for r in 0..m.nrows() {
        for c in (r + 1)..m.ncols() {
            worst = worst.max((m[(r, c)] - m[(c, r)]).abs());
        }
    }
    worst
}

pub fn is_positive_definite(m: &DMatrix<f64>) -> Result<bool> {
    if m.nrows() != m.ncols() {
        return Err(Error::DimensionMismatch {
            expected: m.nrows(),
            got: m.ncols(),
        });
    }
    let asym = max_asymmetry(m);
    if asym > SYMMETRY_TOL {
        return Err(Error::NotSymmetric(asym));
    }
    if m.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput("matrix has non-finite entries".into()));
    }
    let eig = m.clone().symmetric_eigen();
    Ok(eig.eigenvalues.iter().all(|&l| l > PD_EIGEN_TOL))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StabilityClass {
    AsymptoticallyStable,
    Marginal,
    Unstable,
}

impl std::fmt::Display for StabilityClass {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            StabilityClass::AsymptoticallyStable => "asymptotically-stable",
            StabilityClass::Marginal => "marginal",
            StabilityClass::Unstable => "unstable",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilityReport {
    #[serde(skip)]
    pub v_series: Vec<f64>,
    /// Finite-difference dV/dt, same length as `v_series`.
    #[serde(skip)]
    pub vdot_series: Vec<f64>,
    /// Largest moving-average dV/dt after the transient among samples with V above the floor.
    pub max_vdot_after_transient: Option<f64>,
    pub classification: StabilityClass,
}

/// Classify a sampled V trajectory.
///
/// After `transient_window` seconds: asymptotically stable if the 10 ms
/// moving average of dV/dt is negative wherever V exceeds [`V_FLOOR`];
/// unstable if V rises more than 10 % above its value at the end of the
/// transient; marginal otherwise.
pub fn monitor_trajectory(v: &[f64], dt: f64, transient_window: f64) -> Result<StabilityReport> {
    if !(dt > 0.0) || !(transient_window >= 0.0) {
        return Err(Error::InvalidInput(
            "dt must be > 0 and transient window >= 0".into(),
        ));
    }
    let window = ((VDOT_WINDOW / dt).round() as usize).max(1);
    let start = (transient_window / dt).ceil() as usize;
    let needed = (window + 1).max(start + 1);
    if v.len() < needed {
        return Err(Error::SeriesTooShort {
            len: v.len(),
            needed,
        });
    }
    let n = v.len();
    let mut vdot = vec![0.0; n];
    for k in 0..n {
        vdot[k] = if k == 0 {
            (v[1] - v[0]) / dt
        } else if k == n - 1 {
            (v[n - 1] - v[n - 2]) / dt
        } else {
            (v[k + 1] - v[k - 1]) / (2.0 * dt)
        };
    }
    // trailing moving average
    let mut avg = vec![0.0; n];
    let mut acc = 0.0;
    for k in 0..n {
        acc += vdot[k];
        if k >= window {
            acc -= vdot[k - window];
        }
        avg[k] = acc / (k + 1).min(window) as f64;
    }

    let mut max_vdot: Option<f64> = None;
    let mut decreasing = true;
    for k in start..n {
        if v[k] > V_FLOOR {
            max_vdot = Some(max_vdot.map_or(avg[k], |m| m.max(avg[k])));
            if !(avg[k] < 0.0) {
                decreasing = false;
            }
        }
    }
    let reference = v[start].max(V_FLOOR);
    let peak = v[start..].iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let classification = if decreasing {
        StabilityClass::AsymptoticallyStable
    } else if peak > (1.0 + GROWTH_LIMIT) * reference {
        StabilityClass::Unstable
    } else {
        StabilityClass::Marginal
    };
    Ok(StabilityReport {
        v_series: v.to_vec(),
        vdot_series: vdot,
        max_vdot_after_transient: max_vdot,
        classification,
    })
}

/// Sinusoidal steady state at which the observer error dynamics are linearized.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OperatingPoint {
    /// Rotor flux, Wb.
    pub psi_r: AlphaBetaPair,
    /// Stator current, A. Sets the slip; zero means no load.
    pub i_s: AlphaBetaPair,
    /// Electrical rotor speed, rad/s.
    pub omega_e: f64,
}

impl OperatingPoint {
    /// No-load point with the flux on the alpha axis.
    pub fn no_load(flux: f64, omega_e: f64) -> Self {
        Self {
            psi_r: AlphaBetaPair::new(flux, 0.0),
            i_s: AlphaBetaPair::new(0.0, 0.0),
            omega_e,
        }
    }

    pub fn from_state(state: &MotorState, params: &MotorParams) -> Self {
        Self {
            psi_r: AlphaBetaPair::new(state.psi_alpha, state.psi_beta),
            i_s: AlphaBetaPair::new(state.i_alpha, state.i_beta),
            omega_e: params.electrical_speed(state.omega_m),
        }
    }

    /// Stator (synchronous) frequency `omega_e + L_m (psi x i) / (tau_r |psi|^2)`, rad/s.
    pub fn stator_frequency(&self, params: &MotorParams) -> Result<f64> {
        let dp = derived(params)?;
        let flux2 = self.psi_r.alpha.powi(2) + self.psi_r.beta.powi(2);
        if !(flux2 > 0.0) {
            return Err(Error::InvalidInput(
                "operating point needs nonzero rotor flux".into(),
            ));
        }
        let cross = self.psi_r.alpha * self.i_s.beta - self.psi_r.beta * self.i_s.alpha;
        Ok(self.omega_e + params.l_m * cross / (dp.tau_r * flux2))
    }
}

/// Error-dynamics matrix with the switching law in its linear region.
///
/// The errors are expressed in the frame rotating with the stator
/// frequency, where the steady state is constant and the linearization is
/// time invariant. State order is `(e_i_d, e_i_q, e_psi_d, e_psi_q)`,
/// extended by the speed-integrator error when `k_omega_i > 0`. Rotor
/// resistance is held at nominal.
pub fn linearized_error_matrix(
    op: &OperatingPoint,
    params: &MotorParams,
    gains: &ObserverGains,
) -> Result<DMatrix<f64>> {
    if !(gains.boundary_layer > 0.0) {
        return Err(Error::InvalidInput(
            "linearization needs a boundary layer (phi > 0)".into(),
        ));
    }
    let finite = [
        op.psi_r.alpha,
        op.psi_r.beta,
        op.i_s.alpha,
        op.i_s.beta,
        op.omega_e,
    ];
    if finite.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput("non-finite operating point".into()));
    }
    let dp = derived(params)?;
    let omega_s = op.stator_frequency(params)?;
    // rotor flux expressed in the synchronous frame
    let flux = op.psi_r.norm();
    let k = gains.switching_magnitude / gains.boundary_layer;
    let w = op.omega_e;
    let inv_tau = 1.0 / dp.tau_r;
    let (pa, pb) = (flux, 0.0);
    // flux gain seen from the synchronous frame
    let (sn, cs) = op.psi_r.angle().sin_cos();
    let g = &gains.flux_gain;
    let rot = [[cs, -sn], [sn, cs]];
    let mut l = [[0.0; 2]; 2];
    for (r, row) in l.iter_mut().enumerate() {
        for (c, item) in row.iter_mut().enumerate() {
            for m in 0..2 {
                for n in 0..2 {
                    *item += rot[m][r] * g[m][n] * rot[n][c];
                }
            }
        }
    }

    let mut a = DMatrix::<f64>::zeros(4, 4);
    // current rows
    a[(0, 0)] = -dp.gamma - k;
    a[(1, 1)] = -dp.gamma - k;
    a[(0, 2)] = dp.k * inv_tau;
    a[(0, 3)] = dp.k * w;
    a[(1, 2)] = -dp.k * w;
    a[(1, 3)] = dp.k * inv_tau;
    // flux rows
    let lm_tau = params.l_m * inv_tau;
    a[(2, 0)] = lm_tau + k * l[0][0];
    a[(2, 1)] = k * l[0][1];
    a[(3, 0)] = k * l[1][0];
    a[(3, 1)] = lm_tau + k * l[1][1];
    a[(2, 2)] = -inv_tau;
    a[(2, 3)] = -w;
    a[(3, 2)] = w;
    a[(3, 3)] = -inv_tau;
    // frame rotation
    for blk in [0, 2] {
        a[(blk, blk + 1)] += omega_s;
        a[(blk + 1, blk)] -= omega_s;
    }

    // sensitivity of the error rates to the speed estimate
    let b = [dp.k * pb, -dp.k * pa, -pb, pa];
    // speed error signal e_beta psi_alpha - e_alpha psi_beta
    let c = [-pb, pa, 0.0, 0.0];
    for r in 0..4 {
        for col in 0..4 {
            a[(r, col)] += b[r] * gains.k_omega_p * c[col];
        }
    }
    if gains.k_omega_i > 0.0 {
        let mut ext = DMatrix::<f64>::zeros(5, 5);
        ext.view_mut((0, 0), (4, 4)).copy_from(&a);
        for r in 0..4 {
            ext[(r, 4)] = b[r];
            ext[(4, r)] = gains.k_omega_i * c[r];
        }
        Ok(ext)
    } else {
        Ok(a)
    }
}

pub fn linearized_error_eigs(
    op: &OperatingPoint,
    params: &MotorParams,
    gains: &ObserverGains,
) -> Result<Vec<Complex<f64>>> {
    let m = linearized_error_matrix(op, params, gains)?;
    Ok(m.complex_eigenvalues().iter().cloned().collect())
}
