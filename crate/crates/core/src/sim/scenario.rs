use serde::Serialize;

use super::config::{FeedbackMode, ScenarioConfig};
use super::metrics::{metrics, Metrics, MetricsContext};
use super::noise::NoiseSource;
use crate::dsfoc::{ControllerRefs, Dsfoc, Feedback};
use crate::error::{Error, Result};
use crate::integrate::rk4_step;
use crate::lyapunov::{evaluate_V, LyapunovWeights};
use crate::motor_model::{current_flux_rates, derived, mechanical_derivative, torque, MotorState};
use crate::observer::{
    derived_at, rates_with, speed_adaptation_rate, Asmo, ErrorVector, ObserverState,
};
use crate::transforms::AlphaBetaPair;

/// One sample of a run, matching the `run.csv` columns.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Record {
    pub t: f64,
    /// Mechanical speed reference, rad/s.
    pub omega_ref: f64,
    /// Mechanical speed, rad/s.
    pub omega_true: f64,
    /// Observer speed estimate converted to mechanical rad/s.
    pub omega_hat: f64,
    pub psi_ra: f64,
    pub psi_rb: f64,
    pub psi_ra_hat: f64,
    pub psi_rb_hat: f64,
    pub i_a: f64,
    pub i_b: f64,
    pub i_a_hat: f64,
    pub i_b_hat: f64,
    pub v_a_cmd: f64,
    pub v_b_cmd: f64,
    pub te: f64,
    pub tl: f64,
    pub rr_hat: f64,
    pub v_lyap: f64,
}

impl Record {
    /// Fields in `CSV_COLUMNS` order.
    pub fn values(&self) -> [f64; 18] {
        [
            self.t,
            self.omega_ref,
            self.omega_true,
            self.omega_hat,
            self.psi_ra,
            self.psi_rb,
            self.psi_ra_hat,
            self.psi_rb_hat,
            self.i_a,
            self.i_b,
            self.i_a_hat,
            self.i_b_hat,
            self.v_a_cmd,
            self.v_b_cmd,
            self.te,
            self.tl,
            self.rr_hat,
            self.v_lyap,
        ]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Failure {
    pub t: f64,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunResult {
    pub records: Vec<Record>,
    pub metrics: Option<Metrics>,
    pub failure: Option<Failure>,
}

impl RunResult {
    /// Completed without a fault, the estimate converged, and the Lyapunov
    /// monitor did not flag growth.
    pub fn verdict(&self) -> bool {
        match (&self.failure, &self.metrics) {
            (None, Some(m)) => {
                m.convergence_time.is_some()
                    && m.stability_classification != Some(crate::lyapunov::StabilityClass::Unstable)
            }
            _ => false,
        }
    }
}

const N: usize = 12;

fn pack(plant: &MotorState, obs: &ObserverState) -> [f64; N] {
    [
        plant.i_alpha,
        plant.i_beta,
        plant.psi_alpha,
        plant.psi_beta,
        plant.omega_m,
        plant.theta_m,
        obs.i_alpha_hat,
        obs.i_beta_hat,
        obs.psi_alpha_hat,
        obs.psi_beta_hat,
        obs.speed_integrator,
        obs.r_r_hat,
    ]
}

fn unpack(x: &[f64; N]) -> (MotorState, ObserverState) {
    (
        MotorState {
            i_alpha: x[0],
            i_beta: x[1],
            psi_alpha: x[2],
            psi_beta: x[3],
            omega_m: x[4],
            theta_m: x[5],
        },
        ObserverState {
            i_alpha_hat: x[6],
            i_beta_hat: x[7],
            psi_alpha_hat: x[8],
            psi_beta_hat: x[9],
            omega_hat: 0.0,
            r_r_hat: x[11],
            speed_integrator: x[10],
        },
    )
}

/// Run one scenario. Deterministic for a given config (including seed).
///
/// The controller sees either plant truth (sensored) or observer estimates
/// (sensorless); measured currents are always the plant currents plus
/// optional sensor noise. Voltage commands and noise are held across each
/// step.
pub fn run_scenario(cfg: &ScenarioConfig) -> Result<RunResult> {
    cfg.validate()?;
    let nominal = cfg.motor;
    let plant_params = cfg.plant_params();
    let plant_dp = derived(&plant_params)?;
    let asmo = Asmo::new(nominal, cfg.observer.gains.clone())?.with_speed_offset(
        cfg.motor
            .electrical_speed(cfg.observer.initial_speed_offset),
    );
    let gains = asmo.gains().clone();
    let weights = LyapunovWeights::from_gains(&gains)?;
    let mut controller = Dsfoc::new(cfg.controller.clone(), &nominal)?;
    let mut noise = NoiseSource::new(cfg.seed, cfg.noise.std);

    let dt = cfg.sim.dt;
    let steps = (cfg.sim.duration / dt).round() as usize;
    let pp = nominal.pole_pairs as f64;

    let mut plant = MotorState::default();
    let mut obs = *asmo.state();
    let mut records = Vec::with_capacity(steps + 1);
    let mut failure = None;

    for n in 0..=steps {
        let t = n as f64 * dt;
        let (na, nb) = noise.sample();
        let measured = AlphaBetaPair::new(plant.i_alpha + na, plant.i_beta + nb);
        let refs = ControllerRefs {
            omega_ref: cfg.profiles.speed_at(t),
            psi_s_ref: cfg.profiles.flux_at(t, cfg.controller.psi_s_ref),
        };
        let fb = match cfg.mode {
            FeedbackMode::Sensored => Feedback::sensored(&plant, measured, &nominal),
            FeedbackMode::SensorlessAsmo => Feedback::sensorless(&obs, measured, &nominal),
        };
        let out = match controller.control_step(&refs, &fb, dt) {
            Ok(o) => o,
            Err(e) => {
                failure = Some(Failure {
                    t,
                    reason: e.to_string(),
                });
                break;
            }
        };
        let load = cfg.profiles.load_at(t);
        let v_lyap = evaluate_V(
            &ErrorVector::between(&obs, &plant),
            obs.omega_hat - pp * plant.omega_m,
            &[obs.r_r_hat - plant_params.r_r],
            &[],
            &weights,
        )?;
        records.push(Record {
            t,
            omega_ref: refs.omega_ref,
            omega_true: plant.omega_m,
            omega_hat: obs.omega_hat / pp,
            psi_ra: plant.psi_alpha,
            psi_rb: plant.psi_beta,
            psi_ra_hat: obs.psi_alpha_hat,
            psi_rb_hat: obs.psi_beta_hat,
            i_a: plant.i_alpha,
            i_b: plant.i_beta,
            i_a_hat: obs.i_alpha_hat,
            i_b_hat: obs.i_beta_hat,
            v_a_cmd: out.v.alpha,
            v_b_cmd: out.v.beta,
            te: torque(&plant, &plant_params),
            tl: load,
            rr_hat: obs.r_r_hat,
            v_lyap,
        });
        if n == steps {
            break;
        }

        let v = (out.v.alpha, out.v.beta);
        let rhs = |x: &[f64; N]| -> Result<[f64; N]> {
            let (p, o) = unpack(x);
            let e = current_flux_rates(
                (p.i_alpha, p.i_beta),
                (p.psi_alpha, p.psi_beta),
                plant_params.electrical_speed(p.omega_m),
                v,
                &plant_params,
                &plant_dp,
            );
            let m = mechanical_derivative(&p, torque(&p, &plant_params), load, &plant_params);
            let dp_hat = derived_at(&nominal, o.r_r_hat)?;
            let r = rates_with(
                &o,
                (p.i_alpha + na, p.i_beta + nb),
                v,
                &nominal,
                &dp_hat,
                &gains,
            );
            Ok([
                e.di_alpha,
                e.di_beta,
                e.dpsi_alpha,
                e.dpsi_beta,
                m.domega_m,
                m.dtheta_m,
                r.di_alpha_hat,
                r.di_beta_hat,
                r.dpsi_alpha_hat,
                r.dpsi_beta_hat,
                r.dspeed_integrator,
                r.dr_r_hat,
            ])
        };
        match rk4_step(rhs, &pack(&plant, &obs), dt) {
            Ok(next) => {
                let (p, mut o) = unpack(&next);
                asmo.clamp(&mut o);
                let e = o.current_error((p.i_alpha + na, p.i_beta + nb));
                o.omega_hat = speed_adaptation_rate(&o, e, &gains).omega_hat;
                plant = p;
                obs = o;
            }
            Err(e) => {
                failure = Some(Failure {
                    t: t + dt,
                    reason: match e {
                        Error::InvalidState(s) => format!("non-finite state: {s}"),
                        other => other.to_string(),
                    },
                });
                break;
            }
        }
    }

    let ctx = MetricsContext {
        rr_true: plant_params.r_r,
        dt,
        transient_window: cfg.sim.transient_window,
    };
    let metrics = metrics(&records, &ctx).ok();
    Ok(RunResult {
        records,
        metrics,
        failure,
    })
}
