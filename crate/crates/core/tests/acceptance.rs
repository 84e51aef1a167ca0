//! One PASS/FAIL line per acceptance criterion. Run with
//! `cargo test --test acceptance -- --nocapture` to see the table.

mod common;

use std::f64::consts::PI;
use std::time::Instant;

use asmo_drive::benchmark::{run_demo, DemoConfig, DemoMode, SecondOrderPlant};
use asmo_drive::integrate::rk4_step;
use asmo_drive::lyapunov::{
    evaluate_V, linearized_error_eigs, LyapunovWeights, OperatingPoint, StabilityClass,
};
use asmo_drive::motor_model::{derived, MotorParams};
use asmo_drive::observer::{ErrorVector, ObserverGains};
use asmo_drive::sim::{run_scenario, write_metrics_json, write_run_csv, RunResult};
use asmo_drive::transforms::{
    clarke, inverse_clarke, inverse_park, park, AbcTriple, AlphaBetaPair, DqPair,
};
use rand_core::{Rng, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;

struct Uniform(Xoshiro256PlusPlus);

impl Uniform {
    fn new(seed: u64) -> Self {
        Self(Xoshiro256PlusPlus::seed_from_u64(seed))
    }

    fn in_range(&mut self, lo: f64, hi: f64) -> f64 {
        let u = (self.0.next_u64() >> 11) as f64 / (1u64 << 53) as f64;
        lo + (hi - lo) * u
    }
}

struct Table {
    failed: Vec<u8>,
}

impl Table {
    fn report(&mut self, n: u8, pass: bool, detail: String) {
        println!(
            "criterion {n:>2}: {} {detail}",
            if pass { "PASS" } else { "FAIL" }
        );
        if !pass {
            self.failed.push(n);
        }
    }
}

/// Largest `|omega_hat - omega|` from the convergence time on.
fn post_convergence_error(r: &RunResult) -> f64 {
    let t0 = r
        .metrics
        .as_ref()
        .and_then(|m| m.convergence_time)
        .unwrap_or(f64::INFINITY);
    r.records
        .iter()
        .filter(|x| x.t >= t0)
        .map(|x| (x.omega_hat - x.omega_true).abs())
        .fold(f64::NAN, f64::max)
}

fn bytes(r: &RunResult) -> (Vec<u8>, Vec<u8>) {
    let (mut csv, mut json) = (Vec::new(), Vec::new());
    write_run_csv(r, &mut csv).unwrap();
    write_metrics_json(r, &mut json).unwrap();
    (csv, json)
}

fn criterion_1() -> (bool, String) {
    let start = Instant::now();
    let mut rng = Uniform::new(11);
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let ab = AlphaBetaPair::new(rng.in_range(-10.0, 10.0), rng.in_range(-10.0, 10.0));
        let back = clarke(inverse_clarke(ab).unwrap()).unwrap();
        worst = worst
            .max((back.alpha - ab.alpha).abs())
            .max((back.beta - ab.beta).abs());
        let dq = DqPair::new(rng.in_range(-10.0, 10.0), rng.in_range(-10.0, 10.0));
        let theta = rng.in_range(-PI, PI);
        let back = park(inverse_park(dq, theta).unwrap(), theta).unwrap();
        worst = worst.max((back.d - dq.d).abs()).max((back.q - dq.q).abs());
    }
    // balanced set sampled over one period maps to a constant dq vector
    let (amp, omega, phase) = (1.0, 2.0 * PI * 50.0, 0.3);
    let samples: Vec<DqPair> = (0..1000)
        .map(|k| {
            let t = k as f64 * 2e-5;
            let wt = omega * t + phase;
            let abc = AbcTriple::new(
                amp * wt.cos(),
                amp * (wt - 2.0 * PI / 3.0).cos(),
                amp * (wt + 2.0 * PI / 3.0).cos(),
            );
            park(clarke(abc).unwrap(), omega * t).unwrap()
        })
        .collect();
    let residual = samples
        .iter()
        .map(|s| {
            (s.d - amp * phase.cos())
                .abs()
                .max((s.q - amp * phase.sin()).abs())
        })
        .fold(0.0, f64::max);
    let secs = start.elapsed().as_secs_f64();
    (
        worst < 1e-12 && residual < 1e-9 && secs < 1.0,
        format!("round-trip {worst:.2e}, balanced residual {residual:.2e}, {secs:.3} s"),
    )
}

fn criterion_2() -> (bool, String) {
    let text = std::fs::read_to_string(
        std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/derived_params.json"),
    )
    .unwrap();
    let fixture: serde_json::Value = serde_json::from_str(&text).unwrap();
    let d = derived(&MotorParams::default()).unwrap();
    let want_sigma = fixture["sigma"].as_f64().unwrap();
    let want_tau = fixture["tau_r"].as_f64().unwrap();
    let pass = (d.sigma - 0.1394).abs() <= 0.0005
        && (d.tau_r - 0.0749).abs() <= 0.0005
        && (d.sigma - want_sigma).abs() < 1e-12
        && (d.tau_r - want_tau).abs() < 1e-12;
    (
        pass,
        format!("sigma {:.5}, tau_r {:.5} s", d.sigma, d.tau_r),
    )
}

fn criterion_3(r: &RunResult, secs: f64) -> (bool, String) {
    let m = r.metrics.as_ref().unwrap();
    let post = post_convergence_error(r);
    let conv = m.convergence_time.unwrap_or(f64::INFINITY);
    let pass = r.failure.is_none()
        && conv < 0.5
        && post < 0.02 * 100.0
        && m.flux_rms_error < 0.02 * m.flux_rms_magnitude
        && secs < 10.0;
    (
        pass,
        format!(
            "convergence {conv:.4} s, post-convergence error {post:.4} rad/s, flux rms error {:.2e} Wb of {:.3} Wb, {secs:.2} s",
            m.flux_rms_error, m.flux_rms_magnitude
        ),
    )
}

fn criterion_4(r: &RunResult, reference: f64) -> (bool, String) {
    let m = r.metrics.as_ref().unwrap();
    let post = post_convergence_error(r);
    let class = m.stability_classification;
    let pass = r.failure.is_none()
        && post < 0.05 * reference
        && class == Some(StabilityClass::AsymptoticallyStable);
    (
        pass,
        format!("post-convergence error {post:.4} rad/s of {reference}, {class:?}"),
    )
}

fn criterion_5() -> (bool, String) {
    let fixed_cfg = common::scenario("mismatch_fixed");
    let adaptive_cfg = common::scenario("mismatch_adaptive");
    let rr_true = adaptive_cfg.plant_params().r_r;
    let fixed = run_scenario(&fixed_cfg).unwrap();
    let adaptive = run_scenario(&adaptive_cfg).unwrap();
    let e0 = fixed.metrics.as_ref().unwrap().speed_rms_error;
    let m = adaptive.metrics.as_ref().unwrap();
    let pass = fixed_cfg.observer.gains.k_r == 0.0
        && adaptive.failure.is_none()
        && m.speed_rms_error < 0.5 * e0
        && m.rr_final_error < 0.1 * rr_true;
    (
        pass,
        format!(
            "E0 {e0:.4} rad/s, adaptive {:.4} rad/s, |Rr_hat - Rr| {:.4} of {rr_true:.4} ohm",
            m.speed_rms_error, m.rr_final_error
        ),
    )
}

fn criterion_6(runs: &[&RunResult]) -> (bool, String) {
    let mut rng = Uniform::new(6);
    let weights = LyapunovWeights::from_gains(&ObserverGains::default()).unwrap();
    let mut v_ok = evaluate_V(&ErrorVector::default(), 0.0, &[0.0], &[], &weights).unwrap() == 0.0;
    for _ in 0..100_000 {
        let e = ErrorVector {
            e_id: rng.in_range(-50.0, 50.0),
            e_iq: rng.in_range(-50.0, 50.0),
            e_psi_d: rng.in_range(-2.0, 2.0),
            e_psi_q: rng.in_range(-2.0, 2.0),
        };
        let v = evaluate_V(
            &e,
            rng.in_range(-500.0, 500.0),
            &[rng.in_range(-5.0, 5.0)],
            &[],
            &weights,
        )
        .unwrap();
        v_ok &= v > 0.0;
    }
    let monitored = runs.iter().all(|r| {
        r.metrics.as_ref().unwrap().stability_classification
            == Some(StabilityClass::AsymptoticallyStable)
    });
    let params = MotorParams::default();
    let gains = ObserverGains::default();
    let mut worst = f64::NEG_INFINITY;
    for k in 0..20 {
        let omega_e = 2.0 * PI * (1.0 + 49.0 * k as f64 / 19.0);
        let eigs = linearized_error_eigs(&OperatingPoint::no_load(0.82, omega_e), &params, &gains)
            .unwrap();
        worst = eigs.iter().map(|c| c.re).fold(worst, f64::max);
    }
    (
        v_ok && monitored && worst < 0.0,
        format!("V >= 0 on 1e5 samples: {v_ok}, monitor: {monitored}, max eigenvalue real part {worst:.4}"),
    )
}

fn criterion_7() -> (bool, String) {
    let cfg = DemoConfig::default();
    let m1 = run_demo(DemoMode::StateFeedback, &cfg).unwrap().verdict;
    let m2 = run_demo(DemoMode::Disturbed, &cfg).unwrap().verdict;
    let m3 = run_demo(DemoMode::DisturbedWithSmc, &cfg).unwrap().verdict;
    let mut eig: Vec<f64> = SecondOrderPlant::new([0.0, 0.0])
        .eigenvalues()
        .iter()
        .map(|c| c.re)
        .collect();
    eig.sort_by(|a, b| a.total_cmp(b));
    let eig_ok = (eig[0] + 3.0).abs() < 1e-12 && (eig[1] + 2.0).abs() < 1e-12;
    let ratio = m3.rms_x1 / m2.rms_x1;
    (
        m1.terminal_norm < 1e-3 && m2.steady_amplitude > 0.01 && ratio < 0.2 && eig_ok,
        format!(
            "|x(T)| {:.2e}, mode-2 amplitude {:.4}, rms ratio {ratio:.4}, eigenvalues {eig:?}",
            m1.terminal_norm, m2.steady_amplitude
        ),
    )
}

fn criterion_8() -> (bool, String) {
    let global_error = |dt: f64| {
        let steps = (1.0 / dt).round() as usize;
        let mut x = [1.0];
        for _ in 0..steps {
            x = rk4_step(|s: &[f64; 1]| Ok([-s[0]]), &x, dt).unwrap();
        }
        (x[0] - (-1.0f64).exp()).abs()
    };
    let (e1, e2) = (global_error(0.1), global_error(0.05));
    let ratio = e1 / e2;
    (
        (12.0..=20.0).contains(&ratio),
        format!("error ratio {ratio:.3}"),
    )
}

fn criterion_9(first: &RunResult) -> (bool, String) {
    let second = common::run("reference");
    let (a, b) = (bytes(first), bytes(&second));
    (
        a == b,
        format!(
            "run.csv {} bytes, metrics.json {} bytes",
            a.0.len(),
            a.1.len()
        ),
    )
}

fn criterion_10() -> (bool, String) {
    let cfg = common::scenario("loaded");
    let r = run_scenario(&cfg).unwrap();
    let b = cfg.plant_params().friction;
    let settled = common::window(&r, cfg.sim.duration - 0.5, cfg.sim.duration);
    let worst = settled
        .iter()
        .map(|x| (x.te - x.tl - b * x.omega_true).abs())
        .fold(f64::NAN, f64::max);
    (
        r.failure.is_none() && worst < 1e-2,
        format!("max |Te - TL - B w| {worst:.2e} N m"),
    )
}

#[test]
fn acceptance() {
    let mut table = Table { failed: Vec::new() };

    let (p, d) = criterion_1();
    table.report(1, p, d);
    let (p, d) = criterion_2();
    table.report(2, p, d);

    let start = Instant::now();
    let reference = common::run("reference");
    let secs = start.elapsed().as_secs_f64();
    let (p, d) = criterion_3(&reference, secs);
    table.report(3, p, d);

    let low_cfg = common::scenario("low_speed");
    let low = run_scenario(&low_cfg).unwrap();
    let (p, d) = criterion_4(&low, low_cfg.profiles.max_speed_ref());
    table.report(4, p, d);

    let (p, d) = criterion_5();
    table.report(5, p, d);
    let (p, d) = criterion_6(&[&reference, &low]);
    table.report(6, p, d);
    let (p, d) = criterion_7();
    table.report(7, p, d);
    let (p, d) = criterion_8();
    table.report(8, p, d);
    let (p, d) = criterion_9(&reference);
    table.report(9, p, d);
    let (p, d) = criterion_10();
    table.report(10, p, d);

    assert!(
        table.failed.is_empty(),
        "failed criteria: {:?}",
        table.failed
    );
}
