//! Classical fixed-step fourth-order Runge-Kutta.

use crate::error::{Error, Result};

/// Advance `x` by one step of `dt` under `f`. Inputs held by the caller
/// across the step (zero-order hold) are captured by the closure.
pub fn rk4_step<const N: usize, F>(mut f: F, x: &[f64; N], dt: f64) -> Result<[f64; N]>
where
    F: FnMut(&[f64; N]) -> Result<[f64; N]>,
{
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "step must be finite and > 0, got {dt}"
        )));
    }
    let k1 = f(x)?;
    let k2 = f(&axpy(x, 0.5 * dt, &k1))?;
    let k3 = f(&axpy(x, 0.5 * dt, &k2))?;
    let k4 = f(&axpy(x, dt, &k3))?;
    let mut next = *x;
    for i in 0..N {
        next[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    if next.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidState(
            "integration produced a non-finite state".into(),
        ));
    }
    Ok(next)
}

#[inline]
fn axpy<const N: usize>(x: &[f64; N], a: f64, k: &[f64; N]) -> [f64; N] {
    let mut out = *x;
    for i in 0..N {
        out[i] += a * k[i];
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn decay(x: &[f64; 1]) -> Result<[f64; 1]> {
        Ok([-x[0]])
    }

    #[test]
    fn exponential_one_step() {
        let x = rk4_step(decay, &[1.0], 0.1).unwrap();
        assert!((x[0] - 0.904837).abs() < 1e-6);
        assert!((x[0] - (-0.1f64).exp()).abs() < 1e-7);
    }

    #[test]
    fn zero_derivative_is_identity() {
        let x0 = [0.3, -2.0, 7.5];
        let x = rk4_step(|_: &[f64; 3]| Ok([0.0; 3]), &x0, 0.01).unwrap();
        assert_eq!(x, x0);
    }

    #[test]
    fn fourth_order_convergence() {
        let global_error = |dt: f64| {
            let n = (1.0 / dt).round() as usize;
            let mut x = [1.0];
            for _ in 0..n {
                x = rk4_step(decay, &x, dt).unwrap();
            }
            (x[0] - (-1.0f64).exp()).abs()
        };
        let ratio = global_error(0.1) / global_error(0.05);
        assert!((12.0..=20.0).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn rejects_bad_step_and_blowup() {
        assert!(rk4_step(decay, &[1.0], 0.0).is_err());
        assert!(rk4_step(|_: &[f64; 1]| Ok([f64::INFINITY]), &[1.0], 0.1).is_err());
    }
}
