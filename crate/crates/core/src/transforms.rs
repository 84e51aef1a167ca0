//! Reference-frame conversions between three-phase (abc), two-phase
//! stationary (alpha/beta) and rotating (d/q) quantities.
//!
//! Clarke uses amplitude-invariant scaling (2/3), so a balanced set of peak
//! amplitude `V` maps to an alpha/beta vector of magnitude `V`. The
//! zero-sequence component is dropped. Park follows the q-lagging convention
//! `q = -alpha sin(theta) + beta cos(theta)`.

use serde::{Deserialize, Serialize};

use crate::error::{ensure_finite, Result};

const SQRT3_2: f64 = 0.866_025_403_784_438_6;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct AbcTriple {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct AlphaBetaPair {
    pub alpha: f64,
    pub beta: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct DqPair {
    pub d: f64,
    pub q: f64,
}

impl AbcTriple {
    pub const fn new(a: f64, b: f64, c: f64) -> Self {
        Self { a, b, c }
    }
}

impl AlphaBetaPair {
    pub const fn new(alpha: f64, beta: f64) -> Self {
        Self { alpha, beta }
    }

    pub fn norm(&self) -> f64 {
        self.alpha.hypot(self.beta)
    }

    /// Angle of the vector in radians, in (-pi, pi].
    pub fn angle(&self) -> f64 {
        self.beta.atan2(self.alpha)
    }
}

impl DqPair {
    pub const fn new(d: f64, q: f64) -> Self {
        Self { d, q }
    }

    pub fn norm(&self) -> f64 {
        self.d.hypot(self.q)
    }
}

pub fn clarke(abc: AbcTriple) -> Result<AlphaBetaPair> {
    ensure_finite("abc triple", &[abc.a, abc.b, abc.c])?;
    Ok(AlphaBetaPair {
        alpha: (2.0 / 3.0) * (abc.a - 0.5 * abc.b - 0.5 * abc.c),
        beta: (2.0 / 3.0) * SQRT3_2 * (abc.b - abc.c),
    })
}

pub fn inverse_clarke(ab: AlphaBetaPair) -> Result<AbcTriple> {
    ensure_finite("alpha/beta pair", &[ab.alpha, ab.beta])?;
    Ok(AbcTriple {
        a: ab.alpha,
        b: -0.5 * ab.alpha + SQRT3_2 * ab.beta,
        c: -0.5 * ab.alpha - SQRT3_2 * ab.beta,
    })
}

pub fn park(ab: AlphaBetaPair, theta: f64) -> Result<DqPair> {
    ensure_finite("park input", &[ab.alpha, ab.beta, theta])?;
    Ok(rotate_to_dq(ab, theta))
}

pub fn inverse_park(dq: DqPair, theta: f64) -> Result<AlphaBetaPair> {
    ensure_finite("inverse park input", &[dq.d, dq.q, theta])?;
    Ok(rotate_to_alpha_beta(dq, theta))
}

/// Unchecked Park rotation for inner loops whose inputs are already validated.
#[inline]
pub(crate) fn rotate_to_dq(ab: AlphaBetaPair, theta: f64) -> DqPair {
    let (s, c) = theta.sin_cos();
    DqPair {
        d: ab.alpha * c + ab.beta * s,
        q: -ab.alpha * s + ab.beta * c,
    }
}

#[inline]
pub(crate) fn rotate_to_alpha_beta(dq: DqPair, theta: f64) -> AlphaBetaPair {
    let (s, c) = theta.sin_cos();
    AlphaBetaPair {
        alpha: dq.d * c - dq.q * s,
        beta: dq.d * s + dq.q * c,
    }
}
