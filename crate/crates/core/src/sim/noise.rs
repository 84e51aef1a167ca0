use rand_core::{Rng, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;

/// Seeded Gaussian noise for the two current channels.
///
/// xoshiro256++ seeded through SplitMix64 (`seed_from_u64`); uniforms are the
/// top 53 bits of each output scaled by 2^-53, and normals come from the
/// Box-Muller pair `sqrt(-2 ln(1 - u1)) * (cos, sin)(2 pi u2)`.
#[derive(Debug, Clone)]
pub struct NoiseSource {
    rng: Xoshiro256PlusPlus,
    std: f64,
}

impl NoiseSource {
    pub fn new(seed: u64, std: f64) -> Self {
        Self {
            rng: Xoshiro256PlusPlus::seed_from_u64(seed),
            std,
        }
    }

    fn uniform(&mut self) -> f64 {
        (self.rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    pub fn standard_pair(&mut self) -> (f64, f64) {
        let u1 = self.uniform();
        let u2 = self.uniform();
        let r = (-2.0 * (1.0 - u1).ln()).sqrt();
        let (s, c) = (std::f64::consts::TAU * u2).sin_cos();
        (r * c, r * s)
    }

    /// Noise for (alpha, beta) current measurements; no draw when std is 0.
    pub fn sample(&mut self) -> (f64, f64) {
        if self.std == 0.0 {
            return (0.0, 0.0);
        }
        let (a, b) = self.standard_pair();
        (self.std * a, self.std * b)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reproducible_and_roughly_standard() {
        let mut a = NoiseSource::new(7, 1.0);
        let mut b = NoiseSource::new(7, 1.0);
        let n = 20_000;
        let mut sum = 0.0;
        let mut sq = 0.0;
        for _ in 0..n {
            let x = a.sample();
            assert_eq!(x, b.sample());
            sum += x.0 + x.1;
            sq += x.0 * x.0 + x.1 * x.1;
        }
        let mean = sum / (2 * n) as f64;
        let var = sq / (2 * n) as f64 - mean * mean;
        assert!(mean.abs() < 0.03);
        assert!((var - 1.0).abs() < 0.05);
    }

    #[test]
    fn zero_std_is_silent() {
        let mut s = NoiseSource::new(1, 0.0);
        assert_eq!(s.sample(), (0.0, 0.0));
    }
}
