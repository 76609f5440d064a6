//! Improved Tent chaotic map used to seed particle swarms.
//!
//! The classical Tent map `y -> 2y | 2(1-y)` collapses to short cycles and
//! fixed points in floating point. Each step here adds a scaled Beta(m, n)
//! draw and wraps back into [0, 1), which keeps the orbit mixing.

use rand::Rng;
use rand_distr::{Distribution, Gamma};

use crate::error::{Error, Result};
use crate::rng;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChaosConfig {
    /// Slope of the map (η).
    pub chaos_coefficient: f64,
    /// Weight of the Beta perturbation (γ).
    pub shrink_factor: f64,
    pub beta_a: f64,
    pub beta_b: f64,
}

impl Default for ChaosConfig {
    fn default() -> Self {
        Self {
            chaos_coefficient: 2.0,
            shrink_factor: 0.1,
            beta_a: 3.0,
            beta_b: 4.0,
        }
    }
}

impl ChaosConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.chaos_coefficient > 0.0) {
            return Err(Error::Config("chaos.eta must be positive".into()));
        }
        if !(self.shrink_factor >= 0.0) {
            return Err(Error::Config("chaos.gamma must be non-negative".into()));
        }
        if !(self.beta_a > 0.0 && self.beta_b > 0.0) {
            return Err(Error::Config("chaos beta parameters must be positive".into()));
        }
        Ok(())
    }
}

/// One Beta(m, n) draw as `X / (X + Y)` with `X ~ Gamma(m)`, `Y ~ Gamma(n)`.
pub fn beta_sample<R: Rng + ?Sized>(m: f64, n: f64, rng: &mut R) -> f64 {
    let x = Gamma::new(m, 1.0).expect("shape validated").sample(rng);
    let y = Gamma::new(n, 1.0).expect("shape validated").sample(rng);
    let s = x + y;
    if s > 0.0 {
        (x / s).clamp(0.0, 1.0)
    } else {
        0.5
    }
}

/// One step of the perturbed Tent map, wrapped modulo 1.
pub fn tent_next<R: Rng + ?Sized>(y: f64, chaos: &ChaosConfig, rng: &mut R) -> f64 {
    let noise = if chaos.shrink_factor > 0.0 {
        chaos.shrink_factor * beta_sample(chaos.beta_a, chaos.beta_b, rng)
    } else {
        0.0
    };
    let raw = if y < 0.5 {
        chaos.chaos_coefficient * y + noise
    } else {
        chaos.chaos_coefficient * (1.0 - y) + noise
    };
    let wrapped = raw - raw.floor();
    // raw - floor(raw) can round up to exactly 1.0 for tiny negative raw
    if wrapped >= 1.0 {
        0.0
    } else {
        wrapped
    }
}

/// Maps a chaotic value in [0, 1] onto `[lo, hi]`.
#[inline]
pub fn map_to_bounds(y: f64, lo: f64, hi: f64) -> f64 {
    lo + y * (hi - lo)
}

/// `population × D` initial positions. Each dimension runs its own chaotic
/// chain from a seeded start value, one step per particle.
pub fn tent_init(
    population: usize,
    bounds_low: &[f64],
    bounds_high: &[f64],
    chaos: &ChaosConfig,
    seed: u64,
) -> Result<Vec<Vec<f64>>> {
    chaos.validate()?;
    if bounds_low.len() != bounds_high.len() {
        return Err(Error::Dimension("bounds differ in length".into()));
    }
    let dims = bounds_low.len();
    let mut start_rng = rng::stream(seed, rng::STREAM_INIT);
    let mut noise_rng = rng::stream(seed, rng::STREAM_CHAOS);
    let starts: Vec<f64> = (0..dims)
        .map(|_| loop {
            let y: f64 = start_rng.random();
            if y > 0.0 {
                break y;
            }
        })
        .collect();

    let mut positions = vec![vec![0.0; dims]; population];
    for j in 0..dims {
        let mut y = starts[j];
        for p in positions.iter_mut() {
            y = tent_next(y, chaos, &mut noise_rng);
            p[j] = map_to_bounds(y, bounds_low[j], bounds_high[j]).clamp(bounds_low[j], bounds_high[j]);
        }
    }
    Ok(positions)
}

/// Kolmogorov-Smirnov distance of a sample to U(lo, hi).
pub fn ks_uniform(sample: &[f64], lo: f64, hi: f64) -> f64 {
    let mut s: Vec<f64> = sample.iter().map(|&v| (v - lo) / (hi - lo)).collect();
    s.sort_by(f64::total_cmp);
    let n = s.len() as f64;
    s.iter()
        .enumerate()
        .map(|(i, &v)| {
            let v = v.clamp(0.0, 1.0);
            (v - i as f64 / n).abs().max(((i + 1) as f64 / n - v).abs())
        })
        .fold(0.0, f64::max)
}
