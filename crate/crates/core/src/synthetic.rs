//! Seeded synthetic load series: level, trend, sinusoids and Gaussian noise.

use std::f64::consts::TAU;

use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::rng;
use crate::series::TimeSeries;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sinusoid {
    pub amplitude: f64,
    /// Period in samples.
    pub period: f64,
    /// Phase in radians.
    pub phase: f64,
}

impl Sinusoid {
    pub fn new(amplitude: f64, period: f64, phase: f64) -> Self {
        Self {
            amplitude,
            period,
            phase,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticSpec {
    pub length: usize,
    pub base_level: f64,
    /// Added per sample.
    pub trend_slope: f64,
    pub components: Vec<Sinusoid>,
    pub noise_std: f64,
    pub seed: u64,
}

impl Default for SyntheticSpec {
    /// 1096 quarter-hour samples with a daily cycle, a 3-hour ripple and noise.
    fn default() -> Self {
        Self {
            length: 1096,
            base_level: 100.0,
            trend_slope: 0.0,
            components: vec![Sinusoid::new(30.0, 96.0, 0.0), Sinusoid::new(6.0, 12.0, 0.5)],
            noise_std: 1.0,
            seed: 2024,
        }
    }
}

impl SyntheticSpec {
    /// Checks that every generated value will be strictly positive: the level
    /// must exceed the worst-case trend, every amplitude, and six noise
    /// standard deviations.
    pub fn validate(&self) -> Result<()> {
        if self.length < 2 {
            return Err(Error::Config(format!("synthetic length must be at least 2, got {}", self.length)));
        }
        if !self.base_level.is_finite() || !self.trend_slope.is_finite() {
            return Err(Error::Config("synthetic level and trend must be finite".into()));
        }
        for c in &self.components {
            if !(c.period > 0.0) || !c.amplitude.is_finite() || !c.phase.is_finite() || !c.period.is_finite() {
                return Err(Error::Config(format!(
                    "bad sinusoid amplitude {} period {} phase {}",
                    c.amplitude, c.period, c.phase
                )));
            }
        }
        if !(self.noise_std >= 0.0) || !self.noise_std.is_finite() {
            return Err(Error::Config(format!("noise_std must be finite and >= 0, got {}", self.noise_std)));
        }
        let trend_floor = (self.trend_slope * (self.length - 1) as f64).min(0.0);
        let swing: f64 = self.components.iter().map(|c| c.amplitude.abs()).sum();
        let floor = self.base_level + trend_floor - swing - 6.0 * self.noise_std;
        if !(floor > 0.0) {
            return Err(Error::Config(format!(
                "synthetic series may reach {floor}; raise base_level above amplitudes plus 6 noise_std"
            )));
        }
        Ok(())
    }
}

pub fn generate_synthetic(spec: &SyntheticSpec) -> Result<TimeSeries> {
    spec.validate()?;
    let mut rng = rng::stream(spec.seed, rng::STREAM_NOISE);
    let noise = Normal::new(0.0, spec.noise_std).map_err(|e| Error::Config(e.to_string()))?;
    let values = (0..spec.length)
        .map(|t| {
            let tf = t as f64;
            let periodic: f64 = spec
                .components
                .iter()
                .map(|c| c.amplitude * (TAU * tf / c.period + c.phase).sin())
                .sum();
            let eps = if spec.noise_std > 0.0 { noise.sample(&mut rng) } else { 0.0 };
            spec.base_level + spec.trend_slope * tf + periodic + eps
        })
        .collect();
    TimeSeries::from_values(values)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn noiseless_single_sinusoid_is_analytic() {
        let spec = SyntheticSpec {
            length: 50,
            base_level: 10.0,
            trend_slope: 0.0,
            components: vec![Sinusoid::new(2.0, 20.0, 0.3)],
            noise_std: 0.0,
            seed: 1,
        };
        let s = generate_synthetic(&spec).unwrap();
        for (t, v) in s.values().iter().enumerate() {
            let want = 10.0 + 2.0 * (TAU * t as f64 / 20.0 + 0.3).sin();
            assert_eq!(*v, want);
        }
    }

    #[test]
    fn same_seed_same_series() {
        let spec = SyntheticSpec::default();
        assert_eq!(generate_synthetic(&spec).unwrap(), generate_synthetic(&spec).unwrap());
        let other = SyntheticSpec { seed: spec.seed + 1, ..spec.clone() };
        assert_ne!(generate_synthetic(&spec).unwrap(), generate_synthetic(&other).unwrap());
    }

    #[test]
    fn default_is_positive_and_quarter_hourly() {
        let s = generate_synthetic(&SyntheticSpec::default()).unwrap();
        assert_eq!(s.len(), 1096);
        assert_eq!(s.sample_interval().as_secs(), 900);
        assert!(s.values().iter().all(|&v| v > 0.0));
    }

    #[test]
    fn positivity_is_validated() {
        let spec = SyntheticSpec {
            base_level: 20.0,
            ..SyntheticSpec::default()
        };
        assert!(matches!(generate_synthetic(&spec), Err(Error::Config(_))));
        let falling = SyntheticSpec {
            trend_slope: -0.1,
            ..SyntheticSpec::default()
        };
        assert!(falling.validate().is_err());
    }
}
