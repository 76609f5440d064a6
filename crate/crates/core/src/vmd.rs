//! Variational mode decomposition.
//!
//! The signal is mirror-extended to twice its length, transformed once, and
//! the K mode spectra are refined on the non-negative half of the frequency
//! grid by alternating updates:
//!
//! * each mode is a Wiener-style filter of the residual left by the other
//!   modes plus half the multiplier, centred on its current frequency;
//! * each centre frequency moves to the power-weighted centroid of its mode;
//! * the multiplier takes a dual-ascent step on the reconstruction gap.
//!
//! Iteration stops once the summed relative change of the mode spectra falls
//! below the tolerance. Modes are returned in the time domain, cut back to
//! the original window and ordered by ascending centre frequency.

use std::f64::consts::PI;

use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{Error, Result};

/// Floor on the per-mode denominator of the update norm.
const NORM_FLOOR: f64 = 1e-30;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OmegaInit {
    /// K centres evenly spaced inside (0, 0.5).
    Uniform,
    /// All centres start at DC.
    Zero,
}

impl std::fmt::Display for OmegaInit {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            OmegaInit::Uniform => "uniform",
            OmegaInit::Zero => "zero",
        })
    }
}

impl std::str::FromStr for OmegaInit {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "uniform" => Ok(OmegaInit::Uniform),
            "zero" => Ok(OmegaInit::Zero),
            _ => Err(Error::Config(format!("unknown omega init {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VmdConfig {
    pub mode_count: usize,
    /// Bandwidth penalty (alpha).
    pub bandwidth_penalty: f64,
    /// Dual ascent step for the multiplier; 0 disables the exact
    /// reconstruction constraint.
    pub ascent_rate: f64,
    pub tolerance: f64,
    pub max_iterations: usize,
    pub omega_init: OmegaInit,
}

impl Default for VmdConfig {
    fn default() -> Self {
        Self {
            mode_count: 7,
            bandwidth_penalty: 2000.0,
            ascent_rate: 0.1,
            tolerance: 1e-7,
            max_iterations: 500,
            omega_init: OmegaInit::Uniform,
        }
    }
}

impl VmdConfig {
    pub fn validate(&self) -> Result<()> {
        if self.mode_count < 1 {
            return Err(Error::Config("vmd.mode_count must be at least 1".into()));
        }
        if !(self.bandwidth_penalty > 0.0) {
            return Err(Error::Config("vmd.alpha must be positive".into()));
        }
        if !(self.ascent_rate >= 0.0) {
            return Err(Error::Config("vmd.ascent_rate must be non-negative".into()));
        }
        if !(self.tolerance > 0.0) {
            return Err(Error::Config("vmd.tolerance must be positive".into()));
        }
        if self.max_iterations < 1 {
            return Err(Error::Config("vmd.max_iterations must be at least 1".into()));
        }
        Ok(())
    }
}

/// Decomposition output: K time-domain modes with their centre frequencies
/// (cycles per sample), sorted ascending by frequency.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeSet {
    pub modes: Vec<Vec<f64>>,
    pub center_frequencies: Vec<f64>,
    pub iterations_used: usize,
    pub final_update_norm: f64,
}

impl ModeSet {
    /// Builds a mode set from precomputed modes, sorting them by centre
    /// frequency (ties keep input order).
    pub fn from_modes(modes: Vec<Vec<f64>>, center_frequencies: Vec<f64>) -> Result<Self> {
        if modes.is_empty() || modes.len() != center_frequencies.len() {
            return Err(Error::Dimension(format!(
                "{} modes but {} centre frequencies",
                modes.len(),
                center_frequencies.len()
            )));
        }
        let t = modes[0].len();
        if modes.iter().any(|m| m.len() != t) {
            return Err(Error::Dimension("modes differ in length".into()));
        }
        let mut set = Self {
            modes,
            center_frequencies,
            iterations_used: 0,
            final_update_norm: 0.0,
        };
        set.canonicalize();
        Ok(set)
    }

    pub fn mode_count(&self) -> usize {
        self.modes.len()
    }

    pub fn signal_len(&self) -> usize {
        self.modes.first().map_or(0, Vec::len)
    }

    /// Relative L2 error of the mode sum against `signal`.
    pub fn reconstruction_error(&self, signal: &[f64]) -> f64 {
        let rec = reconstruct(self);
        let num: f64 = rec.iter().zip(signal).map(|(a, b)| (a - b).powi(2)).sum();
        let den: f64 = signal.iter().map(|x| x * x).sum();
        (num / den.max(f64::MIN_POSITIVE)).sqrt()
    }

    fn canonicalize(&mut self) {
        let mut order: Vec<usize> = (0..self.modes.len()).collect();
        order.sort_by(|&a, &b| {
            self.center_frequencies[a]
                .total_cmp(&self.center_frequencies[b])
                .then(a.cmp(&b))
        });
        self.modes = order.iter().map(|&i| std::mem::take(&mut self.modes[i])).collect();
        self.center_frequencies = order.iter().map(|&i| self.center_frequencies[i]).collect();
    }
}

/// Symmetric boundary extension: the first half reversed, the signal, then
/// the second half reversed. Output length is `2T`, the signal sits at
/// offset `T / 2`.
pub fn mirror_extend(signal: &[f64]) -> Result<Vec<f64>> {
    let t = signal.len();
    if t < 2 {
        return Err(Error::TooShort { needed: 1, got: t });
    }
    let half = t / 2;
    let mut out = Vec::with_capacity(2 * t);
    out.extend(signal[..half].iter().rev());
    out.extend_from_slice(signal);
    out.extend(signal[half..].iter().rev());
    Ok(out)
}

/// Unitary forward DFT of a real signal (any length).
pub fn dft(signal: &[f64]) -> Vec<Complex64> {
    let mut buf: Vec<Complex64> = signal.iter().map(|&x| Complex64::new(x, 0.0)).collect();
    transform(&mut buf, false);
    buf
}

/// Unitary inverse DFT.
pub fn idft(spectrum: &[Complex64]) -> Vec<Complex64> {
    let mut buf = spectrum.to_vec();
    transform(&mut buf, true);
    buf
}

fn transform(buf: &mut [Complex64], inverse: bool) {
    let n = buf.len();
    if n == 0 {
        return;
    }
    let mut planner = FftPlanner::<f64>::new();
    let fft = if inverse {
        planner.plan_fft_inverse(n)
    } else {
        planner.plan_fft_forward(n)
    };
    fft.process(buf);
    let scale = 1.0 / (n as f64).sqrt();
    for z in buf.iter_mut() {
        *z *= scale;
    }
}

/// Runs the decomposition.
pub fn decompose(signal: &[f64], config: &VmdConfig) -> Result<ModeSet> {
    config.validate()?;
    let t = signal.len();
    let k_count = config.mode_count;
    if t < 4 * k_count || t < 2 {
        return Err(Error::TooShort {
            needed: (4 * k_count).max(2) - 1,
            got: t,
        });
    }
    if let Some(i) = signal.iter().position(|v| !v.is_finite()) {
        return Err(Error::Config(format!("non-finite input at index {i}")));
    }

    let extended = mirror_extend(signal)?;
    let n = extended.len();
    let bins = n / 2 + 1;
    let full = dft(&extended);
    let f_hat = &full[..bins];
    let freqs: Vec<f64> = (0..bins).map(|j| j as f64 / n as f64).collect();

    let mut omega: Vec<f64> = match config.omega_init {
        OmegaInit::Uniform => (0..k_count)
            .map(|k| (k as f64 + 0.5) * 0.5 / k_count as f64)
            .collect(),
        OmegaInit::Zero => vec![0.0; k_count],
    };
    let zero = Complex64::new(0.0, 0.0);
    let mut modes = vec![vec![zero; bins]; k_count];
    let mut lambda = vec![zero; bins];
    let mut total = vec![zero; bins];
    let mut prev = vec![zero; bins];
    let two_alpha = 2.0 * config.bandwidth_penalty;

    let mut iterations = 0;
    let mut update_norm = f64::INFINITY;
    while iterations < config.max_iterations {
        iterations += 1;
        total.fill(zero);
        for m in &modes {
            for (s, u) in total.iter_mut().zip(m) {
                *s += u;
            }
        }

        update_norm = 0.0;
        for k in 0..k_count {
            let mode = &mut modes[k];
            prev.copy_from_slice(mode);
            let mut power = 0.0;
            let mut weighted = 0.0;
            for j in 0..bins {
                let others = total[j] - mode[j];
                let gain = 1.0 + two_alpha * (freqs[j] - omega[k]).powi(2);
                let u = (f_hat[j] - others + lambda[j] * 0.5) / gain;
                total[j] = others + u;
                mode[j] = u;
                let p = u.norm_sqr();
                power += p;
                weighted += freqs[j] * p;
            }
            if power > 0.0 {
                omega[k] = weighted / power;
            }
            let diff: f64 = mode.iter().zip(&prev).map(|(a, b)| (a - b).norm_sqr()).sum();
            let base: f64 = prev.iter().map(|z| z.norm_sqr()).sum();
            update_norm += diff / base.max(NORM_FLOOR);
        }

        for j in 0..bins {
            lambda[j] += (f_hat[j] - total[j]) * config.ascent_rate;
        }

        if !update_norm.is_finite()
            || omega.iter().any(|w| !w.is_finite())
            || lambda.iter().any(|z| !z.re.is_finite() || !z.im.is_finite())
        {
            return Err(Error::Numeric {
                iteration: iterations,
                what: "non-finite value in mode update".into(),
            });
        }
        if update_norm < config.tolerance {
            break;
        }
    }

    let offset = t / 2;
    let time_modes = modes
        .iter()
        .map(|half| {
            let full = hermitian_extend(half, n);
            idft(&full)[offset..offset + t].iter().map(|z| z.re).collect()
        })
        .collect();

    let mut set = ModeSet {
        modes: time_modes,
        center_frequencies: omega.iter().map(|w| w.clamp(0.0, 0.5)).collect(),
        iterations_used: iterations,
        final_update_norm: update_norm,
    };
    set.canonicalize();
    Ok(set)
}

/// Full length-`n` spectrum of a real signal from its bins `0..=n/2`.
fn hermitian_extend(half: &[Complex64], n: usize) -> Vec<Complex64> {
    let mut full = vec![Complex64::new(0.0, 0.0); n];
    full[..half.len()].copy_from_slice(half);
    full[0] = Complex64::new(half[0].re, 0.0);
    if n.is_multiple_of(2) {
        full[n / 2] = Complex64::new(half[n / 2].re, 0.0);
    }
    for j in 1..half.len() {
        if n - j >= half.len() {
            full[n - j] = half[j].conj();
        }
    }
    full
}

/// Element-wise sum of the modes.
pub fn reconstruct(modes: &ModeSet) -> Vec<f64> {
    let mut out = vec![0.0; modes.signal_len()];
    for m in &modes.modes {
        for (o, v) in out.iter_mut().zip(m) {
            *o += v;
        }
    }
    out
}

/// `cos(2π f t)` sampled at `t = 0..len`, a convenience for tests and
/// examples.
pub fn tone(freq: f64, amplitude: f64, len: usize) -> Vec<f64> {
    (0..len)
        .map(|t| amplitude * (2.0 * PI * freq * t as f64).cos())
        .collect()
}
