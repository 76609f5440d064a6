//! Histogram entropy, mutual information between adjacent modes, and the
//! low/high frequency split at the first mutual-information minimum.
//!
//! Entropies use base-10 logarithms throughout.

use crate::error::{Error, Result};
use crate::vmd::ModeSet;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BinCount {
    /// `ceil(sqrt(T))`, at least 2.
    SquareRoot,
    Fixed(usize),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RangePolicy {
    /// Equal-width bins over each variable's own min..max.
    DataMinMax,
    /// Equal-width bins over `[lo, hi]`; values outside land in the edge
    /// bins.
    Explicit(f64, f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HistogramSpec {
    pub bins: BinCount,
    pub range: RangePolicy,
}

impl Default for HistogramSpec {
    fn default() -> Self {
        Self {
            bins: BinCount::SquareRoot,
            range: RangePolicy::DataMinMax,
        }
    }
}

impl HistogramSpec {
    pub fn fixed(bins: usize) -> Self {
        Self {
            bins: BinCount::Fixed(bins),
            range: RangePolicy::DataMinMax,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if let BinCount::Fixed(n) = self.bins {
            if n < 2 {
                return Err(Error::Config(format!("histogram needs at least 2 bins, got {n}")));
            }
        }
        if let RangePolicy::Explicit(lo, hi) = self.range {
            if !(hi > lo) || !lo.is_finite() || !hi.is_finite() {
                return Err(Error::Config(format!("bad histogram range [{lo}, {hi}]")));
            }
        }
        Ok(())
    }

    pub fn bin_count(&self, samples: usize) -> usize {
        match self.bins {
            BinCount::SquareRoot => ((samples as f64).sqrt().ceil() as usize).max(2),
            BinCount::Fixed(n) => n,
        }
    }

    /// Bin index of every sample.
    fn assign(&self, x: &[f64], bins: usize) -> Vec<usize> {
        let (lo, hi) = match self.range {
            RangePolicy::DataMinMax => (
                x.iter().copied().fold(f64::INFINITY, f64::min),
                x.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            ),
            RangePolicy::Explicit(lo, hi) => (lo, hi),
        };
        let width = hi - lo;
        x.iter()
            .map(|&v| {
                if !(width > 0.0) {
                    return 0;
                }
                let pos = ((v - lo) / width * bins as f64).floor();
                if pos < 0.0 {
                    0
                } else {
                    (pos as usize).min(bins - 1)
                }
            })
            .collect()
    }
}

fn check(x: &[f64]) -> Result<()> {
    if x.len() < 2 {
        return Err(Error::TooShort {
            needed: 1,
            got: x.len(),
        });
    }
    if let Some(i) = x.iter().position(|v| !v.is_finite()) {
        return Err(Error::Config(format!("non-finite sample at index {i}")));
    }
    Ok(())
}

/// Occupied cells are summed in ascending count order, which makes the
/// result independent of cell layout (transposed joint histograms and
/// diagonal self-histograms give bit-identical values).
fn entropy_of_counts(counts: &[usize], total: usize) -> f64 {
    let mut occupied: Vec<usize> = counts.iter().copied().filter(|&c| c > 0).collect();
    occupied.sort_unstable();
    let n = total as f64;
    let mut h = 0.0;
    for c in occupied {
        let p = c as f64 / n;
        h -= p * p.log10();
    }
    h
}

/// Histogram entropy `-Σ p log10 p`.
pub fn entropy(x: &[f64], spec: &HistogramSpec) -> Result<f64> {
    spec.validate()?;
    check(x)?;
    let bins = spec.bin_count(x.len());
    let mut counts = vec![0usize; bins];
    for b in spec.assign(x, bins) {
        counts[b] += 1;
    }
    Ok(entropy_of_counts(&counts, x.len()))
}

/// Entropy of the 2-D histogram with `bins × bins` cells, each variable
/// binned over its own range.
pub fn joint_entropy(x: &[f64], y: &[f64], spec: &HistogramSpec) -> Result<f64> {
    spec.validate()?;
    if x.len() != y.len() {
        return Err(Error::Dimension(format!(
            "joint entropy of lengths {} and {}",
            x.len(),
            y.len()
        )));
    }
    check(x)?;
    check(y)?;
    let bins = spec.bin_count(x.len());
    let mut counts = vec![0usize; bins * bins];
    for (a, b) in spec.assign(x, bins).into_iter().zip(spec.assign(y, bins)) {
        counts[a * bins + b] += 1;
    }
    Ok(entropy_of_counts(&counts, x.len()))
}

/// `H(x) + H(y) - H(x, y)`, clamped at zero.
pub fn mutual_information(x: &[f64], y: &[f64], spec: &HistogramSpec) -> Result<f64> {
    let joint = joint_entropy(x, y, spec)?;
    let mi = entropy(x, spec)? + entropy(y, spec)? - joint;
    Ok(mi.max(0.0))
}

/// Modes split into a low-frequency and a high-frequency aggregate.
#[derive(Debug, Clone, PartialEq)]
pub struct FrequencyPartition {
    /// Modes `0..=boundary_index` are low frequency.
    pub boundary_index: usize,
    /// `adjacent_mi[n]` is the mutual information of modes `n` and `n + 1`.
    pub adjacent_mi: Vec<f64>,
    pub low_series: Vec<f64>,
    pub high_series: Vec<f64>,
    /// Set when there was only one mode and no boundary could be placed.
    pub single_mode: bool,
}

/// Index of the first interior local minimum, or of the global minimum when
/// there is none.
pub fn first_minimum(values: &[f64]) -> usize {
    for n in 1..values.len().saturating_sub(1) {
        if values[n] < values[n - 1] && values[n] <= values[n + 1] {
            return n;
        }
    }
    values
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1).then(a.0.cmp(&b.0)))
        .map_or(0, |(i, _)| i)
}

pub fn find_boundary(modes: &ModeSet, spec: &HistogramSpec) -> Result<FrequencyPartition> {
    let k = modes.mode_count();
    let t = modes.signal_len();
    if k == 1 {
        return Ok(FrequencyPartition {
            boundary_index: 0,
            adjacent_mi: Vec::new(),
            low_series: modes.modes[0].clone(),
            high_series: vec![0.0; t],
            single_mode: true,
        });
    }
    let adjacent_mi = modes
        .modes
        .windows(2)
        .map(|w| mutual_information(&w[0], &w[1], spec))
        .collect::<Result<Vec<_>>>()?;
    let boundary_index = first_minimum(&adjacent_mi);

    let sum = |range: std::ops::Range<usize>| {
        let mut out = vec![0.0; t];
        for m in &modes.modes[range] {
            for (o, v) in out.iter_mut().zip(m) {
                *o += v;
            }
        }
        out
    };
    Ok(FrequencyPartition {
        boundary_index,
        low_series: sum(0..boundary_index + 1),
        high_series: sum(boundary_index + 1..k),
        adjacent_mi,
        single_mode: false,
    })
}
