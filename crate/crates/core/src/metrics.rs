//! Forecast error metrics and multi-run summaries.

use std::fmt::Write as _;

use crate::error::{Error, Result};

fn check_lengths(actual: &[f64], predicted: &[f64]) -> Result<()> {
    if actual.len() != predicted.len() {
        return Err(Error::Dimension(format!(
            "{} actuals but {} predictions",
            actual.len(),
            predicted.len()
        )));
    }
    if actual.is_empty() {
        return Err(Error::TooShort { needed: 0, got: 0 });
    }
    Ok(())
}

/// Mean absolute percentage error, in percent.
pub fn mape(actual: &[f64], predicted: &[f64]) -> Result<f64> {
    check_lengths(actual, predicted)?;
    if let Some(index) = actual.iter().position(|&a| a == 0.0) {
        return Err(Error::ZeroActual { index });
    }
    let sum: f64 = actual
        .iter()
        .zip(predicted)
        .map(|(a, p)| ((a - p) / a).abs())
        .sum();
    Ok(100.0 * sum / actual.len() as f64)
}

pub fn rmse(actual: &[f64], predicted: &[f64]) -> Result<f64> {
    check_lengths(actual, predicted)?;
    let sum: f64 = actual.iter().zip(predicted).map(|(a, p)| (a - p).powi(2)).sum();
    Ok((sum / actual.len() as f64).sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunMetrics {
    pub mape: f64,
    pub rmse: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunSummary {
    pub mape_max: f64,
    pub mape_min: f64,
    pub mape_mean: f64,
    pub rmse_mean: f64,
    pub run_count: usize,
    pub per_run: Vec<RunMetrics>,
}

/// Exact max / min / mean over runs. The means are taken over values sorted
/// ascending so the result does not depend on run order.
pub fn summarize(per_run: &[RunMetrics]) -> Result<RunSummary> {
    if per_run.is_empty() {
        return Err(Error::Config("cannot summarize zero runs".into()));
    }
    let mut mapes: Vec<f64> = per_run.iter().map(|r| r.mape).collect();
    let mut rmses: Vec<f64> = per_run.iter().map(|r| r.rmse).collect();
    mapes.sort_by(f64::total_cmp);
    rmses.sort_by(f64::total_cmp);
    let n = per_run.len() as f64;
    Ok(RunSummary {
        mape_max: mapes[mapes.len() - 1],
        mape_min: mapes[0],
        mape_mean: (mapes.iter().sum::<f64>() / n).clamp(mapes[0], mapes[mapes.len() - 1]),
        rmse_mean: rmses.iter().sum::<f64>() / n,
        run_count: per_run.len(),
        per_run: per_run.to_vec(),
    })
}

pub const METRICS_CSV_HEADER: &str = "model,mape_max,mape_min,mape_mean,rmse_mean";

/// One row of the comparison table.
pub fn metrics_csv_row(model: &str, s: &RunSummary) -> String {
    format!(
        "{model},{},{},{},{}",
        s.mape_max, s.mape_min, s.mape_mean, s.rmse_mean
    )
}

/// Human-readable key-value block.
pub fn summary_block(model: &str, s: &RunSummary) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "[{model}]");
    let _ = writeln!(out, "runs={}", s.run_count);
    let _ = writeln!(out, "mape_max={:.4}", s.mape_max);
    let _ = writeln!(out, "mape_min={:.4}", s.mape_min);
    let _ = writeln!(out, "mape_mean={:.4}", s.mape_mean);
    let _ = writeln!(out, "rmse_mean={:.4}", s.rmse_mean);
    out
}
