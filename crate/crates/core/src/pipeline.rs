//! End-to-end forecasting runs for the four model variants and the
//! repeated-run comparison protocol.

use std::collections::BTreeSet;
use std::ops::Range;
use std::path::PathBuf;
use std::sync::atomic::{AtomicUsize, Ordering};

use rayon::prelude::*;

use crate::chaos::ChaosConfig;
use crate::elm::{self, ElmConfig, ElmModel};
use crate::error::{Error, Result};
use crate::metrics::{self, RunMetrics, RunSummary};
use crate::mi::{self, HistogramSpec};
use crate::pso::{self, InitMode, PsoConfig};
use crate::rng::derive_seed;
use crate::search::{self, ElmFitness, FitnessMetric};
use crate::series::{self, Column, ScalingParams, SplitSpec, TimeSeries};
use crate::synthetic::{self, SyntheticSpec};
use crate::vmd::{self, VmdConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ModelKind {
    Elm,
    PsoElm,
    IpsoElm,
    VmdIpsoElm,
}

impl ModelKind {
    pub const ALL: [ModelKind; 4] = [
        ModelKind::Elm,
        ModelKind::PsoElm,
        ModelKind::IpsoElm,
        ModelKind::VmdIpsoElm,
    ];

    pub fn tag(self) -> &'static str {
        match self {
            ModelKind::Elm => "elm",
            ModelKind::PsoElm => "pso_elm",
            ModelKind::IpsoElm => "ipso_elm",
            ModelKind::VmdIpsoElm => "vmd_ipso_elm",
        }
    }

    /// Swarm init mode, or `None` for plain random weights.
    pub fn search_init(self) -> Option<InitMode> {
        match self {
            ModelKind::Elm => None,
            ModelKind::PsoElm => Some(InitMode::UniformRandom),
            ModelKind::IpsoElm | ModelKind::VmdIpsoElm => Some(InitMode::TentChaos),
        }
    }
}

impl std::fmt::Display for ModelKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.tag())
    }
}

impl std::str::FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ModelKind::ALL
            .into_iter()
            .find(|k| k.tag() == s)
            .ok_or_else(|| Error::Config(format!("unknown model {s:?}")))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum DataSource {
    File { path: PathBuf, column: Column },
    Synthetic(SyntheticSpec),
}

impl DataSource {
    pub fn load(&self) -> Result<TimeSeries> {
        match self {
            DataSource::File { path, column } => series::load_csv(path, column),
            DataSource::Synthetic(spec) => synthetic::generate_synthetic(spec),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub models: Vec<ModelKind>,
    pub data: DataSource,
    pub lag_count: usize,
    pub train_fraction: f64,
    pub run_count: usize,
    pub base_seed: u64,
    pub elm: ElmConfig,
    /// Swarm settings; the search box is always the ELM's init ranges and
    /// the init mode follows the model kind.
    pub pso: PsoConfig,
    /// Trailing share of the training rows held out to score particles.
    pub validation_fraction: f64,
    pub chaos: ChaosConfig,
    pub vmd: VmdConfig,
    pub histogram: HistogramSpec,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            models: ModelKind::ALL.to_vec(),
            data: DataSource::Synthetic(SyntheticSpec::default()),
            lag_count: 7,
            train_fraction: 0.75,
            run_count: 30,
            base_seed: 0,
            elm: ElmConfig::default(),
            pso: PsoConfig::new(Vec::new(), Vec::new()),
            validation_fraction: 0.2,
            chaos: ChaosConfig::default(),
            vmd: VmdConfig::default(),
            histogram: HistogramSpec::default(),
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.models.is_empty() {
            return Err(Error::Config("at least one model is required".into()));
        }
        if self.run_count < 1 {
            return Err(Error::Config("run_count must be at least 1".into()));
        }
        if self.lag_count < 1 {
            return Err(Error::Config("lag_count must be at least 1".into()));
        }
        SplitSpec::new(self.train_fraction)?;
        SplitSpec::new(1.0 - self.validation_fraction).map_err(|_| {
            Error::Config(format!(
                "validation_fraction must lie in (0, 1), got {}",
                self.validation_fraction
            ))
        })?;
        self.elm.validate()?;
        search::elm_pso_config(&self.pso, &self.elm, self.lag_count).validate()?;
        self.chaos.validate()?;
        self.vmd.validate()?;
        self.histogram.validate()?;
        if let DataSource::Synthetic(spec) = &self.data {
            spec.validate()?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Phase {
    Decomposition,
    Training,
    Evaluation,
}

/// Counts how many test-span values each phase has read.
#[derive(Debug, Default)]
pub struct LeakAudit {
    counts: [AtomicUsize; 3],
}

impl LeakAudit {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn test_reads(&self, phase: Phase) -> usize {
        self.counts[phase as usize].load(Ordering::Relaxed)
    }

    fn record(&self, phase: Phase, n: usize) {
        self.counts[phase as usize].fetch_add(n, Ordering::Relaxed);
    }
}

/// A series whose positions from `cutoff` on are the test span. All reads go
/// through [`Holdout::read`], which charges test positions to the caller's
/// phase.
#[derive(Debug)]
pub struct Holdout<'a> {
    values: &'a [f64],
    cutoff: usize,
    audit: &'a LeakAudit,
}

impl<'a> Holdout<'a> {
    pub fn new(values: &'a [f64], cutoff: usize, audit: &'a LeakAudit) -> Self {
        Self {
            values,
            cutoff,
            audit,
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    pub fn read(&self, range: Range<usize>, phase: Phase) -> &'a [f64] {
        let test = range.end.saturating_sub(range.start.max(self.cutoff));
        self.audit.record(phase, test);
        &self.values[range]
    }
}

/// Series position where the test targets begin, for `n` samples.
pub fn test_cutoff(n: usize, lag_count: usize, train_fraction: f64) -> Result<usize> {
    if n <= lag_count {
        return Err(Error::TooShort {
            needed: lag_count,
            got: n,
        });
    }
    Ok(SplitSpec::new(train_fraction)?.split_index(n - lag_count)? + lag_count)
}

/// One forecast sub-flow on a single series.
#[derive(Debug, Clone, PartialEq)]
pub struct BranchOutcome {
    pub label: &'static str,
    pub predictions: Vec<f64>,
    /// Series positions of the predicted targets.
    pub positions: Range<usize>,
    /// Global-best fitness per swarm iteration; empty without a search.
    pub search_history: Vec<f64>,
    pub fitness_metric: Option<FitnessMetric>,
    pub scaling: ScalingParams,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOutcome {
    pub kind: ModelKind,
    pub seed: u64,
    pub predictions: Vec<f64>,
    pub actuals: Vec<f64>,
    pub metrics: RunMetrics,
    pub branches: Vec<BranchOutcome>,
    pub boundary_index: Option<usize>,
    pub warnings: Vec<String>,
}

/// A trained ELM with the scaling it was fitted under.
#[derive(Debug, Clone, PartialEq)]
pub struct FittedElm {
    pub model: ElmModel,
    pub scaling: ScalingParams,
    pub search_history: Vec<f64>,
    pub fitness_metric: Option<FitnessMetric>,
}

/// Fits an ELM to `train_raw`: min-max scaling from these values, lag
/// windows, then either random weights (`init = None`) or a swarm search
/// scored on the trailing validation rows. The final output weights are
/// solved on all rows.
pub fn fit_elm(
    label: &str,
    train_raw: &[f64],
    init: Option<InitMode>,
    config: &ExperimentConfig,
    seed: u64,
    warnings: &mut Vec<String>,
) -> Result<FittedElm> {
    let d = config.lag_count;
    let scaling = ScalingParams::fit(train_raw)?;
    let train_scaled: Vec<f64> = train_raw.iter().map(|&v| scaling.scale(v)).collect();
    let train = series::lag_windows(&train_scaled, d, 1)?;

    let (model, search_history, fitness_metric) = match init {
        None => {
            let (w, b) = elm::init_random(&config.elm, d, derive_seed(seed, "elm"))?;
            (elm::train(&train.features, &train.targets, w, b)?, Vec::new(), None)
        }
        Some(mode) => {
            let fit_rows = SplitSpec::new(1.0 - config.validation_fraction)?.split_index(train.len())?;
            let metric = if train_raw.iter().all(|&v| v > 0.0) {
                FitnessMetric::Mape
            } else {
                warnings.push(format!("{label} branch crosses zero; particles scored by RMSE"));
                FitnessMetric::Rmse
            };
            let fitness = ElmFitness::new(
                train.rows(0..fit_rows),
                train.rows(fit_rows..train.len()),
                scaling,
                &config.elm,
                metric,
            )?;
            let pso_cfg = PsoConfig {
                init_mode: mode,
                ..search::elm_pso_config(&config.pso, &config.elm, d)
            };
            let found = pso::optimize(|p| fitness.score(p), &pso_cfg, &config.chaos, derive_seed(seed, "search"))?;
            if found.nonfinite_evaluations > 0 {
                warnings.push(format!(
                    "{label} branch: {} particle evaluations failed and scored +inf",
                    found.nonfinite_evaluations
                ));
            }
            if !found.best_fitness.is_finite() {
                return Err(Error::Numeric {
                    iteration: pso_cfg.iterations,
                    what: format!("{label} branch search found no finite fitness"),
                });
            }
            let (w, b) = search::decode_elm(&found.best_position, config.elm.hidden_count, d)?;
            let model = elm::train(&train.features, &train.targets, w, b)?;
            (model, found.history, Some(metric))
        }
    };
    Ok(FittedElm {
        model,
        scaling,
        search_history,
        fitness_metric,
    })
}

fn forecast_branch(
    label: &'static str,
    data: &Holdout<'_>,
    init: Option<InitMode>,
    config: &ExperimentConfig,
    seed: u64,
    warnings: &mut Vec<String>,
) -> Result<BranchOutcome> {
    let d = config.lag_count;
    let n = data.len();
    let cutoff = test_cutoff(n, d, config.train_fraction)?;
    if cutoff != data.cutoff() {
        return Err(Error::Internal(format!(
            "{label} branch split at {cutoff}, expected {}",
            data.cutoff()
        )));
    }

    let train_raw = data.read(0..cutoff, Phase::Training);
    let fitted = fit_elm(label, train_raw, init, config, seed, warnings)?;
    let scaling = fitted.scaling;

    let test_start = cutoff - d;
    let test_scaled: Vec<f64> = data
        .read(test_start..n, Phase::Evaluation)
        .iter()
        .map(|&v| scaling.scale(v))
        .collect();
    let test = series::lag_windows(&test_scaled, d, 1)?;
    let predictions = elm::predict(&fitted.model, &test.features)?
        .into_iter()
        .map(|v| scaling.unscale(v))
        .collect();
    Ok(BranchOutcome {
        label,
        predictions,
        positions: cutoff..n,
        search_history: fitted.search_history,
        fitness_metric: fitted.fitness_metric,
        scaling,
    })
}

/// One seeded run of `kind`; see [`run_single_audited`].
pub fn run_single(kind: ModelKind, series: &TimeSeries, config: &ExperimentConfig, seed: u64) -> Result<RunOutcome> {
    run_single_audited(kind, series, config, seed, &LeakAudit::new())
}

/// One seeded run with every read of the test span charged to `audit`.
pub fn run_single_audited(
    kind: ModelKind,
    series: &TimeSeries,
    config: &ExperimentConfig,
    seed: u64,
    audit: &LeakAudit,
) -> Result<RunOutcome> {
    let values = series.values();
    let cutoff = test_cutoff(values.len(), config.lag_count, config.train_fraction)?;
    let raw = Holdout::new(values, cutoff, audit);
    let mut warnings = Vec::new();
    let mut boundary_index = None;

    let branches = match kind {
        ModelKind::VmdIpsoElm => {
            warnings.push("decomposition runs on the full series, test span included".to_string());
            let modes = vmd::decompose(raw.read(0..raw.len(), Phase::Decomposition), &config.vmd)?;
            if modes.iterations_used >= config.vmd.max_iterations {
                warnings.push(format!(
                    "decomposition stopped at max_iterations {} with update norm {:e}",
                    config.vmd.max_iterations, modes.final_update_norm
                ));
            }
            let split = mi::find_boundary(&modes, &config.histogram)?;
            boundary_index = Some(split.boundary_index);
            let low = Holdout::new(&split.low_series, cutoff, audit);
            let high = Holdout::new(&split.high_series, cutoff, audit);
            let init = kind.search_init();
            if split.single_mode {
                warnings.push("single mode: forecasting the low branch only".to_string());
                vec![forecast_branch("low", &low, init, config, derive_seed(seed, "low"), &mut warnings)?]
            } else {
                let mut wl = Vec::new();
                let mut wh = Vec::new();
                let (l, h) = rayon::join(
                    || forecast_branch("low", &low, init, config, derive_seed(seed, "low"), &mut wl),
                    || forecast_branch("high", &high, init, config, derive_seed(seed, "high"), &mut wh),
                );
                warnings.extend(wl);
                warnings.extend(wh);
                vec![l?, h?]
            }
        }
        _ => vec![forecast_branch("series", &raw, kind.search_init(), config, seed, &mut warnings)?],
    };

    let first = &branches[0];
    for b in &branches[1..] {
        if b.positions != first.positions || b.predictions.len() != first.predictions.len() {
            return Err(Error::Internal(format!(
                "branch {} covers {:?}, branch {} covers {:?}",
                first.label, first.positions, b.label, b.positions
            )));
        }
    }
    let mut predictions = first.predictions.clone();
    for b in &branches[1..] {
        for (p, q) in predictions.iter_mut().zip(&b.predictions) {
            *p += q;
        }
    }
    let actuals = raw.read(first.positions.clone(), Phase::Evaluation).to_vec();
    let metrics = RunMetrics {
        mape: metrics::mape(&actuals, &predictions)?,
        rmse: metrics::rmse(&actuals, &predictions)?,
    };
    Ok(RunOutcome {
        kind,
        seed,
        predictions,
        actuals,
        metrics,
        branches,
        boundary_index,
        warnings,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ForecastReport {
    pub model: ModelKind,
    pub summary: RunSummary,
    pub predictions_last_run: Vec<f64>,
    pub actuals: Vec<f64>,
    /// Series position of the first test target.
    pub test_start: usize,
    pub config_echo: ExperimentConfig,
    pub warnings: Vec<String>,
}

/// Seeds `base_seed + i` for `i` in `0..run_count`.
pub fn run_seeds(config: &ExperimentConfig) -> Vec<u64> {
    (0..config.run_count as u64).map(|i| config.base_seed.wrapping_add(i)).collect()
}

pub fn run_repeated(kind: ModelKind, series: &TimeSeries, config: &ExperimentConfig) -> Result<ForecastReport> {
    run_repeated_audited(kind, series, config, &LeakAudit::new())
}

pub fn run_repeated_audited(
    kind: ModelKind,
    series: &TimeSeries,
    config: &ExperimentConfig,
    audit: &LeakAudit,
) -> Result<ForecastReport> {
    config.validate()?;
    let outcomes: Vec<Result<RunOutcome>> = run_seeds(config)
        .into_par_iter()
        .map(|seed| {
            run_single_audited(kind, series, config, seed, audit).map_err(|e| Error::Run {
                seed,
                source: Box::new(e),
            })
        })
        .collect();
    let outcomes = outcomes.into_iter().collect::<Result<Vec<_>>>()?;
    let per_run: Vec<RunMetrics> = outcomes.iter().map(|o| o.metrics).collect();
    let warnings: BTreeSet<String> = outcomes.iter().flat_map(|o| o.warnings.iter().cloned()).collect();
    let last = outcomes.last().expect("run_count >= 1");
    Ok(ForecastReport {
        model: kind,
        summary: metrics::summarize(&per_run)?,
        predictions_last_run: last.predictions.clone(),
        actuals: last.actuals.clone(),
        test_start: last.branches[0].positions.start,
        config_echo: config.clone(),
        warnings: warnings.into_iter().collect(),
    })
}

/// Runs every configured model on the same series and split.
pub fn compare(series: &TimeSeries, config: &ExperimentConfig) -> Result<Vec<ForecastReport>> {
    compare_audited(series, config, &LeakAudit::new())
}

pub fn compare_audited(series: &TimeSeries, config: &ExperimentConfig, audit: &LeakAudit) -> Result<Vec<ForecastReport>> {
    config.validate()?;
    let reports = config
        .models
        .iter()
        .map(|&kind| run_repeated_audited(kind, series, config, audit))
        .collect::<Result<Vec<_>>>()?;
    if reports.windows(2).any(|w| w[0].actuals != w[1].actuals) {
        return Err(Error::Internal("models were scored on different test actuals".into()));
    }
    Ok(reports)
}

/// Comparison table, one row per model.
pub fn metrics_csv(reports: &[ForecastReport]) -> String {
    let mut out = format!("{}\n", metrics::METRICS_CSV_HEADER);
    for r in reports {
        out.push_str(&metrics::metrics_csv_row(r.model.tag(), &r.summary));
        out.push('\n');
    }
    out
}

/// `index,actual,predicted` for the last run; index is the series position.
pub fn predictions_csv(report: &ForecastReport) -> String {
    let mut out = String::from("index,actual,predicted\n");
    for (i, (a, p)) in report.actuals.iter().zip(&report.predictions_last_run).enumerate() {
        out.push_str(&format!("{},{a},{p}\n", report.test_start + i));
    }
    out
}
