//! ELM parameter search: particle encoding of input weights and biases, and
//! the validation-error fitness the swarm minimizes.

use nalgebra::{DMatrix, DVector};

use crate::elm::{self, ElmConfig, ElmModel};
use crate::error::{Error, Result};
use crate::metrics;
use crate::pso::PsoConfig;
use crate::series::{ScalingParams, SupervisedDataset};

/// Row-major weights followed by biases.
pub fn encode_elm(weights: &DMatrix<f64>, biases: &DVector<f64>) -> Vec<f64> {
    let (m, d) = weights.shape();
    let mut out = Vec::with_capacity(m * d + m);
    for i in 0..m {
        out.extend(weights.row(i).iter());
    }
    out.extend(biases.iter());
    out
}

pub fn decode_elm(position: &[f64], hidden: usize, input_dim: usize) -> Result<(DMatrix<f64>, DVector<f64>)> {
    let expected = hidden * input_dim + hidden;
    if position.len() != expected {
        return Err(Error::Dimension(format!(
            "position of length {} cannot hold {hidden}x{input_dim} weights plus {hidden} biases ({expected})",
            position.len()
        )));
    }
    let split = hidden * input_dim;
    Ok((
        DMatrix::from_row_slice(hidden, input_dim, &position[..split]),
        DVector::from_column_slice(&position[split..]),
    ))
}

/// Search box matching the ELM's random-init ranges: weights first, then
/// biases.
pub fn elm_search_bounds(config: &ElmConfig, input_dim: usize) -> (Vec<f64>, Vec<f64>) {
    let m = config.hidden_count;
    let mut lo = vec![config.weight_range.0; m * input_dim];
    let mut hi = vec![config.weight_range.1; m * input_dim];
    lo.extend(std::iter::repeat_n(config.bias_range.0, m));
    hi.extend(std::iter::repeat_n(config.bias_range.1, m));
    (lo, hi)
}

/// Swarm config over the ELM search box with the remaining settings taken
/// from `template`.
pub fn elm_pso_config(template: &PsoConfig, elm: &ElmConfig, input_dim: usize) -> PsoConfig {
    let (lo, hi) = elm_search_bounds(elm, input_dim);
    PsoConfig {
        bounds_low: lo,
        bounds_high: hi,
        ..template.clone()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FitnessMetric {
    /// MAPE in percent on the raw scale.
    Mape,
    /// RMSE on the raw scale; used for series that cross zero.
    Rmse,
}

/// Scores a candidate weight/bias vector: solve β on `train`, predict
/// `validation`, compare on the raw scale.
#[derive(Debug, Clone)]
pub struct ElmFitness {
    train: SupervisedDataset,
    validation: SupervisedDataset,
    validation_raw: Vec<f64>,
    scaling: ScalingParams,
    hidden: usize,
    metric: FitnessMetric,
}

impl ElmFitness {
    /// `train` and `validation` hold scaled values; `scaling` maps them back
    /// to raw units.
    pub fn new(
        train: SupervisedDataset,
        validation: SupervisedDataset,
        scaling: ScalingParams,
        elm: &ElmConfig,
        metric: FitnessMetric,
    ) -> Result<Self> {
        elm.validate()?;
        if train.lag_count != validation.lag_count {
            return Err(Error::Dimension("train and validation lag counts differ".into()));
        }
        let validation_raw: Vec<f64> = validation.targets.iter().map(|&v| scaling.unscale(v)).collect();
        if metric == FitnessMetric::Mape {
            if let Some(index) = validation_raw.iter().position(|&v| v == 0.0) {
                return Err(Error::ZeroActual { index });
            }
        }
        Ok(Self {
            train,
            validation,
            validation_raw,
            scaling,
            hidden: elm.hidden_count,
            metric,
        })
    }

    pub fn dims(&self) -> usize {
        self.hidden * self.train.lag_count + self.hidden
    }

    pub fn model(&self, position: &[f64]) -> Result<ElmModel> {
        let (w, b) = decode_elm(position, self.hidden, self.train.lag_count)?;
        elm::train(&self.train.features, &self.train.targets, w, b)
    }

    pub fn evaluate(&self, position: &[f64]) -> Result<f64> {
        let model = self.model(position)?;
        let predicted: Vec<f64> = elm::predict(&model, &self.validation.features)?
            .into_iter()
            .map(|v| self.scaling.unscale(v))
            .collect();
        match self.metric {
            FitnessMetric::Mape => metrics::mape(&self.validation_raw, &predicted),
            FitnessMetric::Rmse => metrics::rmse(&self.validation_raw, &predicted),
        }
    }

    /// Fitness for the swarm: failures become +∞.
    pub fn score(&self, position: &[f64]) -> f64 {
        self.evaluate(position).unwrap_or(f64::INFINITY)
    }
}

/// One-shot form of [`ElmFitness::evaluate`] with MAPE.
pub fn elm_fitness(
    position: &[f64],
    train: &SupervisedDataset,
    validation: &SupervisedDataset,
    scaling: ScalingParams,
    elm: &ElmConfig,
) -> Result<f64> {
    ElmFitness::new(train.clone(), validation.clone(), scaling, elm, FitnessMetric::Mape)?.evaluate(position)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::series::lag_windows;
    use proptest::prelude::*;

    #[test]
    fn encode_small() {
        let w = DMatrix::from_row_slice(1, 2, &[0.1, 0.2]);
        let b = DVector::from_vec(vec![0.3]);
        assert_eq!(encode_elm(&w, &b), vec![0.1, 0.2, 0.3]);
    }

    #[test]
    fn decode_rejects_wrong_length() {
        assert!(matches!(decode_elm(&[0.0; 319], 40, 7), Err(Error::Dimension(_))));
        assert!(decode_elm(&[0.0; 320], 40, 7).is_ok());
    }

    #[test]
    fn bounds_follow_elm_ranges() {
        let (lo, hi) = elm_search_bounds(&ElmConfig::default(), 7);
        assert_eq!(lo.len(), 320);
        assert_eq!((lo[0], hi[0]), (-1.0, 1.0));
        assert_eq!((lo[319], hi[319]), (0.0, 1.0));
    }

    fn scaled_windows(raw: &[f64], d: usize) -> (SupervisedDataset, ScalingParams) {
        let s = ScalingParams::fit(raw).unwrap();
        let scaled: Vec<f64> = raw.iter().map(|&v| s.scale(v)).collect();
        (lag_windows(&scaled, d, 1).unwrap(), s)
    }

    #[test]
    fn exact_fit_scores_near_zero_on_its_own_data() {
        let raw: Vec<f64> = (0..37).map(|i| 10.0 + (i as f64 * 0.7).sin() + 0.01 * i as f64).collect();
        let (ds, s) = scaled_windows(&raw, 7);
        let cfg = ElmConfig::default();
        let (w, b) = elm::init_random(&cfg, 7, 2).unwrap();
        let pos = encode_elm(&w, &b);
        let f = elm_fitness(&pos, &ds, &ds, s, &cfg).unwrap();
        assert!(f < 1e-4, "{f}");
    }

    #[test]
    fn zero_position_scores_constant_mean_predictor() {
        let raw: Vec<f64> = (0..60).map(|i| 50.0 + 10.0 * (i as f64 * 0.3).sin()).collect();
        let (ds, s) = scaled_windows(&raw, 3);
        let train = SupervisedDataset {
            features: ds.features.rows(0, 40).into_owned(),
            targets: ds.targets[..40].to_vec(),
            ..ds.clone()
        };
        let val = SupervisedDataset {
            features: ds.features.rows(40, ds.len() - 40).into_owned(),
            targets: ds.targets[40..].to_vec(),
            ..ds.clone()
        };
        let cfg = ElmConfig::default();
        let f = elm_fitness(&vec![0.0; cfg.parameter_count(3)], &train, &val, s, &cfg).unwrap();

        let mean_raw = train.targets.iter().map(|&v| s.unscale(v)).sum::<f64>() / 40.0;
        let actual: Vec<f64> = val.targets.iter().map(|&v| s.unscale(v)).collect();
        let oracle = 100.0 / actual.len() as f64
            * actual.iter().map(|a| ((a - mean_raw) / a).abs()).sum::<f64>();
        assert!((f - oracle).abs() < 1e-8, "{f} vs {oracle}");
    }

    #[test]
    fn zero_validation_target_rejected_for_mape() {
        let raw = [4.0, 3.0, 2.0, 1.0, 0.0];
        let (ds, s) = scaled_windows(&raw, 1);
        let r = ElmFitness::new(ds.clone(), ds.clone(), s, &ElmConfig::default(), FitnessMetric::Mape);
        assert!(matches!(r, Err(Error::ZeroActual { .. })));
        assert!(ElmFitness::new(ds.clone(), ds, s, &ElmConfig::default(), FitnessMetric::Rmse).is_ok());
    }

    #[test]
    fn better_position_wins_global_best() {
        use crate::pso::{PsoConfig, Swarm};
        let raw: Vec<f64> = (0..80).map(|i| 20.0 + 3.0 * (i as f64 * 0.4).sin()).collect();
        let (ds, s) = scaled_windows(&raw, 2);
        let cfg = ElmConfig { hidden_count: 4, ..Default::default() };
        let fit = ElmFitness::new(ds.clone(), ds, s, &cfg, FitnessMetric::Mape).unwrap();
        let zero = vec![0.0; fit.dims()];
        let (w, b) = elm::init_random(&cfg, 2, 1).unwrap();
        let random = encode_elm(&w, &b);
        let (fz, fr) = (fit.score(&zero), fit.score(&random));
        assert_ne!(fz, fr);
        let pso = PsoConfig { population: 2, ..elm_pso_config(&PsoConfig::cube(1, 0.0, 1.0), &cfg, 2) };
        let swarm = Swarm::new(vec![zero.clone(), random.clone()], &|p: &[f64]| fit.score(p), &pso, 0).unwrap();
        assert_eq!(swarm.global_best, if fr < fz { random } else { zero });
        assert_eq!(swarm.global_best_fitness, fr.min(fz));
    }

    proptest! {
        #[test]
        fn decode_inverts_encode(seed in 0u64..1000, m in 1usize..50, d in 1usize..10) {
            let cfg = ElmConfig { hidden_count: m, ..Default::default() };
            let (w, b) = elm::init_random(&cfg, d, seed).unwrap();
            let (w2, b2) = decode_elm(&encode_elm(&w, &b), m, d).unwrap();
            prop_assert_eq!(w, w2);
            prop_assert_eq!(b, b2);
        }
    }
}
