//! Single-hidden-layer extreme learning machine with a sigmoid hidden layer
//! and output weights solved by SVD pseudoinverse.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use nalgebra::{DMatrix, DVector};
use rand::Rng;

use crate::error::{Error, Result};
use crate::rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Activation {
    Sigmoid,
}

impl Activation {
    #[inline]
    pub fn apply(self, z: f64) -> f64 {
        match self {
            Activation::Sigmoid => 1.0 / (1.0 + (-z).exp()),
        }
    }

    pub fn tag(self) -> &'static str {
        match self {
            Activation::Sigmoid => "sigmoid",
        }
    }

    pub fn from_tag(s: &str) -> Result<Self> {
        match s {
            "sigmoid" => Ok(Activation::Sigmoid),
            _ => Err(Error::Config(format!("unknown activation {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ElmConfig {
    pub hidden_count: usize,
    pub activation: Activation,
    /// Range for input weights.
    pub weight_range: (f64, f64),
    /// Range for hidden biases.
    pub bias_range: (f64, f64),
}

impl Default for ElmConfig {
    fn default() -> Self {
        Self {
            hidden_count: 40,
            activation: Activation::Sigmoid,
            weight_range: (-1.0, 1.0),
            bias_range: (0.0, 1.0),
        }
    }
}

impl ElmConfig {
    pub fn validate(&self) -> Result<()> {
        if self.hidden_count < 1 {
            return Err(Error::Config("elm.hidden_count must be at least 1".into()));
        }
        for (name, (lo, hi)) in [("weight", self.weight_range), ("bias", self.bias_range)] {
            if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
                return Err(Error::Config(format!("elm {name} range [{lo}, {hi}] is empty")));
            }
        }
        Ok(())
    }

    /// Length of the flattened parameter vector for `input_dim` inputs.
    pub fn parameter_count(&self, input_dim: usize) -> usize {
        self.hidden_count * input_dim + self.hidden_count
    }
}

/// Uniform random input weights (M×d) and biases (M), drawn weights first
/// in row-major order.
pub fn init_random(
    config: &ElmConfig,
    input_dim: usize,
    seed: u64,
) -> Result<(DMatrix<f64>, DVector<f64>)> {
    config.validate()?;
    if input_dim < 1 {
        return Err(Error::Config("input_dim must be at least 1".into()));
    }
    let mut rng = rng::stream(seed, rng::STREAM_INIT);
    let (wl, wh) = config.weight_range;
    let (bl, bh) = config.bias_range;
    let m = config.hidden_count;
    let weights: Vec<f64> = (0..m * input_dim).map(|_| rng.random_range(wl..wh)).collect();
    let biases: Vec<f64> = (0..m).map(|_| rng.random_range(bl..bh)).collect();
    Ok((
        DMatrix::from_row_slice(m, input_dim, &weights),
        DVector::from_vec(biases),
    ))
}

/// Hidden layer output `H[j][i] = g(w_i · x_j + b_i)`.
pub fn hidden_matrix(
    weights: &DMatrix<f64>,
    biases: &DVector<f64>,
    features: &DMatrix<f64>,
    activation: Activation,
) -> Result<DMatrix<f64>> {
    if weights.nrows() != biases.len() || weights.ncols() != features.ncols() {
        return Err(Error::Dimension(format!(
            "weights {}x{}, biases {}, features with {} columns",
            weights.nrows(),
            weights.ncols(),
            biases.len(),
            features.ncols()
        )));
    }
    let mut h = features * weights.transpose();
    for (i, mut col) in h.column_iter_mut().enumerate() {
        let b = biases[i];
        col.apply(|z| *z = activation.apply(*z + b));
    }
    Ok(h)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ElmModel {
    pub input_weights: DMatrix<f64>,
    pub biases: DVector<f64>,
    pub output_weights: Option<DVector<f64>>,
    pub activation: Activation,
    /// `‖Hβ − T‖₂` as reported by the SVD solve.
    pub training_residual: f64,
}

impl ElmModel {
    pub fn untrained(input_weights: DMatrix<f64>, biases: DVector<f64>) -> Self {
        Self {
            input_weights,
            biases,
            output_weights: None,
            activation: Activation::Sigmoid,
            training_residual: f64::NAN,
        }
    }

    pub fn hidden_count(&self) -> usize {
        self.biases.len()
    }

    pub fn input_dim(&self) -> usize {
        self.input_weights.ncols()
    }

    pub fn is_trained(&self) -> bool {
        self.output_weights.is_some()
    }
}

/// Minimum-norm least-squares solution of `H β = T` via SVD. Singular values
/// below `max(N, M) · ε · σ_max` are treated as zero. Returns `β` and the
/// residual norm `‖Hβ − T‖₂`.
///
/// Tall matrices are first reduced by Householder QR; `H = QR` has the same
/// singular values and right singular vectors as `R`.
pub fn pinv_solve(h: &DMatrix<f64>, targets: &DVector<f64>) -> Result<(DVector<f64>, f64)> {
    let (n, m) = h.shape();
    if n > m {
        let qr = h.clone().qr();
        let r = qr.r();
        let mut qt_t = targets.clone();
        qr.q_tr_mul(&mut qt_t);
        let head = qt_t.rows(0, m).into_owned();
        let (beta, fitted) = svd_solve(&r, &head, n.max(m))?;
        let tail: f64 = qt_t.rows(m, n - m).norm_squared();
        let residual = ((head - fitted).norm_squared() + tail).sqrt();
        Ok((beta, residual))
    } else {
        let (beta, fitted) = svd_solve(h, targets, n.max(m))?;
        Ok((beta, (targets - fitted).norm()))
    }
}

/// Pseudoinverse solve of `a x = b`; also returns the projection of `b` onto
/// the retained column space.
fn svd_solve(
    a: &DMatrix<f64>,
    b: &DVector<f64>,
    cutoff_scale: usize,
) -> Result<(DVector<f64>, DVector<f64>)> {
    let (rows, cols) = a.shape();
    let tall = rows >= cols;
    let work = if tall { a.clone() } else { a.transpose() };
    let (w, v) = jacobi_svd(work)?;
    let norms: Vec<f64> = w.iter().map(|c| c.iter().map(|x| x * x).sum::<f64>().sqrt()).collect();
    let sigma_max = norms.iter().copied().fold(0.0, f64::max);
    let cutoff = cutoff_scale as f64 * f64::EPSILON * sigma_max;

    let mut x = DVector::<f64>::zeros(cols);
    let mut fitted = DVector::<f64>::zeros(rows);
    for ((wc, vc), &s) in w.iter().zip(&v).zip(&norms) {
        if s <= cutoff || s == 0.0 {
            continue;
        }
        if tall {
            // a = W V^T with orthogonal columns in W
            let coef = dot(wc, b.as_slice()) / (s * s);
            for (xi, vi) in x.iter_mut().zip(vc) {
                *xi += coef * vi;
            }
            for (fi, wi) in fitted.iter_mut().zip(wc) {
                *fi += coef * wi;
            }
        } else {
            // a^T = W V^T, so the left singular vectors of a are the columns of V
            let proj = dot(vc, b.as_slice());
            let coef = proj / (s * s);
            for (xi, wi) in x.iter_mut().zip(wc) {
                *xi += coef * wi;
            }
            for (fi, vi) in fitted.iter_mut().zip(vc) {
                *fi += proj * vi;
            }
        }
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numeric {
            iteration: 0,
            what: "non-finite output weights".into(),
        });
    }
    Ok((x, fitted))
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

type Columns = Vec<Vec<f64>>;

/// One-sided Jacobi: returns columns `W` (mutually orthogonal) and `V`
/// (orthonormal) with `a = W V^T`. Requires `rows >= cols`.
fn jacobi_svd(a: DMatrix<f64>) -> Result<(Columns, Columns)> {
    const MAX_SWEEPS: usize = 80;
    let cols = a.ncols();
    let mut w: Vec<Vec<f64>> = a.column_iter().map(|c| c.iter().copied().collect()).collect();
    let mut v: Vec<Vec<f64>> = (0..cols)
        .map(|j| (0..cols).map(|i| if i == j { 1.0 } else { 0.0 }).collect())
        .collect();
    let tol = f64::EPSILON * (a.nrows() as f64).sqrt();
    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..cols {
            for q in p + 1..cols {
                let alpha = dot(&w[p], &w[p]);
                let beta = dot(&w[q], &w[q]);
                let gamma = dot(&w[p], &w[q]);
                if gamma == 0.0 || gamma.abs() <= tol * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                let (lo, hi) = w.split_at_mut(q);
                rotate(&mut lo[p], &mut hi[0], c, s);
                let (lo, hi) = v.split_at_mut(q);
                rotate(&mut lo[p], &mut hi[0], c, s);
            }
        }
        if !rotated {
            return Ok((w, v));
        }
    }
    if w.iter().flatten().all(|x| x.is_finite()) {
        Ok((w, v))
    } else {
        Err(Error::Numeric {
            iteration: MAX_SWEEPS,
            what: "SVD did not converge".into(),
        })
    }
}

fn rotate(p: &mut [f64], q: &mut [f64], c: f64, s: f64) {
    for (x, y) in p.iter_mut().zip(q.iter_mut()) {
        let (a, b) = (*x, *y);
        *x = c * a - s * b;
        *y = s * a + c * b;
    }
}

/// Solves the output weights for fixed input weights and biases.
pub fn train(
    features: &DMatrix<f64>,
    targets: &[f64],
    weights: DMatrix<f64>,
    biases: DVector<f64>,
) -> Result<ElmModel> {
    if features.nrows() == 0 {
        return Err(Error::TooShort { needed: 0, got: 0 });
    }
    if features.nrows() != targets.len() {
        return Err(Error::Dimension(format!(
            "{} feature rows but {} targets",
            features.nrows(),
            targets.len()
        )));
    }
    if features.iter().chain(targets).any(|v| !v.is_finite()) {
        return Err(Error::Config("non-finite training data".into()));
    }
    let activation = Activation::Sigmoid;
    let h = hidden_matrix(&weights, &biases, features, activation)?;
    let (beta, residual) = pinv_solve(&h, &DVector::from_column_slice(targets))?;
    Ok(ElmModel {
        input_weights: weights,
        biases,
        output_weights: Some(beta),
        activation,
        training_residual: residual,
    })
}

pub fn predict(model: &ElmModel, features: &DMatrix<f64>) -> Result<Vec<f64>> {
    let beta = model.output_weights.as_ref().ok_or(Error::Untrained)?;
    let h = hidden_matrix(&model.input_weights, &model.biases, features, model.activation)?;
    Ok((h * beta).iter().copied().collect())
}

const FORMAT_TAG: &str = "elm-v1";
const BODY_MARKER: &str = "---";

/// Text form: `key=value` header lines, a `---` separator, then one CSV row
/// per hidden neuron: `bias,output_weight,w_0,...,w_{d-1}`. Extra metadata
/// keys are written after the built-in ones. Floats use the shortest
/// round-trip representation.
pub fn to_text(model: &ElmModel, metadata: &BTreeMap<String, String>) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "format={FORMAT_TAG}");
    let _ = writeln!(out, "activation={}", model.activation.tag());
    let _ = writeln!(out, "hidden_count={}", model.hidden_count());
    let _ = writeln!(out, "input_dim={}", model.input_dim());
    let _ = writeln!(out, "trained={}", model.is_trained());
    let _ = writeln!(out, "training_residual={}", model.training_residual);
    for (k, v) in metadata {
        let _ = writeln!(out, "{k}={v}");
    }
    let _ = writeln!(out, "{BODY_MARKER}");
    let mut header = String::from("bias,output_weight");
    for j in 0..model.input_dim() {
        let _ = write!(header, ",w{j}");
    }
    let _ = writeln!(out, "{header}");
    for i in 0..model.hidden_count() {
        let beta = model.output_weights.as_ref().map_or(f64::NAN, |b| b[i]);
        let _ = write!(out, "{},{}", model.biases[i], beta);
        for j in 0..model.input_dim() {
            let _ = write!(out, ",{}", model.input_weights[(i, j)]);
        }
        out.push('\n');
    }
    out
}

/// Parses [`to_text`] output; returns the model and the non-built-in
/// header keys.
pub fn from_text(text: &str) -> Result<(ElmModel, BTreeMap<String, String>)> {
    let bad = |msg: String| Error::Config(format!("model file: {msg}"));
    let mut lines = text.lines();
    let mut header = BTreeMap::new();
    for line in lines.by_ref() {
        if line == BODY_MARKER {
            break;
        }
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| bad(format!("header line {line:?} is not key=value")))?;
        header.insert(k.trim().to_string(), v.trim().to_string());
    }
    let mut take = |key: &str| header.remove(key).ok_or_else(|| bad(format!("missing {key}")));
    if take("format")? != FORMAT_TAG {
        return Err(bad("unsupported format".into()));
    }
    let activation = Activation::from_tag(&take("activation")?)?;
    let m: usize = take("hidden_count")?.parse().map_err(|_| bad("hidden_count".into()))?;
    let d: usize = take("input_dim")?.parse().map_err(|_| bad("input_dim".into()))?;
    let trained: bool = take("trained")?.parse().map_err(|_| bad("trained".into()))?;
    let residual: f64 = take("training_residual")?
        .parse()
        .map_err(|_| bad("training_residual".into()))?;

    lines.next(); // column names
    let mut biases = Vec::with_capacity(m);
    let mut betas = Vec::with_capacity(m);
    let mut weights = Vec::with_capacity(m * d);
    for (row, line) in lines.enumerate() {
        let cells: Vec<f64> = line
            .split(',')
            .map(|c| c.trim().parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| bad(format!("row {}", row + 1)))?;
        if cells.len() != d + 2 {
            return Err(bad(format!("row {} has {} cells, expected {}", row + 1, cells.len(), d + 2)));
        }
        biases.push(cells[0]);
        betas.push(cells[1]);
        weights.extend_from_slice(&cells[2..]);
    }
    if biases.len() != m {
        return Err(bad(format!("{} neuron rows, expected {m}", biases.len())));
    }
    let model = ElmModel {
        input_weights: DMatrix::from_row_slice(m, d, &weights),
        biases: DVector::from_vec(biases),
        output_weights: trained.then(|| DVector::from_vec(betas)),
        activation,
        training_residual: residual,
    };
    Ok((model, header))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::Rng;

    fn random_features(seed: u64, n: usize, d: usize) -> DMatrix<f64> {
        let mut r = rng::stream(seed, 7);
        DMatrix::from_fn(n, d, |_, _| r.random::<f64>())
    }

    fn random_targets(seed: u64, n: usize) -> Vec<f64> {
        let mut r = rng::stream(seed, 8);
        (0..n).map(|_| r.random::<f64>()).collect()
    }

    #[test]
    fn init_is_deterministic_and_in_range() {
        let cfg = ElmConfig::default();
        let a = init_random(&cfg, 7, 42).unwrap();
        let b = init_random(&cfg, 7, 42).unwrap();
        assert_eq!(a, b);
        assert!(a.0.iter().all(|w| (-1.0..1.0).contains(w)));
        assert!(a.1.iter().all(|w| (0.0..1.0).contains(w)));
        assert_ne!(a, init_random(&cfg, 7, 43).unwrap());
    }

    #[test]
    fn init_mean_is_centered() {
        let cfg = ElmConfig {
            hidden_count: 10_000,
            ..ElmConfig::default()
        };
        let (w, _) = init_random(&cfg, 10, 1).unwrap();
        let mean = w.mean();
        assert!(mean.abs() < 0.01, "{mean}");
    }

    #[test]
    fn empty_range_rejected() {
        let cfg = ElmConfig {
            weight_range: (0.0, 0.0),
            ..ElmConfig::default()
        };
        assert!(init_random(&cfg, 3, 1).is_err());
    }

    #[test]
    fn hidden_matrix_examples() {
        let x = random_features(1, 5, 3);
        let h = hidden_matrix(&DMatrix::zeros(4, 3), &DVector::zeros(4), &x, Activation::Sigmoid).unwrap();
        assert!(h.iter().all(|&v| v == 0.5));

        let h = hidden_matrix(
            &DMatrix::from_element(1, 1, 1.0),
            &DVector::from_element(1, 25.0),
            &DMatrix::from_element(1, 1, 0.0),
            Activation::Sigmoid,
        )
        .unwrap();
        assert!((h[(0, 0)] - 1.0).abs() < 1e-9);

        let h = hidden_matrix(
            &DMatrix::from_element(1, 1, 1.0),
            &DVector::zeros(1),
            &DMatrix::from_element(1, 1, 3f64.ln()),
            Activation::Sigmoid,
        )
        .unwrap();
        assert!((h[(0, 0)] - 0.75).abs() < 1e-15);

        assert!(hidden_matrix(&DMatrix::zeros(4, 2), &DVector::zeros(4), &x, Activation::Sigmoid).is_err());
    }

    #[test]
    fn scalar_pseudoinverse() {
        let (beta, res) =
            pinv_solve(&DMatrix::from_element(1, 1, 0.5), &DVector::from_element(1, 1.0)).unwrap();
        assert!((beta[0] - 2.0).abs() < 1e-15);
        assert!(res < 1e-15);
    }

    #[test]
    fn exact_interpolation_when_hidden_exceeds_samples() {
        let cfg = ElmConfig::default();
        let x = random_features(3, 30, 7);
        let t = random_targets(3, 30);
        let (w, b) = init_random(&cfg, 7, 3).unwrap();
        let model = train(&x, &t, w, b).unwrap();
        let y = predict(&model, &x).unwrap();
        let rmse = (y.iter().zip(&t).map(|(a, b)| (a - b).powi(2)).sum::<f64>() / 30.0).sqrt();
        assert!(rmse < 1e-6, "{rmse}");
    }

    #[test]
    fn rank_deficient_residual_is_orthogonal() {
        // duplicated rows with contradicting targets
        let base = random_features(4, 10, 7);
        let x = DMatrix::from_fn(20, 7, |i, j| base[(i % 10, j)]);
        let t: Vec<f64> = (0..20).map(|i| if i < 10 { 1.0 } else { -1.0 } + 0.1 * i as f64).collect();
        let (w, b) = init_random(&ElmConfig::default(), 7, 4).unwrap();
        let h = hidden_matrix(&w, &b, &x, Activation::Sigmoid).unwrap();
        let model = train(&x, &t, w, b).unwrap();
        let beta = model.output_weights.unwrap();
        let r = &h * &beta - DVector::from_vec(t);
        let grad = h.transpose() * r;
        assert!(grad.amax() < 1e-8, "{}", grad.amax());
    }

    #[test]
    fn predict_examples() {
        let x = random_features(5, 6, 2);
        let model = ElmModel {
            output_weights: Some(DVector::zeros(3)),
            ..ElmModel::untrained(DMatrix::zeros(3, 2), DVector::zeros(3))
        };
        assert!(predict(&model, &x).unwrap().iter().all(|&v| v == 0.0));

        assert!(matches!(
            predict(&ElmModel::untrained(DMatrix::zeros(3, 2), DVector::zeros(3)), &x),
            Err(Error::Untrained)
        ));

        let (w, b) = init_random(&ElmConfig::default(), 2, 5).unwrap();
        let mut m = train(&x, &random_targets(5, 6), w, b).unwrap();
        let y = predict(&m, &x).unwrap();
        m.output_weights = m.output_weights.map(|b| b * 2.0);
        let y2 = predict(&m, &x).unwrap();
        for (a, b) in y.iter().zip(&y2) {
            assert!((2.0 * a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn reported_residual_matches_prediction() {
        let x = random_features(6, 80, 7);
        let t = random_targets(6, 80);
        let (w, b) = init_random(&ElmConfig::default(), 7, 6).unwrap();
        let model = train(&x, &t, w, b).unwrap();
        let y = predict(&model, &x).unwrap();
        let direct = y.iter().zip(&t).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
        assert!((direct - model.training_residual).abs() < 1e-10);
    }

    #[test]
    fn text_round_trip() {
        let x = random_features(7, 20, 3);
        let (w, b) = init_random(&ElmConfig { hidden_count: 5, ..Default::default() }, 3, 7).unwrap();
        let model = train(&x, &random_targets(7, 20), w, b).unwrap();
        let mut meta = BTreeMap::new();
        meta.insert("lag_count".to_string(), "3".to_string());
        let text = to_text(&model, &meta);
        let (back, meta_back) = from_text(&text).unwrap();
        assert_eq!(back, model);
        assert_eq!(meta_back, meta);
        assert!(from_text("format=elm-v1\n").is_err());
    }

    proptest! {
        #[test]
        fn least_squares_is_locally_optimal(seed in 0u64..500, dir_seed in 0u64..500) {
            let x = random_features(seed, 50, 7);
            let t = random_targets(seed, 50);
            let (w, b) = init_random(&ElmConfig::default(), 7, seed).unwrap();
            let h = hidden_matrix(&w, &b, &x, Activation::Sigmoid).unwrap();
            let model = train(&x, &t, w, b).unwrap();
            let beta = model.output_weights.unwrap();
            let tv = DVector::from_vec(t);
            let base = (&h * &beta - &tv).norm();
            let mut r = rng::stream(dir_seed, 9);
            let dir = DVector::from_fn(40, |_, _| r.random::<f64>() - 0.5);
            let delta = dir.normalize() * 1e-3;
            let moved = (&h * (&beta + delta) - &tv).norm();
            prop_assert!(moved >= base - 1e-12);
        }
    }
}
