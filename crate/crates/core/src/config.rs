//! Flat `key=value` experiment configuration.
//!
//! One key per line, nested settings by dotted prefix (`pso.population=30`),
//! `#` starts a comment line. Unknown keys are errors. Serialization writes
//! every key in a fixed order, so a parsed echo reproduces the run.

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::str::FromStr;

use crate::elm::Activation;
use crate::error::{Error, Result};
use crate::mi::{BinCount, RangePolicy};
use crate::pipeline::{DataSource, ExperimentConfig, ModelKind};
use crate::series::Column;
use crate::synthetic::{Sinusoid, SyntheticSpec};
use crate::vmd::OmegaInit;

/// Parses `key=value` lines. Later duplicates are rejected.
pub fn parse_pairs(text: &str) -> Result<BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = parse_assignment(line).map_err(|e| Error::Config(format!("line {}: {e}", i + 1)))?;
        if out.insert(k.clone(), v).is_some() {
            return Err(Error::Config(format!("line {}: duplicate key {k}", i + 1)));
        }
    }
    Ok(out)
}

/// Splits `key=value`, trimming both sides.
pub fn parse_assignment(s: &str) -> std::result::Result<(String, String), String> {
    let (k, v) = s.split_once('=').ok_or_else(|| format!("expected key=value, got {s:?}"))?;
    let k = k.trim();
    if k.is_empty() {
        return Err(format!("empty key in {s:?}"));
    }
    Ok((k.to_string(), v.trim().to_string()))
}

struct Reader {
    pairs: BTreeMap<String, String>,
}

impl Reader {
    fn take<T: FromStr>(&mut self, key: &str, slot: &mut T) -> Result<()>
    where
        T::Err: std::fmt::Display,
    {
        if let Some(v) = self.pairs.remove(key) {
            *slot = v
                .parse()
                .map_err(|e| Error::Config(format!("{key}={v}: {e}")))?;
        }
        Ok(())
    }

    fn take_with<T>(&mut self, key: &str, slot: &mut T, parse: impl Fn(&str) -> Result<T>) -> Result<()> {
        if let Some(v) = self.pairs.remove(key) {
            *slot = parse(&v).map_err(|e| Error::Config(format!("{key}={v}: {e}")))?;
        }
        Ok(())
    }
}

fn parse_models(s: &str) -> Result<Vec<ModelKind>> {
    s.split(',').map(|t| t.trim().parse()).collect()
}

fn parse_components(s: &str) -> Result<Vec<Sinusoid>> {
    if s.trim().is_empty() {
        return Ok(Vec::new());
    }
    s.split(';')
        .map(|part| {
            let f: Vec<f64> = part
                .split(':')
                .map(|x| x.trim().parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|_| Error::Config(format!("bad component {part:?}")))?;
            match f[..] {
                [a, p, ph] => Ok(Sinusoid::new(a, p, ph)),
                _ => Err(Error::Config(format!("component {part:?} is not amplitude:period:phase"))),
            }
        })
        .collect()
}

fn format_components(c: &[Sinusoid]) -> String {
    c.iter()
        .map(|s| format!("{}:{}:{}", s.amplitude, s.period, s.phase))
        .collect::<Vec<_>>()
        .join(";")
}

fn parse_bins(s: &str) -> Result<BinCount> {
    if s == "sqrt" {
        return Ok(BinCount::SquareRoot);
    }
    s.parse()
        .map(BinCount::Fixed)
        .map_err(|_| Error::Config(format!("bins must be sqrt or a count, got {s:?}")))
}

fn parse_range(s: &str) -> Result<RangePolicy> {
    if s == "data" {
        return Ok(RangePolicy::DataMinMax);
    }
    let (lo, hi) = s
        .split_once(':')
        .ok_or_else(|| Error::Config(format!("range must be data or lo:hi, got {s:?}")))?;
    let p = |x: &str| x.trim().parse::<f64>().map_err(|_| Error::Config(format!("bad range bound {x:?}")));
    Ok(RangePolicy::Explicit(p(lo)?, p(hi)?))
}

fn parse_activation(s: &str) -> Result<Activation> {
    Activation::from_tag(s)
}

fn parse_omega(s: &str) -> Result<OmegaInit> {
    s.parse()
}

impl ExperimentConfig {
    /// Defaults overlaid with `pairs`; errors on unknown keys.
    pub fn from_pairs(pairs: BTreeMap<String, String>) -> Result<Self> {
        let mut r = Reader { pairs };
        let mut c = ExperimentConfig::default();

        r.take_with("models", &mut c.models, parse_models)?;

        let mut source = match &c.data {
            DataSource::Synthetic(_) => "synthetic".to_string(),
            DataSource::File { .. } => "file".to_string(),
        };
        r.take("data.source", &mut source)?;
        let mut path = String::new();
        let mut column = Column::Last;
        r.take("data.path", &mut path)?;
        r.take("data.column", &mut column)?;
        let mut syn = SyntheticSpec::default();
        r.take("synthetic.length", &mut syn.length)?;
        r.take("synthetic.base_level", &mut syn.base_level)?;
        r.take("synthetic.trend_slope", &mut syn.trend_slope)?;
        r.take_with("synthetic.components", &mut syn.components, parse_components)?;
        r.take("synthetic.noise_std", &mut syn.noise_std)?;
        r.take("synthetic.seed", &mut syn.seed)?;
        c.data = match source.as_str() {
            "synthetic" => DataSource::Synthetic(syn),
            "file" if !path.is_empty() => DataSource::File {
                path: PathBuf::from(path),
                column,
            },
            "file" => return Err(Error::Config("data.source=file needs data.path".into())),
            other => return Err(Error::Config(format!("data.source must be file or synthetic, got {other:?}"))),
        };

        r.take("lag_count", &mut c.lag_count)?;
        r.take("train_fraction", &mut c.train_fraction)?;
        r.take("run_count", &mut c.run_count)?;
        r.take("base_seed", &mut c.base_seed)?;

        r.take("elm.hidden_count", &mut c.elm.hidden_count)?;
        r.take_with("elm.activation", &mut c.elm.activation, parse_activation)?;
        r.take("elm.weight_low", &mut c.elm.weight_range.0)?;
        r.take("elm.weight_high", &mut c.elm.weight_range.1)?;
        r.take("elm.bias_low", &mut c.elm.bias_range.0)?;
        r.take("elm.bias_high", &mut c.elm.bias_range.1)?;

        r.take("pso.population", &mut c.pso.population)?;
        r.take("pso.iterations", &mut c.pso.iterations)?;
        r.take("pso.cognitive", &mut c.pso.cognitive)?;
        r.take("pso.social", &mut c.pso.social)?;
        r.take("pso.inertia", &mut c.pso.inertia)?;
        r.take("pso.velocity_clamp_fraction", &mut c.pso.velocity_clamp_fraction)?;
        r.take("pso.validation_fraction", &mut c.validation_fraction)?;

        r.take("chaos.chaos_coefficient", &mut c.chaos.chaos_coefficient)?;
        r.take("chaos.shrink_factor", &mut c.chaos.shrink_factor)?;
        r.take("chaos.beta_a", &mut c.chaos.beta_a)?;
        r.take("chaos.beta_b", &mut c.chaos.beta_b)?;

        r.take("vmd.mode_count", &mut c.vmd.mode_count)?;
        r.take("vmd.bandwidth_penalty", &mut c.vmd.bandwidth_penalty)?;
        r.take("vmd.ascent_rate", &mut c.vmd.ascent_rate)?;
        r.take("vmd.tolerance", &mut c.vmd.tolerance)?;
        r.take("vmd.max_iterations", &mut c.vmd.max_iterations)?;
        r.take_with("vmd.omega_init", &mut c.vmd.omega_init, parse_omega)?;

        r.take_with("histogram.bins", &mut c.histogram.bins, parse_bins)?;
        r.take_with("histogram.range", &mut c.histogram.range, parse_range)?;

        if let Some(k) = r.pairs.keys().next() {
            return Err(Error::Config(format!("unknown key {k}")));
        }
        Ok(c)
    }

    pub fn parse(text: &str) -> Result<Self> {
        Self::from_pairs(parse_pairs(text)?)
    }

    /// Every key, in a fixed order.
    pub fn to_pairs(&self) -> Vec<(String, String)> {
        let mut out: Vec<(&str, String)> = Vec::new();
        let models = self.models.iter().map(|m| m.tag()).collect::<Vec<_>>().join(",");
        out.push(("models", models));
        match &self.data {
            DataSource::File { path, column } => {
                out.push(("data.source", "file".into()));
                out.push(("data.path", path.display().to_string()));
                out.push(("data.column", column.to_string()));
            }
            DataSource::Synthetic(s) => {
                out.push(("data.source", "synthetic".into()));
                out.push(("synthetic.length", s.length.to_string()));
                out.push(("synthetic.base_level", s.base_level.to_string()));
                out.push(("synthetic.trend_slope", s.trend_slope.to_string()));
                out.push(("synthetic.components", format_components(&s.components)));
                out.push(("synthetic.noise_std", s.noise_std.to_string()));
                out.push(("synthetic.seed", s.seed.to_string()));
            }
        }
        out.push(("lag_count", self.lag_count.to_string()));
        out.push(("train_fraction", self.train_fraction.to_string()));
        out.push(("run_count", self.run_count.to_string()));
        out.push(("base_seed", self.base_seed.to_string()));

        out.push(("elm.hidden_count", self.elm.hidden_count.to_string()));
        out.push(("elm.activation", self.elm.activation.tag().into()));
        out.push(("elm.weight_low", self.elm.weight_range.0.to_string()));
        out.push(("elm.weight_high", self.elm.weight_range.1.to_string()));
        out.push(("elm.bias_low", self.elm.bias_range.0.to_string()));
        out.push(("elm.bias_high", self.elm.bias_range.1.to_string()));

        out.push(("pso.population", self.pso.population.to_string()));
        out.push(("pso.iterations", self.pso.iterations.to_string()));
        out.push(("pso.cognitive", self.pso.cognitive.to_string()));
        out.push(("pso.social", self.pso.social.to_string()));
        out.push(("pso.inertia", self.pso.inertia.to_string()));
        out.push(("pso.velocity_clamp_fraction", self.pso.velocity_clamp_fraction.to_string()));
        out.push(("pso.validation_fraction", self.validation_fraction.to_string()));

        out.push(("chaos.chaos_coefficient", self.chaos.chaos_coefficient.to_string()));
        out.push(("chaos.shrink_factor", self.chaos.shrink_factor.to_string()));
        out.push(("chaos.beta_a", self.chaos.beta_a.to_string()));
        out.push(("chaos.beta_b", self.chaos.beta_b.to_string()));

        out.push(("vmd.mode_count", self.vmd.mode_count.to_string()));
        out.push(("vmd.bandwidth_penalty", self.vmd.bandwidth_penalty.to_string()));
        out.push(("vmd.ascent_rate", self.vmd.ascent_rate.to_string()));
        out.push(("vmd.tolerance", self.vmd.tolerance.to_string()));
        out.push(("vmd.max_iterations", self.vmd.max_iterations.to_string()));
        out.push(("vmd.omega_init", self.vmd.omega_init.to_string()));

        out.push((
            "histogram.bins",
            match self.histogram.bins {
                BinCount::SquareRoot => "sqrt".into(),
                BinCount::Fixed(n) => n.to_string(),
            },
        ));
        out.push((
            "histogram.range",
            match self.histogram.range {
                RangePolicy::DataMinMax => "data".into(),
                RangePolicy::Explicit(lo, hi) => format!("{lo}:{hi}"),
            },
        ));
        out.into_iter().map(|(k, v)| (k.to_string(), v)).collect()
    }

    pub fn to_text(&self) -> String {
        self.to_pairs().into_iter().map(|(k, v)| format!("{k}={v}\n")).collect()
    }
}
