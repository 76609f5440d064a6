//! Command-line front end. [`run`] returns the process exit code: 0 on
//! success, 1 on usage errors (nothing written), 2 on runtime failures
//! (files written by the failed invocation are removed).

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::config::{parse_assignment, parse_pairs};
use crate::elm;
use crate::error::{Error, Result};
use crate::metrics;
use crate::mi;
use crate::pipeline::{self, ExperimentConfig, ModelKind};
use crate::plot;
use crate::series::{self, Column, ScalingParams};
use crate::vmd;

#[derive(Debug, Parser)]
#[command(name = "load-forecast", version, about = "Decomposition-based short-term load forecasting")]
struct Cli {
    /// Worker threads (outputs do not depend on this).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Settings {
    /// Flat key=value config file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override a config key, e.g. `--set vmd.mode_count=7`.
    #[arg(long = "set", value_name = "KEY=VALUE", value_parser = parse_assignment)]
    overrides: Vec<(String, String)>,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct Input {
    /// CSV with a value column (optionally timestamp,value).
    #[arg(long)]
    input: PathBuf,
    /// Value column: index, header name, or `last`.
    #[arg(long, default_value = "last")]
    column: String,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum TrainModel {
    Elm,
    PsoElm,
    IpsoElm,
}

impl From<TrainModel> for ModelKind {
    fn from(m: TrainModel) -> Self {
        match m {
            TrainModel::Elm => ModelKind::Elm,
            TrainModel::PsoElm => ModelKind::PsoElm,
            TrainModel::IpsoElm => ModelKind::IpsoElm,
        }
    }
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Split a series into modes; writes imf.csv.
    Decompose {
        #[command(flatten)]
        input: Input,
        #[command(flatten)]
        settings: Settings,
    },
    /// Decompose and split the modes into low and high frequency series;
    /// writes partition.csv.
    Partition {
        #[command(flatten)]
        input: Input,
        #[command(flatten)]
        settings: Settings,
    },
    /// Fit one model to a whole series; writes model.elm.
    Train {
        #[command(flatten)]
        input: Input,
        #[arg(long, value_enum, default_value = "ipso-elm")]
        model: TrainModel,
        #[arg(long)]
        seed: u64,
        #[command(flatten)]
        settings: Settings,
    },
    /// One-step-ahead predictions of a saved model over a series; writes
    /// predictions.csv.
    Forecast {
        #[command(flatten)]
        input: Input,
        /// Model file written by `train`.
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Repeated-run comparison of the configured models.
    Experiment {
        #[arg(long)]
        seed: u64,
        #[command(flatten)]
        settings: Settings,
    },
    /// Render a predictions CSV as an SVG line chart; writes plot.svg.
    Plot {
        /// CSV with `index,actual,predicted` columns.
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value = "actual vs predicted")]
        title: String,
        #[arg(long)]
        out: PathBuf,
    },
}

enum Failure {
    Usage(String),
    Runtime(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Runtime(e)
    }
}

/// Files to write, produced before anything touches the disk.
struct Outputs {
    dir: PathBuf,
    files: Vec<(String, String)>,
}

impl Outputs {
    fn new(dir: &Path) -> Self {
        Self {
            dir: dir.to_path_buf(),
            files: Vec::new(),
        }
    }

    fn add(&mut self, name: impl Into<String>, contents: String) {
        self.files.push((name.into(), contents));
    }

    /// Writes every file or, on the first failure, removes what was written.
    fn commit(self) -> Result<Vec<PathBuf>> {
        let created_dir = !self.dir.exists();
        let mut written = Vec::new();
        let result = (|| {
            fs::create_dir_all(&self.dir).map_err(|e| Error::io(&self.dir, e))?;
            for (name, contents) in &self.files {
                let path = self.dir.join(name);
                written.push(path.clone());
                fs::write(&path, contents).map_err(|e| Error::io(&path, e))?;
            }
            Ok(())
        })();
        match result {
            Ok(()) => Ok(written),
            Err(e) => {
                for p in &written {
                    let _ = fs::remove_file(p);
                }
                if created_dir {
                    let _ = fs::remove_dir(&self.dir);
                }
                Err(e)
            }
        }
    }
}

fn load_config(settings: &Settings) -> std::result::Result<ExperimentConfig, Failure> {
    let mut pairs = match &settings.config {
        Some(path) => {
            let text = fs::read_to_string(path)
                .map_err(|e| Failure::Usage(format!("cannot read config {}: {e}", path.display())))?;
            parse_pairs(&text).map_err(|e| Failure::Usage(e.to_string()))?
        }
        None => BTreeMap::new(),
    };
    for (k, v) in &settings.overrides {
        pairs.insert(k.clone(), v.clone());
    }
    let cfg = ExperimentConfig::from_pairs(pairs).map_err(|e| Failure::Usage(e.to_string()))?;
    cfg.validate().map_err(|e| Failure::Usage(e.to_string()))?;
    Ok(cfg)
}

fn load_input(input: &Input) -> Result<series::TimeSeries> {
    let column: Column = input.column.parse().unwrap_or(Column::Last);
    series::load_csv(&input.input, &column)
}

fn decompose(input: &Input, settings: &Settings) -> std::result::Result<Outputs, Failure> {
    let cfg = load_config(settings)?;
    let s = load_input(input)?;
    let modes = vmd::decompose(s.values(), &cfg.vmd)?;
    let mut text = String::from("# center_frequencies=");
    text.push_str(&join(&modes.center_frequencies));
    text.push('\n');
    let header: Vec<String> = (1..=modes.mode_count()).map(|k| format!("imf{k}")).collect();
    text.push_str(&header.join(","));
    text.push('\n');
    for t in 0..modes.signal_len() {
        let row: Vec<f64> = modes.modes.iter().map(|m| m[t]).collect();
        text.push_str(&join(&row));
        text.push('\n');
    }
    eprintln!(
        "{} modes after {} iterations (update norm {:e})",
        modes.mode_count(),
        modes.iterations_used,
        modes.final_update_norm
    );
    let mut out = Outputs::new(&settings.out);
    out.add("imf.csv", text);
    Ok(out)
}

fn partition(input: &Input, settings: &Settings) -> std::result::Result<Outputs, Failure> {
    let cfg = load_config(settings)?;
    let s = load_input(input)?;
    let modes = vmd::decompose(s.values(), &cfg.vmd)?;
    let split = mi::find_boundary(&modes, &cfg.histogram)?;
    let mut text = format!(
        "# boundary_index={}\n# adjacent_mi={}\nlow,high\n",
        split.boundary_index,
        join(&split.adjacent_mi)
    );
    for (l, h) in split.low_series.iter().zip(&split.high_series) {
        text.push_str(&format!("{l},{h}\n"));
    }
    println!("boundary_index={}", split.boundary_index);
    let mut out = Outputs::new(&settings.out);
    out.add("partition.csv", text);
    Ok(out)
}

fn train(input: &Input, model: TrainModel, seed: u64, settings: &Settings) -> std::result::Result<Outputs, Failure> {
    let cfg = load_config(settings)?;
    let s = load_input(input)?;
    let kind = ModelKind::from(model);
    let mut warnings = Vec::new();
    let fitted = pipeline::fit_elm("series", s.values(), kind.search_init(), &cfg, seed, &mut warnings)?;
    for w in &warnings {
        eprintln!("warning: {w}");
    }
    let mut meta = BTreeMap::new();
    meta.insert("model".to_string(), kind.tag().to_string());
    meta.insert("lag_count".to_string(), cfg.lag_count.to_string());
    meta.insert("scale_min".to_string(), fitted.scaling.min.to_string());
    meta.insert("scale_max".to_string(), fitted.scaling.max.to_string());
    meta.insert("seed".to_string(), seed.to_string());
    let mut out = Outputs::new(&settings.out);
    out.add("model.elm", elm::to_text(&fitted.model, &meta));
    Ok(out)
}

fn meta_value<T: std::str::FromStr>(meta: &BTreeMap<String, String>, key: &str) -> Result<T> {
    meta.get(key)
        .and_then(|v| v.parse().ok())
        .ok_or_else(|| Error::Config(format!("model file lacks a valid {key}")))
}

fn forecast(input: &Input, model_path: &Path, out_dir: &Path) -> std::result::Result<Outputs, Failure> {
    let text = fs::read_to_string(model_path).map_err(|e| Error::io(model_path, e))?;
    let (model, meta) = elm::from_text(&text)?;
    let lag: usize = meta_value(&meta, "lag_count")?;
    let scaling = ScalingParams::new(meta_value(&meta, "scale_min")?, meta_value(&meta, "scale_max")?)?;
    let s = load_input(input)?;
    let scaled: Vec<f64> = s.values().iter().map(|&v| scaling.scale(v)).collect();
    let ds = series::lag_windows(&scaled, lag, 1)?;
    let predicted: Vec<f64> = elm::predict(&model, &ds.features)?
        .into_iter()
        .map(|v| scaling.unscale(v))
        .collect();
    let actual = &s.values()[lag..];
    let mut csv = String::from("index,actual,predicted\n");
    for (i, (a, p)) in actual.iter().zip(&predicted).enumerate() {
        csv.push_str(&format!("{},{a},{p}\n", i + lag));
    }
    println!("rmse={}", metrics::rmse(actual, &predicted)?);
    match metrics::mape(actual, &predicted) {
        Ok(m) => println!("mape={m}"),
        Err(e) => eprintln!("warning: {e}"),
    }
    let mut out = Outputs::new(out_dir);
    out.add("predictions.csv", csv);
    Ok(out)
}

fn experiment(seed: u64, settings: &Settings) -> std::result::Result<Outputs, Failure> {
    let mut cfg = load_config(settings)?;
    cfg.base_seed = seed;
    let s = cfg.data.load()?;
    let reports = pipeline::compare(&s, &cfg)?;
    let mut out = Outputs::new(&settings.out);
    out.add("metrics.csv", pipeline::metrics_csv(&reports));
    let headline = reports.last().expect("at least one model");
    out.add("predictions.csv", pipeline::predictions_csv(headline));
    for r in &reports {
        out.add(format!("predictions_{}.csv", r.model.tag()), pipeline::predictions_csv(r));
        print!("{}", metrics::summary_block(r.model.tag(), &r.summary));
    }
    out.add("config_echo.cfg", cfg.to_text());
    let warnings: Vec<String> = reports
        .iter()
        .flat_map(|r| r.warnings.iter().map(move |w| format!("{}: {w}\n", r.model.tag())))
        .collect();
    if !warnings.is_empty() {
        out.add("warnings.txt", warnings.concat());
    }
    Ok(out)
}

fn plot_cmd(input: &Path, title: &str, out_dir: &Path) -> std::result::Result<Outputs, Failure> {
    let text = fs::read_to_string(input).map_err(|e| Error::io(input, e))?;
    let chart = plot::chart_from_predictions_csv(&text, title)?;
    let mut out = Outputs::new(out_dir);
    out.add("plot.svg", plot::render_svg(&chart));
    Ok(out)
}

fn join(v: &[f64]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
}

fn dispatch(command: &Command) -> std::result::Result<Outputs, Failure> {
    match command {
        Command::Decompose { input, settings } => decompose(input, settings),
        Command::Partition { input, settings } => partition(input, settings),
        Command::Train {
            input,
            model,
            seed,
            settings,
        } => train(input, *model, *seed, settings),
        Command::Forecast { input, model, out } => forecast(input, model, out),
        Command::Experiment { seed, settings } => experiment(*seed, settings),
        Command::Plot { input, title, out } => plot_cmd(input, title, out),
    }
}

pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let pool = match rayon::ThreadPoolBuilder::new()
        .num_threads(cli.threads.unwrap_or(0))
        .build()
    {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: cannot start worker threads: {e}");
            return 2;
        }
    };
    let result = pool.install(|| dispatch(&cli.command));
    match result.and_then(|o| o.commit().map_err(Failure::Runtime)) {
        Ok(paths) => {
            let mut stdout = std::io::stdout().lock();
            for p in paths {
                let _ = writeln!(stdout, "wrote {}", p.display());
            }
            0
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            1
        }
        Err(Failure::Runtime(e)) => {
            eprintln!("error: {e}");
            2
        }
    }
}
