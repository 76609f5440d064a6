// Builds an experiment from flat `key=value` text, applies an override,
// and runs one seeded forecast from a CSV file.

use load_forecast::config;
use load_forecast::pipeline::{self, ExperimentConfig, ModelKind};

const TEXT: &str = "\
# quick IPSO-ELM run on a CSV series
models=ipso_elm
data.source=file
data.column=load
lag_count=7
pso.population=12
pso.iterations=15
";

pub fn run_example() -> load_forecast::Result<()> {
    let dir = std::env::temp_dir().join(format!("load-forecast-example-{}", std::process::id()));
    std::fs::create_dir_all(&dir).map_err(|e| load_forecast::Error::Io { path: dir.clone(), source: e })?;
    let csv = dir.join("load.csv");
    let mut body = String::from("time,load\n");
    for t in 0..500 {
        let jitter = ((t * 7919) % 97) as f64 / 97.0 - 0.5;
        let v = 80.0 + 20.0 * (std::f64::consts::TAU * t as f64 / 96.0).sin() + 3.0 * (t as f64 * 1.3).sin() + 2.0 * jitter;
        body.push_str(&format!("t{t},{v}\n"));
    }
    std::fs::write(&csv, body).map_err(|e| load_forecast::Error::Io { path: csv.clone(), source: e })?;

    let mut pairs = config::parse_pairs(TEXT)?;
    pairs.insert("data.path".into(), csv.display().to_string());
    pairs.insert("elm.hidden_count".into(), "30".into());
    let cfg = ExperimentConfig::from_pairs(pairs)?;
    cfg.validate()?;

    let series = cfg.data.load()?;
    let run = pipeline::run_single(ModelKind::IpsoElm, &series, &cfg, 42)?;
    println!("{} samples, test MAPE {:.3}%, RMSE {:.3}", series.len(), run.metrics.mape, run.metrics.rmse);
    println!("search history: {:.4} -> {:.4}", run.branches[0].search_history[0], run.branches[0].search_history.last().unwrap());
    println!("--- resolved config ---\n{}", cfg.to_text());
    let _ = std::fs::remove_dir_all(&dir);
    Ok(())
}

#[allow(dead_code)]
fn main() -> load_forecast::Result<()> {
    run_example()
}
