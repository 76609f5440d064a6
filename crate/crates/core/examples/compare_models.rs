// Repeated-run comparison of the four model variants on the default
// synthetic series. Pass an output directory to also write the metrics
// table, predictions and a chart.
//
// `cargo run --release --example compare_models -- out/`

use std::path::Path;

use load_forecast::pipeline::{self, ExperimentConfig};
use load_forecast::plot;

pub fn run_example() -> load_forecast::Result<()> {
    let mut cfg = ExperimentConfig {
        run_count: 3,
        ..ExperimentConfig::default()
    };
    cfg.pso.iterations = 20;
    compare(&cfg, None)
}

fn compare(cfg: &ExperimentConfig, out: Option<&Path>) -> load_forecast::Result<()> {
    let series = cfg.data.load()?;
    let reports = pipeline::compare(&series, cfg)?;
    print!("{}", pipeline::metrics_csv(&reports));
    for r in &reports {
        for w in &r.warnings {
            println!("{}: {w}", r.model);
        }
    }
    if let Some(dir) = out {
        let io = |p: &Path, e| load_forecast::Error::Io { path: p.to_path_buf(), source: e };
        std::fs::create_dir_all(dir).map_err(|e| io(dir, e))?;
        let last = reports.last().expect("models configured");
        let preds = pipeline::predictions_csv(last);
        let chart = plot::chart_from_predictions_csv(&preds, &format!("{} forecast", last.model))?;
        for (name, body) in [
            ("metrics.csv", pipeline::metrics_csv(&reports)),
            ("predictions.csv", preds.clone()),
            ("plot.svg", plot::render_svg(&chart)),
        ] {
            let p = dir.join(name);
            std::fs::write(&p, body).map_err(|e| io(&p, e))?;
        }
        println!("wrote {}", dir.display());
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> load_forecast::Result<()> {
    let out = std::env::args().nth(1);
    let cfg = ExperimentConfig {
        run_count: 10,
        ..ExperimentConfig::default()
    };
    compare(&cfg, out.as_deref().map(Path::new))
}
