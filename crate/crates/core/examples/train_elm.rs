// Fits an extreme learning machine to lagged load values, scores it on the
// held-out tail, and round-trips the model through its text format.

use std::collections::BTreeMap;

use load_forecast::elm::{self, ElmConfig};
use load_forecast::metrics;
use load_forecast::series::{self, ScalingParams, SplitSpec};
use load_forecast::synthetic::{generate_synthetic, SyntheticSpec};

pub fn run_example() -> load_forecast::Result<()> {
    let raw = generate_synthetic(&SyntheticSpec::default())?;
    let all = series::make_lag_dataset(&raw, 7, 1)?;
    let (train_rows, _) = series::chrono_split(&all, &SplitSpec::new(0.75)?)?;
    let cutoff = train_rows.target_position(train_rows.len() - 1) + 1;

    let scaling = ScalingParams::fit(&raw.values()[..cutoff])?;
    let scaled = series::minmax_apply(&raw, &scaling);
    let ds = series::make_lag_dataset(&scaled, 7, 1)?;
    let (train, test) = series::chrono_split(&ds, &SplitSpec::new(0.75)?)?;

    let cfg = ElmConfig::default();
    let (w, b) = elm::init_random(&cfg, 7, 1)?;
    let model = elm::train(&train.features, &train.targets, w, b)?;
    let predicted: Vec<f64> = elm::predict(&model, &test.features)?
        .into_iter()
        .map(|v| scaling.unscale(v))
        .collect();
    let actual: Vec<f64> = test.targets.iter().map(|&v| scaling.unscale(v)).collect();
    println!("test rows: {}", test.len());
    println!("MAPE {:.3}%  RMSE {:.3}", metrics::mape(&actual, &predicted)?, metrics::rmse(&actual, &predicted)?);

    let text = elm::to_text(&model, &BTreeMap::from([("lag_count".to_string(), "7".to_string())]));
    let (restored, meta) = elm::from_text(&text)?;
    assert_eq!(elm::predict(&restored, &test.features)?, elm::predict(&model, &test.features)?);
    println!("model text: {} bytes, metadata {meta:?}", text.len());
    Ok(())
}

#[allow(dead_code)]
fn main() -> load_forecast::Result<()> {
    run_example()
}
