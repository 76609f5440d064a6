// Decomposes a synthetic load series into seven modes, then splits them into
// a low- and a high-frequency series at the first mutual-information minimum.

use load_forecast::mi::{self, HistogramSpec};
use load_forecast::synthetic::{generate_synthetic, SyntheticSpec};
use load_forecast::vmd::{self, VmdConfig};

pub fn run_example() -> load_forecast::Result<()> {
    let series = generate_synthetic(&SyntheticSpec::default())?;
    let modes = vmd::decompose(series.values(), &VmdConfig::default())?;
    let split = mi::find_boundary(&modes, &HistogramSpec::default())?;
    for (k, f) in modes.center_frequencies.iter().enumerate() {
        println!("mode {k}: centre {f:.4}");
    }
    for (n, v) in split.adjacent_mi.iter().enumerate() {
        println!("MI(mode {n}, mode {}) = {v:.4}", n + 1);
    }
    println!("low frequency: modes 0..={}", split.boundary_index);
    let head: Vec<String> = (0..4)
        .map(|t| format!("{:.2}+{:.2}", split.low_series[t], split.high_series[t]))
        .collect();
    println!("first samples (low+high): {}", head.join(", "));
    Ok(())
}

#[allow(dead_code)]
fn main() -> load_forecast::Result<()> {
    run_example()
}
