// Splits a two-tone signal into modes and checks that their sum rebuilds it.

use load_forecast::vmd::{self, VmdConfig};

pub fn run_example() -> load_forecast::Result<()> {
    let n = 1000;
    let signal: Vec<f64> = vmd::tone(0.01, 1.0, n)
        .iter()
        .zip(vmd::tone(0.12, 0.5, n))
        .map(|(a, b)| a + b)
        .collect();
    let cfg = VmdConfig {
        mode_count: 2,
        ..VmdConfig::default()
    };
    let modes = vmd::decompose(&signal, &cfg)?;
    println!("iterations: {}", modes.iterations_used);
    for (k, f) in modes.center_frequencies.iter().enumerate() {
        println!("mode {k}: centre {f:.5} cycles/sample");
    }
    println!("relative reconstruction error: {:.3e}", modes.reconstruction_error(&signal));
    Ok(())
}

#[allow(dead_code)]
fn main() -> load_forecast::Result<()> {
    run_example()
}
