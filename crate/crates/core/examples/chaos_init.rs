// Orbit statistics of the noisy tent map and the initial swarm it produces.

use load_forecast::chaos::{self, ChaosConfig};
use load_forecast::rng;

pub fn run_example() -> load_forecast::Result<()> {
    let cfg = ChaosConfig::default();
    let mut r = rng::stream(1, rng::STREAM_CHAOS);
    let mut y = 0.3;
    let orbit: Vec<f64> = (0..20_000)
        .map(|_| {
            y = chaos::tent_next(y, &cfg, &mut r);
            y
        })
        .collect();
    println!("orbit KS distance to uniform: {:.4}", chaos::ks_uniform(&orbit, 0.0, 1.0));
    let mut hist = [0usize; 10];
    for v in &orbit {
        hist[((v * 10.0) as usize).min(9)] += 1;
    }
    println!("decile counts: {hist:?}");

    let swarm = chaos::tent_init(5, &[-1.0, 0.0], &[1.0, 1.0], &cfg, 9)?;
    for (i, p) in swarm.iter().enumerate() {
        println!("particle {i}: [{:.4}, {:.4}]", p[0], p[1]);
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> load_forecast::Result<()> {
    run_example()
}
