// Minimizes Rastrigin with uniform and tent-chaos swarm initialization over
// a handful of seeds.

use load_forecast::chaos::ChaosConfig;
use load_forecast::pso::{self, InitMode, PsoConfig};

pub fn run_example() -> load_forecast::Result<()> {
    let chaos = ChaosConfig::default();
    for mode in [InitMode::UniformRandom, InitMode::TentChaos] {
        let cfg = PsoConfig {
            init_mode: mode,
            ..PsoConfig::cube(10, -5.12, 5.12)
        };
        let mut finals = Vec::new();
        for seed in 0..5 {
            let r = pso::optimize(pso::rastrigin, &cfg, &chaos, seed)?;
            finals.push(r.best_fitness);
        }
        let mean = finals.iter().sum::<f64>() / finals.len() as f64;
        println!("{mode:?}: mean best {mean:.3} over {} seeds", finals.len());
    }

    let r = pso::optimize(pso::sphere, &PsoConfig::cube(10, -5.0, 5.0), &chaos, 0)?;
    let trace = pso::trace_csv(&r.history);
    println!("sphere trace ({} rows):", r.history.len());
    for line in trace.lines().step_by(25) {
        println!("  {line}");
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> load_forecast::Result<()> {
    run_example()
}
