//! Particle swarm optimizer with optional chaotic initialization.
//!
//! Classical PSO and the chaos-initialized variant share every code path
//! except the initial positions. Particle `i` draws its `r1`/`r2` noise from
//! its own stream, and fitness evaluations inside a generation run in
//! parallel. Best-tracking happens after all evaluations, so results do not
//! depend on thread count.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::chaos::{self, ChaosConfig};
use crate::error::{Error, Result};
use crate::rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InitMode {
    UniformRandom,
    TentChaos,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PsoConfig {
    pub population: usize,
    pub iterations: usize,
    /// c1
    pub cognitive: f64,
    /// c2
    pub social: f64,
    /// ω
    pub inertia: f64,
    pub bounds_low: Vec<f64>,
    pub bounds_high: Vec<f64>,
    /// Per-dimension speed limit as a fraction of the dimension's range.
    pub velocity_clamp_fraction: f64,
    pub init_mode: InitMode,
}

impl PsoConfig {
    /// Default coefficients (c1 = c2 = 1.5, ω = 0.8) over a box.
    pub fn new(bounds_low: Vec<f64>, bounds_high: Vec<f64>) -> Self {
        Self {
            population: 30,
            iterations: 100,
            cognitive: 1.5,
            social: 1.5,
            inertia: 0.8,
            bounds_low,
            bounds_high,
            velocity_clamp_fraction: 0.5,
            init_mode: InitMode::TentChaos,
        }
    }

    /// `[lo, hi]` in every one of `dims` dimensions.
    pub fn cube(dims: usize, lo: f64, hi: f64) -> Self {
        Self::new(vec![lo; dims], vec![hi; dims])
    }

    pub fn dims(&self) -> usize {
        self.bounds_low.len()
    }

    pub fn validate(&self) -> Result<()> {
        if self.population < 2 {
            return Err(Error::Config("pso.population must be at least 2".into()));
        }
        if self.iterations < 1 {
            return Err(Error::Config("pso.iterations must be at least 1".into()));
        }
        if self.bounds_low.is_empty() || self.bounds_low.len() != self.bounds_high.len() {
            return Err(Error::Config("pso bounds must be non-empty and equal length".into()));
        }
        if let Some(j) = (0..self.dims()).find(|&j| !(self.bounds_low[j] < self.bounds_high[j])) {
            return Err(Error::Config(format!("pso bounds empty in dimension {j}")));
        }
        if !(self.velocity_clamp_fraction > 0.0 && self.velocity_clamp_fraction <= 1.0) {
            return Err(Error::Config("pso.velocity_clamp_fraction must lie in (0, 1]".into()));
        }
        for (name, v) in [("cognitive", self.cognitive), ("social", self.social), ("inertia", self.inertia)] {
            if !v.is_finite() {
                return Err(Error::Config(format!("pso.{name} must be finite")));
            }
        }
        Ok(())
    }

    fn velocity_limit(&self, j: usize) -> f64 {
        self.velocity_clamp_fraction * (self.bounds_high[j] - self.bounds_low[j])
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Particle {
    pub position: Vec<f64>,
    pub velocity: Vec<f64>,
    pub personal_best: Vec<f64>,
    pub personal_best_fitness: f64,
}

/// Velocity and position update for one particle with the given per-dimension
/// random factors; velocity is clamped to ±v_max and position to the bounds.
pub(crate) fn advance(particle: &mut Particle, global_best: &[f64], config: &PsoConfig, r1: &[f64], r2: &[f64]) {
    for j in 0..particle.position.len() {
        let x = particle.position[j];
        let vmax = config.velocity_limit(j);
        let v = config.inertia * particle.velocity[j]
            + config.cognitive * r1[j] * (particle.personal_best[j] - x)
            + config.social * r2[j] * (global_best[j] - x);
        let v = v.clamp(-vmax, vmax);
        particle.velocity[j] = v;
        particle.position[j] = (x + v).clamp(config.bounds_low[j], config.bounds_high[j]);
    }
}

#[derive(Debug, Clone)]
pub struct Swarm {
    pub particles: Vec<Particle>,
    pub global_best: Vec<f64>,
    pub global_best_fitness: f64,
    /// Global best fitness after initialization and after every step.
    pub history: Vec<f64>,
    /// Evaluations that returned a non-finite value.
    pub nonfinite_evaluations: usize,
    noise: Vec<ChaCha8Rng>,
}

fn evaluate_all<F>(positions: &[&[f64]], fitness: &F) -> Vec<f64>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    positions.par_iter().map(|p| fitness(p)).collect()
}

impl Swarm {
    /// Evaluates the initial positions (zero velocity) and sets the bests.
    pub fn new<F>(positions: Vec<Vec<f64>>, fitness: &F, config: &PsoConfig, seed: u64) -> Result<Self>
    where
        F: Fn(&[f64]) -> f64 + Sync,
    {
        config.validate()?;
        if positions.len() != config.population || positions.iter().any(|p| p.len() != config.dims()) {
            return Err(Error::Dimension(format!(
                "expected {} positions of dimension {}",
                config.population,
                config.dims()
            )));
        }
        let refs: Vec<&[f64]> = positions.iter().map(Vec::as_slice).collect();
        let scores = evaluate_all(&refs, fitness);
        let mut nonfinite = 0;
        let particles: Vec<Particle> = positions
            .into_iter()
            .zip(scores)
            .map(|(position, f)| {
                let f = if f.is_finite() {
                    f
                } else {
                    nonfinite += 1;
                    f64::INFINITY
                };
                Particle {
                    velocity: vec![0.0; position.len()],
                    personal_best: position.clone(),
                    personal_best_fitness: f,
                    position,
                }
            })
            .collect();
        let best = best_index(&particles);
        let noise = (0..config.population as u64)
            .map(|i| rng::stream(seed, rng::STREAM_PARTICLE_BASE + i))
            .collect();
        Ok(Self {
            global_best: particles[best].personal_best.clone(),
            global_best_fitness: particles[best].personal_best_fitness,
            history: vec![particles[best].personal_best_fitness],
            particles,
            nonfinite_evaluations: nonfinite,
            noise,
        })
    }

    /// One generation: move every particle, evaluate, update bests.
    pub fn step<F>(&mut self, fitness: &F, config: &PsoConfig) -> Result<()>
    where
        F: Fn(&[f64]) -> f64 + Sync,
    {
        let dims = config.dims();
        let mut r1 = vec![0.0; dims];
        let mut r2 = vec![0.0; dims];
        for (particle, rng) in self.particles.iter_mut().zip(&mut self.noise) {
            for j in 0..dims {
                r1[j] = rng.random::<f64>();
                r2[j] = rng.random::<f64>();
            }
            advance(particle, &self.global_best, config, &r1, &r2);
        }

        let refs: Vec<&[f64]> = self.particles.iter().map(|p| p.position.as_slice()).collect();
        let scores = evaluate_all(&refs, fitness);
        for (particle, f) in self.particles.iter_mut().zip(scores) {
            if !f.is_finite() {
                self.nonfinite_evaluations += 1;
                continue;
            }
            if f < particle.personal_best_fitness {
                particle.personal_best_fitness = f;
                particle.personal_best.clone_from(&particle.position);
            }
        }
        let best = best_index(&self.particles);
        if self.particles[best].personal_best_fitness < self.global_best_fitness {
            self.global_best_fitness = self.particles[best].personal_best_fitness;
            self.global_best.clone_from(&self.particles[best].personal_best);
        }
        let last = *self.history.last().expect("history starts non-empty");
        if self.global_best_fitness > last {
            return Err(Error::Internal("global best fitness increased".into()));
        }
        self.history.push(self.global_best_fitness);
        Ok(())
    }
}

/// Lowest personal best; ties go to the lowest index.
fn best_index(particles: &[Particle]) -> usize {
    let mut best = 0;
    for (i, p) in particles.iter().enumerate().skip(1) {
        if p.personal_best_fitness < particles[best].personal_best_fitness {
            best = i;
        }
    }
    best
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimizeResult {
    pub best_position: Vec<f64>,
    pub best_fitness: f64,
    pub history: Vec<f64>,
    pub nonfinite_evaluations: usize,
}

/// Initial positions for the configured mode.
pub fn initial_positions(config: &PsoConfig, chaos: &ChaosConfig, seed: u64) -> Result<Vec<Vec<f64>>> {
    match config.init_mode {
        InitMode::TentChaos => {
            chaos::tent_init(config.population, &config.bounds_low, &config.bounds_high, chaos, seed)
        }
        InitMode::UniformRandom => {
            let mut rng = rng::stream(seed, rng::STREAM_INIT);
            Ok((0..config.population)
                .map(|_| {
                    (0..config.dims())
                        .map(|j| rng.random_range(config.bounds_low[j]..config.bounds_high[j]))
                        .collect()
                })
                .collect())
        }
    }
}

/// Minimizes `fitness` over the configured box.
pub fn optimize<F>(fitness: F, config: &PsoConfig, chaos: &ChaosConfig, seed: u64) -> Result<OptimizeResult>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    config.validate()?;
    chaos.validate()?;
    let positions = initial_positions(config, chaos, seed)?;
    let mut swarm = Swarm::new(positions, &fitness, config, seed)?;
    for _ in 0..config.iterations {
        swarm.step(&fitness, config)?;
    }
    Ok(OptimizeResult {
        best_position: swarm.global_best,
        best_fitness: swarm.global_best_fitness,
        history: swarm.history,
        nonfinite_evaluations: swarm.nonfinite_evaluations,
    })
}

/// `iteration,gbest_fitness` trace.
pub fn trace_csv(history: &[f64]) -> String {
    let mut out = String::from("iteration,gbest_fitness\n");
    for (i, f) in history.iter().enumerate() {
        out.push_str(&format!("{i},{f}\n"));
    }
    out
}

pub fn sphere(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum()
}

pub fn rastrigin(x: &[f64]) -> f64 {
    10.0 * x.len() as f64
        + x.iter()
            .map(|v| v * v - 10.0 * (2.0 * std::f64::consts::PI * v).cos())
            .sum::<f64>()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn particle(x: f64, v: f64, pb: f64) -> Particle {
        Particle {
            position: vec![x],
            velocity: vec![v],
            personal_best: vec![pb],
            personal_best_fitness: 0.0,
        }
    }

    #[test]
    fn fixed_point_stays_put() {
        let cfg = PsoConfig::cube(1, -5.0, 5.0);
        let mut p = particle(1.0, 0.0, 1.0);
        advance(&mut p, &[1.0], &cfg, &[0.7], &[0.3]);
        assert_eq!(p.position, vec![1.0]);
        assert_eq!(p.velocity, vec![0.0]);
    }

    #[test]
    fn pinned_randomness_hand_arithmetic() {
        let cfg = PsoConfig::cube(1, -5.0, 5.0);
        let mut p = particle(1.0, 0.0, 0.0);
        advance(&mut p, &[0.0], &cfg, &[1.0], &[1.0]);
        assert_eq!(p.velocity, vec![-3.0]);
        assert_eq!(p.position, vec![-2.0]);

        // a tight clamp limits the step
        let tight = PsoConfig {
            velocity_clamp_fraction: 0.1,
            ..cfg
        };
        let mut p = particle(1.0, 0.0, 0.0);
        advance(&mut p, &[0.0], &tight, &[1.0], &[1.0]);
        assert_eq!(p.velocity, vec![-1.0]);
        assert_eq!(p.position, vec![0.0]);
    }

    #[test]
    fn positions_clamped_to_bounds() {
        let cfg = PsoConfig::cube(1, -1.0, 1.0);
        let mut p = particle(0.9, 1.0, 0.9);
        advance(&mut p, &[0.9], &cfg, &[0.0], &[0.0]);
        assert_eq!(p.position, vec![1.0]);
    }

    #[test]
    fn history_monotone_on_sphere() {
        let mut cfg = PsoConfig::cube(5, -5.0, 5.0);
        cfg.iterations = 100;
        let r = optimize(sphere, &cfg, &ChaosConfig::default(), 3).unwrap();
        assert_eq!(r.history.len(), 101);
        assert!(r.history.windows(2).all(|w| w[1] <= w[0]));
        assert_eq!(*r.history.last().unwrap(), r.best_fitness);
    }

    #[test]
    fn constant_fitness_keeps_first_particle() {
        let mut cfg = PsoConfig::cube(3, -1.0, 1.0);
        cfg.iterations = 10;
        let chaos = ChaosConfig::default();
        let start = initial_positions(&cfg, &chaos, 5).unwrap();
        let r = optimize(|_: &[f64]| 1.0, &cfg, &chaos, 5).unwrap();
        assert_eq!(r.best_position, start[0]);
        assert!(r.history.iter().all(|&h| h == 1.0));
    }

    #[test]
    fn nonfinite_fitness_is_counted_not_chosen() {
        let mut cfg = PsoConfig::cube(2, -1.0, 1.0);
        cfg.iterations = 5;
        let f = |x: &[f64]| if x[0] > 0.0 { f64::NAN } else { sphere(x) };
        let r = optimize(f, &cfg, &ChaosConfig::default(), 8).unwrap();
        assert!(r.nonfinite_evaluations > 0);
        assert!(r.best_fitness.is_finite());
        assert!(r.best_position[0] <= 0.0);
    }

    #[test]
    fn uniform_init_in_bounds_and_seeded() {
        let mut cfg = PsoConfig::cube(4, -2.0, 3.0);
        cfg.init_mode = InitMode::UniformRandom;
        let a = initial_positions(&cfg, &ChaosConfig::default(), 1).unwrap();
        assert_eq!(a, initial_positions(&cfg, &ChaosConfig::default(), 1).unwrap());
        assert!(a.iter().flatten().all(|&v| (-2.0..=3.0).contains(&v)));
    }

    #[test]
    fn result_independent_of_thread_count() {
        let mut cfg = PsoConfig::cube(6, -5.12, 5.12);
        cfg.iterations = 30;
        let chaos = ChaosConfig::default();
        let one = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let four = rayon::ThreadPoolBuilder::new().num_threads(4).build().unwrap();
        let a = one.install(|| optimize(rastrigin, &cfg, &chaos, 17).unwrap());
        let b = four.install(|| optimize(rastrigin, &cfg, &chaos, 17).unwrap());
        assert_eq!(a, b);
    }

    #[test]
    fn validation() {
        let mut cfg = PsoConfig::cube(2, -1.0, 1.0);
        cfg.population = 1;
        assert!(cfg.validate().is_err());
        let mut cfg = PsoConfig::cube(2, 1.0, 1.0);
        assert!(cfg.validate().is_err());
        cfg = PsoConfig::cube(2, -1.0, 1.0);
        cfg.velocity_clamp_fraction = 0.0;
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn trace_format() {
        assert_eq!(trace_csv(&[2.0, 1.5]), "iteration,gbest_fitness\n0,2\n1,1.5\n");
    }
}
