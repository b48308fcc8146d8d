//! Seeded Monte Carlo experiments.
//!
//! Trial `i` of an experiment with master seed `s` always uses
//! `RngStream { seed: s, index: i }`. Trials run in parallel but their
//! results are collected in index order and reduced sequentially, so every
//! reported number is independent of the thread count.

use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bloch::{apply_schedule, make_initial_state, Lambda};
use crate::error::{Error, Result};
use crate::noise::{perturb, Distribution, NoiseSpec, RngStream};
use crate::schedules::{
    critical_steps, d2p_schedule, improved_schedule, original_schedule, positioned_schedule, PhaseSchedule,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "lowercase")]
pub enum Algorithm {
    Original,
    /// `k_d = None` uses `max(2, ⌈k0⌉)` steps.
    D2p { k_d: Option<usize> },
    Improved,
    Positioned { n: usize },
}

impl Algorithm {
    pub fn name(&self) -> &'static str {
        match self {
            Algorithm::Original => "original",
            Algorithm::D2p { .. } => "d2p",
            Algorithm::Improved => "improved",
            Algorithm::Positioned { .. } => "positioned",
        }
    }

    pub fn position(&self) -> Option<usize> {
        match *self {
            Algorithm::Positioned { n } => Some(n),
            _ => None,
        }
    }

    pub fn build(&self, lambda: Lambda) -> Result<PhaseSchedule> {
        match *self {
            Algorithm::Original => Ok(original_schedule(lambda)),
            Algorithm::Improved => improved_schedule(lambda),
            Algorithm::D2p { k_d } => d2p_schedule(lambda, k_d.unwrap_or_else(|| critical_steps(lambda).k)),
            Algorithm::Positioned { n } => positioned_schedule(lambda, n),
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub algorithm: Algorithm,
    pub lambda: f64,
    pub noise: NoiseSpec,
    pub samples: usize,
    pub seed: u64,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<Lambda> {
        if self.samples == 0 {
            return Err(Error::Precondition("samples must be >= 1".into()));
        }
        self.noise.validate()?;
        Lambda::new(self.lambda)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrialStats {
    pub mean: f64,
    /// Sample standard deviation over `√samples`; zero for one sample.
    pub stderr: f64,
    pub samples: usize,
    pub seed: u64,
}

impl TrialStats {
    /// `√(se_a² + se_b²)`.
    pub fn combined_stderr(&self, other: &TrialStats) -> f64 {
        self.stderr.hypot(other.stderr)
    }
}

/// One noisy run: perturb, evolve from `|ψ0⟩`, return `|⟨T|ψf⟩|²`.
pub fn run_trial(schedule: &PhaseSchedule, spec: &NoiseSpec, stream: &RngStream) -> f64 {
    let offsets = perturb(schedule, spec, stream);
    apply_schedule(schedule, make_initial_state(schedule.lambda), &offsets)
        .expect("perturb yields one offset per step")
        .success_probability()
}

/// Welford mean/variance over values in the given order.
fn aggregate(values: &[f64], seed: u64) -> TrialStats {
    let mut mean = 0.0;
    let mut m2 = 0.0;
    for (i, &x) in values.iter().enumerate() {
        let delta = x - mean;
        mean += delta / (i + 1) as f64;
        m2 += delta * (x - mean);
    }
    let n = values.len();
    let stderr = if n > 1 { (m2 / (n - 1) as f64).sqrt() / (n as f64).sqrt() } else { 0.0 };
    TrialStats { mean: mean.clamp(0.0, 1.0), stderr, samples: n, seed }
}

/// Runs `samples` trials of an already-built schedule.
pub fn run_schedule(schedule: &PhaseSchedule, spec: &NoiseSpec, samples: usize, seed: u64) -> TrialStats {
    let values: Vec<f64> = (0..samples as u64)
        .into_par_iter()
        .map(|i| run_trial(schedule, spec, &RngStream::new(seed, i)))
        .collect();
    aggregate(&values, seed)
}

pub fn run_experiment(config: &ExperimentConfig) -> Result<TrialStats> {
    let lambda = config.validate()?;
    let schedule = config.algorithm.build(lambda)?;
    Ok(run_schedule(&schedule, &config.noise, config.samples, config.seed))
}

/// The swept parameter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "axis", content = "values", rename_all = "lowercase")]
pub enum SweepAxis {
    Lambda(Vec<f64>),
    /// Replaces the variance of every Gaussian law in the base noise spec.
    Variance(Vec<f64>),
    /// Runs the positioned algorithm at each `n` (the algorithm list is ignored).
    Position(Vec<usize>),
}

impl SweepAxis {
    pub fn len(&self) -> usize {
        match self {
            SweepAxis::Lambda(v) | SweepAxis::Variance(v) => v.len(),
            SweepAxis::Position(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub algorithms: Vec<Algorithm>,
    pub lambda: f64,
    pub noise: NoiseSpec,
    pub samples: usize,
    pub seed: u64,
    pub axis: SweepAxis,
}

/// One grid point for one algorithm. `outcome` is `Err` with a message when
/// the schedule could not be built at this point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub algorithm: Algorithm,
    pub lambda: f64,
    pub noise: NoiseSpec,
    pub samples: usize,
    pub seed: u64,
    pub outcome: std::result::Result<TrialStats, String>,
}

fn with_variance(d: Distribution, var: f64) -> Distribution {
    match d {
        Distribution::Gaussian { mu, .. } => Distribution::Gaussian { mu, var },
        other => other,
    }
}

/// Expands the sweep into experiment configs, ordered by grid point then
/// algorithm.
pub fn sweep_configs(spec: &SweepSpec) -> Result<Vec<ExperimentConfig>> {
    if spec.axis.is_empty() {
        return Err(Error::Precondition("sweep grid is empty".into()));
    }
    let base = |algorithm, lambda, noise| ExperimentConfig {
        algorithm,
        lambda,
        noise,
        samples: spec.samples,
        seed: spec.seed,
    };
    let configs = match &spec.axis {
        SweepAxis::Lambda(grid) => grid
            .iter()
            .flat_map(|&l| spec.algorithms.iter().map(move |&a| base(a, l, spec.noise)))
            .collect(),
        SweepAxis::Variance(grid) => grid
            .iter()
            .flat_map(|&v| {
                let noise = NoiseSpec::split(with_variance(spec.noise.reflection, v), with_variance(spec.noise.oracle, v));
                spec.algorithms.iter().map(move |&a| base(a, spec.lambda, noise))
            })
            .collect(),
        SweepAxis::Position(grid) => {
            grid.iter().map(|&n| base(Algorithm::Positioned { n }, spec.lambda, spec.noise)).collect()
        }
    };
    Ok(configs)
}

pub fn sweep(spec: &SweepSpec) -> Result<Vec<SweepRow>> {
    let configs = sweep_configs(spec)?;
    Ok(configs
        .par_iter()
        .map(|c| SweepRow {
            algorithm: c.algorithm,
            lambda: c.lambda,
            noise: c.noise,
            samples: c.samples,
            seed: c.seed,
            outcome: run_experiment(c).map_err(|e| e.to_string()),
        })
        .collect())
}

/// `n` evenly spaced points from `lo` to `hi` inclusive.
pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect(),
    }
}
