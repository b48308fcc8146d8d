//! Coherent phase-noise laws and reproducible random streams.
//!
//! Every draw comes from a ChaCha8 stream keyed by
//! `(master seed, trial index, step index, channel)`: the master seed keys the
//! generator, the trial index selects the 64-bit stream, and the step/channel
//! pair selects a disjoint window of `2^40` words inside that stream. A draw
//! therefore depends only on its key, never on the order in which trials or
//! steps are evaluated.
//!
//! Gaussian draws use `rand_distr`'s ziggurat `StandardNormal`; Poisson draws
//! with rate `≤ 10` use CDF inversion on one uniform.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::bloch::StepOffset;
use crate::error::{Error, Result};
use crate::schedules::PhaseSchedule;

/// One noise law for a single phase channel. Parameters are in radians
/// (variance in rad²); Poisson counts are used directly as radians.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Distribution {
    None,
    Gaussian { mu: f64, var: f64 },
    Poisson { rate: f64 },
    Uniform { a: f64, b: f64 },
}

/// Above this rate Poisson sampling switches from inversion to `rand_distr`.
pub const POISSON_INVERSION_MAX_RATE: f64 = 10.0;

impl Distribution {
    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            Distribution::None => true,
            Distribution::Gaussian { mu, var } => mu.is_finite() && var.is_finite() && var >= 0.0,
            Distribution::Poisson { rate } => rate.is_finite() && rate >= 0.0,
            Distribution::Uniform { a, b } => a.is_finite() && b.is_finite() && a <= b,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Domain(format!("invalid noise law {self}")))
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Distribution::None => "none",
            Distribution::Gaussian { .. } => "gaussian",
            Distribution::Poisson { .. } => "poisson",
            Distribution::Uniform { .. } => "uniform",
        }
    }

    pub fn is_none(&self) -> bool {
        matches!(self, Distribution::None)
    }

    /// Exact mean and variance of the law.
    pub fn moments(&self) -> (f64, f64) {
        match *self {
            Distribution::None => (0.0, 0.0),
            Distribution::Gaussian { mu, var } => (mu, var),
            Distribution::Poisson { rate } => (rate, rate),
            Distribution::Uniform { a, b } => ((a + b) / 2.0, (b - a).powi(2) / 12.0),
        }
    }

    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match *self {
            Distribution::None => 0.0,
            Distribution::Gaussian { mu, var } => {
                let z: f64 = rng.sample(StandardNormal);
                mu + var.sqrt() * z
            }
            Distribution::Poisson { rate } => {
                if rate <= POISSON_INVERSION_MAX_RATE {
                    poisson_inversion(rate, rng.random::<f64>()) as f64
                } else {
                    rng.sample(rand_distr::Poisson::new(rate).expect("validated rate"))
                }
            }
            Distribution::Uniform { a, b } => a + (b - a) * rng.random::<f64>(),
        }
    }
}

/// Smallest `k` with `P(X ≤ k) > u`.
fn poisson_inversion(rate: f64, u: f64) -> u64 {
    let mut k = 0u64;
    let mut p = (-rate).exp();
    let mut cdf = p;
    while u >= cdf && p > 0.0 {
        k += 1;
        p *= rate / k as f64;
        cdf += p;
    }
    k
}

impl fmt::Display for Distribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Distribution::None => write!(f, "none"),
            Distribution::Gaussian { mu, var } => write!(f, "gaussian:mu={mu},var={var}"),
            Distribution::Poisson { rate } => write!(f, "poisson:rate={rate}"),
            Distribution::Uniform { a, b } => write!(f, "uniform:a={a},b={b}"),
        }
    }
}

impl FromStr for Distribution {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (name, params) = match s.split_once(':') {
            Some((n, p)) => (n.trim(), p.trim()),
            None => (s, ""),
        };
        let mut values: Vec<(&str, f64)> = Vec::new();
        if !params.is_empty() {
            for part in params.split(',') {
                let (key, value) = part
                    .split_once('=')
                    .ok_or_else(|| Error::Parse(format!("expected key=value, got '{part}'")))?;
                let value: f64 = value
                    .trim()
                    .parse()
                    .map_err(|_| Error::Parse(format!("bad number '{}' for {}", value.trim(), key.trim())))?;
                values.push((key.trim(), value));
            }
        }
        let take = |key: &str| -> Result<f64> {
            values
                .iter()
                .find(|(k, _)| *k == key)
                .map(|&(_, v)| v)
                .ok_or_else(|| Error::Parse(format!("{name} needs parameter '{key}'")))
        };
        let allowed: &[&str] = match name {
            "none" => &[],
            "gaussian" | "normal" => &["mu", "var"],
            "poisson" => &["rate"],
            "uniform" => &["a", "b"],
            other => return Err(Error::Parse(format!("unknown distribution '{other}'"))),
        };
        if let Some((k, _)) = values.iter().find(|(k, _)| !allowed.contains(k)) {
            return Err(Error::Parse(format!("unexpected parameter '{k}' for {name}")));
        }
        let dist = match name {
            "none" => Distribution::None,
            "gaussian" | "normal" => Distribution::Gaussian { mu: take("mu")?, var: take("var")? },
            "poisson" => Distribution::Poisson { rate: take("rate")? },
            _ => Distribution::Uniform { a: take("a")?, b: take("b")? },
        };
        dist.validate()?;
        Ok(dist)
    }
}

/// Noise laws for the reflection phase `δβ` and the oracle phase `δα`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec {
    pub reflection: Distribution,
    pub oracle: Distribution,
}

impl Default for NoiseSpec {
    fn default() -> Self {
        NoiseSpec::none()
    }
}

/// Channel indices used in the random-stream key.
pub const REFLECTION_CHANNEL: u64 = 0;
pub const ORACLE_CHANNEL: u64 = 1;

impl NoiseSpec {
    pub fn none() -> Self {
        NoiseSpec { reflection: Distribution::None, oracle: Distribution::None }
    }

    pub fn reflection(d: Distribution) -> Self {
        NoiseSpec { reflection: d, oracle: Distribution::None }
    }

    pub fn oracle(d: Distribution) -> Self {
        NoiseSpec { reflection: Distribution::None, oracle: d }
    }

    /// Same law on both channels (drawn independently).
    pub fn both(d: Distribution) -> Self {
        NoiseSpec { reflection: d, oracle: d }
    }

    pub fn split(reflection: Distribution, oracle: Distribution) -> Self {
        NoiseSpec { reflection, oracle }
    }

    pub fn is_none(&self) -> bool {
        self.reflection.is_none() && self.oracle.is_none()
    }

    pub fn validate(&self) -> Result<()> {
        self.reflection.validate()?;
        self.oracle.validate()
    }

    /// The law reported in single-law summaries: the reflection law when
    /// present, otherwise the oracle law.
    pub fn primary(&self) -> Distribution {
        if self.reflection.is_none() {
            self.oracle
        } else {
            self.reflection
        }
    }
}

impl fmt::Display for NoiseSpec {
    /// Canonical text form accepted by [`NoiseSpec::from_str`].
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.reflection.is_none(), self.oracle.is_none()) {
            (true, true) => write!(f, "none"),
            (false, true) => write!(f, "{}@reflection", self.reflection),
            (true, false) => write!(f, "{}@oracle", self.oracle),
            _ if self.reflection == self.oracle => write!(f, "{}@both", self.reflection),
            _ => write!(f, "oracle={};reflection={}@both", self.oracle, self.reflection),
        }
    }
}

impl FromStr for NoiseSpec {
    type Err = Error;

    /// Grammar:
    ///
    /// ```text
    /// none
    /// <dist>@reflection | <dist>@oracle | <dist>@both
    /// oracle=<dist>;reflection=<dist>[@both]
    /// <dist> := none | gaussian:mu=M,var=V | poisson:rate=R | uniform:a=A,b=B
    /// ```
    ///
    /// A bare `<dist>` without a target applies to the reflection phase.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.is_empty() || s == "none" {
            return Ok(NoiseSpec::none());
        }
        let (body, target) = match s.rsplit_once('@') {
            Some((b, t)) => (b.trim(), Some(t.trim())),
            None => (s, None),
        };
        let spec = if body.contains(';') || body.starts_with("oracle=") || body.starts_with("reflection=") {
            if matches!(target, Some(t) if t != "both") {
                return Err(Error::Parse("per-channel laws need the '@both' target".into()));
            }
            let mut reflection = None;
            let mut oracle = None;
            for part in body.split(';') {
                let (channel, law) = part
                    .split_once('=')
                    .ok_or_else(|| Error::Parse(format!("expected channel=<dist>, got '{part}'")))?;
                let law: Distribution = law.parse()?;
                let slot = match channel.trim() {
                    "oracle" => &mut oracle,
                    "reflection" => &mut reflection,
                    other => return Err(Error::Parse(format!("unknown channel '{other}'"))),
                };
                if slot.replace(law).is_some() {
                    return Err(Error::Parse(format!("channel '{}' given twice", channel.trim())));
                }
            }
            NoiseSpec::split(reflection.unwrap_or(Distribution::None), oracle.unwrap_or(Distribution::None))
        } else {
            let law: Distribution = body.parse()?;
            match target.unwrap_or("reflection") {
                "reflection" => NoiseSpec::reflection(law),
                "oracle" => NoiseSpec::oracle(law),
                "both" => NoiseSpec::both(law),
                other => return Err(Error::Parse(format!("unknown noise target '{other}'"))),
            }
        };
        spec.validate()?;
        Ok(spec)
    }
}

/// Identifies the random stream of one trial.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RngStream {
    pub seed: u64,
    pub index: u64,
}

/// Words reserved per (step, channel) window.
const WINDOW_BITS: u32 = 40;

impl RngStream {
    pub const fn new(seed: u64, index: u64) -> Self {
        RngStream { seed, index }
    }

    /// Generator positioned at the start of the `(step, channel)` window.
    pub fn generator(&self, step: u64, channel: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.index);
        rng.set_word_pos(u128::from(step * 2 + channel) << WINDOW_BITS);
        rng
    }
}

/// One draw from the `(step 0, reflection)` window of `stream`.
pub fn sample(dist: &Distribution, stream: &RngStream) -> f64 {
    dist.draw(&mut stream.generator(0, REFLECTION_CHANNEL))
}

/// Independent per-step offsets for every step of `schedule`; untargeted
/// channels get exactly zero.
pub fn perturb(schedule: &PhaseSchedule, spec: &NoiseSpec, stream: &RngStream) -> Vec<StepOffset> {
    perturb_steps(schedule.len(), spec, stream)
}

pub fn perturb_steps(steps: usize, spec: &NoiseSpec, stream: &RngStream) -> Vec<StepOffset> {
    let draw = |dist: &Distribution, step: usize, channel: u64| {
        if dist.is_none() {
            0.0
        } else {
            dist.draw(&mut stream.generator(step as u64, channel))
        }
    };
    (0..steps)
        .map(|i| StepOffset {
            d_beta: draw(&spec.reflection, i, REFLECTION_CHANNEL),
            d_alpha: draw(&spec.oracle, i, ORACLE_CHANNEL),
        })
        .collect()
}
