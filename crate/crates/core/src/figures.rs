//! Dataset definitions for the published noise figures.
//!
//! Each figure is a [`SweepSpec`]; [`run_figure`] evaluates it and flattens
//! the result into [`FigureRow`]s whose serde field order is the CSV header.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::montecarlo::{linspace, sweep, Algorithm, SweepAxis, SweepRow, SweepSpec};
use crate::noise::{Distribution, NoiseSpec};

pub const CSV_HEADER: &str = "figure,algorithm,lambda,position,dist,mu,var,rate,a,b,samples,seed,mean_success,stderr";

pub const LAMBDA_MIN: f64 = 0.001;
pub const LAMBDA_MAX: f64 = 0.25;
pub const LAMBDA_POINTS: usize = 50;

pub const DEFAULT_SAMPLES: usize = 10_000;
pub const POSITION_SAMPLES: usize = 50_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum FigureId {
    #[serde(rename = "1c")]
    Noiseless,
    #[serde(rename = "3b")]
    GaussianCentered,
    #[serde(rename = "3c")]
    GaussianBiased,
    #[serde(rename = "4a")]
    VarianceWide,
    #[serde(rename = "4b")]
    VarianceNarrow,
    #[serde(rename = "5a")]
    Poisson,
    #[serde(rename = "5b")]
    Uniform,
    #[serde(rename = "6a")]
    OracleSame,
    #[serde(rename = "6b")]
    OracleSplit,
    #[serde(rename = "7a")]
    PositionCentered,
    #[serde(rename = "7b")]
    PositionBiased,
}

impl FigureId {
    pub const ALL: [FigureId; 11] = [
        FigureId::Noiseless,
        FigureId::GaussianCentered,
        FigureId::GaussianBiased,
        FigureId::VarianceWide,
        FigureId::VarianceNarrow,
        FigureId::Poisson,
        FigureId::Uniform,
        FigureId::OracleSame,
        FigureId::OracleSplit,
        FigureId::PositionCentered,
        FigureId::PositionBiased,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            FigureId::Noiseless => "1c",
            FigureId::GaussianCentered => "3b",
            FigureId::GaussianBiased => "3c",
            FigureId::VarianceWide => "4a",
            FigureId::VarianceNarrow => "4b",
            FigureId::Poisson => "5a",
            FigureId::Uniform => "5b",
            FigureId::OracleSame => "6a",
            FigureId::OracleSplit => "6b",
            FigureId::PositionCentered => "7a",
            FigureId::PositionBiased => "7b",
        }
    }

    /// The noiseless figure needs a single trial; the position figures use
    /// fifty thousand.
    pub fn default_samples(self) -> usize {
        match self {
            FigureId::Noiseless => 1,
            FigureId::PositionCentered | FigureId::PositionBiased => POSITION_SAMPLES,
            _ => DEFAULT_SAMPLES,
        }
    }

    pub fn sweep_spec(self, samples: usize, seed: u64) -> SweepSpec {
        let gauss = |mu, var| Distribution::Gaussian { mu, var };
        let lambda_axis = || SweepAxis::Lambda(linspace(LAMBDA_MIN, LAMBDA_MAX, LAMBDA_POINTS));
        let variance_axis = || SweepAxis::Variance((0..=10).map(|i| i as f64 / 100.0).collect());
        let position_axis = || SweepAxis::Position((1..=7).collect());
        let (lambda, noise, axis) = match self {
            FigureId::Noiseless => (LAMBDA_MAX, NoiseSpec::none(), lambda_axis()),
            FigureId::GaussianCentered => (LAMBDA_MAX, NoiseSpec::reflection(gauss(0.0, 0.04)), lambda_axis()),
            FigureId::GaussianBiased => (LAMBDA_MAX, NoiseSpec::reflection(gauss(0.05, 0.04)), lambda_axis()),
            FigureId::VarianceWide => (0.040, NoiseSpec::reflection(gauss(0.05, 0.0)), variance_axis()),
            FigureId::VarianceNarrow => (0.027, NoiseSpec::reflection(gauss(0.05, 0.0)), variance_axis()),
            FigureId::Poisson => {
                (LAMBDA_MAX, NoiseSpec::reflection(Distribution::Poisson { rate: 0.04 }), lambda_axis())
            }
            FigureId::Uniform => {
                (LAMBDA_MAX, NoiseSpec::reflection(Distribution::Uniform { a: -0.1, b: 0.2 }), lambda_axis())
            }
            FigureId::OracleSame => (LAMBDA_MAX, NoiseSpec::both(gauss(0.03, 0.01)), lambda_axis()),
            FigureId::OracleSplit => {
                (LAMBDA_MAX, NoiseSpec::split(gauss(0.03, 0.01), gauss(0.0, 0.04)), lambda_axis())
            }
            FigureId::PositionCentered => (0.01, NoiseSpec::reflection(gauss(0.0, 0.04)), position_axis()),
            FigureId::PositionBiased => (0.01, NoiseSpec::reflection(gauss(0.05, 0.04)), position_axis()),
        };
        SweepSpec {
            algorithms: vec![Algorithm::Original, Algorithm::D2p { k_d: None }, Algorithm::Improved],
            lambda,
            noise,
            samples,
            seed,
            axis,
        }
    }
}

impl fmt::Display for FigureId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for FigureId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim().to_ascii_lowercase();
        FigureId::ALL
            .into_iter()
            .find(|f| f.as_str() == s)
            .ok_or_else(|| Error::Parse(format!("unknown figure '{s}'")))
    }
}

/// One plotted point. Fields that do not apply serialize as empty strings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FigureRow {
    pub figure: String,
    pub algorithm: String,
    pub lambda: f64,
    pub position: Option<usize>,
    pub dist: String,
    pub mu: Option<f64>,
    pub var: Option<f64>,
    pub rate: Option<f64>,
    pub a: Option<f64>,
    pub b: Option<f64>,
    pub samples: usize,
    pub seed: u64,
    pub mean_success: Option<f64>,
    pub stderr: Option<f64>,
}

impl FigureRow {
    /// Builds a row from a sweep result. The distribution columns describe
    /// the reflection law, or the oracle law when the reflection is noiseless.
    pub fn from_sweep(figure: &str, row: &SweepRow) -> Self {
        let law = row.noise.primary();
        let (mu, var, rate, a, b) = match law {
            Distribution::None => (None, None, None, None, None),
            Distribution::Gaussian { mu, var } => (Some(mu), Some(var), None, None, None),
            Distribution::Poisson { rate } => (None, None, Some(rate), None, None),
            Distribution::Uniform { a, b } => (None, None, None, Some(a), Some(b)),
        };
        let (mean_success, stderr) = match &row.outcome {
            Ok(s) => (Some(s.mean), Some(s.stderr)),
            Err(_) => (None, None),
        };
        FigureRow {
            figure: figure.to_string(),
            algorithm: row.algorithm.name().to_string(),
            lambda: row.lambda,
            position: row.algorithm.position(),
            dist: law.name().to_string(),
            mu,
            var,
            rate,
            a,
            b,
            samples: row.samples,
            seed: row.seed,
            mean_success,
            stderr,
        }
    }
}

/// A figure's rows plus the failures behind any rows with empty results.
#[derive(Debug, Clone, PartialEq)]
pub struct FigureData {
    pub figure: FigureId,
    pub spec: SweepSpec,
    pub rows: Vec<FigureRow>,
    /// `(row index, message)` for every grid point that failed.
    pub errors: Vec<(usize, String)>,
}

pub fn run_figure(figure: FigureId, samples: Option<usize>, seed: u64) -> Result<FigureData> {
    let spec = figure.sweep_spec(samples.unwrap_or_else(|| figure.default_samples()), seed);
    let raw = sweep(&spec)?;
    let errors = raw
        .iter()
        .enumerate()
        .filter_map(|(i, r)| r.outcome.as_ref().err().map(|e| (i, e.clone())))
        .collect();
    let rows = raw.iter().map(|r| FigureRow::from_sweep(figure.as_str(), r)).collect();
    Ok(FigureData { figure, spec, rows, errors })
}
