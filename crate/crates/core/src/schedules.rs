//! Phase schedules for the original, D2p, improved-D2p and positioned
//! algorithms.

use std::f64::consts::PI;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::bloch::Lambda;
use crate::error::{Error, Result};
use crate::solver::{solve_two_phase, SolveResult, TwoPhaseTemplate};

/// Largest λ for which a two-phase deterministic tail is guaranteed to exist.
pub const MAX_DETERMINISTIC_LAMBDA: f64 = 0.25;

const TIE_NUDGE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScheduleKind {
    Original,
    D2p,
    Improved,
    Positioned,
}

impl ScheduleKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ScheduleKind::Original => "original",
            ScheduleKind::D2p => "d2p",
            ScheduleKind::Improved => "improved",
            ScheduleKind::Positioned => "positioned",
        }
    }
}

impl fmt::Display for ScheduleKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseSchedule {
    pub lambda: Lambda,
    pub betas: Vec<f64>,
    pub kind: ScheduleKind,
    /// Index of the first designed step, for positioned schedules only.
    pub position_n: Option<usize>,
    /// Solver output for the designed phases (absent for the original algorithm).
    pub solve: Option<SolveResult>,
}

impl PhaseSchedule {
    pub fn len(&self) -> usize {
        self.betas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.betas.is_empty()
    }

    /// Number of steps whose phase is exactly π.
    pub fn pi_steps(&self) -> usize {
        self.betas.iter().filter(|&&b| b == PI).count()
    }
}

/// Step counts derived from λ.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepCounts {
    /// Real-valued step count at which the all-π path reaches `|T⟩`.
    pub k0: f64,
    /// Step count of the original algorithm, `k0` rounded half away from zero.
    pub k_original: usize,
    /// Step count of the deterministic schedules, `max(2, ⌈k0⌉)`.
    pub k: usize,
}

pub fn critical_steps(lambda: Lambda) -> StepCounts {
    let k0 = PI / (4.0 * lambda.get().sqrt().asin()) - 0.5;
    // k0 > -0.5 for every λ in (0, 1), so the casts below never see a negative.
    // The nudge keeps exact half-integer k0 (e.g. λ = 0.5) rounding away from
    // zero despite asin round-off.
    let k_original = (k0 + TIE_NUDGE).round().max(0.0) as usize;
    let k = (k0.ceil().max(0.0) as usize).max(2);
    StepCounts { k0, k_original, k }
}

fn check_deterministic_domain(lambda: Lambda) -> Result<()> {
    if lambda.get() > MAX_DETERMINISTIC_LAMBDA {
        return Err(Error::Domain(format!(
            "deterministic schedules need lambda <= {MAX_DETERMINISTIC_LAMBDA}, got {lambda}"
        )));
    }
    Ok(())
}

pub fn original_schedule(lambda: Lambda) -> PhaseSchedule {
    let counts = critical_steps(lambda);
    PhaseSchedule {
        lambda,
        betas: vec![PI; counts.k_original],
        kind: ScheduleKind::Original,
        position_n: None,
        solve: None,
    }
}

/// `k − 2` steps at π followed by the two designed phases.
pub fn improved_schedule(lambda: Lambda) -> Result<PhaseSchedule> {
    check_deterministic_domain(lambda)?;
    let k = critical_steps(lambda).k;
    let template = TwoPhaseTemplate::tail(lambda, k, k - 2, 0)?;
    let solved = solve_two_phase(&template)?;
    Ok(PhaseSchedule {
        lambda,
        betas: template.betas(solved.beta1, solved.beta2),
        kind: ScheduleKind::Improved,
        position_n: None,
        solve: Some(solved),
    })
}

/// Alternating `[β1, β2, β1, …]` of length `k_d`.
pub fn d2p_schedule(lambda: Lambda, k_d: usize) -> Result<PhaseSchedule> {
    check_deterministic_domain(lambda)?;
    let counts = critical_steps(lambda);
    let min_k = counts.k0.ceil().max(2.0) as usize;
    if k_d < min_k {
        return Err(Error::Precondition(format!(
            "D2p needs k_d >= max(2, ceil(k0)) = {min_k}, got {k_d}"
        )));
    }
    let template = TwoPhaseTemplate::alternating(lambda, k_d)?;
    let solved = solve_two_phase(&template)?;
    Ok(PhaseSchedule {
        lambda,
        betas: template.betas(solved.beta1, solved.beta2),
        kind: ScheduleKind::D2p,
        position_n: None,
        solve: Some(solved),
    })
}

/// `[π]×(n−1) ++ [β1, β2] ++ [π]×(k−n−1)` with `1 ≤ n ≤ k−1`.
pub fn positioned_schedule(lambda: Lambda, n: usize) -> Result<PhaseSchedule> {
    check_deterministic_domain(lambda)?;
    let k = critical_steps(lambda).k;
    if n < 1 || n > k - 1 {
        return Err(Error::Precondition(format!("position n must lie in [1, {}], got {n}", k - 1)));
    }
    let template = TwoPhaseTemplate::tail(lambda, k, n - 1, k - n - 1)?;
    let solved = solve_two_phase(&template)?;
    Ok(PhaseSchedule {
        lambda,
        betas: template.betas(solved.beta1, solved.beta2),
        kind: ScheduleKind::Positioned,
        position_n: Some(n),
        solve: Some(solved),
    })
}
