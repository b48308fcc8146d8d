//! Brute-force `2^n` statevector simulation, used to check the reduced
//! two-dimensional engine.
//!
//! The reflection is applied as a rank-one update,
//! `S_r(β)ψ = e^{iβ}ψ + (1 − e^{iβ})⟨ψ0|ψ⟩ψ0`, which is the lift of the 2×2
//! reflection (`|ψ0⟩` keeps eigenvalue 1, its complement picks up `e^{iβ}`).

use num_complex::Complex64;

use crate::bloch::{apply_schedule, make_initial_state, StepOffset};
use crate::error::{Error, Result};
use crate::schedules::PhaseSchedule;

pub const MAX_QUBITS: u32 = 20;

#[derive(Debug, Clone, PartialEq)]
pub struct FullState {
    pub qubits: u32,
    pub amplitudes: Vec<Complex64>,
    /// Sorted, distinct basis indices of the marked items.
    pub marked: Vec<usize>,
}

impl FullState {
    /// Uniform superposition over `2^qubits` basis states.
    pub fn uniform(qubits: u32, marked: &[usize]) -> Result<Self> {
        if qubits == 0 || qubits > MAX_QUBITS {
            return Err(Error::Domain(format!("qubit count must lie in [1, {MAX_QUBITS}], got {qubits}")));
        }
        let dim = 1usize << qubits;
        let mut marked = marked.to_vec();
        marked.sort_unstable();
        marked.dedup();
        if marked.is_empty() || marked.len() >= dim {
            return Err(Error::Domain(format!("need 1 <= M < {dim} marked items, got {}", marked.len())));
        }
        if let Some(&bad) = marked.iter().find(|&&m| m >= dim) {
            return Err(Error::Domain(format!("marked index {bad} out of range for {qubits} qubits")));
        }
        let amp = Complex64::new(1.0 / (dim as f64).sqrt(), 0.0);
        Ok(FullState { qubits, amplitudes: vec![amp; dim], marked })
    }

    pub fn lambda(&self) -> f64 {
        self.marked.len() as f64 / self.amplitudes.len() as f64
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn success_probability(&self) -> f64 {
        self.marked.iter().map(|&i| self.amplitudes[i].norm_sqr()).sum()
    }

    /// Multiplies every marked amplitude by `e^{i(π+δα)}`.
    pub fn apply_oracle(&mut self, d_alpha: f64) {
        let phase = Complex64::cis(std::f64::consts::PI + d_alpha);
        for &i in &self.marked {
            self.amplitudes[i] *= phase;
        }
    }

    /// Phase-β reflection about the uniform state.
    pub fn apply_reflection(&mut self, beta: f64) {
        let dim = self.amplitudes.len() as f64;
        let inv_sqrt = 1.0 / dim.sqrt();
        let overlap: Complex64 = self.amplitudes.iter().sum::<Complex64>() * inv_sqrt;
        let e = Complex64::cis(beta);
        let shift = (Complex64::new(1.0, 0.0) - e) * overlap * inv_sqrt;
        for a in &mut self.amplitudes {
            *a = e * *a + shift;
        }
    }

    /// One Grover iterate `−S_r(β)·S_o(δα)`.
    pub fn apply_iterate(&mut self, beta: f64, d_alpha: f64) {
        self.apply_oracle(d_alpha);
        self.apply_reflection(beta);
        for a in &mut self.amplitudes {
            *a = -*a;
        }
    }
}

/// Runs `schedule` (with per-step offsets) on the full register and returns
/// the total probability on the marked set. `schedule.lambda` must equal
/// `M / 2^n` exactly.
pub fn full_simulate(qubits: u32, marked: &[usize], schedule: &PhaseSchedule, offsets: &[StepOffset]) -> Result<f64> {
    let mut state = FullState::uniform(qubits, marked)?;
    if state.lambda() != schedule.lambda.get() {
        return Err(Error::Domain(format!(
            "schedule lambda {} does not equal M/2^n = {}",
            schedule.lambda,
            state.lambda()
        )));
    }
    if offsets.len() != schedule.len() {
        return Err(Error::LengthMismatch { expected: schedule.len(), got: offsets.len() });
    }
    if schedule.is_empty() {
        // Summing M copies of 1/N is not exact in floating point.
        return Ok(state.lambda());
    }
    for (&beta, off) in schedule.betas.iter().zip(offsets) {
        state.apply_iterate(beta + off.d_beta, off.d_alpha);
    }
    Ok(state.success_probability())
}

/// `|full − reduced|` for the success probability.
pub fn compare_reduced(qubits: u32, marked: &[usize], schedule: &PhaseSchedule, offsets: &[StepOffset]) -> Result<f64> {
    let full = full_simulate(qubits, marked, schedule, offsets)?;
    if schedule.is_empty() {
        return Ok((full - schedule.lambda.get()).abs());
    }
    let reduced = apply_schedule(schedule, make_initial_state(schedule.lambda), offsets)?.success_probability();
    Ok((full - reduced).abs())
}
