//! Exact reduced dynamics in the two-dimensional space spanned by `|R⟩`
//! (uniform over non-solutions) and `|T⟩` (uniform over solutions).
//!
//! Vectors are written `(a_R, a_T)`. All operators are plain 2×2 complex
//! matrices; the global phase is never normalized away.

use std::fmt;
use std::ops::Mul;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::schedules::PhaseSchedule;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Fraction of marked items, `M / N`, strictly inside `(0, 1)`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct Lambda(f64);

impl Lambda {
    pub fn new(value: f64) -> Result<Self> {
        if value.is_finite() && value > 0.0 && value < 1.0 {
            Ok(Lambda(value))
        } else {
            Err(Error::Domain(format!("lambda must lie in (0, 1), got {value}")))
        }
    }

    #[inline]
    pub fn get(self) -> f64 {
        self.0
    }

    /// Half the per-step Bloch rotation angle of `G(π)`: `θ = 2·asin(√λ)`.
    #[inline]
    pub fn theta(self) -> f64 {
        2.0 * self.0.sqrt().asin()
    }
}

impl TryFrom<f64> for Lambda {
    type Error = Error;
    fn try_from(value: f64) -> Result<Self> {
        Lambda::new(value)
    }
}

impl From<Lambda> for f64 {
    fn from(l: Lambda) -> f64 {
        l.0
    }
}

impl fmt::Display for Lambda {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// Amplitude pair over `{|R⟩, |T⟩}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReducedState {
    pub a_r: Complex64,
    pub a_t: Complex64,
}

impl ReducedState {
    pub const fn new(a_r: Complex64, a_t: Complex64) -> Self {
        ReducedState { a_r, a_t }
    }

    pub fn basis_r() -> Self {
        ReducedState::new(ONE, ZERO)
    }

    pub fn basis_t() -> Self {
        ReducedState::new(ZERO, ONE)
    }

    pub fn norm_sqr(&self) -> f64 {
        self.a_r.norm_sqr() + self.a_t.norm_sqr()
    }

    /// Success probability `|⟨T|ψ⟩|²`.
    pub fn success_probability(&self) -> f64 {
        self.a_t.norm_sqr()
    }

    /// Bloch coordinates with `|T⟩` at `+z` and `|R⟩` at `-z`.
    pub fn bloch_point(&self) -> BlochPoint {
        let c = self.a_r.conj() * self.a_t;
        BlochPoint {
            x: 2.0 * c.re,
            y: 2.0 * c.im,
            z: self.a_t.norm_sqr() - self.a_r.norm_sqr(),
        }
    }

    /// A state whose Bloch vector is `p` (the global phase is chosen so that
    /// `a_R` is real and nonnegative).
    pub fn from_bloch(p: &BlochPoint) -> Self {
        let a_r = ((1.0 - p.z) / 2.0).max(0.0).sqrt();
        let a_t_mag = ((1.0 + p.z) / 2.0).max(0.0).sqrt();
        let phase = p.y.atan2(p.x);
        ReducedState::new(Complex64::new(a_r, 0.0), Complex64::from_polar(a_t_mag, phase))
    }
}

/// `|ψ0⟩ = (√(1−λ), √λ)`.
pub fn make_initial_state(lambda: Lambda) -> ReducedState {
    let l = lambda.get();
    ReducedState::new(Complex64::new((1.0 - l).sqrt(), 0.0), Complex64::new(l.sqrt(), 0.0))
}

pub fn success_probability(state: &ReducedState) -> f64 {
    state.success_probability()
}

pub fn bloch_point(state: &ReducedState) -> BlochPoint {
    state.bloch_point()
}

/// A point on the unit sphere.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlochPoint {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl BlochPoint {
    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        BlochPoint { x, y, z }
    }

    pub fn dot(&self, other: &BlochPoint) -> f64 {
        self.x * other.x + self.y * other.y + self.z * other.z
    }

    pub fn norm(&self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn sub(&self, other: &BlochPoint) -> BlochPoint {
        BlochPoint::new(self.x - other.x, self.y - other.y, self.z - other.z)
    }

    pub fn scale(&self, s: f64) -> BlochPoint {
        BlochPoint::new(self.x * s, self.y * s, self.z * s)
    }

    /// Great-circle distance; the dot product is clamped to `[-1, 1]`.
    pub fn angle_to(&self, other: &BlochPoint) -> f64 {
        self.dot(other).clamp(-1.0, 1.0).acos()
    }

    /// Euclidean distance from this point to the line through the origin
    /// along the unit vector `axis`.
    pub fn distance_to_axis(&self, axis: &BlochPoint) -> f64 {
        let along = axis.scale(self.dot(axis));
        self.sub(&along).norm()
    }
}

/// 2×2 complex matrix acting on [`ReducedState`], row-major.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Operator2(pub [[Complex64; 2]; 2]);

impl Operator2 {
    pub fn identity() -> Self {
        Operator2([[ONE, ZERO], [ZERO, ONE]])
    }

    pub fn scaled(&self, s: Complex64) -> Self {
        let m = &self.0;
        Operator2([[m[0][0] * s, m[0][1] * s], [m[1][0] * s, m[1][1] * s]])
    }

    pub fn adjoint(&self) -> Self {
        let m = &self.0;
        Operator2([[m[0][0].conj(), m[1][0].conj()], [m[0][1].conj(), m[1][1].conj()]])
    }

    pub fn det(&self) -> Complex64 {
        let m = &self.0;
        m[0][0] * m[1][1] - m[0][1] * m[1][0]
    }

    pub fn trace(&self) -> Complex64 {
        self.0[0][0] + self.0[1][1]
    }

    pub fn apply(&self, s: &ReducedState) -> ReducedState {
        let m = &self.0;
        ReducedState::new(m[0][0] * s.a_r + m[0][1] * s.a_t, m[1][0] * s.a_r + m[1][1] * s.a_t)
    }

    pub fn pow(&self, exponent: usize) -> Self {
        (0..exponent).fold(Operator2::identity(), |acc, _| *self * acc)
    }

    /// Largest entrywise modulus of `self − other`.
    pub fn max_abs_diff(&self, other: &Operator2) -> f64 {
        let mut worst = 0.0_f64;
        for i in 0..2 {
            for j in 0..2 {
                worst = worst.max((self.0[i][j] - other.0[i][j]).norm());
            }
        }
        worst
    }

    /// `max |(U†U − I)_ij|`.
    pub fn unitarity_defect(&self) -> f64 {
        (self.adjoint() * *self).max_abs_diff(&Operator2::identity())
    }
}

impl Mul for Operator2 {
    type Output = Operator2;
    fn mul(self, rhs: Operator2) -> Operator2 {
        let a = &self.0;
        let b = &rhs.0;
        let mut out = [[ZERO; 2]; 2];
        for (i, row) in out.iter_mut().enumerate() {
            for (j, cell) in row.iter_mut().enumerate() {
                *cell = a[i][0] * b[0][j] + a[i][1] * b[1][j];
            }
        }
        Operator2(out)
    }
}

/// `S_o = diag(1, e^{i(π+δα)})`.
pub fn oracle(d_alpha: f64) -> Operator2 {
    Operator2([[ONE, ZERO], [ZERO, Complex64::cis(std::f64::consts::PI + d_alpha)]])
}

/// The phase-β reflection about `|ψ0⟩`.
pub fn reflection(beta: f64, lambda: Lambda) -> Operator2 {
    reflection_raw(beta, lambda.get())
}

fn reflection_raw(beta: f64, l: f64) -> Operator2 {
    let w = ONE - Complex64::cis(beta);
    let off = w * (l * (1.0 - l)).sqrt();
    Operator2([[ONE - w * l, off], [off, Complex64::cis(beta) + w * l]])
}

/// `G(β) = −S_r(β)·S_o(δα)`.
pub fn grover_iterate(beta: f64, lambda: Lambda, d_alpha: f64) -> Operator2 {
    grover_iterate_raw(beta, lambda.get(), d_alpha)
}

/// Same as [`grover_iterate`] but without the `(0, 1)` check on λ, so the
/// closed-form limits `λ → 0, 1` can be evaluated.
pub(crate) fn grover_iterate_raw(beta: f64, l: f64, d_alpha: f64) -> Operator2 {
    (reflection_raw(beta, l) * oracle(d_alpha)).scaled(-ONE)
}

/// Per-step phase offsets `(δβ_i, δα_i)`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct StepOffset {
    pub d_beta: f64,
    pub d_alpha: f64,
}

impl StepOffset {
    pub const ZERO: StepOffset = StepOffset { d_beta: 0.0, d_alpha: 0.0 };

    pub const fn new(d_beta: f64, d_alpha: f64) -> Self {
        StepOffset { d_beta, d_alpha }
    }
}

/// Applies `G(β_i + δβ_i, λ, δα_i)` for `i = 1..k` in order.
pub fn apply_betas(
    lambda: Lambda,
    betas: &[f64],
    state: ReducedState,
    offsets: &[StepOffset],
) -> Result<ReducedState> {
    if offsets.len() != betas.len() {
        return Err(Error::LengthMismatch { expected: betas.len(), got: offsets.len() });
    }
    Ok(betas.iter().zip(offsets).fold(state, |s, (&beta, off)| {
        grover_iterate(beta + off.d_beta, lambda, off.d_alpha).apply(&s)
    }))
}

/// Noiseless shorthand for [`apply_betas`].
pub fn apply_betas_noiseless(lambda: Lambda, betas: &[f64], state: ReducedState) -> ReducedState {
    betas
        .iter()
        .fold(state, |s, &beta| grover_iterate(beta, lambda, 0.0).apply(&s))
}

pub fn apply_schedule(
    schedule: &PhaseSchedule,
    state: ReducedState,
    offsets: &[StepOffset],
) -> Result<ReducedState> {
    apply_betas(schedule.lambda, &schedule.betas, state, offsets)
}
