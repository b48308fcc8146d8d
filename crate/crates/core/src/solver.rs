//! Two-phase deterministic-condition solver.
//!
//! The source of truth is the residual `⟨R|ψf⟩` evaluated by exact operator
//! products. The closed-form systems in [`closed_form_residuals`] and the
//! axis-angle form in [`rotation_decomposition`] are kept as independent
//! cross-checks; nothing in the solve path uses them.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::bloch::{grover_iterate, make_initial_state, Lambda, Operator2, ReducedState};
use crate::error::{Error, Result};

/// Residual magnitude at which a solve counts as converged.
pub const CONVERGENCE_TOL: f64 = 1e-12;
/// Newton iterations per start.
pub const MAX_NEWTON_ITERATIONS: usize = 100;
/// Central-difference step for the Jacobian, in radians.
pub const JACOBIAN_STEP: f64 = 1e-6;
/// Side of the coarse fallback grid.
pub const FALLBACK_GRID: usize = 64;
/// Default Newton start `(β1, β2)`.
pub const DEFAULT_START: (f64, f64) = (PI - 0.1, -PI + 0.1);

/// Slack when testing membership of `[0, π) × (−π, 0]`.
const DOMAIN_SLACK: f64 = 1e-9;

/// Where the two designed phases sit inside a `k`-step schedule.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Layout {
    /// `prefix` π-steps, then `β1, β2`, then `suffix` π-steps.
    Tail { prefix: usize, suffix: usize },
    /// `β1, β2, β1, …` for all `k` steps.
    Alternating,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TwoPhaseTemplate {
    pub lambda: Lambda,
    pub steps: usize,
    pub layout: Layout,
}

impl TwoPhaseTemplate {
    pub fn tail(lambda: Lambda, steps: usize, prefix: usize, suffix: usize) -> Result<Self> {
        if steps < 2 || prefix + suffix + 2 != steps {
            return Err(Error::Precondition(format!(
                "tail layout needs prefix + suffix = steps - 2 (steps={steps}, prefix={prefix}, suffix={suffix})"
            )));
        }
        Ok(TwoPhaseTemplate { lambda, steps, layout: Layout::Tail { prefix, suffix } })
    }

    pub fn alternating(lambda: Lambda, steps: usize) -> Result<Self> {
        if steps < 2 {
            return Err(Error::Precondition(format!("alternating layout needs >= 2 steps, got {steps}")));
        }
        Ok(TwoPhaseTemplate { lambda, steps, layout: Layout::Alternating })
    }

    /// The full phase list for the given designed pair; `β1` is applied first.
    pub fn betas(&self, beta1: f64, beta2: f64) -> Vec<f64> {
        match self.layout {
            Layout::Tail { prefix, suffix } => {
                let mut v = vec![PI; prefix];
                v.push(beta1);
                v.push(beta2);
                v.extend(std::iter::repeat_n(PI, suffix));
                v
            }
            Layout::Alternating => (0..self.steps).map(|i| if i % 2 == 0 { beta1 } else { beta2 }).collect(),
        }
    }

    fn final_state(&self, beta1: f64, beta2: f64) -> ReducedState {
        let l = self.lambda;
        let s0 = make_initial_state(l);
        match self.layout {
            Layout::Tail { prefix, suffix } => {
                let g_pi = grover_iterate(PI, l, 0.0);
                let mut s = (0..prefix).fold(s0, |s, _| g_pi.apply(&s));
                s = grover_iterate(beta1, l, 0.0).apply(&s);
                s = grover_iterate(beta2, l, 0.0).apply(&s);
                (0..suffix).fold(s, |s, _| g_pi.apply(&s))
            }
            Layout::Alternating => {
                let g1 = grover_iterate(beta1, l, 0.0);
                let g2 = grover_iterate(beta2, l, 0.0);
                (0..self.steps).fold(s0, |s, i| if i % 2 == 0 { g1.apply(&s) } else { g2.apply(&s) })
            }
        }
    }
}

/// `⟨R|ψf⟩` for the template's schedule at the given phases.
pub fn residual(template: &TwoPhaseTemplate, beta1: f64, beta2: f64) -> Complex64 {
    template.final_state(beta1, beta2).a_r
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolveResult {
    /// In `[0, π)`.
    pub beta1: f64,
    /// In `(−π, 0]`.
    pub beta2: f64,
    /// `|⟨R|ψf⟩|` at the returned phases.
    pub residual: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Wraps an angle into `(−π, π]`.
pub fn wrap_angle(x: f64) -> f64 {
    let two_pi = 2.0 * PI;
    let mut w = x.rem_euclid(two_pi);
    if w > PI {
        w -= two_pi;
    }
    w
}

/// Maps a root onto the `β1 ≥ 0` half using the conjugation symmetry
/// `(β1, β2) → (−β1, −β2)` (which maps zeros of the residual to zeros).
/// Returns `None` when the folded pair is outside `[0, π) × (−π, 0]`.
fn fold_into_domain(beta1: f64, beta2: f64) -> Option<(f64, f64)> {
    let (mut b1, mut b2) = (wrap_angle(beta1), wrap_angle(beta2));
    if b1 < 0.0 {
        b1 = -b1;
        b2 = -b2;
    }
    if b1 >= PI - DOMAIN_SLACK {
        // π and −π are the same phase; nothing is gained by keeping b1 = π.
        b1 = PI;
    }
    if b2 > PI - DOMAIN_SLACK {
        b2 -= 2.0 * PI;
    }
    let in_domain = b1 >= -DOMAIN_SLACK && b1 <= PI && b2 >= -PI - DOMAIN_SLACK && b2 <= DOMAIN_SLACK;
    in_domain.then_some((b1.max(0.0), b2.min(0.0)))
}

fn residual_vec(t: &TwoPhaseTemplate, b1: f64, b2: f64) -> [f64; 2] {
    let r = residual(t, b1, b2);
    [r.re, r.im]
}

struct NewtonOutcome {
    beta1: f64,
    beta2: f64,
    residual: f64,
    iterations: usize,
}

/// Damped Newton on `(Re, Im)` of the residual with a central-difference
/// Jacobian and halving line search.
///
/// Iteration continues past [`CONVERGENCE_TOL`] for as long as the residual
/// keeps shrinking. Regular roots stop one step later; degenerate roots
/// (singular Jacobian, e.g. `λ = 0.25` with two steps) converge only linearly
/// and need the extra steps to be located to better than `√tol`.
fn newton(t: &TwoPhaseTemplate, start: (f64, f64), max_iter: usize) -> NewtonOutcome {
    let (mut b1, mut b2) = start;
    let mut f = residual_vec(t, b1, b2);
    let mut norm = f[0].hypot(f[1]);
    let mut iterations = 0;
    while iterations < max_iter && norm > 0.0 {
        iterations += 1;
        let h = JACOBIAN_STEP;
        let d1p = residual_vec(t, b1 + h, b2);
        let d1m = residual_vec(t, b1 - h, b2);
        let d2p = residual_vec(t, b1, b2 + h);
        let d2m = residual_vec(t, b1, b2 - h);
        let j = [
            [(d1p[0] - d1m[0]) / (2.0 * h), (d2p[0] - d2m[0]) / (2.0 * h)],
            [(d1p[1] - d1m[1]) / (2.0 * h), (d2p[1] - d2m[1]) / (2.0 * h)],
        ];
        let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
        if det.abs() < 1e-14 {
            break;
        }
        let dx1 = -(j[1][1] * f[0] - j[0][1] * f[1]) / det;
        let dx2 = -(-j[1][0] * f[0] + j[0][0] * f[1]) / det;

        let mut step = 1.0;
        let mut accepted = false;
        while step > 1e-6 {
            let (n1, n2) = (b1 + step * dx1, b2 + step * dx2);
            let nf = residual_vec(t, n1, n2);
            let nnorm = nf[0].hypot(nf[1]);
            if nnorm < norm {
                b1 = n1;
                b2 = n2;
                f = nf;
                norm = nnorm;
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    NewtonOutcome { beta1: b1, beta2: b2, residual: norm, iterations }
}

fn finish(t: &TwoPhaseTemplate, out: &NewtonOutcome) -> Option<SolveResult> {
    if out.residual > CONVERGENCE_TOL {
        return None;
    }
    let (b1, b2) = fold_into_domain(out.beta1, out.beta2)?;
    let residual = residual(t, b1, b2).norm();
    (residual <= CONVERGENCE_TOL).then_some(SolveResult {
        beta1: b1,
        beta2: b2,
        residual,
        iterations: out.iterations,
        converged: true,
    })
}

/// Grid points of `[0, π) × (−π, 0]` ordered by increasing `|residual|`.
fn grid_candidates(t: &TwoPhaseTemplate, side: usize) -> Vec<(f64, f64, f64)> {
    let mut cells = Vec::with_capacity(side * side);
    for i in 0..side {
        let b1 = PI * (i as f64 + 0.5) / side as f64;
        for j in 0..side {
            let b2 = -PI * (j as f64 + 0.5) / side as f64;
            cells.push((residual(t, b1, b2).norm(), b1, b2));
        }
    }
    cells.sort_by(|a, b| a.0.total_cmp(&b.0));
    cells
}

/// Solves the deterministic condition from the default start, falling back
/// to a coarse grid search.
pub fn solve_two_phase(template: &TwoPhaseTemplate) -> Result<SolveResult> {
    solve_two_phase_from(template, DEFAULT_START)
}

/// Like [`solve_two_phase`] with an explicit Newton start.
pub fn solve_two_phase_from(template: &TwoPhaseTemplate, start: (f64, f64)) -> Result<SolveResult> {
    let first = newton(template, start, MAX_NEWTON_ITERATIONS);
    let mut iterations = first.iterations;
    if let Some(r) = finish(template, &first) {
        return Ok(r);
    }
    let mut best = first.residual;
    for &(_, b1, b2) in grid_candidates(template, FALLBACK_GRID).iter().take(8) {
        let out = newton(template, (b1, b2), MAX_NEWTON_ITERATIONS);
        iterations += out.iterations;
        if let Some(mut r) = finish(template, &out) {
            r.iterations = iterations;
            return Ok(r);
        }
        best = best.min(out.residual);
    }
    Err(Error::NoConvergence { residual: best, iterations })
}

/// Every distinct root inside `[0, π) × (−π, 0]` reachable by refining the
/// local minima of `|residual|` on a `side × side` grid. Roots closer than
/// `1e-6` are merged.
pub fn enumerate_roots(template: &TwoPhaseTemplate, side: usize) -> Vec<(f64, f64)> {
    let cell = |i: usize, j: usize| {
        let b1 = PI * (i as f64 + 0.5) / side as f64;
        let b2 = -PI * (j as f64 + 0.5) / side as f64;
        (b1, b2)
    };
    let values: Vec<Vec<f64>> = (0..side)
        .map(|i| {
            (0..side)
                .map(|j| {
                    let (b1, b2) = cell(i, j);
                    residual(template, b1, b2).norm()
                })
                .collect()
        })
        .collect();
    let mut roots: Vec<(f64, f64)> = Vec::new();
    for i in 0..side {
        for j in 0..side {
            let v = values[i][j];
            let is_min = (i.saturating_sub(1)..=(i + 1).min(side - 1)).all(|a| {
                (j.saturating_sub(1)..=(j + 1).min(side - 1)).all(|b| values[a][b] >= v)
            });
            if !is_min {
                continue;
            }
            let out = newton(template, cell(i, j), MAX_NEWTON_ITERATIONS);
            if let Some(r) = finish(template, &out) {
                if !roots.iter().any(|&(a, b)| (a - r.beta1).hypot(b - r.beta2) < 1e-6) {
                    roots.push((r.beta1, r.beta2));
                }
            }
        }
    }
    roots
}

/// Axis-angle form `e^{−i(β1+β2)/2} G(β2)G(β1) = cos φ·I + i sin φ·(σ·n)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RotationDecomposition {
    /// In `(0, π)`.
    pub phi: f64,
    pub n_x: f64,
    pub n_y: f64,
    pub n_z: f64,
}

impl RotationDecomposition {
    pub fn matrix(&self) -> Operator2 {
        let (c, s) = (self.phi.cos(), self.phi.sin());
        let i = Complex64::i();
        Operator2([
            [Complex64::new(c, 0.0) + i * s * self.n_z, i * s * Complex64::new(self.n_x, -self.n_y)],
            [i * s * Complex64::new(self.n_x, self.n_y), Complex64::new(c, 0.0) - i * s * self.n_z],
        ])
    }
}

/// `(cos φ, n_x sin φ, n_y sin φ, n_z sin φ)` straight from the closed-form
/// expressions; no division by `sin φ`.
fn scaled_rotation(beta1: f64, beta2: f64, l: f64) -> (f64, f64, f64, f64) {
    let s1 = (beta1 / 2.0).sin();
    let s2 = (beta2 / 2.0).sin();
    let root = (l * (1.0 - l)).sqrt();
    let cos_phi = ((beta1 + beta2) / 2.0).cos() + 8.0 * l * (1.0 - l) * s1 * s2;
    let nx = 2.0 * root * ((beta1 - beta2) / 2.0).sin();
    let ny = 4.0 * (1.0 - 2.0 * l) * root * s1 * s2;
    let nz = -(1.0 - 2.0 * l) * ((beta1 + beta2) / 2.0).sin();
    (cos_phi, nx, ny, nz)
}

pub fn rotation_decomposition(beta1: f64, beta2: f64, lambda: Lambda) -> Result<RotationDecomposition> {
    let (cos_phi, nx, ny, nz) = scaled_rotation(beta1, beta2, lambda.get());
    let phi = cos_phi.clamp(-1.0, 1.0).acos();
    let sin_phi = phi.sin();
    if sin_phi.abs() < 1e-9 {
        return Err(Error::Degenerate(format!("sin(phi) = {sin_phi:.3e}; rotation axis undefined")));
    }
    Ok(RotationDecomposition { phi, n_x: nx / sin_phi, n_y: ny / sin_phi, n_z: nz / sin_phi })
}

/// `G(π)^m` through its eigen-decomposition `G(π) = −X Λ X⁻¹`,
/// `X = (iI + σx)/√2`, `Λ = diag(e^{iφλ}, e^{−iφλ})`, `cos φλ = 1 − 2λ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiagonalizedPiPower {
    pub phi_lambda: f64,
    pub exponent: usize,
}

impl DiagonalizedPiPower {
    pub fn new(lambda: Lambda, exponent: usize) -> Self {
        DiagonalizedPiPower { phi_lambda: (1.0 - 2.0 * lambda.get()).acos(), exponent }
    }

    pub fn matrix(&self) -> Operator2 {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let x = Operator2([
            [Complex64::new(0.0, h), Complex64::new(h, 0.0)],
            [Complex64::new(h, 0.0), Complex64::new(0.0, h)],
        ]);
        let angle = self.exponent as f64 * self.phi_lambda;
        let zero = Complex64::new(0.0, 0.0);
        let diag = Operator2([[Complex64::cis(angle), zero], [zero, Complex64::cis(-angle)]]);
        let sign = if self.exponent % 2 == 0 { 1.0 } else { -1.0 };
        (x * diag * x.adjoint()).scaled(Complex64::new(sign, 0.0))
    }
}

/// Which closed-form system to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ClosedForm {
    /// Two designed steps at the end of a `k`-step schedule.
    Improved { k: usize },
    /// Two designed steps starting at step `n` of `k`.
    Positioned { k: usize, n: usize },
    /// Alternating D2p with `k_d` steps. Only even `k_d` has a closed form;
    /// odd `k_d` yields no residuals.
    D2p { k_d: usize },
}

/// Absolute left-minus-right of each closed-form equation at the given
/// phases.
pub fn closed_form_residuals(beta1: f64, beta2: f64, lambda: Lambda, form: ClosedForm) -> Vec<f64> {
    let l = lambda.get();
    let (cos_phi, nx, ny, nz) = scaled_rotation(beta1, beta2, l);
    let phi_l = (1.0 - 2.0 * l).acos();
    let (sr, st) = ((1.0 - l).sqrt(), l.sqrt());
    match form {
        ClosedForm::Improved { k } => {
            let a = (k as f64 - 2.0) * phi_l;
            let v = sr * a.sin() + st * a.cos();
            let u = sr * a.cos() - st * a.sin();
            vec![(v * nx + u * nz).abs(), (v * ny + u * cos_phi).abs()]
        }
        ClosedForm::Positioned { k, n } => {
            let a = (n as f64 - 1.0) * phi_l;
            let p = (k as f64 - n as f64 - 1.0) * phi_l;
            let v = sr * a.sin() + st * a.cos();
            let u = sr * a.cos() - st * a.sin();
            let (cp, sp) = (p.cos(), p.sin());
            vec![
                ((nx * cp + nz * sp) * v + (nz * cp - nx * sp) * u).abs(),
                ((ny * cp - cos_phi * sp) * v + (cos_phi * cp + ny * sp) * u).abs(),
            ]
        }
        ClosedForm::D2p { k_d } => {
            if k_d % 2 != 0 {
                return Vec::new();
            }
            // φ from the trace of the actual product, so the third line is a
            // genuine check of the closed-form cos φ.
            let product = grover_iterate(beta2, lambda, 0.0) * grover_iterate(beta1, lambda, 0.0);
            let phased = product.scaled(Complex64::cis(-(beta1 + beta2) / 2.0));
            let cos_phi_trace = (phased.trace().re / 2.0).clamp(-1.0, 1.0);
            let phi = cos_phi_trace.acos();
            let s1 = (beta1 / 2.0).sin();
            let s2 = (beta2 / 2.0).sin();
            // The first two lines are multiplied through by their denominators
            // (cos(k_d φ/2)·sin φ and cos(β1/2)·cos(β2/2)) so they stay finite
            // where a factor vanishes, e.g. β2 → 0 with k_d φ/2 → π/2 at λ = 1/4.
            let half = k_d as f64 / 2.0 * phi;
            let line1 = half.cos() * phi.sin() + 4.0 * l * (1.0 - 2.0 * l) * s1 * s2 * half.sin();
            let line2 = (1.0 - 4.0 * l) * s1 * (beta2 / 2.0).cos() + (beta1 / 2.0).cos() * s2;
            let line3 = ((beta1 + beta2) / 2.0).cos() + 8.0 * l * (1.0 - l) * s1 * s2 - cos_phi_trace;
            vec![line1.abs(), line2.abs(), line3.abs()]
        }
    }
}

/// `⟨R| G(π)^m G(β) G(π)^n |ψ0⟩` with `m + n = k − 1`.
pub fn single_phase_residual(lambda: Lambda, steps: usize, m: usize, beta: f64) -> Complex64 {
    assert!(m < steps, "split m must be < steps");
    let n = steps - 1 - m;
    let g_pi = grover_iterate(PI, lambda, 0.0);
    let mut s = make_initial_state(lambda);
    s = (0..n).fold(s, |s, _| g_pi.apply(&s));
    s = grover_iterate(beta, lambda, 0.0).apply(&s);
    (0..m).fold(s, |s, _| g_pi.apply(&s)).a_r
}

/// The β-independent imaginary generator of `G(β) = G1(β) + i sin β · G2`.
pub fn imaginary_generator(lambda: Lambda) -> [[f64; 2]; 2] {
    let l = lambda.get();
    let root = (l * (1.0 - l)).sqrt();
    [[-l, -root], [root, 1.0 - l]]
}

/// `⟨R| G(π)^m G2 G(π)^n |ψ0⟩` (a real number).
pub fn imaginary_coefficient(lambda: Lambda, steps: usize, m: usize) -> f64 {
    let n = steps - 1 - m;
    let g_pi = grover_iterate(PI, lambda, 0.0);
    let g2 = imaginary_generator(lambda);
    let c = |x: f64| Complex64::new(x, 0.0);
    let g2 = Operator2([[c(g2[0][0]), c(g2[0][1])], [c(g2[1][0]), c(g2[1][1])]]);
    let mut s = make_initial_state(lambda);
    s = (0..n).fold(s, |s, _| g_pi.apply(&s));
    s = g2.apply(&s);
    (0..m).fold(s, |s, _| g_pi.apply(&s)).a_r.re
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanReport {
    pub lambda: f64,
    pub steps: usize,
    pub resolution: usize,
    pub exclusion: f64,
    /// Smallest `|⟨R|ψf⟩|` over the scanned (split, β) pairs outside the
    /// exclusion zones.
    pub min_residual: f64,
    pub argmin_beta: f64,
    pub argmin_split: usize,
    /// Smallest `|sin β|·|⟨R|G(π)^m G2 G(π)^n|ψ0⟩|` outside the exclusion zones.
    pub min_imaginary: f64,
    /// `|⟨R|G(π)^m G2 G(π)^n|ψ0⟩|` per split `m = 0..k−1`.
    pub imaginary_coefficients: Vec<f64>,
    /// Largest mismatch between `Im⟨R|ψf⟩` and `sin β · coefficient`.
    pub imaginary_identity_error: f64,
}

/// Half-width of the neighborhoods of `{0, π, 2π}` skipped by the scan.
pub const SCAN_EXCLUSION: f64 = 0.05;

/// Scans single-non-π-step schedules `G(π)^m G(β) G(π)^n`, `m + n = k − 1`,
/// for zeros of the deterministic condition away from `β ∈ {0, π, 2π}`.
pub fn impossibility_scan(lambda: Lambda, resolution: usize) -> ScanReport {
    let steps = crate::schedules::critical_steps(lambda).k;
    let coefficients: Vec<f64> = (0..steps).map(|m| imaginary_coefficient(lambda, steps, m)).collect();
    let mut report = ScanReport {
        lambda: lambda.get(),
        steps,
        resolution,
        exclusion: SCAN_EXCLUSION,
        min_residual: f64::INFINITY,
        argmin_beta: f64::NAN,
        argmin_split: 0,
        min_imaginary: f64::INFINITY,
        imaginary_coefficients: coefficients.iter().map(|c| c.abs()).collect(),
        imaginary_identity_error: 0.0,
    };
    for j in 1..=resolution {
        let beta = 2.0 * PI * j as f64 / (resolution + 1) as f64;
        let excluded = [0.0, PI, 2.0 * PI].iter().any(|&c| (beta - c).abs() < SCAN_EXCLUSION);
        for (m, &coef) in coefficients.iter().enumerate() {
            let r = single_phase_residual(lambda, steps, m, beta);
            let err = (r.im - beta.sin() * coef).abs();
            report.imaginary_identity_error = report.imaginary_identity_error.max(err);
            if excluded {
                continue;
            }
            let mag = r.norm();
            if mag < report.min_residual {
                report.min_residual = mag;
                report.argmin_beta = beta;
                report.argmin_split = m;
            }
            report.min_imaginary = report.min_imaginary.min((beta.sin() * coef).abs());
        }
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bloch::apply_betas_noiseless;
    use crate::schedules::critical_steps;
    use proptest::prelude::*;

    fn lam(x: f64) -> Lambda {
        Lambda::new(x).unwrap()
    }

    fn improved_template(l: f64) -> TwoPhaseTemplate {
        let k = critical_steps(lam(l)).k;
        TwoPhaseTemplate::tail(lam(l), k, k - 2, 0).unwrap()
    }

    #[test]
    fn template_validation() {
        assert!(TwoPhaseTemplate::tail(lam(0.1), 5, 2, 2).is_err());
        assert!(TwoPhaseTemplate::tail(lam(0.1), 1, 0, 0).is_err());
        assert!(TwoPhaseTemplate::alternating(lam(0.1), 1).is_err());
        let t = TwoPhaseTemplate::tail(lam(0.1), 5, 1, 2).unwrap();
        assert_eq!(t.betas(1.0, -1.0), vec![PI, 1.0, -1.0, PI, PI]);
        let t = TwoPhaseTemplate::alternating(lam(0.1), 5).unwrap();
        assert_eq!(t.betas(1.0, -1.0), vec![1.0, -1.0, 1.0, -1.0, 1.0]);
    }

    #[test]
    fn residual_examples() {
        let t = improved_template(0.125);
        let r = solve_two_phase(&t).unwrap();
        assert!(residual(&t, r.beta1, r.beta2).norm() < 1e-12);

        // G(0) = −I, so two trivial steps leave |⟨R|ψ0⟩| = √(1−λ).
        let t = TwoPhaseTemplate::tail(lam(0.125), 2, 0, 0).unwrap();
        assert!((residual(&t, 0.0, 0.0).norm() - (1.0 - 0.125_f64).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn unique_zero_at_quarter() {
        let t = TwoPhaseTemplate::tail(lam(0.25), 2, 0, 0).unwrap();
        let roots = enumerate_roots(&t, 200);
        assert_eq!(roots.len(), 1, "{roots:?}");
    }

    #[test]
    fn solve_examples() {
        let r = solve_two_phase(&improved_template(0.125)).unwrap();
        assert!(r.converged && r.residual < 1e-12);
        assert!(r.beta1 > 0.0 && r.beta1 < PI);
        assert!(r.beta2 > -PI && r.beta2 < 0.0);

        let k = critical_steps(lam(0.01)).k;
        let end = solve_two_phase(&TwoPhaseTemplate::tail(lam(0.01), k, k - 2, 0).unwrap()).unwrap();
        let pos = solve_two_phase(&TwoPhaseTemplate::tail(lam(0.01), k, 6, 0).unwrap()).unwrap();
        assert!((end.beta1 - pos.beta1).abs() < 1e-8 && (end.beta2 - pos.beta2).abs() < 1e-8);
    }

    #[test]
    fn multi_start_converges_to_one_root() {
        let t = improved_template(0.04);
        let reference = solve_two_phase(&t).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                let start = (PI * (i as f64 + 0.5) / 4.0, -PI * (j as f64 + 0.5) / 4.0);
                let r = solve_two_phase_from(&t, start).unwrap();
                assert!((r.beta1 - reference.beta1).abs() < 1e-8, "start {start:?}");
                assert!((r.beta2 - reference.beta2).abs() < 1e-8, "start {start:?}");
            }
        }
    }

    #[test]
    fn rotation_decomposition_examples() {
        assert!(matches!(rotation_decomposition(0.0, 0.0, lam(0.3)), Err(Error::Degenerate(_))));
        let d = rotation_decomposition(PI, PI, lam(0.04)).unwrap();
        assert!((d.phi.cos() - (-0.6928)).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn rotation_reconstruction(b1 in -PI..PI, b2 in -PI..PI, l in 0.001..0.999_f64) {
            let lw = lam(l);
            if let Ok(d) = rotation_decomposition(b1, b2, lw) {
                let norm = d.n_x * d.n_x + d.n_y * d.n_y + d.n_z * d.n_z;
                prop_assume!(d.phi.sin() > 1e-4);
                prop_assert!((norm - 1.0).abs() < 1e-10, "norm {}", norm);
                let product = (grover_iterate(b2, lw, 0.0) * grover_iterate(b1, lw, 0.0))
                    .scaled(Complex64::cis(-(b1 + b2) / 2.0));
                prop_assert!(d.matrix().max_abs_diff(&product) < 1e-10);
            }
        }

        #[test]
        fn diagonalized_power(l in 0.001..0.999_f64, m in 0usize..=200) {
            let lw = lam(l);
            let direct = grover_iterate(PI, lw, 0.0).pow(m);
            prop_assert!(DiagonalizedPiPower::new(lw, m).matrix().max_abs_diff(&direct) < 1e-10);
        }
    }

    #[test]
    fn closed_forms_at_solutions() {
        let l = lam(0.04);
        let k = critical_steps(l).k;
        let r = solve_two_phase(&TwoPhaseTemplate::tail(l, k, k - 2, 0).unwrap()).unwrap();
        for v in closed_form_residuals(r.beta1, r.beta2, l, ClosedForm::Improved { k }) {
            assert!(v < 1e-8);
        }

        let l = lam(0.01);
        let k = critical_steps(l).k;
        let n = 3;
        let r = solve_two_phase(&TwoPhaseTemplate::tail(l, k, n - 1, k - n - 1).unwrap()).unwrap();
        for v in closed_form_residuals(r.beta1, r.beta2, l, ClosedForm::Positioned { k, n }) {
            assert!(v < 1e-8);
        }
        // Off the solution the residuals are not small.
        let off = closed_form_residuals(r.beta1 + 0.1, r.beta2, l, ClosedForm::Positioned { k, n });
        assert!(off.iter().any(|&v| v > 1e-4));

        let l = lam(0.04);
        let k = critical_steps(l).k;
        let kd = if k % 2 == 0 { k } else { k + 1 };
        let r = solve_two_phase(&TwoPhaseTemplate::alternating(l, kd).unwrap()).unwrap();
        let res = closed_form_residuals(r.beta1, r.beta2, l, ClosedForm::D2p { k_d: kd });
        assert_eq!(res.len(), 3);
        for v in res {
            assert!(v < 1e-8, "{v}");
        }
        assert!(closed_form_residuals(r.beta1, r.beta2, l, ClosedForm::D2p { k_d: kd + 1 }).is_empty());
    }

    #[test]
    fn scan_examples() {
        let l = lam(0.05);
        let report = impossibility_scan(l, 1000);
        assert!(report.min_residual > 1e-3, "{report:?}");
        assert!(report.imaginary_identity_error < 1e-12);

        let k = report.steps;
        let all_pi = apply_betas_noiseless(l, &vec![PI; k], make_initial_state(l)).a_r;
        let shorter = apply_betas_noiseless(l, &vec![PI; k - 1], make_initial_state(l)).a_r;
        for m in 0..k {
            assert!((single_phase_residual(l, k, m, PI) - all_pi).norm() < 1e-14);
        }
        // G(0) = −S_o is diagonal: with no π-steps after it, only a phase is lost.
        assert!((single_phase_residual(l, k, 0, 0.0).norm() - shorter.norm()).abs() < 1e-14);
        // With π-steps after it, the sign flip on |T⟩ reverses the rotation.
        assert!((single_phase_residual(l, k, 1, 0.0).norm() - shorter.norm()).abs() > 1e-3);
    }

    #[test]
    fn wrap_and_fold() {
        assert!((wrap_angle(3.0 * PI) - PI).abs() < 1e-12);
        assert!((wrap_angle(-0.5) + 0.5).abs() < 1e-15);
        assert_eq!(fold_into_domain(-1.0, 2.0), Some((1.0, -2.0)));
        assert_eq!(fold_into_domain(1.0, 2.0), None);
    }
}
