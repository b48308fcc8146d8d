//! Bloch-sphere geometry of a single Grover step.
//!
//! `S_o` takes `A1` to `B1` (a half turn about `z`), then `S_r(−β)` rotates
//! `B1` about the `|ψ0⟩` axis to `A2`. With `β = π` the image is `A2′`, the
//! point on the geodesic. The angle `γ` between the geodesic `A1A2′` and the
//! warp `A1A2` obeys `d·γ = r·|β − π|` for small arcs.

use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use crate::bloch::{bloch_point, grover_iterate, make_initial_state, oracle, reflection, BlochPoint, Lambda, ReducedState};
use crate::error::{Error, Result};
use crate::schedules::PhaseSchedule;

/// Below this arc length the step geometry is undefined.
pub const MIN_ARC: f64 = 1e-9;

const UNIT_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepGeometry {
    /// Great-circle length of `A1A2′`.
    pub d: f64,
    /// Radius of the `S_r` rotation circle about the `|ψ0⟩` axis.
    pub r: f64,
    pub gamma: f64,
    /// Phase of the step, wrapped into `[0, 2π)`.
    pub beta: f64,
    pub a1: BlochPoint,
    pub b1: BlochPoint,
    pub a2: BlochPoint,
    pub a2prime: BlochPoint,
}

fn wrap_positive(beta: f64) -> f64 {
    let w = beta.rem_euclid(TAU);
    if w >= TAU {
        0.0
    } else {
        w
    }
}

fn rotate(op: &crate::bloch::Operator2, p: &BlochPoint) -> BlochPoint {
    op.apply(&ReducedState::from_bloch(p)).bloch_point()
}

pub fn step_geometry(start: BlochPoint, beta: f64, lambda: Lambda) -> Result<StepGeometry> {
    if (start.norm() - 1.0).abs() > UNIT_SLACK {
        return Err(Error::Domain(format!("start point has norm {}, expected 1", start.norm())));
    }
    if !beta.is_finite() {
        return Err(Error::Domain(format!("beta must be finite, got {beta}")));
    }
    let beta = wrap_positive(beta);
    let axis = bloch_point(&make_initial_state(lambda));
    let b1 = rotate(&oracle(0.0), &start);
    let a2 = rotate(&reflection(-beta, lambda), &b1);
    let a2prime = rotate(&reflection(-PI, lambda), &b1);
    let r = b1.distance_to_axis(&axis);
    let d = start.angle_to(&a2prime);
    if d < MIN_ARC {
        return Err(Error::Degenerate(format!("arc A1A2' has length {d}")));
    }
    let gamma = r * (beta - PI).abs() / d;
    Ok(StepGeometry { d, r, gamma, beta, a1: start, b1, a2, a2prime })
}

/// First-order change of the warped-path length, `−d·sinγ·δγ` with
/// `δγ = (r/d)·δβ·sgn(β − π)`.
pub fn warped_path_deviation(geom: &StepGeometry, d_beta: f64) -> f64 {
    if geom.beta == PI {
        return 0.0;
    }
    let d_gamma = geom.r / geom.d * d_beta * (geom.beta - PI).signum();
    -geom.d * geom.gamma.sin() * d_gamma
}

/// Sum of [`warped_path_deviation`] over the steps of `schedule`, each step's
/// geometry taken on the noiseless trajectory from `|ψ0⟩`.
pub fn schedule_deviation(schedule: &PhaseSchedule, d_betas: &[f64]) -> Result<f64> {
    if d_betas.len() != schedule.len() {
        return Err(Error::LengthMismatch { expected: schedule.len(), got: d_betas.len() });
    }
    let lambda = schedule.lambda;
    let mut state = make_initial_state(lambda);
    let mut total = 0.0;
    for (&beta, &db) in schedule.betas.iter().zip(d_betas) {
        if db != 0.0 {
            let geom = step_geometry(state.bloch_point(), beta, lambda)?;
            total += warped_path_deviation(&geom, db);
        }
        state = grover_iterate(beta, lambda, 0.0).apply(&state);
    }
    Ok(total)
}

/// `d·cos γ` as a function of β for a fixed start point: the warped-path
/// length that [`warped_path_deviation`] linearizes.
pub fn warped_path_length(start: BlochPoint, beta: f64, lambda: Lambda) -> Result<f64> {
    let g = step_geometry(start, beta, lambda)?;
    Ok(g.d * g.gamma.cos())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::schedules::{improved_schedule, original_schedule};
    use proptest::prelude::*;

    fn lam(x: f64) -> Lambda {
        Lambda::new(x).unwrap()
    }

    fn psi0(l: f64) -> BlochPoint {
        make_initial_state(lam(l)).bloch_point()
    }

    #[test]
    fn pi_step_has_no_warp() {
        let g = step_geometry(psi0(0.04), PI, lam(0.04)).unwrap();
        assert!(g.gamma.abs() < 1e-12);
        assert!(g.a2.sub(&g.a2prime).norm() < 1e-12);
        assert_eq!(warped_path_deviation(&g, 0.1), 0.0);
    }

    #[test]
    fn arc_matches_rotation_angle() {
        let g = step_geometry(psi0(0.04), PI, lam(0.04)).unwrap();
        assert!((g.d - 4.0 * 0.2_f64.asin()).abs() < 1e-9);
        // A2' is the all-π iterate of the start.
        let next = grover_iterate(PI, lam(0.04), 0.0).apply(&make_initial_state(lam(0.04))).bloch_point();
        assert!(next.sub(&g.a2prime).norm() < 1e-12);
    }

    #[test]
    fn arc_identity() {
        let g = step_geometry(psi0(0.04), 2.5, lam(0.04)).unwrap();
        assert!((g.d * g.gamma - g.r * (2.5 - PI).abs()).abs() < 1e-9);
        assert!(g.gamma > 0.0);
    }

    #[test]
    fn negative_phase_is_wrapped() {
        let a = step_geometry(psi0(0.1), -1.0, lam(0.1)).unwrap();
        let b = step_geometry(psi0(0.1), TAU - 1.0, lam(0.1)).unwrap();
        assert!((a.gamma - b.gamma).abs() < 1e-12);
        assert!(a.a2.sub(&b.a2).norm() < 1e-12);
    }

    #[test]
    fn deviation_matches_finite_difference() {
        let (start, l, beta, db) = (psi0(0.04), lam(0.04), 2.5, 1e-3);
        let g = step_geometry(start, beta, l).unwrap();
        let delta = warped_path_length(start, beta + db, l).unwrap() - warped_path_length(start, beta, l).unwrap();
        assert!((delta - warped_path_deviation(&g, db)).abs() < 5e-6);
        assert_eq!(warped_path_deviation(&g, 0.0), 0.0);
    }

    #[test]
    fn taylor_remainder_is_second_order() {
        let (start, l, beta) = (psi0(0.04), lam(0.04), 2.5);
        let g = step_geometry(start, beta, l).unwrap();
        let base = warped_path_length(start, beta, l).unwrap();
        let steps = [1e-2, 1e-3, 1e-4];
        let errs: Vec<f64> = steps
            .iter()
            .map(|&db| (warped_path_length(start, beta + db, l).unwrap() - base - warped_path_deviation(&g, db)).abs())
            .collect();
        let slope = (errs[0].ln() - errs[2].ln()) / (steps[0].ln() - steps[2].ln());
        assert!((slope - 2.0).abs() < 0.1, "slope {slope}, errors {errs:?}");
    }

    #[test]
    fn degenerate_and_invalid_inputs() {
        // A fixed point of the all-π iterate has zero arc.
        let p = BlochPoint::new(0.0, 1.0, 0.0);
        assert!(matches!(step_geometry(p, PI, lam(0.04)), Err(Error::Degenerate(_))));
        assert!(matches!(step_geometry(BlochPoint::new(0.0, 0.0, 0.5), PI, lam(0.04)), Err(Error::Domain(_))));
    }

    #[test]
    fn schedule_examples() {
        let s = original_schedule(lam(0.04));
        assert_eq!(schedule_deviation(&s, &vec![0.05; s.len()]).unwrap(), 0.0);

        let s = improved_schedule(lam(0.04)).unwrap();
        let k = s.len();
        assert_eq!(schedule_deviation(&s, &vec![0.0; k]).unwrap(), 0.0);

        let mut on_pi = vec![0.0; k];
        on_pi[0] = 0.05;
        on_pi[1] = -0.05;
        assert_eq!(schedule_deviation(&s, &on_pi).unwrap(), 0.0);

        let mut on_tail = vec![0.0; k];
        on_tail[k - 2] = 0.05;
        on_tail[k - 1] = 0.05;
        let tail = schedule_deviation(&s, &on_tail).unwrap();
        assert!(tail.abs() > 1e-6, "tail deviation {tail}");

        assert!(matches!(schedule_deviation(&s, &[0.0]), Err(Error::LengthMismatch { .. })));
    }

    proptest! {
        #[test]
        fn gamma_is_continuous(beta in 0.01f64..(TAU - 0.01), l in 0.01f64..0.25) {
            let start = psi0(l);
            let a = step_geometry(start, beta, lam(l)).unwrap().gamma;
            let b = step_geometry(start, beta + 1e-7, lam(l)).unwrap().gamma;
            prop_assert!((a - b).abs() < 1e-5);
        }

        #[test]
        fn small_arc_identity(dev in -0.3f64..0.3, l in 0.01f64..0.25) {
            let g = step_geometry(psi0(l), PI + dev, lam(l)).unwrap();
            prop_assert!((g.d * g.gamma - g.r * dev.abs()).abs() < 1e-9);
        }
    }
}
