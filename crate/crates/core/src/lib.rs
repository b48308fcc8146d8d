//! Deterministic Grover search under coherent phase noise.
//!
//! The crate is organized bottom-up:
//!
//! * [`bloch`]: the exact two-dimensional reduced dynamics (states, oracle,
//!   phase reflection, Grover iterate) and Bloch-sphere coordinates.
//! * [`geometry`]: the constructive Bloch-sphere geometry of a single step
//!   and the first-order warped-path deviation.
//! * [`schedules`]: original, D2p, improved-D2p and positioned phase
//!   schedules.
//! * [`solver`]: the two-phase deterministic-condition solver, the
//!   closed-form validation identities and the single-phase impossibility scan.
//! * [`noise`]: coherent phase-noise laws and counter-keyed random streams.
//! * [`montecarlo`]: seeded, parallel-order-independent experiments and sweeps.
//! * [`statevector`]: the full `2^n` brute-force oracle.
//! * [`figures`] and [`verify`]: dataset definitions and invariant suites
//!   used by the command-line front end.

pub mod bloch;
pub mod error;
pub mod figures;
pub mod geometry;
pub mod montecarlo;
pub mod noise;
pub mod schedules;
pub mod solver;
pub mod statevector;
pub mod verify;

pub use bloch::{BlochPoint, Lambda, Operator2, ReducedState};
pub use error::{Error, Result};
pub use noise::{Distribution, NoiseSpec, RngStream};
pub use schedules::{PhaseSchedule, ScheduleKind, StepCounts};
pub use solver::{SolveResult, TwoPhaseTemplate};
