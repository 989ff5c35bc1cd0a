//! Certification of controllability and stabilizability for finite-dimensional
//! linear control systems `y' = A y + B u`.
//!
//! The crate computes controllability Gramians and the observability constants
//! they induce, synthesizes minimal-norm controls from the dual (adjoint)
//! problem, and builds exponentially stabilizing control schedules and
//! feedbacks. It is `no_std` and needs only `alloc`.
#![no_std]

extern crate alloc;

pub mod constants;
pub mod dualctl;
pub mod error;
pub mod gramian;
pub mod linalg;
pub mod model;
pub mod quadrature;
pub mod sampling;
pub mod stabilizer;

pub use constants::{
    exact_controllability_constant, null_controllability_constant, weak_constant,
    weak_constant_oracle, Method, ObservabilityReport, WeakOptions,
};
pub use dualctl::{evaluate_j, radial_profile, solve_min_norm, DualProblem, MinNormSolution, Radial};
pub use error::{Error, Result};
pub use gramian::{gramian, komornik_gramian, Gramian};
pub use model::{wave_heat, KalmanDecomposition, LinearSystem};
pub use stabilizer::{
    complete_stabilization_via_shift, concatenation_plan, komornik_feedback, run_concatenation,
    sweep_omega_star, ConcatenationPlan, ConcatenationRun, FeedbackPlan, OmegaStarEstimate,
};
