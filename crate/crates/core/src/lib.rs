//! Non-contact planar manipulation through a phased array of ultrasonic
//! transducers, simulated end to end.
//!
//! The crate models the complex acoustic pressure field of an 8×8 transducer
//! array, solves the non-convex phase-shift optimization that places a
//! pressure focal point, and closes a 50 Hz feedback loop (PID + delay-aware
//! Kalman estimator) around a simulated ball plant.
//!
//! Modules follow the signal path:
//!
//! * [`geometry`] / [`field`] — array layout and pressure-field evaluation,
//!   including the rank-2 quadratic form used by the optimizer.
//! * [`lbfgs`] / [`focus`] — L-BFGS with strong Wolfe line search, and the
//!   focal-point solver built on top of it.
//! * [`plant`] — identified second-order ball dynamics.
//! * [`control`] — per-axis PID and the force → pressure-point mapping.
//! * [`estimator`] — delay-augmented Kalman filter.
//! * [`sim`] — configuration, reference trajectories, the loop driver, and
//!   log export.

// validation deliberately writes `!(x > 0.0)` so NaN fails the check too
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bessel;
pub mod control;
pub mod error;
pub mod estimator;
pub mod field;
pub mod focus;
pub mod geometry;
pub mod lbfgs;
pub mod plant;
pub mod sim;

pub use control::{force_to_command, pid_step, ControlCommand, PidGains, PidState};
pub use error::{Error, Result};
pub use estimator::{AxisEstimator, EstimatorConfig};
pub use field::{
    directivity, field_magnitude_grid, field_pressure, field_scan_grid, pressure_sq_and_gradient,
    quadratic_form, transducer_pressure, Complex, FieldScan, GridSpec, QuadraticPressureForm,
};
pub use focus::{
    alignment_bound, quantize_phases, solve_focus, solve_focus_from, verify_local_max, FocusSpec,
    SolveReport, SolverSettings,
};
pub use geometry::{ArrayGeometry, PhaseVector};
pub use plant::{acoustic_force, discretize_axis_model, BallParams, BallState};
pub use sim::{make_reference, run_loop, LoopConfig, RunLog, Scenario};
