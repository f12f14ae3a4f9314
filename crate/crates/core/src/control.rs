//! Per-axis PID control and the force-to-pressure-point mapping.
//!
//! The two PID outputs form a planar force demand F. The hardware cannot
//! apply F directly; it places a pressure maximum at distance R behind the
//! object (opposite the demanded push) with amplitude P_des = ‖F‖/c_p + P_off,
//! saturated at the scenario limit.

use nalgebra::Vector2;
use serde::{Deserialize, Serialize};

use crate::plant::BallParams;

/// Force demands below this are treated as zero: the push direction α is
/// then undefined and the previous one is kept.
pub const FORCE_DEADBAND: f64 = 1e-9;

/// Distance R from the object at which the pressure maximum is placed (m).
pub const PRESSURE_POINT_DISTANCE: f64 = 6.0e-3;

/// Parallel-form PID gains, shared shape for both axes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PidGains {
    /// Proportional gain (N/m), ≥ 0.
    pub kp: f64,
    /// Integral gain (N/(m·s)), ≥ 0.
    pub ki: f64,
    /// Derivative gain (N·s/m), ≥ 0.
    pub kd: f64,
    /// Clamp on the integrator output magnitude (N), > 0.
    pub integral_limit: f64,
    /// Derivative filter time constant in units of dt, dimensionless.
    pub derivative_filter: f64,
}

impl PidGains {
    pub fn validate(&self) -> crate::error::Result<()> {
        for (name, v) in [("kp", self.kp), ("ki", self.ki), ("kd", self.kd)] {
            if !(v >= 0.0) {
                return Err(crate::error::Error::Config(format!(
                    "{name} must be ≥ 0, got {v}"
                )));
            }
        }
        if !(self.integral_limit > 0.0) {
            return Err(crate::error::Error::Config(format!(
                "integral_limit must be > 0, got {}",
                self.integral_limit
            )));
        }
        if !(self.derivative_filter >= 0.0) {
            return Err(crate::error::Error::Config(format!(
                "derivative_filter must be ≥ 0, got {}",
                self.derivative_filter
            )));
        }
        Ok(())
    }
}

/// One axis' controller memory.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PidState {
    /// Accumulated integral term, already scaled by Ki (N).
    pub integral: f64,
    /// First-order-filtered error the derivative acts on (m).
    pub filtered_error: f64,
    /// False until the first step has primed the filter.
    pub initialized: bool,
}

/// One PID step. Returns the force demand component (N) and the successor
/// state.
///
/// The derivative acts on a first-order-filtered error (time constant
/// `derivative_filter`·dt) and is zero on the first step. `freeze_integral`
/// implements anti-windup: pass the previous period's saturation flag.
pub fn pid_step(
    gains: &PidGains,
    error: f64,
    dt: f64,
    state: &PidState,
    freeze_integral: bool,
) -> (f64, PidState) {
    assert!(dt > 0.0, "dt must be positive");
    let integral = if freeze_integral {
        state.integral
    } else {
        (state.integral + gains.ki * error * dt).clamp(-gains.integral_limit, gains.integral_limit)
    };

    let (filtered_error, derivative) = if state.initialized {
        let tau = gains.derivative_filter * dt;
        let beta = dt / (tau + dt);
        let filtered = state.filtered_error + beta * (error - state.filtered_error);
        (filtered, (filtered - state.filtered_error) / dt)
    } else {
        (error, 0.0)
    };

    let output = gains.kp * error + integral + gains.kd * derivative;
    (
        output,
        PidState {
            integral,
            filtered_error,
            initialized: true,
        },
    )
}

/// What the loop hands to the focus solver each period.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ControlCommand {
    /// In-plane location of the commanded pressure maximum (m).
    pub pressure_point: Vector2<f64>,
    /// Commanded amplitude (Pa), within [P_off, P_max].
    pub p_des: f64,
    /// The raw force demand that produced this command (N).
    pub force: Vector2<f64>,
    /// True when ‖F‖/c_p + P_off exceeded P_max and was clamped.
    pub saturated: bool,
    /// Push direction used (rad); retained from the previous period inside
    /// the deadband.
    pub alpha: f64,
}

/// Maps a force demand to a pressure-point command.
///
/// α = atan2(F_y, F_x); the point sits at x_est − R·(cos α, sin α), i.e.
/// behind the object relative to the push; P_des = ‖F‖/c_p + P_off clamped
/// to [P_off, p_max]. Below the deadband, P_des = P_off (Δp = 0, no push)
/// and `prev_alpha` is kept.
pub fn force_to_command(
    force: Vector2<f64>,
    x_est: Vector2<f64>,
    params: &BallParams,
    r: f64,
    p_max: f64,
    prev_alpha: f64,
) -> ControlCommand {
    assert!(r > 0.0, "pressure point distance must be positive");
    debug_assert!(p_max >= params.pressure_offset);
    let magnitude = force.norm();
    let (alpha, p_des, saturated) = if magnitude < FORCE_DEADBAND {
        (prev_alpha, params.pressure_offset, false)
    } else {
        let alpha = force.y.atan2(force.x);
        let raw = magnitude / params.pressure_to_force + params.pressure_offset;
        (alpha, raw.min(p_max), raw > p_max)
    };
    ControlCommand {
        pressure_point: x_est - Vector2::new(alpha.cos(), alpha.sin()) * r,
        p_des,
        force,
        saturated,
        alpha,
    }
}
