//! Ball dynamics in the manipulation plane: point acoustic force with
//! viscous damping, integrated with RK4 under zero-order-held force.

use std::f64::consts::PI;

use nalgebra::{Matrix2, Vector2};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Positions beyond the manipulation area radius plus this margin halt the
/// simulation.
pub const AREA_GUARD_MARGIN: f64 = 5.0e-3;

/// Objects closer than this to the pressure point get zero force (direction
/// undefined).
const COINCIDENCE_DISTANCE: f64 = 1e-9;

/// Internal RK4 substep ceiling (s).
const MAX_SUBSTEP: f64 = 1.0e-3;

/// Identified constants of the manipulated ball and its environment.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BallParams {
    /// Mass (kg), > 0.
    pub mass: f64,
    /// Viscous friction coefficient (N·s/m), ≥ 0.
    pub friction: f64,
    /// Pressure-to-force constant (N/Pa), ≥ 0.
    pub pressure_to_force: f64,
    /// Pressure offset below which no force is produced (Pa), ≥ 0.
    pub pressure_offset: f64,
    /// Ball radius (m), ≥ 0.
    pub ball_radius: f64,
    /// Manipulation area radius (m), ≥ 0.
    pub area_radius: f64,
}

/// Polypropylene ball mass: sphere volume × handbook density 905 kg/m³.
fn polypropylene_ball_mass(radius: f64) -> f64 {
    (4.0 / 3.0) * PI * radius.powi(3) * 905.0
}

impl BallParams {
    /// Ball floating on the water surface (FB experiment constants).
    pub fn floating_ball() -> Self {
        Self {
            mass: polypropylene_ball_mass(4.0e-3),
            friction: 4.44e-4,
            pressure_to_force: 7.65e-9,
            pressure_offset: 709.1,
            ball_radius: 4.0e-3,
            area_radius: 21.0e-3,
        }
    }

    /// Ball on the solid surface (BS experiment constants).
    pub fn ball_on_surface() -> Self {
        Self {
            mass: polypropylene_ball_mass(4.0e-3),
            friction: 3.18e-4,
            pressure_to_force: 2.64e-8,
            pressure_offset: 0.0,
            ball_radius: 4.0e-3,
            area_radius: 10.0e-3,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.mass > 0.0) {
            return Err(Error::Config(format!("mass must be positive, got {}", self.mass)));
        }
        for (name, v) in [
            ("friction", self.friction),
            ("pressure_to_force", self.pressure_to_force),
            ("pressure_offset", self.pressure_offset),
            ("ball_radius", self.ball_radius),
            ("area_radius", self.area_radius),
        ] {
            if !(v >= 0.0) {
                return Err(Error::Config(format!("{name} must be ≥ 0, got {v}")));
            }
        }
        Ok(())
    }
}

/// Ball state in the manipulation plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BallState {
    pub position: Vector2<f64>,
    pub velocity: Vector2<f64>,
    /// Simulation time (s), advanced by `dt` per step.
    pub time: f64,
}

impl BallState {
    pub fn at_rest(position: Vector2<f64>) -> Self {
        Self {
            position,
            velocity: Vector2::zeros(),
            time: 0.0,
        }
    }
}

/// Acoustic force on the ball: magnitude c_p·max(p_abs - P_off, 0), directed
/// from the pressure point toward the ball. Zero when the two coincide
/// within 1 nm.
pub fn acoustic_force(
    params: &BallParams,
    state: &BallState,
    pressure_point: &Vector2<f64>,
    p_abs: f64,
) -> Vector2<f64> {
    assert!(p_abs >= 0.0, "pressure magnitude must be ≥ 0");
    let dp = (p_abs - params.pressure_offset).max(0.0);
    if dp == 0.0 {
        return Vector2::zeros();
    }
    let offset = state.position - pressure_point;
    let dist = offset.norm();
    if dist < COINCIDENCE_DISTANCE {
        return Vector2::zeros();
    }
    offset * (params.pressure_to_force * dp / dist)
}

/// Advances the state by `dt` under the force produced by
/// (`pressure_point`, `p_abs`), held constant over the step (zero-order
/// hold). RK4 with substeps capped at 1 ms.
///
/// Errors with out-of-area status when the new position leaves the
/// manipulation area plus the 5 mm guard.
pub fn step(
    params: &BallParams,
    state: &BallState,
    pressure_point: &Vector2<f64>,
    p_abs: f64,
    dt: f64,
) -> Result<BallState> {
    assert!(dt > 0.0, "dt must be positive");
    let force = acoustic_force(params, state, pressure_point, p_abs);
    let n_sub = (dt / MAX_SUBSTEP).ceil().max(1.0) as usize;
    let h = dt / n_sub as f64;

    let accel = |v: Vector2<f64>| (force - v * params.friction) / params.mass;
    let mut pos = state.position;
    let mut vel = state.velocity;
    for _ in 0..n_sub {
        let k1p = vel;
        let k1v = accel(vel);
        let k2p = vel + k1v * (h / 2.0);
        let k2v = accel(vel + k1v * (h / 2.0));
        let k3p = vel + k2v * (h / 2.0);
        let k3v = accel(vel + k2v * (h / 2.0));
        let k4p = vel + k3v * h;
        let k4v = accel(vel + k3v * h);
        pos += (k1p + k2p * 2.0 + k3p * 2.0 + k4p) * (h / 6.0);
        vel += (k1v + k2v * 2.0 + k3v * 2.0 + k4v) * (h / 6.0);
    }

    let limit = params.area_radius + AREA_GUARD_MARGIN;
    if pos.norm() > limit {
        return Err(Error::OutOfArea {
            x: pos.x,
            y: pos.y,
            limit,
        });
    }
    Ok(BallState {
        position: pos,
        velocity: vel,
        time: state.time + dt,
    })
}

/// Exact zero-order-hold discretization of the per-axis linear model
/// ẋ = v, v̇ = (F - c_f·v)/m over one period `dt`:
/// state' = A·state + B·F.
pub fn discretize_axis_model(params: &BallParams, dt: f64) -> (Matrix2<f64>, Vector2<f64>) {
    assert!(dt > 0.0, "dt must be positive");
    let m = params.mass;
    let lambda = params.friction / m;
    let z = lambda * dt;
    if z < 1e-12 {
        // frictionless limit: double integrator
        return (
            Matrix2::new(1.0, dt, 0.0, 1.0),
            Vector2::new(dt * dt / (2.0 * m), dt / m),
        );
    }
    let em = (-z).exp_m1(); // e^{-z} - 1, exact for small z
    let decay = 1.0 + em;
    let e_over_lambda = -em / lambda;
    // (z + em)/λ² = (z - (1-e^{-z}))/λ², series-guarded against cancellation
    let z_plus_em = if z < 1e-4 {
        z * z / 2.0 - z * z * z / 6.0 + z.powi(4) / 24.0 - z.powi(5) / 120.0
    } else {
        z + em
    };
    let a = Matrix2::new(1.0, e_over_lambda, 0.0, decay);
    let b = Vector2::new(z_plus_em / (lambda * lambda) / m, e_over_lambda / m);
    (a, b)
}
