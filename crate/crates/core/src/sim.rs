//! Closed-loop simulation harness: reference trajectories, the 50 Hz loop
//! (sense → estimate → PID → command → focus solve → quantize → plant), and
//! CSV/JSON log export.
//!
//! Runs are fully deterministic under a fixed master seed: sensor noise and
//! per-step solver seeds all derive from it, and wall-clock timings never
//! enter the CSV.

use std::fs::File;
use std::io::{BufWriter, Write as _};
use std::path::Path;
use std::time::{Duration, Instant};

use nalgebra::{Vector2, Vector3};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::control::{
    force_to_command, pid_step, PidGains, PidState, PRESSURE_POINT_DISTANCE,
};
use crate::error::{Error, Result};
use crate::estimator::{AxisEstimator, EstimatorConfig};
use crate::field::field_pressure;
use crate::focus::{
    alignment_bound, quantize_phases, solve_focus, solve_focus_from, FocusSpec, SolverSettings,
    PHASE_STEP_RAD,
};
use crate::geometry::{ArrayGeometry, PhaseVector, MANIPULATION_PLANE_Z};
use crate::plant::{self, discretize_axis_model, BallParams, BallState};

/// Which Table-1 parameter set the run uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scenario {
    /// Ball floating on water.
    Fb,
    /// Ball on the solid surface.
    Bs,
}

impl Scenario {
    pub fn ball_params(&self) -> BallParams {
        match self {
            Scenario::Fb => BallParams::floating_ball(),
            Scenario::Bs => BallParams::ball_on_surface(),
        }
    }

    /// Scenario pressure ceiling (Pa).
    pub fn default_p_max(&self) -> f64 {
        match self {
            Scenario::Fb => 2500.0,
            Scenario::Bs => 2700.0,
        }
    }
}

/// Reference trajectory description. All lengths in meters, speeds in m/s.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TrajectorySpec {
    /// Hold a fixed point.
    Setpoint { point: [f64; 2] },
    /// Constant-speed circle starting at center + (radius, 0).
    Circle {
        center: [f64; 2],
        radius: f64,
        speed: f64,
    },
    /// Lissajous eight figure (a·sin ωt, b·sin 2ωt) + center, with ω chosen
    /// so the average traversal speed matches `speed`.
    EightFigure {
        center: [f64; 2],
        a: f64,
        b: f64,
        speed: f64,
    },
    /// Piecewise-linear path through `points` at constant speed, holding at
    /// the last point.
    Waypoints { points: Vec<[f64; 2]>, speed: f64 },
}

/// A compiled trajectory: the arc-length calibration is done once.
#[derive(Debug, Clone, PartialEq)]
pub struct Reference {
    spec: TrajectorySpec,
    /// Angular rate for circle/eight figure (rad/s).
    omega: f64,
    /// Cumulative segment lengths for waypoints (m), starting at 0.
    cumulative: Vec<f64>,
}

/// Arc length of one lap of (a·sin u, b·sin 2u), u ∈ [0, 2π], by Simpson's
/// rule. The integrand is smooth and periodic, so this converges far beyond
/// the accuracy needed here.
fn eight_figure_lap_length(a: f64, b: f64) -> f64 {
    let n = 4096; // even
    let h = std::f64::consts::TAU / n as f64;
    let speed = |u: f64| {
        let da = a * u.cos();
        let db = 2.0 * b * (2.0 * u).cos();
        da.hypot(db)
    };
    let mut sum = speed(0.0) + speed(std::f64::consts::TAU);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        sum += w * speed(i as f64 * h);
    }
    sum * h / 3.0
}

impl Reference {
    pub fn new(spec: &TrajectorySpec) -> Result<Self> {
        let mut omega = 0.0;
        let mut cumulative = Vec::new();
        match spec {
            TrajectorySpec::Setpoint { .. } => {}
            TrajectorySpec::Circle { radius, speed, .. } => {
                if !(*radius > 0.0) {
                    return Err(Error::Config(format!(
                        "circle radius must be positive, got {radius}"
                    )));
                }
                if !(*speed > 0.0) {
                    return Err(Error::Config(format!(
                        "traversal speed must be positive, got {speed}"
                    )));
                }
                omega = speed / radius;
            }
            TrajectorySpec::EightFigure { a, b, speed, .. } => {
                if !(*a > 0.0) || !(*b >= 0.0) {
                    return Err(Error::Config(format!(
                        "eight-figure extents must satisfy a > 0, b ≥ 0, got a={a}, b={b}"
                    )));
                }
                if !(*speed > 0.0) {
                    return Err(Error::Config(format!(
                        "traversal speed must be positive, got {speed}"
                    )));
                }
                let lap = eight_figure_lap_length(*a, *b);
                omega = std::f64::consts::TAU * speed / lap;
            }
            TrajectorySpec::Waypoints { points, speed } => {
                if points.is_empty() {
                    return Err(Error::Config("waypoint list must not be empty".into()));
                }
                if points.len() > 1 && !(*speed > 0.0) {
                    return Err(Error::Config(format!(
                        "traversal speed must be positive, got {speed}"
                    )));
                }
                cumulative.push(0.0);
                for w in points.windows(2) {
                    let seg = Vector2::new(w[1][0] - w[0][0], w[1][1] - w[0][1]).norm();
                    cumulative.push(cumulative.last().unwrap() + seg);
                }
            }
        }
        Ok(Self {
            spec: spec.clone(),
            omega,
            cumulative,
        })
    }

    /// Reference position at time `t` (s, ≥ 0).
    pub fn position(&self, t: f64) -> Vector2<f64> {
        assert!(t >= 0.0, "reference time must be ≥ 0");
        match &self.spec {
            TrajectorySpec::Setpoint { point } => Vector2::new(point[0], point[1]),
            TrajectorySpec::Circle { center, radius, .. } => {
                let u = self.omega * t;
                Vector2::new(center[0] + radius * u.cos(), center[1] + radius * u.sin())
            }
            TrajectorySpec::EightFigure { center, a, b, .. } => {
                let u = self.omega * t;
                Vector2::new(center[0] + a * u.sin(), center[1] + b * (2.0 * u).sin())
            }
            TrajectorySpec::Waypoints { points, speed } => {
                let total = *self.cumulative.last().unwrap();
                let s = (speed * t).min(total);
                // find the segment containing arc position s
                let seg = match self
                    .cumulative
                    .binary_search_by(|c| c.partial_cmp(&s).unwrap())
                {
                    Ok(i) => i.min(points.len() - 1),
                    Err(i) => i - 1,
                };
                if seg + 1 >= points.len() {
                    let last = points[points.len() - 1];
                    return Vector2::new(last[0], last[1]);
                }
                let seg_len = self.cumulative[seg + 1] - self.cumulative[seg];
                let frac = if seg_len > 0.0 {
                    (s - self.cumulative[seg]) / seg_len
                } else {
                    0.0
                };
                let p0 = Vector2::new(points[seg][0], points[seg][1]);
                let p1 = Vector2::new(points[seg + 1][0], points[seg + 1][1]);
                p0 + (p1 - p0) * frac
            }
        }
    }

    /// Conservative upper bound on ‖position(t)‖ over all t, for area checks.
    pub fn max_extent(&self) -> f64 {
        match &self.spec {
            TrajectorySpec::Setpoint { point } => Vector2::new(point[0], point[1]).norm(),
            TrajectorySpec::Circle { center, radius, .. } => {
                Vector2::new(center[0], center[1]).norm() + radius
            }
            TrajectorySpec::EightFigure { center, a, b, .. } => {
                Vector2::new(center[0], center[1]).norm() + a.hypot(*b)
            }
            TrajectorySpec::Waypoints { points, .. } => points
                .iter()
                .map(|p| Vector2::new(p[0], p[1]).norm())
                .fold(0.0, f64::max),
        }
    }
}

/// Reference position for `spec` at time `t`. Compiles the trajectory each
/// call; inside loops, build a [`Reference`] once instead.
pub fn make_reference(spec: &TrajectorySpec, t: f64) -> Result<Vector2<f64>> {
    Ok(Reference::new(spec)?.position(t))
}

/// Transducer grid shape.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeometryConfig {
    pub rows: usize,
    pub cols: usize,
    /// Grid pitch (m).
    pub pitch: f64,
}

impl Default for GeometryConfig {
    fn default() -> Self {
        Self {
            rows: 8,
            cols: 8,
            pitch: crate::geometry::DEFAULT_PITCH,
        }
    }
}

/// Synthetic position sensor: i.i.d. Gaussian noise plus a fixed delivery
/// delay. The estimator compensates the same delay.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SensorConfig {
    /// Noise standard deviation (m), ≥ 0.
    pub noise_std: f64,
    /// Delivery delay in control periods.
    pub delay: usize,
}

/// Estimator tuning knobs; the delay comes from [`SensorConfig`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EstimatorTuning {
    /// White-acceleration spectral density driving process noise (m²/s³).
    pub accel_psd: f64,
    /// Measurement noise the filter assumes (m).
    pub measurement_std: f64,
    /// Initial variance per augmented state.
    pub initial_variance: f64,
}

/// Complete description of one closed-loop run. All values SI.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LoopConfig {
    pub scenario: Scenario,
    /// Control period (s).
    pub dt: f64,
    /// Run length (s); the step count is duration/dt rounded down (with an
    /// epsilon so 10/0.02 is exactly 500).
    pub duration: f64,
    /// Master seed; sensor noise and all solver seeds derive from it.
    pub seed: u64,
    pub initial_position: [f64; 2],
    pub geometry: GeometryConfig,
    /// Cold-start solver settings; the in-loop warm solves reuse them with
    /// one restart, and the `seed` field is overridden per step.
    pub solver: SolverSettings,
    pub pid: PidGains,
    pub estimator: EstimatorTuning,
    /// Scenario pressure ceiling (Pa).
    pub p_max: f64,
    pub sensor: SensorConfig,
    pub reference: TrajectorySpec,
}

impl LoopConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0) {
            return Err(Error::Config(format!("dt must be positive, got {}", self.dt)));
        }
        if !(self.duration > 0.0) {
            return Err(Error::Config(format!(
                "duration must be positive, got {}",
                self.duration
            )));
        }
        let params = self.scenario.ball_params();
        params.validate()?;
        if !(self.p_max >= params.pressure_offset) {
            return Err(Error::Config(format!(
                "p_max {} is below the pressure offset {}",
                self.p_max, params.pressure_offset
            )));
        }
        self.pid.validate()?;
        if !(self.sensor.noise_std >= 0.0) {
            return Err(Error::Config(format!(
                "sensor noise std must be ≥ 0, got {}",
                self.sensor.noise_std
            )));
        }
        self.estimator_config()?.validate()?;
        self.solver.validate()?;
        let reference = Reference::new(&self.reference)?;
        if reference.max_extent() > params.area_radius + 1e-12 {
            return Err(Error::Config(format!(
                "reference extends to {:.4} m, outside the {:.4} m manipulation area",
                reference.max_extent(),
                params.area_radius
            )));
        }
        let initial = Vector2::new(self.initial_position[0], self.initial_position[1]);
        if initial.norm() > params.area_radius + 1e-12 {
            return Err(Error::Config(format!(
                "initial position {:.4} m lies outside the {:.4} m manipulation area",
                initial.norm(),
                params.area_radius
            )));
        }
        ArrayGeometry::grid(self.geometry.rows, self.geometry.cols, self.geometry.pitch)?;
        Ok(())
    }

    fn estimator_config(&self) -> Result<EstimatorConfig> {
        let cfg = EstimatorConfig::from_acceleration_psd(
            self.sensor.delay,
            self.estimator.accel_psd,
            self.dt,
            self.estimator.measurement_std,
            self.estimator.initial_variance,
        );
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn steps(&self) -> usize {
        ((self.duration / self.dt) + 1e-9).floor() as usize
    }
}

/// Per-period record of everything the loop saw and did.
#[derive(Debug, Clone, PartialEq)]
pub struct StepRecord {
    pub t: f64,
    pub reference: Vector2<f64>,
    /// True ball state at the start of the period.
    pub true_position: Vector2<f64>,
    pub true_velocity: Vector2<f64>,
    /// Delayed, noisy measurement delivered this period.
    pub measured: Vector2<f64>,
    /// Current-time estimate after the measurement update.
    pub est_position: Vector2<f64>,
    pub est_velocity: Vector2<f64>,
    /// PID force demand (N).
    pub force: Vector2<f64>,
    pub pressure_point: Vector2<f64>,
    /// Commanded amplitude after all clamps (Pa).
    pub p_des: f64,
    /// |p| the quantized phases actually produce at the point (Pa).
    pub p_achieved: f64,
    pub solver_iterations: usize,
    pub solver_converged: bool,
    /// Wall-clock solve time; lives in the log and JSON summary only, never
    /// in the CSV (which must be byte-deterministic).
    pub solver_duration: Duration,
    pub saturated: bool,
    pub out_of_area: bool,
}

/// Why the run ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RunStatus {
    Completed,
    /// The ball left the guarded manipulation area at this step.
    OutOfArea { at_step: usize },
}

impl RunStatus {
    pub fn label(&self) -> &'static str {
        match self {
            RunStatus::Completed => "completed",
            RunStatus::OutOfArea { .. } => "out_of_area",
        }
    }
}

/// Full closed-loop log.
#[derive(Debug, Clone, PartialEq)]
pub struct RunLog {
    pub records: Vec<StepRecord>,
    pub status: RunStatus,
    pub dt: f64,
}

/// Aggregates for the JSON summary file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub steps: usize,
    pub status: String,
    /// RMS of ‖true − reference‖ over the run (m).
    pub rms_tracking_error: f64,
    pub max_tracking_error: f64,
    /// Fraction of periods with the saturation flag set.
    pub saturation_duty: f64,
    pub solver_failures: usize,
    pub solver_ms_p50: f64,
    pub solver_ms_p95: f64,
}

/// Nearest-rank percentile of an unsorted sample; 0 for an empty one.
fn percentile_ms(durations: &[Duration], q: f64) -> f64 {
    if durations.is_empty() {
        return 0.0;
    }
    let mut ms: Vec<f64> = durations.iter().map(|d| d.as_secs_f64() * 1e3).collect();
    ms.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let rank = ((q * ms.len() as f64).ceil() as usize).clamp(1, ms.len());
    ms[rank - 1]
}

impl RunLog {
    pub fn summary(&self) -> RunSummary {
        let n = self.records.len();
        let mut sq_sum = 0.0;
        let mut max_err = 0.0f64;
        let mut saturated = 0usize;
        let mut failures = 0usize;
        for r in &self.records {
            let err = (r.true_position - r.reference).norm();
            sq_sum += err * err;
            max_err = max_err.max(err);
            saturated += r.saturated as usize;
            failures += !r.solver_converged as usize;
        }
        let durations: Vec<Duration> = self.records.iter().map(|r| r.solver_duration).collect();
        RunSummary {
            steps: n,
            status: self.status.label().to_string(),
            rms_tracking_error: if n > 0 { (sq_sum / n as f64).sqrt() } else { 0.0 },
            max_tracking_error: max_err,
            saturation_duty: if n > 0 { saturated as f64 / n as f64 } else { 0.0 },
            solver_failures: failures,
            solver_ms_p50: percentile_ms(&durations, 0.50),
            solver_ms_p95: percentile_ms(&durations, 0.95),
        }
    }
}

const CSV_HEADER: &str = "t,ref_x,ref_y,true_x,true_y,true_vx,true_vy,meas_x,meas_y,\
est_x,est_y,est_vx,est_vy,force_x,force_y,press_x,press_y,p_des,p_achieved,\
solver_iters,solver_converged,saturated,status";

/// Writes the per-step CSV and the JSON summary. The CSV is byte-identical
/// for identical logs; the summary carries the wall-clock percentiles and is
/// not expected to be.
pub fn export_log(log: &RunLog, csv_path: &Path, summary_path: &Path) -> Result<()> {
    let file = File::create(csv_path).map_err(|e| Error::io(csv_path, e))?;
    let mut w = BufWriter::new(file);
    let write_all = |w: &mut BufWriter<File>| -> std::io::Result<()> {
        writeln!(w, "{CSV_HEADER}")?;
        for r in &log.records {
            writeln!(
                w,
                "{:.8e},{:.8e},{:.8e},{:.8e},{:.8e},{:.8e},{:.8e},{:.8e},{:.8e},\
{:.8e},{:.8e},{:.8e},{:.8e},{:.8e},{:.8e},{:.8e},{:.8e},{:.8e},{:.8e},\
{},{},{},{}",
                r.t,
                r.reference.x,
                r.reference.y,
                r.true_position.x,
                r.true_position.y,
                r.true_velocity.x,
                r.true_velocity.y,
                r.measured.x,
                r.measured.y,
                r.est_position.x,
                r.est_position.y,
                r.est_velocity.x,
                r.est_velocity.y,
                r.force.x,
                r.force.y,
                r.pressure_point.x,
                r.pressure_point.y,
                r.p_des,
                r.p_achieved,
                r.solver_iterations,
                r.solver_converged as u8,
                r.saturated as u8,
                if r.out_of_area { "out_of_area" } else { "ok" },
            )?;
        }
        w.flush()
    };
    write_all(&mut w).map_err(|e| Error::io(csv_path, e))?;

    let file = File::create(summary_path).map_err(|e| Error::io(summary_path, e))?;
    let mut w = BufWriter::new(file);
    serde_json::to_writer_pretty(&mut w, &log.summary())
        .map_err(|e| Error::io(summary_path, std::io::Error::other(e)))?;
    writeln!(w).and_then(|_| w.flush()).map_err(|e| Error::io(summary_path, e))?;
    Ok(())
}

/// Per-step solver seed: decorrelates steps while staying reproducible.
fn step_seed(master: u64, k: usize) -> u64 {
    master ^ (k as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

/// Runs the closed loop. Out-of-area terminates the run with a labeled final
/// record (not an `Err`); solver non-convergence is logged per step and the
/// loop continues with the previous phases.
pub fn run_loop(config: &LoopConfig) -> Result<RunLog> {
    config.validate()?;
    let params = config.scenario.ball_params();
    let geo = ArrayGeometry::grid(config.geometry.rows, config.geometry.cols, config.geometry.pitch)?;
    let reference = Reference::new(&config.reference)?;
    let est_cfg = config.estimator_config()?;
    let (plant_a, plant_b) = discretize_axis_model(&params, config.dt);
    let n_steps = config.steps();
    let delay = config.sensor.delay;
    let dt = config.dt;

    let mut sensor_rng = ChaCha8Rng::seed_from_u64(config.seed);
    sensor_rng.set_stream(1);
    let noise = Normal::new(0.0, config.sensor.noise_std)
        .map_err(|e| Error::Config(format!("sensor noise: {e}")))?;

    let initial = Vector2::new(config.initial_position[0], config.initial_position[1]);
    let mut state = BallState::at_rest(initial);
    let mut est_x: Option<AxisEstimator> = None;
    let mut est_y: Option<AxisEstimator> = None;
    let mut pid_x = PidState::default();
    let mut pid_y = PidState::default();
    let mut prev_saturated = false;
    let mut prev_alpha = 0.0;
    let mut prev_phases = PhaseVector::zeros(geo.len());
    let mut truth_history: Vec<Vector2<f64>> = Vec::with_capacity(n_steps);
    let mut records = Vec::with_capacity(n_steps);
    let mut status = RunStatus::Completed;

    for k in 0..n_steps {
        let t = k as f64 * dt;
        let ref_pos = reference.position(t);

        // sense: true position from `delay` periods ago plus noise; before
        // the run the ball sat at rest at its initial position
        let delayed_true = if k >= delay {
            truth_history[k - delay]
        } else {
            initial
        };
        let measured = delayed_true
            + Vector2::new(noise.sample(&mut sensor_rng), noise.sample(&mut sensor_rng));

        // estimate
        if k == 0 {
            est_x = Some(AxisEstimator::new(&est_cfg, &plant_a, &plant_b, measured.x)?);
            est_y = Some(AxisEstimator::new(&est_cfg, &plant_a, &plant_b, measured.y)?);
        }
        let ex = est_x.as_mut().expect("initialized at k = 0");
        let ey = est_y.as_mut().expect("initialized at k = 0");
        ex.update(measured.x)?;
        ey.update(measured.y)?;
        let est_pos = Vector2::new(ex.position(), ey.position());
        let est_vel = Vector2::new(ex.velocity(), ey.velocity());

        // control
        let freeze = prev_saturated;
        let (fx, pid_x_next) = pid_step(&config.pid, ref_pos.x - est_pos.x, dt, &pid_x, freeze);
        let (fy, pid_y_next) = pid_step(&config.pid, ref_pos.y - est_pos.y, dt, &pid_y, freeze);
        let force = Vector2::new(fx, fy);
        let cmd = force_to_command(
            force,
            est_pos,
            &params,
            PRESSURE_POINT_DISTANCE,
            config.p_max,
            prev_alpha,
        );

        // the commanded amplitude must stay achievable at the commanded point
        let x_press = Vector3::new(cmd.pressure_point.x, cmd.pressure_point.y, MANIPULATION_PLANE_Z);
        let bound = alignment_bound(&geo, &x_press)?;
        let p_des = cmd.p_des.min(bound);
        let saturated = cmd.saturated || cmd.p_des > bound;

        // solve for phases, warm-started from the previous period
        let mut settings = config.solver;
        settings.seed = step_seed(config.seed, k);
        let focus_spec = FocusSpec::new(x_press, p_des);
        let solve_started = Instant::now();
        let outcome = if k == 0 {
            solve_focus(&geo, &focus_spec, &settings)
        } else {
            // periodic extra random restart so a drifting warm start cannot
            // trap the loop in a poor local minimum
            settings.restarts = if k % 25 == 0 { 2 } else { 1 };
            solve_focus_from(&geo, &focus_spec, &settings, &prev_phases)
        };
        let solver_duration = solve_started.elapsed();
        let (phases, solver_iterations, solver_converged) = match outcome {
            Ok(report) => (report.phases, report.iterations, true),
            Err(Error::NonConvergence { .. }) => {
                (prev_phases.clone(), settings.max_iterations, false)
            }
            Err(other) => return Err(other),
        };

        // the hardware applies quantized phases; the plant feels what they
        // actually produce at the point, not what was commanded
        let quantized = quantize_phases(&phases, PHASE_STEP_RAD);
        let p_achieved = field_pressure(&geo, &quantized, &x_press)?.norm();

        truth_history.push(state.position);
        let stepped = plant::step(&params, &state, &cmd.pressure_point, p_achieved, dt);

        // the estimator sees the commanded force, not the achieved one: the
        // real platform has no force sensor
        ex.predict(force.x);
        ey.predict(force.y);

        let out_of_area = stepped.is_err();
        records.push(StepRecord {
            t,
            reference: ref_pos,
            true_position: state.position,
            true_velocity: state.velocity,
            measured,
            est_position: est_pos,
            est_velocity: est_vel,
            force,
            pressure_point: cmd.pressure_point,
            p_des,
            p_achieved,
            solver_iterations,
            solver_converged,
            solver_duration,
            saturated,
            out_of_area,
        });

        pid_x = pid_x_next;
        pid_y = pid_y_next;
        prev_saturated = saturated;
        prev_alpha = cmd.alpha;
        prev_phases = phases;

        match stepped {
            Ok(next) => state = next,
            Err(Error::OutOfArea { .. }) => {
                status = RunStatus::OutOfArea { at_step: k };
                break;
            }
            Err(other) => return Err(other),
        }
    }

    Ok(RunLog {
        records,
        status,
        dt,
    })
}

/// Tuned per-scenario defaults; the gains come from the `tune_gains`
/// example in this crate.
pub fn default_config(scenario: Scenario) -> LoopConfig {
    let pid = match scenario {
        Scenario::Fb => PidGains {
            kp: 6.0e-3,
            ki: 1.5e-3,
            kd: 4.0e-4,
            integral_limit: 1.0e-5,
            derivative_filter: 2.0,
        },
        Scenario::Bs => PidGains {
            kp: 2.0e-3,
            ki: 5.0e-4,
            kd: 1.0e-3,
            integral_limit: 2.0e-5,
            derivative_filter: 2.0,
        },
    };
    let reference = match scenario {
        Scenario::Fb => TrajectorySpec::EightFigure {
            center: [0.0, 0.0],
            a: 15.0e-3,
            b: 7.5e-3,
            speed: 10.0e-3,
        },
        // rotated square: vertices on the axes keep the whole path inside
        // the 10 mm BS area
        Scenario::Bs => TrajectorySpec::Waypoints {
            points: vec![
                [8.0e-3, 0.0],
                [0.0, 8.0e-3],
                [-8.0e-3, 0.0],
                [0.0, -8.0e-3],
                [8.0e-3, 0.0],
            ],
            speed: 5.0e-3,
        },
    };
    let initial_position = match scenario {
        Scenario::Fb => [0.0, 0.0],
        Scenario::Bs => [8.0e-3, 0.0],
    };
    LoopConfig {
        scenario,
        dt: 0.02,
        duration: 20.0,
        seed: 42,
        initial_position,
        geometry: GeometryConfig::default(),
        solver: SolverSettings::default(),
        pid,
        estimator: EstimatorTuning {
            accel_psd: 1.0e-4,
            measurement_std: 1.0e-3,
            initial_variance: 1.0e-6,
        },
        p_max: scenario.default_p_max(),
        sensor: SensorConfig {
            noise_std: 1.0e-3,
            delay: 4,
        },
        reference,
    }
}
