//! Phase-shift optimization: drive |p(x_press)| to a desired pressure by
//! minimizing ((|p|² - P_des²)/P_des²)² over the transducer phases.
//!
//! The problem is non-convex, so the solver runs several restarts (random
//! initializations, optionally seeded with the closed-form alignment
//! solution or a caller-supplied warm start) and keeps the best.

use std::f64::consts::{PI, TAU};
use std::time::{Duration, Instant};

use nalgebra::Vector3;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{field_pressure, quadratic_form, QuadraticPressureForm};
use crate::geometry::{wrap_phase, ArrayGeometry, PhaseVector};
use crate::lbfgs::{minimize, LbfgsOptions};

/// Default probe-circle radius for the local-maximum check (m).
pub const DEFAULT_PROBE_RADIUS: f64 = 1.0e-3;

/// Hardware phase resolution: one degree.
pub const PHASE_STEP_RAD: f64 = PI / 180.0;

/// Relative residual below which a solve counts as converged:
/// | |p|² - P_des² | / max(P_des², 1) < this.
pub const RESIDUAL_TOL: f64 = 1e-4;

/// A single focal target: where, and how much pressure.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FocusSpec {
    pub x_press: Vector3<f64>,
    /// Desired pressure amplitude (Pa), ≥ 0.
    pub p_des: f64,
}

impl FocusSpec {
    pub fn new(x_press: Vector3<f64>, p_des: f64) -> Self {
        Self { x_press, p_des }
    }
}

/// Solver configuration. Defaults meet the real-time budget for 64
/// transducers with margin.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverSettings {
    /// L-BFGS memory depth, ≥ 1.
    pub memory: usize,
    /// Gradient sup-norm tolerance on the (normalized) cost, > 0.
    pub grad_tol: f64,
    pub max_iterations: usize,
    /// Number of starts, ≥ 1; the best final cost wins, earliest index on ties.
    pub restarts: usize,
    pub seed: u64,
    /// Divide the squared-pressure error by P_des² before squaring. Keeps the
    /// cost O(1) instead of O(1e14 Pa⁴). Ignored (off) when P_des = 0.
    pub normalize: bool,
}

impl Default for SolverSettings {
    fn default() -> Self {
        Self {
            memory: 10,
            grad_tol: 1e-8,
            max_iterations: 500,
            restarts: 3,
            seed: 0,
            normalize: true,
        }
    }
}

impl SolverSettings {
    pub(crate) fn validate(&self) -> Result<()> {
        if self.memory < 1 {
            return Err(Error::Config("solver memory must be ≥ 1".into()));
        }
        if !(self.grad_tol > 0.0) {
            return Err(Error::Config(format!(
                "gradient tolerance must be positive, got {}",
                self.grad_tol
            )));
        }
        if self.max_iterations < 1 {
            return Err(Error::Config("max iterations must be ≥ 1".into()));
        }
        if self.restarts < 1 {
            return Err(Error::Config("restarts must be ≥ 1".into()));
        }
        Ok(())
    }
}

/// Outcome of a successful solve.
#[derive(Debug, Clone, PartialEq)]
pub struct SolveReport {
    /// Optimal phases, wrapped to [0, 2π).
    pub phases: PhaseVector,
    /// Final cost of the best restart.
    pub cost: f64,
    /// |p| at the target for the returned phases (Pa).
    pub achieved: f64,
    /// | |p|² - P_des² | / max(P_des², 1).
    pub residual: f64,
    /// L-BFGS iterations of the best restart.
    pub iterations: usize,
    pub restarts_used: usize,
    pub duration: Duration,
    /// Whether the returned focus passed [`verify_local_max`] at the default
    /// probe radius.
    pub local_max: bool,
}

/// Outcome of a multi-point solve.
#[derive(Debug, Clone, PartialEq)]
pub struct MultiSolveReport {
    pub phases: PhaseVector,
    /// Sum of per-point normalized squared residuals.
    pub cost: f64,
    /// |p| at each target (Pa), in spec order.
    pub achieved: Vec<f64>,
    /// Per-point relative residuals, in spec order.
    pub residuals: Vec<f64>,
    pub iterations: usize,
    pub restarts_used: usize,
    pub duration: Duration,
}

/// Upper envelope on achievable |p| at `x`: the triangle-inequality sum
/// Σ_i A·f_dir(θ_i)/d_i, attained exactly by the alignment solution.
pub fn alignment_bound(geo: &ArrayGeometry, x: &Vector3<f64>) -> Result<f64> {
    let form = quadratic_form(geo, x)?;
    Ok(bound_from_form(&form))
}

fn bound_from_form(form: &QuadraticPressureForm) -> f64 {
    form.m_re()
        .iter()
        .zip(form.m_im())
        .map(|(re, im)| re.hypot(*im))
        .sum()
}

/// Phase-conjugate (alignment) phases: φ_i = -arg(M_i), which is -k·d_i
/// wherever the directivity is positive. Makes every contribution real and
/// positive, attaining the alignment bound.
fn alignment_phases(form: &QuadraticPressureForm) -> Vec<f64> {
    form.m_re()
        .iter()
        .zip(form.m_im())
        .map(|(re, im)| wrap_phase(-im.atan2(*re)))
        .collect()
}

/// One focusing target per form; shares the phase vector across all of them.
struct MultiCost<'a> {
    forms: &'a [QuadraticPressureForm],
    /// P_des² per point.
    targets: Vec<f64>,
    /// 1/P_des² when normalizing, 1 otherwise; per point.
    scales: Vec<f64>,
    grad_buf: Vec<f64>,
}

impl MultiCost<'_> {
    fn eval(&mut self, x: &[f64], grad: &mut [f64]) -> f64 {
        grad.fill(0.0);
        let mut cost = 0.0;
        for (k, form) in self.forms.iter().enumerate() {
            let v = form.value_and_gradient_into(x, &mut self.grad_buf);
            let u = (v - self.targets[k]) * self.scales[k];
            cost += u * u;
            let factor = 2.0 * u * self.scales[k];
            for (gi, bi) in grad.iter_mut().zip(&self.grad_buf) {
                *gi += factor * bi;
            }
        }
        cost
    }
}

enum Start<'a> {
    Given(&'a [f64]),
    Alignment,
    /// Random phases from the seed's numbered stream.
    Random(u64),
}

struct BestRun {
    outcome_x: Vec<f64>,
    cost: f64,
    iterations: usize,
}

fn run_starts(
    cost: &mut MultiCost<'_>,
    starts: &[Start<'_>],
    settings: &SolverSettings,
    n: usize,
) -> BestRun {
    let opts = LbfgsOptions {
        memory: settings.memory,
        grad_tol: settings.grad_tol,
        max_iterations: settings.max_iterations,
        ..LbfgsOptions::default()
    };
    let mut best: Option<BestRun> = None;
    for (idx, start) in starts.iter().enumerate() {
        let x0: Vec<f64> = match start {
            Start::Given(phases) => phases.to_vec(),
            Start::Alignment => alignment_phases(&cost.forms[0]),
            Start::Random(stream) => {
                let mut rng = ChaCha8Rng::seed_from_u64(settings.seed);
                rng.set_stream(*stream);
                (0..n).map(|_| rng.random_range(0.0..TAU)).collect()
            }
        };
        let outcome = minimize(|x, g| cost.eval(x, g), &x0, &opts);
        let better = match &best {
            None => true,
            Some(b) => outcome.value < b.cost,
        };
        if better {
            best = Some(BestRun {
                outcome_x: outcome.x,
                cost: outcome.value,
                iterations: outcome.iterations,
            });
        }
        let _ = idx;
    }
    best.expect("restarts ≥ 1 guarantees at least one run")
}

fn solve_single(
    geo: &ArrayGeometry,
    spec: &FocusSpec,
    settings: &SolverSettings,
    warm: Option<&PhaseVector>,
) -> Result<SolveReport> {
    settings.validate()?;
    if !(spec.p_des >= 0.0) || !spec.p_des.is_finite() {
        return Err(Error::Config(format!(
            "desired pressure must be finite and ≥ 0, got {}",
            spec.p_des
        )));
    }
    let t0 = Instant::now();
    let form = quadratic_form(geo, &spec.x_press)?;
    let bound = bound_from_form(&form);
    if spec.p_des > bound {
        return Err(Error::UnachievableTarget {
            target: spec.p_des,
            bound,
        });
    }
    if let Some(w) = warm {
        if w.len() != geo.len() {
            return Err(Error::DimensionMismatch {
                expected: geo.len(),
                actual: w.len(),
            });
        }
    }

    let mut starts: Vec<Start<'_>> = Vec::with_capacity(settings.restarts);
    match warm {
        Some(w) => starts.push(Start::Given(w.as_slice())),
        // random starts rarely close the last fraction of a percent to the
        // bound; seed one restart with the exact alignment solution
        None if spec.p_des > 0.9 * bound => starts.push(Start::Alignment),
        None => starts.push(Start::Random(0)),
    }
    for stream in 1..settings.restarts as u64 {
        starts.push(Start::Random(stream));
    }

    let normalize = settings.normalize && spec.p_des > 0.0;
    let target_sq = spec.p_des * spec.p_des;
    let forms = [form];
    let mut cost = MultiCost {
        forms: &forms,
        targets: vec![target_sq],
        scales: vec![if normalize { 1.0 / target_sq } else { 1.0 }],
        grad_buf: vec![0.0; geo.len()],
    };
    let best = run_starts(&mut cost, &starts, settings, geo.len());

    let achieved_sq = forms[0].value(&best.outcome_x);
    let residual = (achieved_sq - target_sq).abs() / target_sq.max(1.0);
    if residual >= RESIDUAL_TOL {
        return Err(Error::NonConvergence {
            restarts: settings.restarts,
            max_iterations: settings.max_iterations,
            best_residual: residual,
        });
    }
    let phases = PhaseVector::new(best.outcome_x);
    let local_max = verify_local_max(geo, &phases, &spec.x_press, DEFAULT_PROBE_RADIUS)?;
    Ok(SolveReport {
        phases,
        cost: best.cost,
        achieved: achieved_sq.max(0.0).sqrt(),
        residual,
        iterations: best.iterations,
        restarts_used: starts.len(),
        duration: t0.elapsed(),
        local_max,
    })
}

/// Solves for phases focusing `spec.p_des` at `spec.x_press`, from random
/// initializations (plus the alignment start near the bound).
pub fn solve_focus(
    geo: &ArrayGeometry,
    spec: &FocusSpec,
    settings: &SolverSettings,
) -> Result<SolveReport> {
    solve_single(geo, spec, settings, None)
}

/// Like [`solve_focus`], but restart 0 is the supplied warm start. With
/// `restarts = 1` this is a pure warm-started solve, the cheap path for
/// tracking a slowly moving target.
pub fn solve_focus_from(
    geo: &ArrayGeometry,
    spec: &FocusSpec,
    settings: &SolverSettings,
    initial: &PhaseVector,
) -> Result<SolveReport> {
    solve_single(geo, spec, settings, Some(initial))
}

/// Multi-point extension: minimizes the sum of per-point normalized costs.
/// Converges when the RMS of the per-point relative residuals is < 1e-2;
/// a shared aperture cannot generally do better than that at every point at
/// once, so the single-point tolerance does not apply.
pub fn solve_multi_focus(
    geo: &ArrayGeometry,
    specs: &[FocusSpec],
    settings: &SolverSettings,
) -> Result<MultiSolveReport> {
    settings.validate()?;
    if specs.is_empty() {
        return Err(Error::Config("multi-focus needs at least one target".into()));
    }
    let t0 = Instant::now();
    let mut forms = Vec::with_capacity(specs.len());
    let mut targets = Vec::with_capacity(specs.len());
    let mut scales = Vec::with_capacity(specs.len());
    for spec in specs {
        if !(spec.p_des >= 0.0) || !spec.p_des.is_finite() {
            return Err(Error::Config(format!(
                "desired pressure must be finite and ≥ 0, got {}",
                spec.p_des
            )));
        }
        let form = quadratic_form(geo, &spec.x_press)?;
        let bound = bound_from_form(&form);
        if spec.p_des > bound {
            return Err(Error::UnachievableTarget {
                target: spec.p_des,
                bound,
            });
        }
        let target_sq = spec.p_des * spec.p_des;
        scales.push(if settings.normalize && spec.p_des > 0.0 {
            1.0 / target_sq
        } else {
            1.0
        });
        targets.push(target_sq);
        forms.push(form);
    }

    let starts: Vec<Start<'_>> = (0..settings.restarts as u64).map(Start::Random).collect();
    let mut cost = MultiCost {
        forms: &forms,
        targets: targets.clone(),
        scales,
        grad_buf: vec![0.0; geo.len()],
    };
    let best = run_starts(&mut cost, &starts, settings, geo.len());

    let mut achieved = Vec::with_capacity(specs.len());
    let mut residuals = Vec::with_capacity(specs.len());
    for (form, target_sq) in forms.iter().zip(&targets) {
        let v = form.value(&best.outcome_x);
        achieved.push(v.max(0.0).sqrt());
        residuals.push((v - target_sq).abs() / target_sq.max(1.0));
    }
    let rms = (residuals.iter().map(|r| r * r).sum::<f64>() / residuals.len() as f64).sqrt();
    if rms >= 1e-2 {
        return Err(Error::NonConvergence {
            restarts: settings.restarts,
            max_iterations: settings.max_iterations,
            best_residual: rms,
        });
    }
    Ok(MultiSolveReport {
        phases: PhaseVector::new(best.outcome_x),
        cost: best.cost,
        achieved,
        residuals,
        iterations: best.iterations,
        restarts_used: starts.len(),
        duration: t0.elapsed(),
    })
}

/// True iff |p| at `x_press` strictly exceeds |p| at 8 equally spaced probe
/// points on the in-plane circle of `probe_radius` around it.
pub fn verify_local_max(
    geo: &ArrayGeometry,
    phases: &PhaseVector,
    x_press: &Vector3<f64>,
    probe_radius: f64,
) -> Result<bool> {
    assert!(probe_radius > 0.0, "probe radius must be positive");
    let center = field_pressure(geo, phases, x_press)?.norm();
    for j in 0..8 {
        let angle = TAU * j as f64 / 8.0;
        let probe = x_press + Vector3::new(angle.cos(), angle.sin(), 0.0) * probe_radius;
        if field_pressure(geo, phases, &probe)?.norm() >= center {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Wraps each phase to [0, 2π), rounds to the nearest multiple of `step`
/// (half-step ties toward +∞), and re-wraps.
pub fn quantize_phases(phases: &PhaseVector, step: f64) -> PhaseVector {
    assert!(step > 0.0, "quantization step must be positive");
    PhaseVector::new(
        phases
            .as_slice()
            .iter()
            .map(|&p| ((p / step) + 0.5).floor() * step)
            .collect(),
    )
}
