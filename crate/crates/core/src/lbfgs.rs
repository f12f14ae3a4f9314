//! Limited-memory BFGS with a strong-Wolfe line search.
//!
//! Two-loop recursion over the last `memory` curvature pairs; the line search
//! brackets then zooms with safeguarded cubic interpolation. The objective is
//! any `FnMut(&[f64], &mut [f64]) -> f64` writing the gradient into its second
//! argument.

/// Tunables for [`minimize`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LbfgsOptions {
    /// Number of curvature pairs retained.
    pub memory: usize,
    /// Convergence threshold on the gradient sup-norm.
    pub grad_tol: f64,
    pub max_iterations: usize,
    /// Sufficient-decrease (Armijo) constant.
    pub c1: f64,
    /// Curvature constant.
    pub c2: f64,
}

impl Default for LbfgsOptions {
    fn default() -> Self {
        Self {
            memory: 10,
            grad_tol: 1e-8,
            max_iterations: 500,
            c1: 1e-4,
            c2: 0.9,
        }
    }
}

/// Result of one [`minimize`] run.
#[derive(Debug, Clone, PartialEq)]
pub struct LbfgsOutcome {
    pub x: Vec<f64>,
    pub value: f64,
    pub grad_norm: f64,
    /// Outer iterations taken (accepted steps).
    pub iterations: usize,
    /// Objective evaluations, line search included.
    pub evaluations: usize,
    /// Whether the gradient sup-norm reached `grad_tol`.
    pub converged: bool,
}

const MAX_BRACKET: usize = 20;
const MAX_ZOOM: usize = 30;
const ALPHA_MAX: f64 = 1e3;

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |acc, x| acc.max(x.abs()))
}

/// Minimizes `f` starting from `x0`.
///
/// Always returns the best iterate seen; `converged` reports whether the
/// gradient tolerance was met before `max_iterations` or a failed line search
/// ended the run.
pub fn minimize<F>(mut f: F, x0: &[f64], opts: &LbfgsOptions) -> LbfgsOutcome
where
    F: FnMut(&[f64], &mut [f64]) -> f64,
{
    let n = x0.len();
    let mut x = x0.to_vec();
    let mut g = vec![0.0; n];
    let mut fx = f(&x, &mut g);
    let mut evals = 1;

    let mut s_hist: Vec<Vec<f64>> = Vec::with_capacity(opts.memory);
    let mut y_hist: Vec<Vec<f64>> = Vec::with_capacity(opts.memory);
    let mut rho_hist: Vec<f64> = Vec::with_capacity(opts.memory);

    let mut iterations = 0;
    let mut converged = inf_norm(&g) <= opts.grad_tol;

    while !converged && iterations < opts.max_iterations {
        // d = -H·g via the two-loop recursion
        let m = s_hist.len();
        let mut d = g.clone();
        let mut alphas = vec![0.0; m];
        for i in (0..m).rev() {
            let a = rho_hist[i] * dot(&s_hist[i], &d);
            alphas[i] = a;
            for (dj, yj) in d.iter_mut().zip(&y_hist[i]) {
                *dj -= a * yj;
            }
        }
        if m > 0 {
            let last = m - 1;
            let gamma = dot(&s_hist[last], &y_hist[last]) / dot(&y_hist[last], &y_hist[last]);
            for dj in &mut d {
                *dj *= gamma;
            }
        }
        for i in 0..m {
            let beta = rho_hist[i] * dot(&y_hist[i], &d);
            let corr = alphas[i] - beta;
            for (dj, sj) in d.iter_mut().zip(&s_hist[i]) {
                *dj += corr * sj;
            }
        }
        for dj in &mut d {
            *dj = -*dj;
        }

        let mut dg = dot(&d, &g);
        if dg >= 0.0 {
            // stale curvature produced a non-descent direction; restart from
            // steepest descent
            s_hist.clear();
            y_hist.clear();
            rho_hist.clear();
            d.clone_from_slice(&g);
            for dj in &mut d {
                *dj = -*dj;
            }
            dg = -dot(&g, &g);
            if dg >= 0.0 {
                break;
            }
        }

        let alpha0 = if iterations == 0 {
            let g1: f64 = g.iter().map(|v| v.abs()).sum();
            (1.0 / g1).min(1.0)
        } else {
            1.0
        };

        let Some(step) = line_search(&mut f, &x, fx, &d, dg, alpha0, opts, &mut evals) else {
            break;
        };

        let mut s_new = vec![0.0; n];
        let mut y_new = vec![0.0; n];
        for i in 0..n {
            s_new[i] = step.x[i] - x[i];
            y_new[i] = step.g[i] - g[i];
        }
        let sy = dot(&s_new, &y_new);
        let s_norm = dot(&s_new, &s_new).sqrt();
        let y_norm = dot(&y_new, &y_new).sqrt();
        if sy > 1e-10 * s_norm * y_norm {
            if s_hist.len() == opts.memory {
                s_hist.remove(0);
                y_hist.remove(0);
                rho_hist.remove(0);
            }
            s_hist.push(s_new);
            y_hist.push(y_new);
            rho_hist.push(1.0 / sy);
        }

        x = step.x;
        g = step.g;
        fx = step.value;
        iterations += 1;
        converged = inf_norm(&g) <= opts.grad_tol;
    }

    LbfgsOutcome {
        grad_norm: inf_norm(&g),
        x,
        value: fx,
        iterations,
        evaluations: evals,
        converged,
    }
}

struct StepResult {
    x: Vec<f64>,
    g: Vec<f64>,
    value: f64,
    #[allow(dead_code)]
    alpha: f64,
}

struct ProbePoint {
    alpha: f64,
    value: f64,
    dphi: f64,
    x: Vec<f64>,
    g: Vec<f64>,
}

/// Strong-Wolfe line search (bracket then zoom). `dg0` is the directional
/// derivative at `alpha = 0` and must be negative.
#[allow(clippy::too_many_arguments)]
fn line_search<F>(
    f: &mut F,
    x0: &[f64],
    f0: f64,
    d: &[f64],
    dg0: f64,
    alpha0: f64,
    opts: &LbfgsOptions,
    evals: &mut usize,
) -> Option<StepResult>
where
    F: FnMut(&[f64], &mut [f64]) -> f64,
{
    let n = x0.len();
    let mut probe = |alpha: f64, evals: &mut usize| -> ProbePoint {
        let mut x = vec![0.0; n];
        for i in 0..n {
            x[i] = x0[i] + alpha * d[i];
        }
        let mut g = vec![0.0; n];
        let value = f(&x, &mut g);
        *evals += 1;
        let dphi = dot(&g, d);
        ProbePoint {
            alpha,
            value,
            dphi,
            x,
            g,
        }
    };

    let armijo = |alpha: f64, value: f64| value <= f0 + opts.c1 * alpha * dg0;
    let curvature = |dphi: f64| dphi.abs() <= -opts.c2 * dg0;

    let mut prev = ProbePoint {
        alpha: 0.0,
        value: f0,
        dphi: dg0,
        x: x0.to_vec(),
        g: Vec::new(),
    };
    let mut alpha = alpha0.min(ALPHA_MAX);

    for i in 0..MAX_BRACKET {
        let cur = probe(alpha, evals);
        if !armijo(cur.alpha, cur.value) || (i > 0 && cur.value >= prev.value) {
            return zoom(f, x0, f0, d, dg0, prev, cur, opts, evals);
        }
        if curvature(cur.dphi) {
            return Some(StepResult {
                x: cur.x,
                g: cur.g,
                value: cur.value,
                alpha: cur.alpha,
            });
        }
        if cur.dphi >= 0.0 {
            return zoom(f, x0, f0, d, dg0, cur, prev, opts, evals);
        }
        if alpha >= ALPHA_MAX {
            // sufficient decrease holds all the way out; take what we have
            return Some(StepResult {
                x: cur.x,
                g: cur.g,
                value: cur.value,
                alpha: cur.alpha,
            });
        }
        alpha = (2.0 * alpha).min(ALPHA_MAX);
        prev = cur;
    }
    None
}

/// Zoom phase: maintains the invariant that `lo` satisfies Armijo and the
/// interval [lo, hi] brackets a strong-Wolfe point.
#[allow(clippy::too_many_arguments)]
fn zoom<F>(
    f: &mut F,
    x0: &[f64],
    f0: f64,
    d: &[f64],
    dg0: f64,
    mut lo: ProbePoint,
    mut hi: ProbePoint,
    opts: &LbfgsOptions,
    evals: &mut usize,
) -> Option<StepResult>
where
    F: FnMut(&[f64], &mut [f64]) -> f64,
{
    let n = x0.len();
    let armijo = |alpha: f64, value: f64| value <= f0 + opts.c1 * alpha * dg0;
    let curvature = |dphi: f64| dphi.abs() <= -opts.c2 * dg0;

    for _ in 0..MAX_ZOOM {
        let width = (hi.alpha - lo.alpha).abs();
        if width <= 1e-16 * lo.alpha.abs().max(1.0) {
            break;
        }
        let alpha = cubic_step(&lo, &hi);

        let mut x = vec![0.0; n];
        for i in 0..n {
            x[i] = x0[i] + alpha * d[i];
        }
        let mut g = vec![0.0; n];
        let value = f(&x, &mut g);
        *evals += 1;
        let dphi = dot(&g, d);
        let cur = ProbePoint {
            alpha,
            value,
            dphi,
            x,
            g,
        };

        if !armijo(cur.alpha, cur.value) || cur.value >= lo.value {
            hi = cur;
        } else {
            if curvature(cur.dphi) {
                return Some(StepResult {
                    x: cur.x,
                    g: cur.g,
                    value: cur.value,
                    alpha: cur.alpha,
                });
            }
            if cur.dphi * (hi.alpha - lo.alpha) >= 0.0 {
                hi = lo;
            }
            lo = cur;
        }
    }

    // interval collapsed without meeting the curvature condition; a decreased
    // lo point is still usable progress
    if lo.alpha > 0.0 && armijo(lo.alpha, lo.value) && !lo.g.is_empty() {
        return Some(StepResult {
            x: lo.x,
            g: lo.g,
            value: lo.value,
            alpha: lo.alpha,
        });
    }
    None
}

/// Minimizer of the cubic interpolating two (α, φ, φ') samples, safeguarded
/// to the interior of the interval; falls back to bisection.
fn cubic_step(lo: &ProbePoint, hi: &ProbePoint) -> f64 {
    let (a0, f0, d0) = (lo.alpha, lo.value, lo.dphi);
    let (a1, f1, d1) = (hi.alpha, hi.value, hi.dphi);
    let lower = a0.min(a1);
    let upper = a0.max(a1);
    let width = upper - lower;
    let midpoint = 0.5 * (lower + upper);

    let d1c = d0 + d1 - 3.0 * (f0 - f1) / (a0 - a1);
    let disc = d1c * d1c - d0 * d1;
    if disc < 0.0 {
        return midpoint;
    }
    let d2c = (a1 - a0).signum() * disc.sqrt();
    let alpha = a1 - (a1 - a0) * (d1 + d2c - d1c) / (d1 - d0 + 2.0 * d2c);
    if !alpha.is_finite() || alpha <= lower + 0.1 * width || alpha >= upper - 0.1 * width {
        midpoint
    } else {
        alpha
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn quadratic(n: usize) -> (impl Fn(&[f64], &mut [f64]) -> f64, Vec<f64>) {
        // f(x) = ½ Σ (i+1) x_i² - Σ x_i, minimum at x_i = 1/(i+1)
        let solution: Vec<f64> = (0..n).map(|i| 1.0 / (i as f64 + 1.0)).collect();
        let f = move |x: &[f64], g: &mut [f64]| -> f64 {
            let mut v = 0.0;
            for i in 0..x.len() {
                let w = i as f64 + 1.0;
                v += 0.5 * w * x[i] * x[i] - x[i];
                g[i] = w * x[i] - 1.0;
            }
            v
        };
        (f, solution)
    }

    fn rosenbrock(x: &[f64], g: &mut [f64]) -> f64 {
        let n = x.len();
        let mut v = 0.0;
        g.fill(0.0);
        for i in 0..n - 1 {
            let t1 = x[i + 1] - x[i] * x[i];
            let t2 = 1.0 - x[i];
            v += 100.0 * t1 * t1 + t2 * t2;
            g[i] += -400.0 * x[i] * t1 - 2.0 * t2;
            g[i + 1] += 200.0 * t1;
        }
        v
    }

    #[test]
    fn solves_separable_quadratic() {
        let (f, solution) = quadratic(10);
        let out = minimize(f, &[0.0; 10], &LbfgsOptions::default());
        assert!(out.converged, "grad norm {:.3e}", out.grad_norm);
        for (xi, si) in out.x.iter().zip(&solution) {
            assert_abs_diff_eq!(xi, si, epsilon = 1e-7);
        }
    }

    #[test]
    fn solves_rosenbrock_2d() {
        let out = minimize(rosenbrock, &[-1.2, 1.0], &LbfgsOptions::default());
        assert!(out.converged, "grad norm {:.3e}", out.grad_norm);
        assert_abs_diff_eq!(out.x[0], 1.0, epsilon = 1e-6);
        assert_abs_diff_eq!(out.x[1], 1.0, epsilon = 1e-6);
        assert!(out.value < 1e-12);
    }

    #[test]
    fn solves_rosenbrock_20d() {
        let mut x0 = vec![-1.2; 20];
        for i in (1..20).step_by(2) {
            x0[i] = 1.0;
        }
        let out = minimize(rosenbrock, &x0, &LbfgsOptions::default());
        assert!(out.converged, "grad norm {:.3e}", out.grad_norm);
        for xi in &out.x {
            assert_abs_diff_eq!(xi, &1.0, epsilon = 1e-5);
        }
    }

    #[test]
    fn respects_iteration_cap() {
        let opts = LbfgsOptions {
            max_iterations: 3,
            ..LbfgsOptions::default()
        };
        let out = minimize(rosenbrock, &[-1.2, 1.0], &opts);
        assert!(!out.converged);
        assert!(out.iterations <= 3);
        // still made progress from f(-1.2, 1) = 24.2
        assert!(out.value < 24.2);
    }

    #[test]
    fn already_at_minimum_returns_immediately() {
        let (f, solution) = quadratic(4);
        let out = minimize(f, &solution, &LbfgsOptions::default());
        assert!(out.converged);
        assert_eq!(out.iterations, 0);
        assert_eq!(out.evaluations, 1);
    }

    #[test]
    fn periodic_objective_reaches_stationary_point() {
        // f(x) = Σ cos(x_i): minima at odd multiples of π per coordinate
        let f = |x: &[f64], g: &mut [f64]| -> f64 {
            for i in 0..x.len() {
                g[i] = -x[i].sin();
            }
            x.iter().map(|v| v.cos()).sum()
        };
        let out = minimize(f, &[0.5, 2.0, -1.0, 4.0], &LbfgsOptions::default());
        assert!(out.converged, "grad norm {:.3e}", out.grad_norm);
        assert_abs_diff_eq!(out.value, -4.0, epsilon = 1e-10);
    }
}
