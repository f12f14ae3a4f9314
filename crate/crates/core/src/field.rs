//! Acoustic field model: per-transducer pressure contributions, superposition,
//! planar scans, and the quadratic form used by the focusing optimizer.

use std::fs::File;
use std::io::{BufWriter, Write as _};
use std::path::Path;
use std::str::FromStr;

use nalgebra::{DMatrix, Vector3};

use crate::bessel::j1;
use crate::error::{Error, Result};
use crate::geometry::{ArrayGeometry, PhaseVector};

pub type Complex = num_complex::Complex64;

/// Points closer than this to a transducer make the 1/d term meaningless.
const DEGENERATE_DISTANCE: f64 = 1e-9;

/// Far-field piston directivity 2·J1(k·r·sinθ)/(k·r·sinθ) for polar angle
/// `theta` off the transducer normal.
///
/// The removable singularity at θ = 0 evaluates to 1.
pub fn directivity(theta: f64, wavenumber: f64, radius: f64) -> f64 {
    directivity_from_sin(theta.sin(), wavenumber, radius)
}

pub(crate) fn directivity_from_sin(sin_theta: f64, wavenumber: f64, radius: f64) -> f64 {
    let x = wavenumber * radius * sin_theta;
    if x.abs() < 1e-4 {
        // 2·J1(x)/x = 1 - x²/8 + x⁴/192 - O(x⁶); x⁶ term < 1e-28 here
        let x2 = x * x;
        1.0 - x2 / 8.0 + x2 * x2 / 192.0
    } else {
        2.0 * j1(x) / x
    }
}

/// Complex pressure contribution of transducer `index` at `point`, before any
/// phase delay is applied: A·f_dir(θ)·(1/d)·e^{jkd}.
pub fn transducer_pressure(
    geo: &ArrayGeometry,
    index: usize,
    point: &Vector3<f64>,
) -> Result<Complex> {
    let diff = point - geo.positions()[index];
    let d = diff.norm();
    if d < DEGENERATE_DISTANCE {
        return Err(Error::DegeneratePoint { index, distance: d });
    }
    // sinθ from the cross product: stable for points near and far off axis
    let sin_theta = geo.normals()[index].cross(&diff).norm() / d;
    let f_dir = directivity_from_sin(sin_theta, geo.wavenumber(), geo.radius());
    let amplitude = geo.power() * f_dir / d;
    Ok(Complex::from_polar(amplitude, geo.wavenumber() * d))
}

/// Total complex pressure at `point` with per-transducer phase delays applied:
/// p = Σ_i M_i(point)·e^{jφ_i}.
pub fn field_pressure(
    geo: &ArrayGeometry,
    phases: &PhaseVector,
    point: &Vector3<f64>,
) -> Result<Complex> {
    if phases.len() != geo.len() {
        return Err(Error::DimensionMismatch {
            expected: geo.len(),
            actual: phases.len(),
        });
    }
    let mut p = Complex::new(0.0, 0.0);
    for i in 0..geo.len() {
        let m = transducer_pressure(geo, i, point)?;
        p += m * Complex::from_polar(1.0, phases[i]);
    }
    Ok(p)
}

/// |p(x)|² as a quadratic form in (cos φ, sin φ), precomputed for one field
/// point.
///
/// Stores only the complex contribution vector m = m_re + j·m_im; the value
/// and gradient are evaluated in O(N) from four dot products. The rank-2
/// matrices of the expanded form are available from [`p1`](Self::p1) and
/// [`p2`](Self::p2) for verification, but are never built in the hot path.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticPressureForm {
    m_re: Vec<f64>,
    m_im: Vec<f64>,
}

/// Precomputes the quadratic pressure form for `point`.
pub fn quadratic_form(geo: &ArrayGeometry, point: &Vector3<f64>) -> Result<QuadraticPressureForm> {
    let n = geo.len();
    let mut m_re = Vec::with_capacity(n);
    let mut m_im = Vec::with_capacity(n);
    for i in 0..n {
        let m = transducer_pressure(geo, i, point)?;
        m_re.push(m.re);
        m_im.push(m.im);
    }
    Ok(QuadraticPressureForm { m_re, m_im })
}

impl QuadraticPressureForm {
    pub fn len(&self) -> usize {
        self.m_re.len()
    }

    pub(crate) fn m_re(&self) -> &[f64] {
        &self.m_re
    }

    pub(crate) fn m_im(&self) -> &[f64] {
        &self.m_im
    }

    pub fn is_empty(&self) -> bool {
        self.m_re.is_empty()
    }

    /// The four dot products a = m_reᵀc, b = m_imᵀc, e = m_reᵀs, f = m_imᵀs
    /// that everything else is assembled from.
    fn dots(&self, phases: &[f64]) -> (f64, f64, f64, f64) {
        assert_eq!(phases.len(), self.len(), "phase vector length mismatch");
        let (mut a, mut b, mut e, mut f) = (0.0, 0.0, 0.0, 0.0);
        for ((&phase, &mr), &mi) in phases.iter().zip(&self.m_re).zip(&self.m_im) {
            let (s, c) = phase.sin_cos();
            a += mr * c;
            b += mi * c;
            e += mr * s;
            f += mi * s;
        }
        (a, b, e, f)
    }

    /// Complex pressure at the form's point for the given phases.
    pub fn pressure(&self, phases: &[f64]) -> Complex {
        let (a, b, e, f) = self.dots(phases);
        Complex::new(a - f, e + b)
    }

    /// |p|² at the form's point.
    pub fn value(&self, phases: &[f64]) -> f64 {
        let (a, b, e, f) = self.dots(phases);
        a * a + b * b + e * e + f * f + 2.0 * (b * e - a * f)
    }

    /// |p|² and its gradient with respect to the phases, written into `grad`.
    ///
    /// ∂|p|²/∂φ_i = 2·[m_re_i·(-a·s_i + (b+e)·c_i + f·s_i)
    ///               + m_im_i·(-a·c_i - (b+e)·s_i + f·c_i)]
    ///
    /// The gradient components sum to zero: a global phase shift leaves |p|²
    /// unchanged.
    pub fn value_and_gradient_into(&self, phases: &[f64], grad: &mut [f64]) -> f64 {
        let n = self.len();
        assert_eq!(phases.len(), n, "phase vector length mismatch");
        assert_eq!(grad.len(), n, "gradient buffer length mismatch");
        let mut sin_cos = Vec::with_capacity(n);
        let (mut a, mut b, mut e, mut f) = (0.0, 0.0, 0.0, 0.0);
        for ((&phase, &mr), &mi) in phases.iter().zip(&self.m_re).zip(&self.m_im) {
            let (s, c) = phase.sin_cos();
            sin_cos.push((s, c));
            a += mr * c;
            b += mi * c;
            e += mr * s;
            f += mi * s;
        }
        let be = b + e;
        for (((g, &(s, c)), &mr), &mi) in grad
            .iter_mut()
            .zip(&sin_cos)
            .zip(&self.m_re)
            .zip(&self.m_im)
        {
            *g = 2.0 * (mr * (-a * s + be * c + f * s) + mi * (-a * c - be * s + f * c));
        }
        a * a + b * b + e * e + f * f + 2.0 * (b * e - a * f)
    }

    /// Symmetric positive semidefinite rank-≤2 matrix of the expanded form:
    /// P1 = m_re·m_reᵀ + m_im·m_imᵀ. Test/verification use only.
    pub fn p1(&self) -> DMatrix<f64> {
        let n = self.len();
        DMatrix::from_fn(n, n, |i, j| {
            self.m_re[i] * self.m_re[j] + self.m_im[i] * self.m_im[j]
        })
    }

    /// Antisymmetric matrix of the expanded form:
    /// P2 = 2·(m_im·m_reᵀ - m_re·m_imᵀ). Test/verification use only.
    pub fn p2(&self) -> DMatrix<f64> {
        let n = self.len();
        DMatrix::from_fn(n, n, |i, j| {
            2.0 * (self.m_im[i] * self.m_re[j] - self.m_re[i] * self.m_im[j])
        })
    }
}

/// |p|² and its phase gradient at the form's point, allocating the gradient.
pub fn pressure_sq_and_gradient(form: &QuadraticPressureForm, phases: &[f64]) -> (f64, Vec<f64>) {
    let mut grad = vec![0.0; form.len()];
    let value = form.value_and_gradient_into(phases, &mut grad);
    (value, grad)
}

/// Coordinate axis held fixed by a planar scan.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlaneAxis {
    X,
    Y,
    Z,
}

impl FromStr for PlaneAxis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "x" => Ok(Self::X),
            "y" => Ok(Self::Y),
            "z" => Ok(Self::Z),
            other => Err(Error::Config(format!("unknown axis {other:?}, expected x, y, or z"))),
        }
    }
}

/// Uniformly spaced samples on one axis, endpoints inclusive.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AxisRange {
    pub start: f64,
    pub stop: f64,
    pub count: usize,
}

impl AxisRange {
    pub fn new(start: f64, stop: f64, count: usize) -> Self {
        Self { start, stop, count }
    }

    /// Sample values; `count == 1` yields just `start`.
    pub fn values(&self) -> Vec<f64> {
        match self.count {
            0 => Vec::new(),
            1 => vec![self.start],
            n => {
                let step = (self.stop - self.start) / (n as f64 - 1.0);
                (0..n).map(|i| self.start + step * i as f64).collect()
            }
        }
    }
}

/// Rectangular sampling grid on an axis-aligned plane.
///
/// `axis` is held at `value`; `u` and `v` sweep the remaining two axes in
/// coordinate order (X fixed → u = y, v = z; Y fixed → u = x, v = z;
/// Z fixed → u = x, v = y).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub axis: PlaneAxis,
    pub value: f64,
    pub u: AxisRange,
    pub v: AxisRange,
}

impl GridSpec {
    fn point(&self, u: f64, v: f64) -> Vector3<f64> {
        match self.axis {
            PlaneAxis::X => Vector3::new(self.value, u, v),
            PlaneAxis::Y => Vector3::new(u, self.value, v),
            PlaneAxis::Z => Vector3::new(u, v, self.value),
        }
    }
}

/// Complex pressure sampled over a [`GridSpec`].
///
/// Row-major over the grid: `v` is the outer loop, `u` the inner, so
/// `points[j*u.count + i]` is at (u_i, v_j).
#[derive(Debug, Clone, PartialEq)]
pub struct FieldScan {
    pub spec: GridSpec,
    pub points: Vec<Vector3<f64>>,
    pub pressures: Vec<Complex>,
}

impl FieldScan {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn magnitudes(&self) -> Vec<f64> {
        self.pressures.iter().map(|p| p.norm()).collect()
    }

    /// Writes the scan as CSV with header `x,y,z,abs_p,re_p,im_p`.
    /// Identical scans produce byte-identical files.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = BufWriter::new(file);
        let mut emit = || -> std::io::Result<()> {
            writeln!(w, "x,y,z,abs_p,re_p,im_p")?;
            for (pt, p) in self.points.iter().zip(&self.pressures) {
                writeln!(
                    w,
                    "{:.8e},{:.8e},{:.8e},{:.8e},{:.8e},{:.8e}",
                    pt.x,
                    pt.y,
                    pt.z,
                    p.norm(),
                    p.re,
                    p.im
                )?;
            }
            w.flush()
        };
        emit().map_err(|e| Error::io(path, e))
    }
}

/// Samples the complex field over a planar grid.
pub fn field_scan_grid(
    geo: &ArrayGeometry,
    phases: &PhaseVector,
    spec: &GridSpec,
) -> Result<FieldScan> {
    if spec.u.count == 0 || spec.v.count == 0 {
        return Err(Error::EmptyGrid(format!(
            "scan grid is {}x{}",
            spec.u.count, spec.v.count
        )));
    }
    let us = spec.u.values();
    let vs = spec.v.values();
    let mut points = Vec::with_capacity(us.len() * vs.len());
    let mut pressures = Vec::with_capacity(us.len() * vs.len());
    for &v in &vs {
        for &u in &us {
            let pt = spec.point(u, v);
            pressures.push(field_pressure(geo, phases, &pt)?);
            points.push(pt);
        }
    }
    Ok(FieldScan {
        spec: *spec,
        points,
        pressures,
    })
}

/// |p| sampled over a planar grid, in the same row-major order as
/// [`field_scan_grid`].
pub fn field_magnitude_grid(
    geo: &ArrayGeometry,
    phases: &PhaseVector,
    spec: &GridSpec,
) -> Result<Vec<f64>> {
    Ok(field_scan_grid(geo, phases, spec)?.magnitudes())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{MANIPULATION_PLANE_Z, TRANSDUCER_POWER, WAVENUMBER};
    use approx::{assert_abs_diff_eq, assert_relative_eq};
    use proptest::prelude::*;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::{FRAC_PI_2, TAU};

    fn center_point() -> Vector3<f64> {
        Vector3::new(0.0, 0.0, MANIPULATION_PLANE_Z)
    }

    #[test]
    fn on_axis_directivity_is_unity() {
        assert_eq!(directivity(0.0, WAVENUMBER, 5.0e-3), 1.0);
        // series and Bessel branches agree across the 1e-4 switch
        for &x in &[9.9e-5, 1.0e-4, 1.01e-4] {
            let sin_theta = x / (WAVENUMBER * 5.0e-3);
            let f = directivity_from_sin(sin_theta, WAVENUMBER, 5.0e-3);
            assert_relative_eq!(f, 2.0 * j1(x) / x, max_relative = 1e-13);
        }
    }

    #[test]
    fn edge_on_directivity_matches_bessel_form() {
        let f = directivity(FRAC_PI_2, WAVENUMBER, 5.0e-3);
        let x = WAVENUMBER * 5.0e-3;
        assert_relative_eq!(f, 2.0 * j1(x) / x, max_relative = 1e-15);
        assert_abs_diff_eq!(f, 0.038, epsilon = 1e-3);
        // k·r = 3.66 sits below the first J1 zero at 3.83, so the main lobe
        // never changes sign anywhere in the half-space
        assert!(f > 0.0);
    }

    #[test]
    fn single_transducer_amplitude_and_phase() {
        let geo = ArrayGeometry::grid(1, 1, 1.0).unwrap();
        let d = MANIPULATION_PLANE_Z;
        let m = transducer_pressure(&geo, 0, &center_point()).unwrap();
        let expected = Complex::from_polar(TRANSDUCER_POWER / d, WAVENUMBER * d);
        assert_relative_eq!(m.re, expected.re, max_relative = 1e-15);
        assert_relative_eq!(m.im, expected.im, max_relative = 1e-15);
    }

    #[test]
    fn degenerate_point_is_rejected() {
        let geo = ArrayGeometry::default_8x8();
        let at_transducer = geo.positions()[13];
        let err = transducer_pressure(&geo, 13, &at_transducer).unwrap_err();
        assert!(matches!(err, Error::DegeneratePoint { index: 13, .. }));
        let err = field_pressure(&geo, &PhaseVector::zeros(64), &at_transducer).unwrap_err();
        assert!(matches!(err, Error::DegeneratePoint { .. }));
    }

    #[test]
    fn phase_length_mismatch_is_rejected() {
        let geo = ArrayGeometry::default_8x8();
        let err = field_pressure(&geo, &PhaseVector::zeros(63), &center_point()).unwrap_err();
        assert!(matches!(
            err,
            Error::DimensionMismatch {
                expected: 64,
                actual: 63
            }
        ));
    }

    #[test]
    fn superposition_matches_manual_sum() {
        let geo = ArrayGeometry::default_8x8();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let phases: Vec<f64> = (0..64).map(|_| rng.random_range(0.0..TAU)).collect();
        let pv = PhaseVector::new(phases.clone());
        let point = Vector3::new(3.0e-3, -4.0e-3, MANIPULATION_PLANE_Z);
        let mut manual = Complex::new(0.0, 0.0);
        for (i, &phase) in phases.iter().enumerate() {
            manual +=
                transducer_pressure(&geo, i, &point).unwrap() * Complex::from_polar(1.0, phase);
        }
        let p = field_pressure(&geo, &pv, &point).unwrap();
        assert_relative_eq!(p.re, manual.re, max_relative = 1e-14);
        assert_relative_eq!(p.im, manual.im, max_relative = 1e-14);
    }

    #[test]
    fn aligned_phases_add_coherently() {
        // with φ_i = -k·d_i every contribution is real-positive, so the
        // magnitude is the sum of magnitudes (the tightest possible focus)
        let geo = ArrayGeometry::default_8x8();
        let point = Vector3::new(5.0e-3, 5.0e-3, MANIPULATION_PLANE_Z);
        let mut sum_abs = 0.0;
        let mut phases = Vec::with_capacity(64);
        for i in 0..64 {
            let m = transducer_pressure(&geo, i, &point).unwrap();
            sum_abs += m.norm();
            phases.push(-m.arg());
        }
        let p = field_pressure(&geo, &PhaseVector::new(phases), &point).unwrap();
        assert_relative_eq!(p.norm(), sum_abs, max_relative = 1e-12);
        assert_abs_diff_eq!(p.arg(), 0.0, epsilon = 1e-12);
    }

    fn random_instance(seed: u64) -> (QuadraticPressureForm, Vec<f64>) {
        let geo = ArrayGeometry::default_8x8();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let point = Vector3::new(
            rng.random_range(-20.0e-3..20.0e-3),
            rng.random_range(-20.0e-3..20.0e-3),
            MANIPULATION_PLANE_Z,
        );
        let form = quadratic_form(&geo, &point).unwrap();
        let phases: Vec<f64> = (0..geo.len()).map(|_| rng.random_range(0.0..TAU)).collect();
        (form, phases)
    }

    #[test]
    fn quadratic_form_matches_superposition() {
        let geo = ArrayGeometry::default_8x8();
        for seed in 0..50 {
            let (form, phases) = random_instance(seed);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let point = Vector3::new(
                rng.random_range(-20.0e-3..20.0e-3),
                rng.random_range(-20.0e-3..20.0e-3),
                MANIPULATION_PLANE_Z,
            );
            let p = field_pressure(&geo, &PhaseVector::new(phases.clone()), &point).unwrap();
            assert_relative_eq!(form.value(&phases), p.norm_sqr(), max_relative = 1e-12);
            let q = form.pressure(&phases);
            assert_relative_eq!(q.re, p.re, max_relative = 1e-11, epsilon = 1e-9);
            assert_relative_eq!(q.im, p.im, max_relative = 1e-11, epsilon = 1e-9);
        }
    }

    #[test]
    fn gradient_matches_central_differences() {
        let h = 1e-6;
        for seed in 100..125 {
            let (form, phases) = random_instance(seed);
            let (_, grad) = pressure_sq_and_gradient(&form, &phases);
            let mut fd = vec![0.0; phases.len()];
            let mut work = phases.clone();
            for i in 0..phases.len() {
                work[i] = phases[i] + h;
                let plus = form.value(&work);
                work[i] = phases[i] - h;
                let minus = form.value(&work);
                work[i] = phases[i];
                fd[i] = (plus - minus) / (2.0 * h);
            }
            let num: f64 = grad
                .iter()
                .zip(&fd)
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt();
            let den: f64 = grad.iter().map(|g| g * g).sum::<f64>().sqrt();
            assert!(
                num <= 1e-6 * den.max(1e-12),
                "seed {seed}: finite-difference mismatch {num:.3e} vs scale {den:.3e}"
            );
        }
    }

    #[test]
    fn gradient_components_sum_to_zero() {
        for seed in 200..220 {
            let (form, phases) = random_instance(seed);
            let (_, grad) = pressure_sq_and_gradient(&form, &phases);
            let total: f64 = grad.iter().sum();
            let scale: f64 = grad.iter().map(|g| g.abs()).sum();
            assert!(
                total.abs() <= 1e-12 * scale.max(1.0),
                "seed {seed}: gradient sum {total:.3e} for scale {scale:.3e}"
            );
        }
    }

    #[test]
    fn expanded_matrices_reproduce_value() {
        let (form, phases) = random_instance(42);
        let n = phases.len();
        let c = nalgebra::DVector::from_iterator(n, phases.iter().map(|p| p.cos()));
        let s = nalgebra::DVector::from_iterator(n, phases.iter().map(|p| p.sin()));
        let p1 = form.p1();
        let p2 = form.p2();
        let expanded = (c.transpose() * &p1 * &c)[(0, 0)]
            + (s.transpose() * &p1 * &s)[(0, 0)]
            + (c.transpose() * &p2 * &s)[(0, 0)];
        assert_relative_eq!(expanded, form.value(&phases), max_relative = 1e-10);

        // P1 is PSD with rank ≤ 2; P2 is antisymmetric by construction
        let mut eigs: Vec<f64> = p1.symmetric_eigenvalues().iter().copied().collect();
        eigs.sort_by(|a, b| b.partial_cmp(a).unwrap());
        assert!(eigs[n - 1] > -1e-9 * eigs[0].abs());
        assert!(eigs[2].abs() < 1e-9 * eigs[0].abs());
        for i in 0..n {
            for j in 0..n {
                assert_eq!(p2[(i, j)], -p2[(j, i)]);
            }
        }
    }

    #[test]
    fn scan_grid_ordering_and_points() {
        let geo = ArrayGeometry::default_8x8();
        let spec = GridSpec {
            axis: PlaneAxis::Z,
            value: MANIPULATION_PLANE_Z,
            u: AxisRange::new(0.0, 1.0e-3, 2),
            v: AxisRange::new(0.0, 2.0e-3, 3),
        };
        let scan = field_scan_grid(&geo, &PhaseVector::zeros(64), &spec).unwrap();
        assert_eq!(scan.len(), 6);
        let expect = [
            (0.0, 0.0),
            (1.0e-3, 0.0),
            (0.0, 1.0e-3),
            (1.0e-3, 1.0e-3),
            (0.0, 2.0e-3),
            (1.0e-3, 2.0e-3),
        ];
        for (pt, (x, y)) in scan.points.iter().zip(expect) {
            assert_eq!((pt.x, pt.y, pt.z), (x, y, MANIPULATION_PLANE_Z));
        }
        assert_eq!(scan.magnitudes().len(), 6);
        // magnitudes agree with a direct evaluation
        for (pt, p) in scan.points.iter().zip(&scan.pressures) {
            let direct = field_pressure(&geo, &PhaseVector::zeros(64), pt).unwrap();
            assert_eq!(p, &direct);
        }
    }

    #[test]
    fn empty_grid_is_rejected() {
        let geo = ArrayGeometry::default_8x8();
        let spec = GridSpec {
            axis: PlaneAxis::Z,
            value: MANIPULATION_PLANE_Z,
            u: AxisRange::new(0.0, 1.0e-3, 0),
            v: AxisRange::new(0.0, 2.0e-3, 3),
        };
        let err = field_scan_grid(&geo, &PhaseVector::zeros(64), &spec).unwrap_err();
        assert!(matches!(err, Error::EmptyGrid(_)));
    }

    #[test]
    fn scan_csv_is_deterministic() {
        let geo = ArrayGeometry::default_8x8();
        let spec = GridSpec {
            axis: PlaneAxis::Z,
            value: MANIPULATION_PLANE_Z,
            u: AxisRange::new(-5.0e-3, 5.0e-3, 3),
            v: AxisRange::new(-5.0e-3, 5.0e-3, 3),
        };
        let scan = field_scan_grid(&geo, &PhaseVector::zeros(64), &spec).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path_a = dir.path().join("scan_a.csv");
        let path_b = dir.path().join("scan_b.csv");
        scan.write_csv(&path_a).unwrap();
        scan.write_csv(&path_b).unwrap();
        let a = std::fs::read(&path_a).unwrap();
        let b = std::fs::read(&path_b).unwrap();
        assert_eq!(a, b);
        let text = String::from_utf8(a).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("x,y,z,abs_p,re_p,im_p"));
        assert_eq!(lines.count(), 9);
    }

    #[test]
    fn axis_parse_round_trips() {
        assert_eq!("x".parse::<PlaneAxis>().unwrap(), PlaneAxis::X);
        assert_eq!("Z".parse::<PlaneAxis>().unwrap(), PlaneAxis::Z);
        assert!("w".parse::<PlaneAxis>().is_err());
    }

    proptest! {
        #[test]
        fn global_phase_shift_leaves_value_unchanged(
            seed in 0u64..1000,
            offset in -10.0f64..10.0,
        ) {
            let (form, phases) = random_instance(seed);
            let shifted: Vec<f64> = phases.iter().map(|p| p + offset).collect();
            let v0 = form.value(&phases);
            let v1 = form.value(&shifted);
            prop_assert!((v0 - v1).abs() <= 1e-9 * v0.abs().max(1.0));
        }

        #[test]
        fn value_is_squared_pressure_magnitude(seed in 0u64..1000) {
            let (form, phases) = random_instance(seed);
            let p = form.pressure(&phases);
            prop_assert!((form.value(&phases) - p.norm_sqr()).abs()
                <= 1e-9 * form.value(&phases).max(1.0));
        }
    }
}
