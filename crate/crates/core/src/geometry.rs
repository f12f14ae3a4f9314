//! Transducer array geometry and phase vectors.

use std::f64::consts::TAU;

use nalgebra::Vector3;

use crate::error::{Error, Result};

/// Transducer radius of the platform hardware (m).
pub const TRANSDUCER_RADIUS: f64 = 5.0e-3;
/// Transducer power: on-axis pressure at one meter (Pa·m).
pub const TRANSDUCER_POWER: f64 = 6.8;
/// Wavenumber of the 40 kHz carrier in air (1/m).
pub const WAVENUMBER: f64 = 732.7;
/// Default grid pitch: transducer body diameter plus clearance (m).
pub const DEFAULT_PITCH: f64 = 10.5e-3;
/// Height of the manipulation plane above the array (m).
pub const MANIPULATION_PLANE_Z: f64 = 65.0e-3;

/// Positions, orientations, and physical constants of the transducer array.
///
/// All transducers share the radius `r`, power `A`, and wavenumber `k`; each
/// has its own position and unit normal.
#[derive(Debug, Clone, PartialEq)]
pub struct ArrayGeometry {
    positions: Vec<Vector3<f64>>,
    normals: Vec<Vector3<f64>>,
    radius: f64,
    power: f64,
    wavenumber: f64,
}

impl ArrayGeometry {
    /// Builds a geometry from explicit transducer poses.
    ///
    /// Rejects empty arrays, non-unit normals (tolerance 1e-12), and
    /// non-positive physical constants.
    pub fn new(
        positions: Vec<Vector3<f64>>,
        normals: Vec<Vector3<f64>>,
        radius: f64,
        power: f64,
        wavenumber: f64,
    ) -> Result<Self> {
        if positions.is_empty() {
            return Err(Error::Config("array must have at least one transducer".into()));
        }
        if positions.len() != normals.len() {
            return Err(Error::DimensionMismatch {
                expected: positions.len(),
                actual: normals.len(),
            });
        }
        for (i, n) in normals.iter().enumerate() {
            if (n.norm() - 1.0).abs() > 1e-12 {
                return Err(Error::Config(format!(
                    "normal {i} has length {:.17}, expected a unit vector",
                    n.norm()
                )));
            }
        }
        if !(radius > 0.0) || !(power > 0.0) || !(wavenumber > 0.0) {
            return Err(Error::Config(
                "radius, power, and wavenumber must all be positive".into(),
            ));
        }
        Ok(Self {
            positions,
            normals,
            radius,
            power,
            wavenumber,
        })
    }

    /// Planar `rows × cols` grid in the z = 0 plane, centered at the origin,
    /// all transducers facing +z, with the platform's physical constants.
    pub fn grid(rows: usize, cols: usize, pitch: f64) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::Config("grid must have at least one transducer".into()));
        }
        if !(pitch > 0.0) {
            return Err(Error::Config(format!("pitch must be positive, got {pitch}")));
        }
        let mut positions = Vec::with_capacity(rows * cols);
        for row in 0..rows {
            for col in 0..cols {
                let x = (col as f64 - (cols as f64 - 1.0) / 2.0) * pitch;
                let y = (row as f64 - (rows as f64 - 1.0) / 2.0) * pitch;
                positions.push(Vector3::new(x, y, 0.0));
            }
        }
        let normals = vec![Vector3::z(); rows * cols];
        Self::new(
            positions,
            normals,
            TRANSDUCER_RADIUS,
            TRANSDUCER_POWER,
            WAVENUMBER,
        )
    }

    /// The platform's default 8×8 array at the default pitch.
    pub fn default_8x8() -> Self {
        Self::grid(8, 8, DEFAULT_PITCH).expect("default grid parameters are valid")
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn positions(&self) -> &[Vector3<f64>] {
        &self.positions
    }

    pub fn normals(&self) -> &[Vector3<f64>] {
        &self.normals
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn power(&self) -> f64 {
        self.power
    }

    pub fn wavenumber(&self) -> f64 {
        self.wavenumber
    }
}

/// Per-transducer phase delays in radians, stored wrapped to [0, 2π).
///
/// Field evaluation is invariant to wrapping, so the wrapped representative
/// is canonical.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseVector(Vec<f64>);

impl PhaseVector {
    /// Wraps each phase into [0, 2π).
    pub fn new(phases: Vec<f64>) -> Self {
        Self(phases.into_iter().map(wrap_phase).collect())
    }

    /// All-zero phases for `n` transducers.
    pub fn zeros(n: usize) -> Self {
        Self(vec![0.0; n])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    /// Adds `offset` to every phase, re-wrapping. Field magnitudes are
    /// unchanged by this.
    pub fn shifted(&self, offset: f64) -> Self {
        Self::new(self.0.iter().map(|p| p + offset).collect())
    }
}

impl From<Vec<f64>> for PhaseVector {
    fn from(phases: Vec<f64>) -> Self {
        Self::new(phases)
    }
}

impl std::ops::Index<usize> for PhaseVector {
    type Output = f64;

    fn index(&self, index: usize) -> &f64 {
        &self.0[index]
    }
}

/// Wraps an angle into [0, 2π).
pub fn wrap_phase(phase: f64) -> f64 {
    let wrapped = phase.rem_euclid(TAU);
    // rem_euclid can return TAU itself for negative inputs within one ulp of 0
    if wrapped >= TAU {
        wrapped - TAU
    } else {
        wrapped
    }
}
