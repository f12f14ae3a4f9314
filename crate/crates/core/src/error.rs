//! Crate-wide error type.

use std::path::PathBuf;

/// Errors surfaced by field evaluation, the focus solver, the plant, the
/// estimator, and the simulation harness.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// Evaluation point coincides with a transducer face.
    #[error("evaluation point is {distance:.3e} m from transducer {index}; the field model is undefined on a transducer face")]
    DegeneratePoint { index: usize, distance: f64 },

    /// A grid specification produced no sample points.
    #[error("grid specification has no points: {0}")]
    EmptyGrid(String),

    /// A phase vector or gradient buffer does not match the geometry size.
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    /// The requested focal pressure exceeds what the array can generate.
    #[error("target pressure {target:.1} Pa exceeds the alignment bound {bound:.1} Pa at the focus point")]
    UnachievableTarget { target: f64, bound: f64 },

    /// Every restart exhausted its iteration budget above tolerance.
    #[error("focus solver did not converge: best residual {best_residual:.3e} after {restarts} restart(s) of {max_iterations} iterations")]
    NonConvergence {
        restarts: usize,
        max_iterations: usize,
        best_residual: f64,
    },

    /// The ball left the manipulation area (plus guard band).
    #[error("ball at ({x:.4}, {y:.4}) m left the manipulation area (limit {limit:.4} m)")]
    OutOfArea { x: f64, y: f64, limit: f64 },

    /// The estimator was fed a NaN or infinite measurement.
    #[error("non-finite measurement: {0}")]
    NonFiniteMeasurement(f64),

    /// Invalid configuration or constructor arguments.
    #[error("invalid configuration: {0}")]
    Config(String),

    /// Filesystem failure, with the offending path.
    #[error("I/O error at {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Wraps an I/O error with the path it happened on.
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
