//! Per-axis Kalman filter on the discretized plant model, with the state
//! augmented by d delayed position slots so that a d-periods-late
//! measurement still yields a current-time estimate.
//!
//! Augmented state: [x, v, z_1, …, z_d] with z_i the position i periods ago.
//! The measurement reads z_d (or x itself when d = 0).

use nalgebra::{DMatrix, DVector, Matrix2, Vector2};

use crate::error::{Error, Result};

/// Filter tuning. `process_noise` is the 2×2 covariance added to the
/// (position, velocity) block per period.
#[derive(Debug, Clone, PartialEq)]
pub struct EstimatorConfig {
    /// Measurement delay in control periods, ≥ 0.
    pub delay: usize,
    pub process_noise: Matrix2<f64>,
    /// Measurement noise variance (m²), > 0.
    pub measurement_variance: f64,
    /// Initial variance for every augmented state (m² or (m/s)²).
    pub initial_variance: f64,
}

impl EstimatorConfig {
    /// Builds the process-noise block from a white-acceleration spectral
    /// density `accel_psd` (m²/s³) integrated over one period:
    /// Q = q·[[dt³/3, dt²/2], [dt²/2, dt]].
    pub fn from_acceleration_psd(
        delay: usize,
        accel_psd: f64,
        dt: f64,
        measurement_std: f64,
        initial_variance: f64,
    ) -> Self {
        let q = accel_psd;
        let process_noise = Matrix2::new(
            q * dt.powi(3) / 3.0,
            q * dt * dt / 2.0,
            q * dt * dt / 2.0,
            q * dt,
        );
        Self {
            delay,
            process_noise,
            measurement_variance: (measurement_std * measurement_std).max(1e-12),
            initial_variance,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let q = &self.process_noise;
        if (q[(0, 1)] - q[(1, 0)]).abs() > 1e-15 * q.abs().max().max(1.0) {
            return Err(Error::Config("process noise must be symmetric".into()));
        }
        let det = q[(0, 0)] * q[(1, 1)] - q[(0, 1)] * q[(1, 0)];
        if q[(0, 0)] < 0.0 || q[(1, 1)] < 0.0 || det < -1e-24 {
            return Err(Error::Config("process noise must be PSD".into()));
        }
        if !(self.measurement_variance > 0.0) {
            return Err(Error::Config(format!(
                "measurement variance must be > 0, got {}",
                self.measurement_variance
            )));
        }
        if !(self.initial_variance >= 0.0) {
            return Err(Error::Config(format!(
                "initial variance must be ≥ 0, got {}",
                self.initial_variance
            )));
        }
        Ok(())
    }
}

/// One axis' augmented-state Kalman filter.
#[derive(Debug, Clone, PartialEq)]
pub struct AxisEstimator {
    /// Augmented transition: plant block top-left, delay chain below.
    f: DMatrix<f64>,
    /// Augmented input column (force → position/velocity only).
    b: DVector<f64>,
    /// Augmented process noise (plant block only; delay slots are exact copies).
    q: DMatrix<f64>,
    r: f64,
    /// Index of the state the measurement reads.
    obs: usize,
    mean: DVector<f64>,
    cov: DMatrix<f64>,
}

impl AxisEstimator {
    /// `plant_a`, `plant_b`: one-period ZOH discretization of the axis model
    /// (see `plant::discretize_axis_model`). The filter starts at rest at
    /// `initial_position` with every delay slot equal to it.
    pub fn new(
        config: &EstimatorConfig,
        plant_a: &Matrix2<f64>,
        plant_b: &Vector2<f64>,
        initial_position: f64,
    ) -> Result<Self> {
        config.validate()?;
        let d = config.delay;
        let n = 2 + d;

        let mut f = DMatrix::zeros(n, n);
        f[(0, 0)] = plant_a[(0, 0)];
        f[(0, 1)] = plant_a[(0, 1)];
        f[(1, 0)] = plant_a[(1, 0)];
        f[(1, 1)] = plant_a[(1, 1)];
        if d > 0 {
            f[(2, 0)] = 1.0; // newest slot captures the pre-transition position
            for i in 3..n {
                f[(i, i - 1)] = 1.0;
            }
        }

        let mut b = DVector::zeros(n);
        b[0] = plant_b.x;
        b[1] = plant_b.y;

        let mut q = DMatrix::zeros(n, n);
        q[(0, 0)] = config.process_noise[(0, 0)];
        q[(0, 1)] = config.process_noise[(0, 1)];
        q[(1, 0)] = config.process_noise[(1, 0)];
        q[(1, 1)] = config.process_noise[(1, 1)];

        let mut mean = DVector::from_element(n, initial_position);
        mean[1] = 0.0;

        Ok(Self {
            f,
            b,
            q,
            r: config.measurement_variance,
            obs: if d > 0 { n - 1 } else { 0 },
            mean,
            cov: DMatrix::identity(n, n) * config.initial_variance,
        })
    }

    pub fn len(&self) -> usize {
        self.mean.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Current-time position estimate (m).
    pub fn position(&self) -> f64 {
        self.mean[0]
    }

    /// Current-time velocity estimate (m/s).
    pub fn velocity(&self) -> f64 {
        self.mean[1]
    }

    /// Estimate of what the sensor is about to report (the oldest slot).
    pub fn delayed_position(&self) -> f64 {
        self.mean[self.obs]
    }

    pub fn mean(&self) -> &DVector<f64> {
        &self.mean
    }

    pub fn covariance(&self) -> &DMatrix<f64> {
        &self.cov
    }

    /// Propagates one period under the commanded `force` (N): plant block
    /// advances, the delay chain shifts the position history down one slot.
    pub fn predict(&mut self, force: f64) {
        self.mean = &self.f * &self.mean + &self.b * force;
        self.cov = &self.f * &self.cov * self.f.transpose() + &self.q;
        self.symmetrize();
    }

    /// Joseph-form measurement update against the delayed-output slot.
    pub fn update(&mut self, measurement: f64) -> Result<()> {
        if !measurement.is_finite() {
            return Err(Error::NonFiniteMeasurement(measurement));
        }
        let n = self.len();
        let obs = self.obs;
        let innovation = measurement - self.mean[obs];
        let s = self.cov[(obs, obs)] + self.r;
        let gain: DVector<f64> = self.cov.column(obs) / s;

        self.mean += &gain * innovation;

        let mut ikh = DMatrix::identity(n, n);
        for i in 0..n {
            ikh[(i, obs)] -= gain[i];
        }
        self.cov = &ikh * &self.cov * ikh.transpose() + (&gain * gain.transpose()) * self.r;
        self.symmetrize();
        Ok(())
    }

    fn symmetrize(&mut self) {
        let t = self.cov.transpose();
        self.cov = (&self.cov + t) / 2.0;
    }
}
