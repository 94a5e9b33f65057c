//! Perspective-error study.
//!
//! A single point at radius `R` rotates about an axis through the fixation
//! point. For each half field of view `θ_h` the camera is placed at
//! `Z₀ = R / tan θ_h`, so the tracked point swings up to `θ_h` either side of
//! the fixation point. The trajectory is simulated under perspective
//! projection, differentiated, and passed through the single-point estimator.
//! A half-FOV of `0` stands for the orthographic limit.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimator::{estimate_trajectory, EstimatorConfig};
use crate::numdiff::{differentiate, Scheme};
use crate::scene::{simulate, BodyPoint, CameraModel, MotionProfile, RigidScene, SamplingPlan};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub omega: f64,
    pub radius: f64,
    pub phase: f64,
    pub focal_length: f64,
    pub half_fov_deg: Vec<f64>,
    pub dt: f64,
    /// Defaults to one full revolution.
    pub n_samples: Option<usize>,
    pub scheme: Scheme,
    pub estimator: EstimatorConfig,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            omega: 0.5,
            radius: 1.0,
            phase: 0.0,
            focal_length: 1.0,
            half_fov_deg: vec![0.0, 5.0, 10.0, 20.0, 30.0],
            dt: 1e-3,
            n_samples: None,
            scheme: Scheme::Central,
            estimator: EstimatorConfig::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub half_fov_deg: f64,
    /// `None` for the orthographic row.
    pub standoff: Option<f64>,
    pub omega_hat: f64,
    pub relative_error: f64,
}

impl SweepConfig {
    pub fn validate(&self) -> Result<()> {
        if self.omega == 0.0 || !self.omega.is_finite() {
            return Err(Error::invalid(
                "omega",
                "must be non-zero; relative error is undefined for a static body",
            ));
        }
        if !(self.radius > 0.0) {
            return Err(Error::invalid("radius", "must be > 0"));
        }
        if !(self.focal_length > 0.0) {
            return Err(Error::invalid("focal_length", "must be > 0"));
        }
        if self.half_fov_deg.is_empty() {
            return Err(Error::invalid("half_fov_deg", "needs at least one angle"));
        }
        if let Some(a) = self.half_fov_deg.iter().find(|a| !(0.0..90.0).contains(*a)) {
            return Err(Error::invalid("half_fov_deg", format!("{a} is outside [0, 90)")));
        }
        if self.scheme == Scheme::Analytic {
            return Err(Error::invalid("scheme", "sweep needs a finite-difference scheme"));
        }
        self.estimator.validate()?;
        self.plan().validate()
    }

    fn plan(&self) -> SamplingPlan {
        let n = self.n_samples.unwrap_or_else(|| {
            (std::f64::consts::TAU / (self.omega.abs() * self.dt)).ceil() as usize + 1
        });
        SamplingPlan {
            t_start: 0.0,
            dt: self.dt,
            n_samples: n,
        }
    }

    fn row(&self, half_fov_deg: f64) -> Result<SweepRow> {
        let point = BodyPoint::new("tracked", self.radius, self.phase, 0.0)?;
        let motion = MotionProfile::new(self.omega, 0.0);
        let (cam, standoff) = if half_fov_deg == 0.0 {
            (CameraModel::Orthographic, None)
        } else {
            let z0 = self.radius / half_fov_deg.to_radians().tan();
            (CameraModel::perspective(self.focal_length, z0)?, Some(z0))
        };
        let scene = RigidScene::new(vec![point], motion, standoff.unwrap_or(0.0))?;
        let traj = simulate(&scene, &cam, &self.plan())?;
        let series = differentiate(&traj[0], self.scheme)?;
        let est = estimate_trajectory(&series, &self.estimator);
        let omega_hat = est
            .omega
            .ok_or_else(|| Error::invalid("half_fov_deg", format!("no valid samples at {half_fov_deg} deg")))?;
        let truth = self.omega.abs();
        Ok(SweepRow {
            half_fov_deg,
            standoff,
            omega_hat,
            relative_error: (omega_hat - truth).abs() / truth,
        })
    }
}

/// One row per configured half-FOV, in configuration order.
pub fn run_sweep(cfg: &SweepConfig) -> Result<Vec<SweepRow>> {
    cfg.validate()?;
    cfg.half_fov_deg.par_iter().map(|&a| cfg.row(a)).collect()
}

/// Two-column CSV: `half_fov_deg,relative_error`.
pub fn sweep_table(rows: &[SweepRow]) -> String {
    let mut out = String::from("half_fov_deg,relative_error\n");
    for r in rows {
        out.push_str(&format!("{},{:e}\n", r.half_fov_deg, r.relative_error));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn error_grows_with_field_of_view() {
        let cfg = SweepConfig {
            half_fov_deg: vec![0.0, 5.0, 30.0],
            ..Default::default()
        };
        let rows = run_sweep(&cfg).unwrap();
        assert!(rows[0].standoff.is_none());
        assert!(rows[0].relative_error < 1e-4);
        assert!(rows[1].relative_error < rows[2].relative_error);
    }

    #[test]
    fn rejects_bad_configs() {
        let zero = SweepConfig {
            omega: 0.0,
            ..Default::default()
        };
        assert!(matches!(run_sweep(&zero), Err(Error::InvalidParameter { field: "omega", .. })));
        let wide = SweepConfig {
            half_fov_deg: vec![95.0],
            ..Default::default()
        };
        assert!(run_sweep(&wide).is_err());
        // At 50 degrees the point passes behind the camera plane.
        let behind = SweepConfig {
            half_fov_deg: vec![50.0],
            dt: 0.01,
            ..Default::default()
        };
        assert!(matches!(run_sweep(&behind), Err(Error::NonPositiveDepth { .. })));
    }

    #[test]
    fn table_format() {
        let t = sweep_table(&[SweepRow {
            half_fov_deg: 5.0,
            standoff: Some(11.4),
            omega_hat: 0.5,
            relative_error: 0.00125,
        }]);
        assert_eq!(t, "half_fov_deg,relative_error\n5,1.25e-3\n");
    }
}
