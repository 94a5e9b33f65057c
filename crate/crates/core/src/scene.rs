//! Fixated rotating bodies, cameras and trajectory synthesis.
//!
//! The body rotates at constant rate `omega` about a vertical axis lying
//! perpendicular to the optical axis. The fixation point sits on the optical
//! axis; the rotation axis is `center_offset` to its side. A body point at
//! cylindrical coordinates `(R, θ₀, h)` is at horizontal position
//! `o + R cos(θ₀ + ωt)` and depth `depth_of_axis + R sin(θ₀ + ωt)`. Only the
//! horizontal coordinate ever reaches the estimator; `h` is carried for
//! bookkeeping.

use std::f64::consts::TAU;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numdiff::{DerivativeRow, DerivativeSeries, Scheme, TrackedTrajectory};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BodyPoint {
    pub label: String,
    pub radius: f64,
    /// Phase at `t = 0`, in `[0, 2π)`.
    pub phase: f64,
    pub height: f64,
}

impl BodyPoint {
    pub fn new(label: impl Into<String>, radius: f64, phase: f64, height: f64) -> Result<Self> {
        if !(radius >= 0.0) || !radius.is_finite() {
            return Err(Error::invalid("radius", format!("must be >= 0, got {radius}")));
        }
        if !phase.is_finite() || !height.is_finite() {
            return Err(Error::invalid("phase", "must be finite"));
        }
        Ok(BodyPoint {
            label: label.into(),
            radius,
            phase: phase.rem_euclid(TAU),
            height,
        })
    }

    /// Rotation angle at time `t`.
    pub fn angle(&self, motion: &MotionProfile, t: f64) -> f64 {
        self.phase + motion.omega * t
    }
}

/// Constant rotation shared by all points of a body.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MotionProfile {
    /// Signed rate in rad/s, positive anticlockwise.
    pub omega: f64,
    /// Horizontal distance from the fixation point to the rotation axis.
    pub center_offset: f64,
}

impl MotionProfile {
    pub fn new(omega: f64, center_offset: f64) -> Self {
        MotionProfile {
            omega,
            center_offset,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum CameraModel {
    Orthographic,
    /// Pinhole looking at the fixation point, which lies `standoff` away on
    /// the optical axis.
    Perspective { focal_length: f64, standoff: f64 },
}

impl CameraModel {
    pub fn perspective(focal_length: f64, standoff: f64) -> Result<Self> {
        if !(focal_length > 0.0) {
            return Err(Error::invalid("focal_length", "must be > 0"));
        }
        if !(standoff > 0.0) {
            return Err(Error::invalid("standoff", "must be > 0"));
        }
        Ok(CameraModel::Perspective {
            focal_length,
            standoff,
        })
    }

    /// Image units per world unit at the fixation depth: `1` for orthographic,
    /// `f / Z₀` for perspective.
    pub fn scale(&self) -> f64 {
        match *self {
            CameraModel::Orthographic => 1.0,
            CameraModel::Perspective {
                focal_length,
                standoff,
            } => focal_length / standoff,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RigidScene {
    pub points: Vec<BodyPoint>,
    pub motion: MotionProfile,
    /// Camera-to-axis distance; only perspective projection reads it.
    pub depth_of_axis: f64,
}

impl RigidScene {
    pub fn new(points: Vec<BodyPoint>, motion: MotionProfile, depth_of_axis: f64) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::invalid("points", "scene needs at least one point"));
        }
        Ok(RigidScene {
            points,
            motion,
            depth_of_axis,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SamplingPlan {
    pub t_start: f64,
    pub dt: f64,
    pub n_samples: usize,
}

impl SamplingPlan {
    pub fn new(t_start: f64, dt: f64, n_samples: usize) -> Result<Self> {
        let plan = SamplingPlan {
            t_start,
            dt,
            n_samples,
        };
        plan.validate()?;
        Ok(plan)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return Err(Error::invalid("dt", format!("must be > 0, got {}", self.dt)));
        }
        if self.n_samples < 3 {
            return Err(Error::invalid(
                "n_samples",
                format!("minimum is 3, got {}", self.n_samples),
            ));
        }
        if !self.t_start.is_finite() {
            return Err(Error::invalid("t_start", "must be finite"));
        }
        Ok(())
    }

    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n_samples).map(move |k| self.t_start + k as f64 * self.dt)
    }
}

/// World horizontal position `o + R cos(θ₀ + ωt)`.
pub fn horizontal_position(p: &BodyPoint, m: &MotionProfile, t: f64) -> f64 {
    m.center_offset + p.radius * p.angle(m, t).cos()
}

/// Exact `(y, ẏ, ÿ)` of the orthographic trajectory at time `t`.
pub fn analytic_derivatives(p: &BodyPoint, m: &MotionProfile, t: f64) -> (f64, f64, f64) {
    let (s, c) = p.angle(m, t).sin_cos();
    let w = m.omega;
    (
        m.center_offset + p.radius * c,
        -p.radius * w * s,
        -p.radius * w * w * c,
    )
}

fn depth(p: &BodyPoint, scene: &RigidScene, t: f64) -> f64 {
    scene.depth_of_axis + p.radius * p.angle(&scene.motion, t).sin()
}

/// Projects a horizontal world coordinate (relative to the fixation point) to
/// the image.
pub fn project(cam: &CameraModel, world_horizontal: f64, world_depth: f64) -> Result<f64> {
    match *cam {
        CameraModel::Orthographic => Ok(world_horizontal),
        CameraModel::Perspective { focal_length, .. } => {
            if !(world_depth > 0.0) {
                return Err(Error::NonPositiveDepth { depth: world_depth });
            }
            Ok(focal_length * world_horizontal / world_depth)
        }
    }
}

/// One trajectory per scene point, sampled on `plan`.
pub fn simulate(
    scene: &RigidScene,
    cam: &CameraModel,
    plan: &SamplingPlan,
) -> Result<Vec<TrackedTrajectory>> {
    plan.validate()?;
    scene
        .points
        .iter()
        .map(|p| {
            let samples = plan
                .times()
                .map(|t| {
                    let x = horizontal_position(p, &scene.motion, t);
                    project(cam, x, depth(p, scene, t)).map(|y| (t, y))
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(TrackedTrajectory {
                point_id: p.label.clone(),
                samples,
            })
        })
        .collect()
}

/// Orthographic series with closed-form derivatives on every row.
pub fn analytic_series(p: &BodyPoint, m: &MotionProfile, plan: &SamplingPlan) -> DerivativeSeries {
    let rows = plan
        .times()
        .map(|t| {
            let (y, ydot, yddot) = analytic_derivatives(p, m, t);
            DerivativeRow {
                t,
                y,
                ydot: Some(ydot),
                yddot: Some(yddot),
            }
        })
        .collect();
    DerivativeSeries {
        point_id: p.label.clone(),
        rows,
        scheme: Scheme::Analytic,
    }
}

/// `n` points with radius uniform in `[r_min, r_max]` and phase uniform in
/// `[0, 2π)`, labelled `{prefix}00`, `{prefix}01`, ...
pub fn scatter_points(
    n: usize,
    r_min: f64,
    r_max: f64,
    seed: u64,
    prefix: &str,
) -> Result<Vec<BodyPoint>> {
    if !(r_min >= 0.0 && r_max >= r_min && r_max.is_finite()) {
        return Err(Error::invalid(
            "radius",
            format!("need 0 <= r_min <= r_max, got [{r_min}, {r_max}]"),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|k| {
            let r = rng.random_range(r_min..=r_max);
            let phase = rng.random_range(0.0..TAU);
            BodyPoint::new(format!("{prefix}{k:02}"), r, phase, 0.0)
        })
        .collect()
}

/// Adds i.i.d. zero-mean Gaussian noise of standard deviation `sigma` to every
/// `y`. Deterministic for a fixed seed.
pub fn add_noise(
    trajs: &[TrackedTrajectory],
    sigma: f64,
    seed: u64,
) -> Result<Vec<TrackedTrajectory>> {
    if !(sigma >= 0.0) {
        return Err(Error::NegativeSigma(sigma));
    }
    if sigma == 0.0 {
        return Ok(trajs.to_vec());
    }
    let normal = Normal::new(0.0, sigma).map_err(|e| Error::invalid("sigma", e.to_string()))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok(trajs
        .iter()
        .map(|tr| TrackedTrajectory {
            point_id: tr.point_id.clone(),
            samples: tr
                .samples
                .iter()
                .map(|&(t, y)| (t, y + normal.sample(&mut rng)))
                .collect(),
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

    fn pt(r: f64, phase: f64) -> BodyPoint {
        BodyPoint::new("p", r, phase, 0.0).unwrap()
    }

    #[test]
    fn horizontal_position_examples() {
        assert_eq!(horizontal_position(&pt(2.0, 0.0), &MotionProfile::new(3.0, 0.0), 0.0), 2.0);
        assert_abs_diff_eq!(
            horizontal_position(&pt(2.0, FRAC_PI_2), &MotionProfile::new(0.5, 0.0), 0.0),
            0.0,
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(
            horizontal_position(&pt(2.0, 0.0), &MotionProfile::new(0.5, 1.0), PI),
            1.0,
            epsilon = 1e-15
        );
    }

    #[test]
    fn analytic_derivative_examples() {
        let (y, yd, ydd) = analytic_derivatives(&pt(1.0, 0.0), &MotionProfile::new(1.0, 0.0), 0.0);
        assert_eq!((y, yd, ydd), (1.0, 0.0, -1.0));
        let (y, yd, ydd) = analytic_derivatives(&pt(2.0, 0.0), &MotionProfile::new(0.5, 1.0), 0.0);
        assert_eq!((y, yd, ydd), (3.0, 0.0, -0.5));
        let (y, yd, ydd) =
            analytic_derivatives(&pt(1.0, FRAC_PI_2), &MotionProfile::new(2.0, 0.0), 0.0);
        assert_abs_diff_eq!(y, 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(yd, -2.0, epsilon = 1e-15);
        assert_abs_diff_eq!(ydd, 0.0, epsilon = 1e-15);
    }

    #[test]
    fn analytic_satisfies_rotation_ode() {
        let m = MotionProfile::new(-0.73, 1.4);
        for (r, ph) in [(0.5, 0.1), (3.0, 2.0), (4.2, 5.9)] {
            let p = pt(r, ph);
            for k in 0..100 {
                let (y, _, ydd) = analytic_derivatives(&p, &m, k as f64 * 0.05);
                assert!((ydd + (y - m.center_offset) * m.omega * m.omega).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn project_examples() {
        assert_eq!(project(&CameraModel::Orthographic, 2.28, -7.0).unwrap(), 2.28);
        let cam1 = CameraModel::perspective(1.0, 5.0).unwrap();
        assert_eq!(project(&cam1, 0.0, 5.0).unwrap(), 0.0);
        let cam2 = CameraModel::perspective(2.0, 4.0).unwrap();
        assert_eq!(project(&cam2, 1.0, 4.0).unwrap(), 0.5);
        assert!(matches!(project(&cam2, 1.0, 0.0), Err(Error::NonPositiveDepth { .. })));
        assert!(matches!(project(&cam2, 1.0, -1.0), Err(Error::NonPositiveDepth { .. })));
    }

    #[test]
    fn simulate_cosine_samples() {
        let scene = RigidScene::new(vec![pt(1.0, 0.0)], MotionProfile::new(1.0, 0.0), 0.0).unwrap();
        let plan = SamplingPlan::new(0.0, FRAC_PI_2, 3).unwrap();
        let tr = simulate(&scene, &CameraModel::Orthographic, &plan).unwrap();
        assert_eq!(tr.len(), 1);
        let ys: Vec<f64> = tr[0].values().collect();
        assert_abs_diff_eq!(ys[0], 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(ys[1], 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(ys[2], -1.0, epsilon = 1e-15);
    }

    #[test]
    fn simulate_with_offset() {
        let scene = RigidScene::new(vec![pt(2.0, 0.0)], MotionProfile::new(0.5, 1.0), 0.0).unwrap();
        let plan = SamplingPlan::new(0.0, 0.01, 3).unwrap();
        let tr = simulate(&scene, &CameraModel::Orthographic, &plan).unwrap();
        assert_eq!(tr[0].samples[0], (0.0, 3.0));
        assert_abs_diff_eq!(tr[0].samples[1].1, 2.999975000052083, epsilon = 1e-15);
        assert_abs_diff_eq!(tr[0].samples[2].1, 2.999900000833331, epsilon = 1e-15);
        assert_abs_diff_eq!(tr[0].samples[2].0, 0.02, epsilon = 1e-15);
    }

    #[test]
    fn simulate_is_deterministic() {
        let scene = RigidScene::new(
            vec![pt(1.3, 0.4), pt(2.2, 4.0)],
            MotionProfile::new(0.9, 0.2),
            30.0,
        )
        .unwrap();
        let cam = CameraModel::perspective(1.5, 30.0).unwrap();
        let plan = SamplingPlan::new(0.5, 0.013, 200).unwrap();
        assert_eq!(simulate(&scene, &cam, &plan).unwrap(), simulate(&scene, &cam, &plan).unwrap());
    }

    #[test]
    fn simulate_rejects_points_behind_camera() {
        let scene = RigidScene::new(vec![pt(5.0, 0.0)], MotionProfile::new(1.0, 0.0), 2.0).unwrap();
        let cam = CameraModel::perspective(1.0, 2.0).unwrap();
        let plan = SamplingPlan::new(0.0, 0.1, 100).unwrap();
        assert!(matches!(simulate(&scene, &cam, &plan), Err(Error::NonPositiveDepth { .. })));
    }

    #[test]
    fn perspective_converges_to_scaled_orthographic() {
        let points = vec![pt(1.0, 0.3), pt(0.5, 2.0), pt(0.8, FRAC_PI_4)];
        let diameter = 2.0;
        let plan = SamplingPlan::new(0.0, 0.05, 200).unwrap();
        let ratio = 0.2;
        let mut prev = f64::INFINITY;
        for mult in [10.0, 100.0, 1000.0] {
            let z0 = mult * diameter;
            let scene = RigidScene::new(points.clone(), MotionProfile::new(0.7, 0.0), z0).unwrap();
            let cam = CameraModel::perspective(ratio * z0, z0).unwrap();
            let persp = simulate(&scene, &cam, &plan).unwrap();
            let ortho = simulate(&scene, &CameraModel::Orthographic, &plan).unwrap();
            let dev = persp
                .iter()
                .zip(&ortho)
                .flat_map(|(a, b)| a.values().zip(b.values()).collect::<Vec<_>>())
                .map(|(a, b)| (a / cam.scale() - b).abs())
                .fold(0.0, f64::max);
            assert!(dev < prev, "deviation {dev} not below {prev}");
            prev = dev;
        }
    }

    #[test]
    fn noise_behaviour() {
        let scene = RigidScene::new(vec![pt(1.0, 0.0)], MotionProfile::new(1.0, 0.0), 0.0).unwrap();
        let tr = simulate(&scene, &CameraModel::Orthographic, &SamplingPlan::new(0.0, 0.1, 50).unwrap())
            .unwrap();
        assert_eq!(add_noise(&tr, 0.0, 7).unwrap(), tr);
        assert_eq!(add_noise(&tr, 0.01, 7).unwrap(), add_noise(&tr, 0.01, 7).unwrap());
        assert_ne!(add_noise(&tr, 0.01, 7).unwrap(), add_noise(&tr, 0.01, 8).unwrap());
        assert_eq!(add_noise(&tr, -1.0, 7), Err(Error::NegativeSigma(-1.0)));
    }

    #[test]
    fn noise_standard_deviation() {
        let zeros = TrackedTrajectory {
            point_id: "z".into(),
            samples: (0..1_000_000).map(|k| (k as f64, 0.0)).collect(),
        };
        let noisy = add_noise(&[zeros], 0.5, 3).unwrap();
        let n = noisy[0].len() as f64;
        let mean = noisy[0].values().sum::<f64>() / n;
        let var = noisy[0].values().map(|y| (y - mean).powi(2)).sum::<f64>() / (n - 1.0);
        assert!((var.sqrt() - 0.5).abs() < 0.005);
    }

    #[test]
    fn body_point_validation() {
        assert!(BodyPoint::new("x", -1.0, 0.0, 0.0).is_err());
        let p = BodyPoint::new("x", 1.0, -FRAC_PI_2, 0.0).unwrap();
        assert_abs_diff_eq!(p.phase, 1.5 * PI, epsilon = 1e-15);
        assert!(SamplingPlan::new(0.0, 0.1, 2).is_err());
        assert!(SamplingPlan::new(0.0, 0.0, 5).is_err());
        assert!(RigidScene::new(vec![], MotionProfile::new(1.0, 0.0), 0.0).is_err());
    }
}
