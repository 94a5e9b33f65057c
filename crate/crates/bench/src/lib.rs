//! Shared inputs for the criterion benchmarks.

use rotrate_core::{
    scatter_points, simulate, CameraModel, MotionProfile, RigidScene, SamplingPlan,
    TrackedTrajectory,
};

/// `n_points` orthographic trajectories of `n_samples` each, ω = 0.5 rad/s.
pub fn orthographic_tracks(n_points: usize, n_samples: usize) -> Vec<TrackedTrajectory> {
    let points = scatter_points(n_points, 0.5, 5.0, 7, "p").expect("valid radii");
    let scene = RigidScene::new(points, MotionProfile::new(0.5, 0.0), 0.0).expect("nonempty");
    let plan = SamplingPlan::new(0.0, 1e-3, n_samples).expect("valid plan");
    simulate(&scene, &CameraModel::Orthographic, &plan).expect("orthographic never fails")
}
