//! Rotation-rate estimation for a rigid body viewed under fixation.
//!
//! A camera keeps one point of a rotating body at a fixed image location.
//! Under orthographic projection every other body point then traces a
//! horizontal cosine `y(t) = o + R cos(θ₀ + ωt)`, and the rotation rate
//! follows from a single tracked point as `ω² = −ÿ / y`. This crate provides
//!
//! - [`scene`]: synthetic bodies, cameras and trajectory simulation,
//! - [`numdiff`]: finite-difference derivatives of sampled trajectories,
//! - [`estimator`]: the single- and two-point closed-form estimators plus
//!   validity rules and aggregation,
//! - [`segmentation`]: grouping points into bodies by agreement of ω,
//! - [`trackio`]: the track CSV format, the estimates document and the
//!   embedded rotating-car measurements,
//! - [`sweep`]: perspective-error study over the half field of view.

pub mod error;
pub mod estimator;
pub mod numdiff;
pub mod scene;
pub mod segmentation;
pub mod sweep;
pub mod trackio;

pub use error::{Error, Result};
pub use estimator::{
    estimate_many, estimate_trajectory, estimate_two_point_trajectory, omega_sq_single,
    omega_sq_two_point, recover_center_offset, Aggregation, Direction, EstimatorConfig,
    InvalidReason, OmegaEstimate, OmegaSample,
};
pub use numdiff::{differentiate, DerivativeRow, DerivativeSeries, Scheme, TrackedTrajectory};
pub use scene::{
    add_noise, analytic_derivatives, analytic_series, horizontal_position, project, scatter_points, simulate,
    BodyPoint, CameraModel, MotionProfile, RigidScene, SamplingPlan,
};
pub use segmentation::{segment_points, Cluster, SegmentLabeling};
pub use sweep::{run_sweep, SweepConfig, SweepRow};
pub use trackio::{
    parse_estimates, parse_track_file, parse_tracks, table1_fixture, write_estimates,
    write_tracks, EstimatesDocument, TrackFile,
};
