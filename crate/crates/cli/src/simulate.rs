use std::path::PathBuf;

use clap::{Args, ValueEnum};
use serde::{Deserialize, Serialize};

use rotrate_core::{
    add_noise, scatter_points, simulate, write_tracks, CameraModel, MotionProfile, RigidScene,
    SamplingPlan,
};

use crate::{resolve, write_text, CliResult, ConfigIo, Failure};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CameraKind {
    Orthographic,
    Perspective,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct SimulateArgs {
    /// Rotation rate in rad/s; repeat for several bodies.
    #[arg(long = "omega", default_values_t = vec![0.5])]
    pub omegas: Vec<f64>,
    /// Horizontal offset of the rotation axis from the fixation point.
    #[arg(long, default_value_t = 0.0)]
    pub offset: f64,
    /// Points per body.
    #[arg(long, default_value_t = 1)]
    pub points: usize,
    #[arg(long, default_value_t = 1.0)]
    pub radius_min: f64,
    #[arg(long, default_value_t = 1.0)]
    pub radius_max: f64,
    /// Seed for point radii and phases.
    #[arg(long, default_value_t = 0)]
    pub layout_seed: u64,
    #[arg(long, value_enum, default_value_t = CameraKind::Orthographic)]
    pub camera: CameraKind,
    #[arg(long, default_value_t = 1.0)]
    pub focal_length: f64,
    /// Camera-to-fixation distance; the rotation axis sits at the same depth.
    #[arg(long, default_value_t = 100.0)]
    pub standoff: f64,
    #[arg(long, default_value_t = 0.0)]
    pub t_start: f64,
    #[arg(long, default_value_t = 0.0157)]
    pub dt: f64,
    #[arg(long, default_value_t = 400)]
    pub n_samples: usize,
    /// Standard deviation of additive Gaussian noise on y.
    #[arg(long, default_value_t = 0.0)]
    pub sigma: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Length unit recorded in the track file header.
    #[arg(long)]
    pub units: Option<String>,
    /// Track file path; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Ground-truth sidecar path; defaults to `<out>.truth.json`.
    #[arg(long)]
    pub truth: Option<PathBuf>,
    #[command(flatten)]
    #[serde(skip)]
    pub io: ConfigIo,
}

#[derive(Debug, Serialize)]
struct BodyTruth {
    body: usize,
    omega: f64,
    omega_magnitude: f64,
    center_offset: f64,
    points: Vec<PointTruth>,
}

#[derive(Debug, Serialize)]
struct PointTruth {
    point_id: String,
    radius: f64,
    phase: f64,
}

#[derive(Debug, Serialize)]
struct Truth {
    camera: CameraModel,
    plan: SamplingPlan,
    sigma: f64,
    seed: u64,
    bodies: Vec<BodyTruth>,
}

fn validate(a: &SimulateArgs) -> CliResult<()> {
    let bad = |field: &str, why: String| Err(Failure::input(format!("invalid `{field}`: {why}")));
    if a.omegas.is_empty() {
        return bad("omega", "at least one body is required".into());
    }
    if a.points == 0 {
        return bad("points", "must be at least 1".into());
    }
    if a.n_samples < 3 {
        return bad("n_samples", format!("minimum is 3, got {}", a.n_samples));
    }
    if !(a.dt > 0.0) {
        return bad("dt", format!("must be > 0, got {}", a.dt));
    }
    if !(a.sigma >= 0.0) {
        return bad("sigma", format!("must be >= 0, got {}", a.sigma));
    }
    Ok(())
}

pub fn run(args: SimulateArgs) -> CliResult<()> {
    let io = args.io.clone();
    let args = resolve(args, &io)?;
    validate(&args)?;

    let plan = SamplingPlan::new(args.t_start, args.dt, args.n_samples)?;
    let camera = match args.camera {
        CameraKind::Orthographic => CameraModel::Orthographic,
        CameraKind::Perspective => CameraModel::perspective(args.focal_length, args.standoff)?,
    };
    let multi = args.omegas.len() > 1;

    let mut trajectories = Vec::new();
    let mut bodies = Vec::new();
    for (b, &omega) in args.omegas.iter().enumerate() {
        let prefix = if multi { format!("b{b}p") } else { "p".to_string() };
        let points = scatter_points(
            args.points,
            args.radius_min,
            args.radius_max,
            args.layout_seed.wrapping_add(b as u64),
            &prefix,
        )?;
        bodies.push(BodyTruth {
            body: b,
            omega,
            omega_magnitude: omega.abs(),
            center_offset: args.offset,
            points: points
                .iter()
                .map(|p| PointTruth {
                    point_id: p.label.clone(),
                    radius: p.radius,
                    phase: p.phase,
                })
                .collect(),
        });
        let scene = RigidScene::new(points, MotionProfile::new(omega, args.offset), args.standoff)?;
        trajectories.extend(simulate(&scene, &camera, &plan)?);
    }
    let trajectories = add_noise(&trajectories, args.sigma, args.seed)?;

    write_text(args.out.as_deref(), &write_tracks(&trajectories, args.units.as_deref()))?;

    let truth_path = args.truth.clone().or_else(|| {
        args.out.as_ref().map(|p| {
            let mut s = p.clone().into_os_string();
            s.push(".truth.json");
            PathBuf::from(s)
        })
    });
    if let Some(path) = truth_path {
        let truth = Truth {
            camera,
            plan,
            sigma: args.sigma,
            seed: args.seed,
            bodies,
        };
        let text = serde_json::to_string_pretty(&truth).expect("truth serializes");
        write_text(Some(&path), &format!("{text}\n"))?;
    }
    Ok(())
}
