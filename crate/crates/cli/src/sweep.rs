use std::path::PathBuf;

use clap::Args;
use serde::{Deserialize, Serialize};

use rotrate_core::sweep::sweep_table;
use rotrate_core::{run_sweep, EstimatorConfig, SweepConfig};

use crate::estimate::FdScheme;
use crate::{resolve, write_text, CliResult, ConfigIo};

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct SweepArgs {
    #[arg(long, default_value_t = 0.5)]
    pub omega: f64,
    #[arg(long, default_value_t = 1.0)]
    pub radius: f64,
    #[arg(long, default_value_t = 0.0)]
    pub phase: f64,
    #[arg(long, default_value_t = 1.0)]
    pub focal_length: f64,
    /// Half field of view in degrees, comma separated; 0 is orthographic.
    #[arg(long, value_delimiter = ',', default_values_t = vec![0.0, 5.0, 10.0, 20.0, 30.0])]
    pub half_fov: Vec<f64>,
    #[arg(long, default_value_t = 1e-3)]
    pub dt: f64,
    /// Defaults to one full revolution.
    #[arg(long)]
    pub n_samples: Option<usize>,
    #[arg(long, value_enum, default_value_t = FdScheme::Central)]
    pub scheme: FdScheme,
    #[arg(long, default_value_t = 0.05)]
    pub eps_rel: f64,
    /// Output table path; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[command(flatten)]
    #[serde(skip)]
    pub io: ConfigIo,
}

pub fn run(args: SweepArgs) -> CliResult<()> {
    let io = args.io.clone();
    let args = resolve(args, &io)?;
    let cfg = SweepConfig {
        omega: args.omega,
        radius: args.radius,
        phase: args.phase,
        focal_length: args.focal_length,
        half_fov_deg: args.half_fov.clone(),
        dt: args.dt,
        n_samples: args.n_samples,
        scheme: args.scheme.into(),
        estimator: EstimatorConfig {
            singular_eps_rel: args.eps_rel,
            ..Default::default()
        },
    };
    let rows = run_sweep(&cfg)?;
    write_text(args.out.as_deref(), &sweep_table(&rows))
}
