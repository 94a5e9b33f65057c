use std::fmt::Write as _;
use std::path::PathBuf;

use clap::{Args, ValueEnum};
use serde::{Deserialize, Serialize};

use rotrate_core::trackio::table1_fixture;
use rotrate_core::{
    differentiate, estimate_many, estimate_trajectory, estimate_two_point_trajectory,
    parse_tracks, segment_points, write_estimates, Aggregation, DerivativeRow, DerivativeSeries,
    Error, EstimatorConfig, OmegaEstimate, Scheme, TrackedTrajectory,
};

use crate::{read_text, resolve, write_text, CliResult, ConfigIo, Failure};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Fixture {
    Table1,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FdScheme {
    Backward,
    Central,
}

impl From<FdScheme> for Scheme {
    fn from(s: FdScheme) -> Self {
        match s {
            FdScheme::Backward => Scheme::Backward,
            FdScheme::Central => Scheme::Central,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AggregationArg {
    Mean,
    Median,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct EstimateArgs {
    /// Track file (`t,point_id,y`).
    #[arg(required_unless_present_any = ["fixture", "config"], conflicts_with = "fixture")]
    pub input: Option<PathBuf>,
    /// Use an embedded dataset instead of a track file.
    #[arg(long, value_enum)]
    pub fixture: Option<Fixture>,
    #[arg(long, value_enum, default_value_t = FdScheme::Central)]
    pub scheme: FdScheme,
    /// Near-singular band, relative to max |y| of each point.
    #[arg(long, default_value_t = 0.05)]
    pub eps_rel: f64,
    #[arg(long, value_enum, default_value_t = AggregationArg::Mean)]
    pub aggregation: AggregationArg,
    /// Estimate every other point against this one (unknown rotation center).
    #[arg(long)]
    pub reference: Option<String>,
    /// Estimates document path; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Long-form per-sample CSV table.
    #[arg(long)]
    pub table: Option<PathBuf>,
    #[command(flatten)]
    #[serde(skip)]
    pub io: ConfigIo,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct SegmentArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub estimate: EstimateArgs,
    /// Largest gap in ω (rad/s) between neighbours of one cluster.
    #[arg(long, default_value_t = 0.05)]
    pub tol: f64,
}

impl EstimateArgs {
    fn estimator_config(&self) -> CliResult<EstimatorConfig> {
        let cfg = EstimatorConfig {
            singular_eps_rel: self.eps_rel,
            aggregation: match self.aggregation {
                AggregationArg::Mean => Aggregation::Mean,
                AggregationArg::Median => Aggregation::Median,
            },
        };
        cfg.validate()?;
        Ok(cfg)
    }

    fn load(&self) -> CliResult<Vec<TrackedTrajectory>> {
        match (&self.fixture, &self.input) {
            (Some(Fixture::Table1), _) => Ok(table1_fixture()),
            (None, Some(path)) => {
                let text = read_text(path)?;
                parse_tracks(&text).map_err(|e| Failure::input(format!("{}: {e}", path.display())))
            }
            (None, None) => Err(Failure::input("no input: give a track file or --fixture")),
        }
    }
}

/// Estimates for every point, ordered by point id.
fn estimate_points(args: &EstimateArgs) -> CliResult<Vec<OmegaEstimate>> {
    let cfg = args.estimator_config()?;
    let trajectories = args.load()?;
    let scheme = Scheme::from(args.scheme);

    let mut series = Vec::with_capacity(trajectories.len());
    let mut short = Vec::new();
    for tr in &trajectories {
        match differentiate(tr, scheme) {
            Ok(s) => series.push(s),
            Err(Error::TooFewSamples { .. }) => {
                eprintln!("warning: insufficient samples for `{}`", tr.point_id);
                short.push(tr);
            }
            Err(e) => return Err(e.into()),
        }
    }

    let mut estimates = match &args.reference {
        None => estimate_many(&series, &cfg),
        Some(reference) => {
            let base = series
                .iter()
                .find(|s| &s.point_id == reference)
                .ok_or_else(|| Failure::input(format!("reference point `{reference}` not usable")))?;
            series
                .iter()
                .filter(|s| s.point_id != base.point_id)
                .map(|s| estimate_two_point_trajectory(s, base, &cfg))
                .collect::<Result<Vec<_>, _>>()?
        }
    };
    // Points too short to differentiate still appear, with every sample
    // marked as missing its derivative.
    for tr in short {
        let rows = tr
            .samples
            .iter()
            .map(|&(t, y)| DerivativeRow {
                t,
                y,
                ydot: None,
                yddot: None,
            })
            .collect();
        let s = DerivativeSeries {
            point_id: tr.point_id.clone(),
            rows,
            scheme,
        };
        estimates.push(estimate_trajectory(&s, &cfg));
    }
    estimates.sort_by(|a, b| a.point_id.cmp(&b.point_id));

    if estimates.iter().all(|e| e.n_valid == 0) {
        return Err(if series.is_empty() {
            Failure::no_result("insufficient samples: every point needs at least 3")
        } else {
            Failure::no_result("no valid samples for any point")
        });
    }
    Ok(estimates)
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// `point_id,t,y,ydot,yddot,omega_sq,omega,valid,invalid_reason`, blank for
/// absent values.
pub fn sample_table(estimates: &[OmegaEstimate]) -> String {
    let mut out = String::from("point_id,t,y,ydot,yddot,omega_sq,omega,valid,invalid_reason\n");
    for e in estimates {
        for s in &e.samples {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{},{}",
                e.point_id,
                s.t,
                s.y,
                opt(s.ydot),
                opt(s.yddot),
                opt(s.omega_sq),
                opt(s.omega),
                s.valid,
                s.invalid_reason.as_str()
            );
        }
    }
    out
}

fn emit(args: &EstimateArgs, estimates: &[OmegaEstimate], doc: String) -> CliResult<()> {
    if let Some(path) = &args.table {
        write_text(Some(path), &sample_table(estimates))?;
    }
    write_text(args.out.as_deref(), &doc)
}

pub fn run_estimate(args: EstimateArgs) -> CliResult<()> {
    let io = args.io.clone();
    let args = resolve(args, &io)?;
    let estimates = estimate_points(&args)?;
    let doc = write_estimates(&estimates, None);
    emit(&args, &estimates, doc)
}

pub fn run_segment(args: SegmentArgs) -> CliResult<()> {
    let io = args.estimate.io.clone();
    let args = resolve(args, &io)?;
    if !(args.tol > 0.0) {
        return Err(Failure::input(format!("invalid `tol`: must be > 0, got {}", args.tol)));
    }
    let estimates = estimate_points(&args.estimate)?;
    if estimates.len() < 2 {
        return Err(Failure::input("segment needs at least 2 points"));
    }
    let labeling = segment_points(&estimates, args.tol)?;
    let doc = write_estimates(&estimates, Some(&labeling));
    emit(&args.estimate, &estimates, doc)
}
