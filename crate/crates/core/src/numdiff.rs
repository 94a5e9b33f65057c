//! Finite-difference time derivatives of sampled trajectories.
//!
//! Two stencils are provided. [`Scheme::Backward`] chains backward
//! differences (first derivative from consecutive samples, second derivative
//! from consecutive first derivatives) and accepts non-uniform sampling; it is
//! the scheme behind the rotating-car measurements in
//! [`crate::trackio::table1_fixture`]. [`Scheme::Central`] uses the symmetric
//! three-point stencils and is second-order accurate on uniform grids.
//!
//! Rows whose stencil is incomplete carry `None` rather than an extrapolated
//! value.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative tolerance on interval deviation for the central scheme.
pub const UNIFORM_DT_TOL: f64 = 1e-9;

/// Time-stamped horizontal image coordinates of one feature, relative to the
/// fixation point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrackedTrajectory {
    pub point_id: String,
    /// `(t, y)` pairs, `t` strictly increasing.
    pub samples: Vec<(f64, f64)>,
}

impl TrackedTrajectory {
    /// Builds a trajectory, checking that timestamps strictly increase.
    pub fn new(point_id: impl Into<String>, samples: Vec<(f64, f64)>) -> Result<Self> {
        let traj = TrackedTrajectory {
            point_id: point_id.into(),
            samples,
        };
        traj.check_monotonic()?;
        Ok(traj)
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        self.samples.iter().map(|&(t, _)| t)
    }

    pub fn values(&self) -> impl Iterator<Item = f64> + '_ {
        self.samples.iter().map(|&(_, y)| y)
    }

    fn check_monotonic(&self) -> Result<()> {
        for (i, w) in self.samples.windows(2).enumerate() {
            if !(w[1].0 > w[0].0) {
                return Err(Error::NonMonotonicTime {
                    point_id: self.point_id.clone(),
                    index: i + 1,
                });
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    Backward,
    Central,
    Analytic,
}

impl std::fmt::Display for Scheme {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Scheme::Backward => "backward",
            Scheme::Central => "central",
            Scheme::Analytic => "analytic",
        })
    }
}

impl std::str::FromStr for Scheme {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "backward" => Ok(Scheme::Backward),
            "central" => Ok(Scheme::Central),
            "analytic" => Ok(Scheme::Analytic),
            other => Err(format!("unknown scheme `{other}`")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DerivativeRow {
    pub t: f64,
    pub y: f64,
    pub ydot: Option<f64>,
    pub yddot: Option<f64>,
}

/// Aligned `y`, `ẏ`, `ÿ` samples for one trajectory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DerivativeSeries {
    pub point_id: String,
    pub rows: Vec<DerivativeRow>,
    pub scheme: Scheme,
}

impl DerivativeSeries {
    /// Largest `|y|` over all rows; the reference amplitude for the
    /// near-singular rule.
    pub fn y_scale(&self) -> f64 {
        self.rows.iter().fold(0.0, |m, r| m.max(r.y.abs()))
    }
}

/// Differentiates a trajectory with the given finite-difference scheme.
///
/// `Scheme::Analytic` is not a finite-difference stencil; analytic series come
/// from [`crate::scene::analytic_series`], so requesting it here is an error.
pub fn differentiate(traj: &TrackedTrajectory, scheme: Scheme) -> Result<DerivativeSeries> {
    if traj.len() < 3 {
        return Err(Error::TooFewSamples {
            point_id: traj.point_id.clone(),
            needed: 3,
            got: traj.len(),
        });
    }
    traj.check_monotonic()?;

    let rows = match scheme {
        Scheme::Backward => backward_chain(&traj.samples),
        Scheme::Central => {
            check_uniform(traj)?;
            central(&traj.samples)
        }
        Scheme::Analytic => {
            return Err(Error::invalid(
                "scheme",
                "analytic derivatives require a scene; use scene::analytic_series",
            ))
        }
    };
    Ok(DerivativeSeries {
        point_id: traj.point_id.clone(),
        rows,
        scheme,
    })
}

fn check_uniform(traj: &TrackedTrajectory) -> Result<()> {
    let s = &traj.samples;
    let dt = s[1].0 - s[0].0;
    for (i, w) in s.windows(2).enumerate().skip(1) {
        if ((w[1].0 - w[0].0) - dt).abs() > UNIFORM_DT_TOL * dt {
            return Err(Error::NonUniformSampling {
                point_id: traj.point_id.clone(),
                index: i + 1,
            });
        }
    }
    Ok(())
}

fn backward_chain(s: &[(f64, f64)]) -> Vec<DerivativeRow> {
    let mut rows: Vec<DerivativeRow> = Vec::with_capacity(s.len());
    for (k, &(t, y)) in s.iter().enumerate() {
        let mut row = DerivativeRow {
            t,
            y,
            ydot: None,
            yddot: None,
        };
        if k >= 1 {
            let (tp, yp) = s[k - 1];
            let h = t - tp;
            let ydot = (y - yp) / h;
            row.ydot = Some(ydot);
            if let Some(prev) = rows[k - 1].ydot {
                row.yddot = Some((ydot - prev) / h);
            }
        }
        rows.push(row);
    }
    rows
}

fn central(s: &[(f64, f64)]) -> Vec<DerivativeRow> {
    let n = s.len();
    let dt = s[1].0 - s[0].0;
    let dt2 = dt * dt;
    s.iter()
        .enumerate()
        .map(|(k, &(t, y))| {
            if k == 0 || k + 1 == n {
                return DerivativeRow {
                    t,
                    y,
                    ydot: None,
                    yddot: None,
                };
            }
            let (ym, yp) = (s[k - 1].1, s[k + 1].1);
            DerivativeRow {
                t,
                y,
                ydot: Some((yp - ym) / (2.0 * dt)),
                yddot: Some(((yp - y) - (y - ym)) / dt2),
            }
        })
        .collect()
}
