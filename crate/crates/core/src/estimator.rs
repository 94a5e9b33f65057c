//! Closed-form rotation-rate estimators.
//!
//! For a body point tracked relative to a fixation point on the rotation axis,
//! the orthographic trajectory obeys `ÿ + y ω² = 0`, so every sample yields
//! `ω² = −ÿ / y`. When the axis sits at an unknown offset `o` from the
//! fixation point, two tracked points give `ω² = −(ÿ₁ − ÿ₂) / (y₁ − y₂)` and
//! `o = y₁ + ÿ₁ / ω²`.
//!
//! Samples are screened before aggregation: a missing second derivative, a
//! displacement inside the near-singular band around zero, or a negative `ω²`
//! each mark the sample invalid. Only the magnitude of ω is recoverable.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numdiff::{DerivativeRow, DerivativeSeries};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Aggregation {
    #[default]
    Mean,
    Median,
}

impl std::str::FromStr for Aggregation {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "mean" => Ok(Aggregation::Mean),
            "median" => Ok(Aggregation::Median),
            other => Err(format!("unknown aggregation `{other}`")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EstimatorConfig {
    /// Samples with `|y| < singular_eps_rel * max|y|` are near-singular.
    pub singular_eps_rel: f64,
    pub aggregation: Aggregation,
}

impl Default for EstimatorConfig {
    fn default() -> Self {
        EstimatorConfig {
            singular_eps_rel: 0.05,
            aggregation: Aggregation::Mean,
        }
    }
}

impl EstimatorConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..1.0).contains(&self.singular_eps_rel) {
            return Err(Error::invalid(
                "singular_eps_rel",
                format!("must lie in [0, 1), got {}", self.singular_eps_rel),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InvalidReason {
    None,
    NegativeOmegaSq,
    NearSingular,
    MissingDerivative,
}

impl InvalidReason {
    pub fn as_str(&self) -> &'static str {
        match self {
            InvalidReason::None => "none",
            InvalidReason::NegativeOmegaSq => "negative_omega_sq",
            InvalidReason::NearSingular => "near_singular",
            InvalidReason::MissingDerivative => "missing_derivative",
        }
    }
}

/// Sense of rotation. The estimator only recovers ω², so this is always
/// `Unknown`; it is carried so outputs never suggest a signed rate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    #[default]
    Unknown,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OmegaSample {
    pub t: f64,
    /// Effective displacement (`y`, or `y₁ − y₂` for two-point estimates).
    pub y: f64,
    pub ydot: Option<f64>,
    pub yddot: Option<f64>,
    /// Raw signed `−ÿ / y`; absent when `ÿ` is missing or `y` is exactly zero.
    pub omega_sq: Option<f64>,
    /// `√omega_sq`, present iff `valid`.
    pub omega: Option<f64>,
    pub valid: bool,
    pub invalid_reason: InvalidReason,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OmegaEstimate {
    pub point_id: String,
    pub samples: Vec<OmegaSample>,
    pub n_valid: usize,
    pub mean_omega: Option<f64>,
    pub median_omega: Option<f64>,
    pub std_omega: Option<f64>,
    /// Headline value chosen by [`EstimatorConfig::aggregation`].
    pub omega: Option<f64>,
    pub direction: Direction,
    /// Mean recovered rotation-axis offset; two-point estimates only.
    pub center_offset: Option<f64>,
}

/// `ω² = −ÿ / y`.
pub fn omega_sq_single(y: f64, yddot: f64) -> Result<f64> {
    if y == 0.0 {
        return Err(Error::ZeroDisplacement);
    }
    // `+ 0.0` turns a -0.0 (static point) into 0.0.
    Ok(-yddot / y + 0.0)
}

/// `ω² = −(ÿ₁ − ÿ₂) / (y₁ − y₂)`; the single-point formula on the difference
/// signal.
pub fn omega_sq_two_point(y1: f64, yddot1: f64, y2: f64, yddot2: f64) -> Result<f64> {
    if y1 == y2 {
        return Err(Error::CoincidentDisplacements);
    }
    Ok(-(yddot1 - yddot2) / (y1 - y2) + 0.0)
}

/// Rotation-axis position `o = y + ÿ / ω²` in the frame of `y`.
pub fn recover_center_offset(y: f64, yddot: f64, omega_sq: f64) -> Result<f64> {
    if !(omega_sq > 0.0) {
        return Err(Error::NonPositiveOmegaSq(omega_sq));
    }
    Ok(y + yddot / omega_sq)
}

/// Applies the validity rules to one sample. Never fails.
///
/// Precedence: missing derivative, then near-singular, then negative ω².
/// An exactly-zero displacement is always near-singular.
pub fn classify_sample(
    t: f64,
    y: f64,
    yddot: Option<f64>,
    cfg: &EstimatorConfig,
    y_scale: f64,
) -> OmegaSample {
    let omega_sq = yddot.and_then(|ydd| omega_sq_single(y, ydd).ok());
    let mut sample = OmegaSample {
        t,
        y,
        ydot: None,
        yddot,
        omega_sq,
        omega: None,
        valid: false,
        invalid_reason: InvalidReason::None,
    };
    sample.invalid_reason = match (yddot, omega_sq) {
        (None, _) => InvalidReason::MissingDerivative,
        _ if y == 0.0 || y.abs() < cfg.singular_eps_rel * y_scale => InvalidReason::NearSingular,
        (_, Some(w2)) if w2 < 0.0 => InvalidReason::NegativeOmegaSq,
        (_, Some(w2)) if w2.is_nan() => InvalidReason::MissingDerivative,
        (_, Some(w2)) => {
            sample.valid = true;
            sample.omega = Some(w2.sqrt());
            InvalidReason::None
        }
        (_, None) => InvalidReason::NearSingular,
    };
    sample
}

/// Estimates ω for one single-point series (fixation on the rotation axis).
pub fn estimate_trajectory(series: &DerivativeSeries, cfg: &EstimatorConfig) -> OmegaEstimate {
    let y_scale = series.y_scale();
    let samples = series
        .rows
        .iter()
        .map(|r| OmegaSample {
            ydot: r.ydot,
            ..classify_sample(r.t, r.y, r.yddot, cfg, y_scale)
        })
        .collect();
    summarize(series.point_id.clone(), samples, cfg)
}

/// Estimates every series, in parallel, preserving input order.
pub fn estimate_many(series: &[DerivativeSeries], cfg: &EstimatorConfig) -> Vec<OmegaEstimate> {
    series
        .par_iter()
        .map(|s| estimate_trajectory(s, cfg))
        .collect()
}

/// Two-point estimate for an unknown rotation-axis offset.
///
/// `series1` and `series2` must share timestamps exactly. The per-sample
/// effective displacement is `y₁ − y₂`, and the reported `center_offset` is the
/// mean of `y₁ + ÿ₁ / ω²` over valid samples with `ω² > 0`.
pub fn estimate_two_point_trajectory(
    series1: &DerivativeSeries,
    series2: &DerivativeSeries,
    cfg: &EstimatorConfig,
) -> Result<OmegaEstimate> {
    let mismatch = || Error::TimestampMismatch {
        first: series1.point_id.clone(),
        second: series2.point_id.clone(),
    };
    if series1.rows.len() != series2.rows.len() {
        return Err(mismatch());
    }
    if series1
        .rows
        .iter()
        .zip(&series2.rows)
        .any(|(a, b)| a.t != b.t)
    {
        return Err(mismatch());
    }

    let diff: Vec<DerivativeRow> = series1
        .rows
        .iter()
        .zip(&series2.rows)
        .map(|(a, b)| DerivativeRow {
            t: a.t,
            y: a.y - b.y,
            ydot: a.ydot.zip(b.ydot).map(|(p, q)| p - q),
            yddot: a.yddot.zip(b.yddot).map(|(p, q)| p - q),
        })
        .collect();
    let y_scale = diff.iter().fold(0.0f64, |m, r| m.max(r.y.abs()));

    let mut samples = Vec::with_capacity(diff.len());
    let mut offsets = Vec::new();
    for (d, a) in diff.iter().zip(&series1.rows) {
        // −Δÿ/Δy on the difference row is the two-point formula evaluated
        // with the same operations, so the values agree bit for bit.
        let s = OmegaSample {
            ydot: d.ydot,
            ..classify_sample(d.t, d.y, d.yddot, cfg, y_scale)
        };
        if let (true, Some(w2), Some(ydd1)) = (s.valid, s.omega_sq, a.yddot) {
            if let Ok(o) = recover_center_offset(a.y, ydd1, w2) {
                offsets.push(o);
            }
        }
        samples.push(s);
    }

    let mut est = summarize(
        format!("{}-{}", series1.point_id, series2.point_id),
        samples,
        cfg,
    );
    est.center_offset = mean(&offsets);
    Ok(est)
}

fn summarize(point_id: String, samples: Vec<OmegaSample>, cfg: &EstimatorConfig) -> OmegaEstimate {
    let omegas: Vec<f64> = samples.iter().filter_map(|s| s.omega).collect();
    let mean_omega = mean(&omegas);
    let median_omega = median(&omegas);
    let std_omega = mean_omega.map(|m| {
        let ss: f64 = omegas.iter().map(|w| (w - m) * (w - m)).sum();
        (ss / omegas.len() as f64).sqrt()
    });
    let omega = match cfg.aggregation {
        Aggregation::Mean => mean_omega,
        Aggregation::Median => median_omega,
    };
    OmegaEstimate {
        point_id,
        n_valid: omegas.len(),
        samples,
        mean_omega,
        median_omega,
        std_omega,
        omega,
        direction: Direction::Unknown,
        center_offset: None,
    }
}

/// Index-order sum, so results never depend on evaluation order.
fn mean(v: &[f64]) -> Option<f64> {
    if v.is_empty() {
        return None;
    }
    Some(v.iter().sum::<f64>() / v.len() as f64)
}

fn median(v: &[f64]) -> Option<f64> {
    if v.is_empty() {
        return None;
    }
    let mut s = v.to_vec();
    s.sort_by(f64::total_cmp);
    let n = s.len();
    Some(if n % 2 == 1 {
        s[n / 2]
    } else {
        0.5 * (s[n / 2 - 1] + s[n / 2])
    })
}
