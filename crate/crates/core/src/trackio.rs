//! Track files, the estimates document and the rotating-car measurements.
//!
//! # Track file
//!
//! UTF-8 CSV with header `t,point_id,y`, one record per line, LF or CRLF line
//! endings. Lines starting with `#` are comments; a comment of the form
//! `# units: inches` declares the length unit and is carried as metadata.
//! `y` is already relative to the fixation point. Records may appear in any
//! order; they are grouped by `point_id` (sorted) and by `t` within a point.
//!
//! # Estimates document
//!
//! Pretty-printed JSON, numbers rounded to 6 significant digits:
//!
//! ```text
//! {
//!   "format": "rotrate-estimates",
//!   "version": 1,
//!   "points": [
//!     {
//!       "point_id": "feature1",
//!       "direction": "unknown",
//!       "n_valid": 6,
//!       "mean_omega": 0.312..., "median_omega": ..., "std_omega": ...,
//!       "omega": ...,                       // headline aggregate
//!       "center_offset": ...,               // two-point estimates only
//!       "samples": [
//!         { "t": ..., "y": ..., "ydot": ..., "yddot": ..., "omega_sq": ..., "omega": ...,
//!           "valid": true, "invalid_reason": "none" }
//!       ]
//!     }
//!   ],
//!   "segmentation": {                       // optional
//!     "clusters": [ { "id": 0, "omega": ..., "n_members": 5, "members": [...] } ],
//!     "outliers": [ ... ]
//!   }
//! }
//! ```
//!
//! Absent values are `null`. `invalid_reason` is one of `none`,
//! `negative_omega_sq`, `near_singular`, `missing_derivative`.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimator::{Direction, InvalidReason, OmegaEstimate};
use crate::numdiff::TrackedTrajectory;
use crate::segmentation::SegmentLabeling;

pub const TRACK_HEADER: &str = "t,point_id,y";
pub const ESTIMATES_FORMAT: &str = "rotrate-estimates";
pub const ESTIMATES_VERSION: u32 = 1;

/// Frame interval of the rotating-car measurements: every 16th frame at 30 fps.
pub const TABLE1_DT: f64 = 16.0 / 30.0;
pub const TABLE1_FIRST_FRAME: u32 = 15;
/// Rotation rate obtained from the time of one full revolution, rad/s.
pub const TABLE1_GROUND_TRUTH_OMEGA: f64 = 0.327;

const TABLE1_FEATURE1: [f64; 10] = [
    -3.26, -3.26, -3.27, -3.14, -3.00, -2.80, -2.51, -2.17, -1.98, -1.69,
];
const TABLE1_FEATURE2: [f64; 11] = [
    3.31, 3.31, 3.10, 2.79, 2.28, 1.66, 0.98, 0.24, -0.67, -1.42, -1.93,
];

#[derive(Debug, Clone, PartialEq, Default)]
pub struct TrackFile {
    pub units: Option<String>,
    pub trajectories: Vec<TrackedTrajectory>,
}

/// Horizontal positions (inches) of two features on a rotating car, measured
/// relative to the manually identified rotation axis. Feature 1 has no
/// reading at the last frame, so it stops one sample short.
pub fn table1_fixture() -> Vec<TrackedTrajectory> {
    let build = |id: &str, ys: &[f64]| TrackedTrajectory {
        point_id: id.to_string(),
        samples: ys
            .iter()
            .enumerate()
            .map(|(k, &y)| (k as f64 * TABLE1_DT, y))
            .collect(),
    };
    vec![
        build("feature1", &TABLE1_FEATURE1),
        build("feature2", &TABLE1_FEATURE2),
    ]
}

pub fn table1_track_file() -> TrackFile {
    TrackFile {
        units: Some("inches".into()),
        trajectories: table1_fixture(),
    }
}

pub fn parse_tracks(text: &str) -> Result<Vec<TrackedTrajectory>> {
    parse_track_file(text).map(|f| f.trajectories)
}

pub fn parse_track_file(text: &str) -> Result<TrackFile> {
    let text = text.strip_prefix('\u{feff}').unwrap_or(text);
    let mut units = None;
    let mut header_seen = false;
    let mut groups: BTreeMap<String, Vec<(f64, f64)>> = BTreeMap::new();

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(comment) = line.strip_prefix('#') {
            if let Some(u) = comment.trim().strip_prefix("units:") {
                units = Some(u.trim().to_string());
            }
            continue;
        }
        if !header_seen {
            let fields: Vec<&str> = line.split(',').map(str::trim).collect();
            if fields != ["t", "point_id", "y"] {
                return Err(Error::MalformedHeader(line.to_string()));
            }
            header_seen = true;
            continue;
        }

        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        let bad = |reason: String| Error::NonNumericField {
            line: line_no,
            reason,
        };
        if fields.len() != 3 {
            return Err(bad(format!("expected 3 fields, found {}", fields.len())));
        }
        let number = |s: &str, name: &str| -> Result<f64> {
            match s.parse::<f64>() {
                Ok(v) if v.is_finite() => Ok(v),
                _ => Err(bad(format!("field `{name}` is not a finite number: `{s}`"))),
            }
        };
        let t = number(fields[0], "t")?;
        let y = number(fields[2], "y")?;
        if fields[1].is_empty() {
            return Err(bad("empty point_id".into()));
        }
        groups.entry(fields[1].to_string()).or_default().push((t, y));
    }

    if groups.is_empty() {
        return Err(Error::EmptyFile);
    }

    let mut trajectories = Vec::with_capacity(groups.len());
    for (point_id, mut samples) in groups {
        samples.sort_by(|a, b| a.0.total_cmp(&b.0));
        if let Some(w) = samples.windows(2).find(|w| w[0].0 == w[1].0) {
            return Err(Error::DuplicateTimestamp {
                point_id,
                t: w[0].0,
            });
        }
        trajectories.push(TrackedTrajectory { point_id, samples });
    }
    Ok(TrackFile {
        units,
        trajectories,
    })
}

/// Writes a track file. Values use Rust's shortest round-trip formatting, so
/// parsing the output reproduces the input exactly.
pub fn write_tracks(trajectories: &[TrackedTrajectory], units: Option<&str>) -> String {
    let mut out = String::new();
    if let Some(u) = units {
        let _ = writeln!(out, "# units: {u}");
    }
    out.push_str(TRACK_HEADER);
    out.push('\n');
    let mut sorted: Vec<&TrackedTrajectory> = trajectories.iter().collect();
    sorted.sort_by(|a, b| a.point_id.cmp(&b.point_id));
    for tr in sorted {
        for &(t, y) in &tr.samples {
            let _ = writeln!(out, "{t:?},{},{y:?}", tr.point_id);
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleRecord {
    pub t: f64,
    pub y: f64,
    pub ydot: Option<f64>,
    pub yddot: Option<f64>,
    pub omega_sq: Option<f64>,
    pub omega: Option<f64>,
    pub valid: bool,
    pub invalid_reason: InvalidReason,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointRecord {
    pub point_id: String,
    pub direction: Direction,
    pub n_valid: usize,
    pub mean_omega: Option<f64>,
    pub median_omega: Option<f64>,
    pub std_omega: Option<f64>,
    pub omega: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub center_offset: Option<f64>,
    pub samples: Vec<SampleRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterRecord {
    pub id: usize,
    pub omega: f64,
    pub n_members: usize,
    pub members: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SegmentationRecord {
    pub clusters: Vec<ClusterRecord>,
    pub outliers: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimatesDocument {
    pub format: String,
    pub version: u32,
    pub points: Vec<PointRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub segmentation: Option<SegmentationRecord>,
}

/// Rounds to 6 significant digits.
pub fn round_sig6(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{x:.5e}").parse().unwrap_or(x)
}

fn r6(x: Option<f64>) -> Option<f64> {
    x.map(round_sig6)
}

impl EstimatesDocument {
    pub fn new(estimates: &[OmegaEstimate], labeling: Option<&SegmentLabeling>) -> Self {
        let points = estimates
            .iter()
            .map(|e| PointRecord {
                point_id: e.point_id.clone(),
                direction: e.direction,
                n_valid: e.n_valid,
                mean_omega: r6(e.mean_omega),
                median_omega: r6(e.median_omega),
                std_omega: r6(e.std_omega),
                omega: r6(e.omega),
                center_offset: r6(e.center_offset),
                samples: e
                    .samples
                    .iter()
                    .map(|s| SampleRecord {
                        t: round_sig6(s.t),
                        y: round_sig6(s.y),
                        ydot: r6(s.ydot),
                        yddot: r6(s.yddot),
                        omega_sq: r6(s.omega_sq),
                        omega: r6(s.omega),
                        valid: s.valid,
                        invalid_reason: s.invalid_reason,
                    })
                    .collect(),
            })
            .collect();
        let segmentation = labeling.map(|l| SegmentationRecord {
            clusters: l
                .clusters
                .iter()
                .map(|c| ClusterRecord {
                    id: c.id,
                    omega: round_sig6(c.omega),
                    n_members: c.members.len(),
                    members: c.members.clone(),
                })
                .collect(),
            outliers: l.outliers.clone(),
        });
        EstimatesDocument {
            format: ESTIMATES_FORMAT.into(),
            version: ESTIMATES_VERSION,
            points,
            segmentation,
        }
    }

    /// Structural checks beyond what deserialization enforces.
    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::Schema(msg));
        if self.format != ESTIMATES_FORMAT {
            return fail(format!("unexpected format `{}`", self.format));
        }
        if self.version != ESTIMATES_VERSION {
            return fail(format!("unsupported version {}", self.version));
        }
        let mut ids = BTreeSet::new();
        for p in &self.points {
            if !ids.insert(p.point_id.as_str()) {
                return fail(format!("duplicate point `{}`", p.point_id));
            }
            let valid = p.samples.iter().filter(|s| s.valid).count();
            if valid != p.n_valid {
                return fail(format!(
                    "`{}`: n_valid {} but {} valid samples",
                    p.point_id, p.n_valid, valid
                ));
            }
            let has_aggregates = p.mean_omega.is_some()
                && p.median_omega.is_some()
                && p.std_omega.is_some();
            if has_aggregates != (p.n_valid > 0) {
                return fail(format!("`{}`: aggregates inconsistent with n_valid", p.point_id));
            }
            if p.mean_omega.is_some_and(|w| w < 0.0) {
                return fail(format!("`{}`: negative mean_omega", p.point_id));
            }
            for s in &p.samples {
                let reason_ok = (s.invalid_reason == InvalidReason::None) == s.valid;
                let omega_ok = s.omega.is_some() == s.valid && s.omega.is_none_or(|w| w >= 0.0);
                if !reason_ok || !omega_ok {
                    return fail(format!("`{}`: inconsistent sample at t={}", p.point_id, s.t));
                }
            }
        }
        if let Some(seg) = &self.segmentation {
            let mut seen = BTreeSet::new();
            for (i, c) in seg.clusters.iter().enumerate() {
                if c.id != i || c.n_members != c.members.len() || c.members.is_empty() {
                    return fail(format!("malformed cluster {}", c.id));
                }
                for m in &c.members {
                    if !seen.insert(m.as_str()) {
                        return fail(format!("point `{m}` assigned twice"));
                    }
                }
            }
            for o in &seg.outliers {
                if !seen.insert(o.as_str()) {
                    return fail(format!("point `{o}` both clustered and outlier"));
                }
            }
        }
        Ok(())
    }
}

pub fn write_estimates(estimates: &[OmegaEstimate], labeling: Option<&SegmentLabeling>) -> String {
    let doc = EstimatesDocument::new(estimates, labeling);
    let mut s = serde_json::to_string_pretty(&doc).expect("document serializes");
    s.push('\n');
    s
}

/// Parses and schema-checks an estimates document.
pub fn parse_estimates(text: &str) -> Result<EstimatesDocument> {
    let doc: EstimatesDocument =
        serde_json::from_str(text).map_err(|e| Error::Schema(e.to_string()))?;
    doc.validate()?;
    Ok(doc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimator::{estimate_trajectory, EstimatorConfig};
    use crate::numdiff::{differentiate, Scheme};
    use crate::segmentation::segment_points;
    use proptest::prelude::*;

    #[test]
    fn minimal_file() {
        let tr = parse_tracks("t,point_id,y\n0.0,f1,-3.26\n0.533,f1,-3.26").unwrap();
        assert_eq!(tr.len(), 1);
        assert_eq!(tr[0].samples, vec![(0.0, -3.26), (0.533, -3.26)]);
    }

    #[test]
    fn crlf_comments_units_and_grouping() {
        let text = "\u{feff}# units: inches\r\nt,point_id,y\r\n# note\r\n0.2,b,1\r\n0.1,a,2\r\n0.0,b,3\r\n\r\n";
        let f = parse_track_file(text).unwrap();
        assert_eq!(f.units.as_deref(), Some("inches"));
        assert_eq!(f.trajectories[0].point_id, "a");
        assert_eq!(f.trajectories[1].samples, vec![(0.0, 3.0), (0.2, 1.0)]);
    }

    #[test]
    fn parse_errors() {
        assert_eq!(
            parse_tracks("t,point_id,y\n0.0,f1,abc"),
            Err(Error::NonNumericField {
                line: 2,
                reason: "field `y` is not a finite number: `abc`".into()
            })
        );
        assert!(matches!(
            parse_tracks("t,point_id,y\n0.0,f1,1\n0.1,f1,NaN"),
            Err(Error::NonNumericField { line: 3, .. })
        ));
        assert!(matches!(
            parse_tracks("t,point_id,y\n0.0,f1"),
            Err(Error::NonNumericField { line: 2, .. })
        ));
        assert!(matches!(parse_tracks("time,id,x\n"), Err(Error::MalformedHeader(_))));
        assert_eq!(parse_tracks(""), Err(Error::EmptyFile));
        assert_eq!(parse_tracks("# only\nt,point_id,y\n"), Err(Error::EmptyFile));
        assert_eq!(
            parse_tracks("t,point_id,y\n0.5,f1,1\n0.5,f1,2"),
            Err(Error::DuplicateTimestamp {
                point_id: "f1".into(),
                t: 0.5
            })
        );
    }

    #[test]
    fn fixture_contents() {
        let f = table1_fixture();
        assert_eq!(f.len(), 2);
        assert_eq!(f[0].len(), 10);
        assert_eq!(f[1].len(), 11);
        assert_eq!(f[0].samples[3].1, -3.14);
        assert_eq!(f[1].samples[0].0, 0.0);
        assert_eq!(f[1].samples[10].1, -1.93);
        assert!((f[1].samples[10].0 - 5.3333333).abs() < 1e-6);
        assert_eq!(f, table1_fixture());
    }

    #[test]
    fn fixture_round_trips_through_file() {
        let text = write_tracks(&table1_fixture(), Some("inches"));
        let parsed = parse_track_file(&text).unwrap();
        assert_eq!(parsed, table1_track_file());
    }

    #[test]
    fn empty_estimates_document() {
        let text = write_estimates(&[], None);
        let doc = parse_estimates(&text).unwrap();
        assert!(doc.points.is_empty());
        let v: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(v["points"], serde_json::json!([]));
    }

    #[test]
    fn table1_estimates_document() {
        let series = differentiate(&table1_fixture()[0], Scheme::Backward).unwrap();
        let est = estimate_trajectory(&series, &EstimatorConfig::default());
        let doc = parse_estimates(&write_estimates(&[est], None)).unwrap();
        let mean = doc.points[0].mean_omega.unwrap();
        assert_eq!(format!("{mean:.2}"), "0.31");
        assert_eq!(doc.points[0].samples[8].invalid_reason, InvalidReason::NegativeOmegaSq);
    }

    #[test]
    fn clusters_in_document() {
        let mk = |id: &str, w: f64| OmegaEstimate {
            point_id: id.into(),
            samples: vec![],
            n_valid: 1,
            mean_omega: Some(w),
            median_omega: Some(w),
            std_omega: Some(0.0),
            omega: Some(w),
            direction: Direction::Unknown,
            center_offset: None,
        };
        let ests = vec![mk("a", 0.3), mk("b", 0.3001), mk("c", 0.7)];
        let lab = segment_points(&ests, 0.05).unwrap();
        let text = write_estimates(&[], Some(&lab));
        let doc = parse_estimates(&text).unwrap();
        let seg = doc.segmentation.unwrap();
        assert_eq!(seg.clusters.len(), 2);
        assert_eq!(seg.clusters[0].omega, 0.30005);
        assert_eq!(seg.clusters[1].members, vec!["c"]);
    }

    #[test]
    fn schema_rejects_inconsistent_documents() {
        let series = differentiate(&table1_fixture()[1], Scheme::Backward).unwrap();
        let est = estimate_trajectory(&series, &EstimatorConfig::default());
        let good = EstimatesDocument::new(&[est], None);
        assert!(good.validate().is_ok());

        let mut bad = good.clone();
        bad.points[0].n_valid += 1;
        assert!(bad.validate().is_err());
        let mut bad = good.clone();
        bad.points[0].samples[5].omega = None;
        assert!(bad.validate().is_err());
        let mut bad = good.clone();
        bad.format = "other".into();
        assert!(bad.validate().is_err());
        assert!(parse_estimates("{\"format\": 1}").is_err());
    }

    #[test]
    fn sig6_rounding() {
        assert_eq!(round_sig6(0.312427083), 0.312427);
        assert_eq!(round_sig6(-1234567.0), -1234570.0);
        assert_eq!(round_sig6(0.0), 0.0);
    }

    fn trajectories() -> impl Strategy<Value = Vec<TrackedTrajectory>> {
        prop::collection::btree_map(
            "[a-z][a-z0-9_]{0,6}",
            prop::collection::btree_map(
                (-1e6f64..1e6).prop_map(|t| t.to_bits()),
                any::<f64>().prop_filter("finite", |v| v.is_finite()),
                1..20,
            ),
            1..5,
        )
        .prop_map(|m| {
            m.into_iter()
                .map(|(id, samples)| {
                    let mut s: Vec<(f64, f64)> =
                        samples.into_iter().map(|(t, y)| (f64::from_bits(t), y)).collect();
                    s.sort_by(|a, b| a.0.total_cmp(&b.0));
                    s.dedup_by(|a, b| a.0 == b.0);
                    TrackedTrajectory { point_id: id, samples: s }
                })
                .collect()
        })
    }

    proptest! {
        #[test]
        fn tracks_round_trip_exactly(trajs in trajectories()) {
            let text = write_tracks(&trajs, None);
            prop_assert_eq!(parse_tracks(&text).unwrap(), trajs);
        }
    }
}
