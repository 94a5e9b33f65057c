//! Grouping tracked points into rigid bodies by agreement of their ω.
//!
//! Points are sorted by `mean_omega` and a new cluster starts wherever the gap
//! to the previous point exceeds the tolerance (1-D single linkage). Points
//! with no valid samples are reported as outliers.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimator::OmegaEstimate;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cluster {
    pub id: usize,
    /// Unweighted mean of the members' `mean_omega`.
    pub omega: f64,
    pub members: Vec<String>,
}

impl Cluster {
    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct SegmentLabeling {
    pub assignments: BTreeMap<String, usize>,
    /// Ordered by ascending consensus ω; `clusters[i].id == i`.
    pub clusters: Vec<Cluster>,
    pub outliers: Vec<String>,
}

pub fn segment_points(estimates: &[OmegaEstimate], tol: f64) -> Result<SegmentLabeling> {
    if estimates.is_empty() {
        return Err(Error::EmptyInput);
    }
    if !(tol > 0.0) {
        return Err(Error::invalid("tol", format!("must be > 0, got {tol}")));
    }

    let mut ranked: Vec<(f64, &str)> = Vec::new();
    let mut outliers = Vec::new();
    for e in estimates {
        match e.mean_omega {
            Some(w) if e.n_valid > 0 => ranked.push((w, &e.point_id)),
            _ => outliers.push(e.point_id.clone()),
        }
    }
    // Ties broken by id so the partition is independent of input order.
    ranked.sort_by(|a, b| a.0.total_cmp(&b.0).then_with(|| a.1.cmp(b.1)));
    outliers.sort();

    let mut groups: Vec<Vec<(f64, &str)>> = Vec::new();
    let mut prev: Option<f64> = None;
    for item in ranked {
        match (prev, groups.last_mut()) {
            (Some(p), Some(g)) if item.0 - p <= tol => g.push(item),
            _ => groups.push(vec![item]),
        }
        prev = Some(item.0);
    }

    let mut labeling = SegmentLabeling {
        outliers,
        ..Default::default()
    };
    for (id, g) in groups.into_iter().enumerate() {
        let omega = g.iter().map(|m| m.0).sum::<f64>() / g.len() as f64;
        let members: Vec<String> = g.iter().map(|m| m.1.to_string()).collect();
        for m in &members {
            labeling.assignments.insert(m.clone(), id);
        }
        labeling.clusters.push(Cluster { id, omega, members });
    }
    Ok(labeling)
}

/// Fraction of point pairs on which two partitions agree (Rand index).
/// Each partition maps point id to a group key; points missing from either
/// map are ignored.
pub fn pairwise_agreement<A: Eq, B: Eq>(
    truth: &BTreeMap<String, A>,
    found: &BTreeMap<String, B>,
) -> f64 {
    let ids: Vec<&String> = truth.keys().filter(|k| found.contains_key(*k)).collect();
    let mut pairs = 0usize;
    let mut agree = 0usize;
    for i in 0..ids.len() {
        for j in i + 1..ids.len() {
            pairs += 1;
            let same_truth = truth[ids[i]] == truth[ids[j]];
            let same_found = found[ids[i]] == found[ids[j]];
            if same_truth == same_found {
                agree += 1;
            }
        }
    }
    if pairs == 0 {
        1.0
    } else {
        agree as f64 / pairs as f64
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimator::Direction;
    use proptest::prelude::*;

    fn est(id: &str, w: Option<f64>) -> OmegaEstimate {
        OmegaEstimate {
            point_id: id.into(),
            samples: vec![],
            n_valid: usize::from(w.is_some()),
            mean_omega: w,
            median_omega: w,
            std_omega: w.map(|_| 0.0),
            omega: w,
            direction: Direction::Unknown,
            center_offset: None,
        }
    }

    #[test]
    fn two_groups() {
        let input = vec![
            est("a1", Some(0.300)),
            est("b1", Some(0.700)),
            est("a2", Some(0.301)),
            est("b2", Some(0.702)),
            est("a3", Some(0.299)),
        ];
        let lab = segment_points(&input, 0.05).unwrap();
        assert_eq!(lab.clusters.len(), 2);
        assert!((lab.clusters[0].omega - 0.300).abs() < 1e-12);
        assert!((lab.clusters[1].omega - 0.701).abs() < 1e-12);
        assert_eq!(lab.clusters[0].members, vec!["a3", "a1", "a2"]);
        assert_eq!(lab.assignments["b2"], 1);
        assert!(lab.outliers.is_empty());
    }

    #[test]
    fn singleton_and_outliers() {
        let lab = segment_points(&[est("x", Some(1.0))], 0.1).unwrap();
        assert_eq!(lab.clusters.len(), 1);
        assert_eq!(lab.clusters[0].members, vec!["x"]);

        let lab = segment_points(&[est("x", None), est("y", None)], 0.1).unwrap();
        assert!(lab.clusters.is_empty() && lab.assignments.is_empty());
        assert_eq!(lab.outliers, vec!["x", "y"]);
    }

    #[test]
    fn errors() {
        assert_eq!(segment_points(&[], 0.1), Err(Error::EmptyInput));
        assert!(segment_points(&[est("x", Some(1.0))], 0.0).is_err());
        assert!(segment_points(&[est("x", Some(1.0))], f64::NAN).is_err());
    }

    #[test]
    fn agreement_metric() {
        let truth: BTreeMap<String, u8> =
            [("a", 0), ("b", 0), ("c", 1), ("d", 1)].map(|(k, v)| (k.to_string(), v)).into();
        assert_eq!(pairwise_agreement(&truth, &truth), 1.0);
        let found: BTreeMap<String, u8> =
            [("a", 0), ("b", 0), ("c", 0), ("d", 1)].map(|(k, v)| (k.to_string(), v)).into();
        // pairs: ab ok, ac bad, ad ok, bc bad, bd ok, cd bad
        assert_eq!(pairwise_agreement(&truth, &found), 0.5);
    }

    fn omegas() -> impl Strategy<Value = Vec<Option<f64>>> {
        prop::collection::vec(prop::option::weighted(0.9, 0.0f64..2.0), 1..30)
    }

    proptest! {
        #[test]
        fn every_point_appears_once(ws in omegas(), tol in 0.001f64..0.5) {
            let input: Vec<_> = ws.iter().enumerate().map(|(i, w)| est(&format!("p{i}"), *w)).collect();
            let lab = segment_points(&input, tol).unwrap();
            prop_assert_eq!(lab.assignments.len() + lab.outliers.len(), input.len());
            for o in &lab.outliers {
                prop_assert!(!lab.assignments.contains_key(o));
            }
            let members: usize = lab.clusters.iter().map(Cluster::len).sum();
            prop_assert_eq!(members, lab.assignments.len());
        }

        #[test]
        fn permutation_invariance(ws in omegas(), tol in 0.001f64..0.5, seed in any::<u64>()) {
            let input: Vec<_> = ws.iter().enumerate().map(|(i, w)| est(&format!("p{i}"), *w)).collect();
            let mut shuffled = input.clone();
            // Deterministic Fisher-Yates from the seed.
            let mut s = seed;
            for i in (1..shuffled.len()).rev() {
                s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                shuffled.swap(i, (s >> 33) as usize % (i + 1));
            }
            prop_assert_eq!(segment_points(&input, tol).unwrap(), segment_points(&shuffled, tol).unwrap());
        }

        #[test]
        fn tol_monotonicity(ws in omegas(), t1 in 0.001f64..0.5, t2 in 0.001f64..0.5) {
            let input: Vec<_> = ws.iter().enumerate().map(|(i, w)| est(&format!("p{i}"), *w)).collect();
            let (lo, hi) = if t1 < t2 { (t1, t2) } else { (t2, t1) };
            let a = segment_points(&input, lo).unwrap().clusters.len();
            let b = segment_points(&input, hi).unwrap().clusters.len();
            prop_assert!(b <= a);
        }
    }
}
