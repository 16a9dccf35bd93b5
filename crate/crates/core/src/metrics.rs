//! Front quality and feasibility metrics: MED, hypervolume, π and EFHV.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::benchmarks::GroundTruthPoint;
use crate::error::{check_len, Error, Result};
use crate::geometry::ConstraintRegion;
use crate::problem::PreferenceVector;

/// Distance tolerance behind the `in_qplus` flag.
pub const QPLUS_MEMBERSHIP_TOL: f64 = 1e-5;

/// One solved ray.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ApproxEntry {
    pub ray_index: usize,
    pub r: PreferenceVector,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub in_q: bool,
    pub in_qplus: bool,
    pub phi: f64,
    pub g: f64,
}

impl ApproxEntry {
    /// Fills the membership flags and `G` from the region.
    pub fn new(
        ray_index: usize,
        r: PreferenceVector,
        x: Vec<f64>,
        y: Vec<f64>,
        phi: f64,
        region: &ConstraintRegion,
    ) -> Result<Self> {
        let in_q = region.contains(&y)?;
        let distance = region.qplus_distance(&y);
        Ok(Self {
            ray_index,
            r,
            x,
            y,
            in_q,
            in_qplus: in_q || distance <= QPLUS_MEMBERSHIP_TOL,
            phi,
            g: 0.5 * distance * distance,
        })
    }
}

/// Per-ray solutions of a two-phase run, ordered by ray index.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParetoApproximation {
    pub problem: String,
    pub region: ConstraintRegion,
    pub entries: Vec<ApproxEntry>,
    /// Whether Phase 1 reached its tolerance.
    pub phase_one_converged: bool,
    /// Rays whose ABP run aborted, with the error text.
    pub failures: Vec<(usize, String)>,
}

impl ParetoApproximation {
    pub fn objective_vectors(&self) -> Vec<Vec<f64>> {
        self.entries.iter().map(|e| e.y.clone()).collect()
    }

    pub fn feasible_vectors(&self) -> Vec<Vec<f64>> {
        self.entries.iter().filter(|e| e.in_q).map(|e| e.y.clone()).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    /// `None` when no ray has a ground-truth point.
    pub med: Option<f64>,
    pub med_pairs: usize,
    /// Rays skipped for lack of ground truth.
    pub med_skipped: usize,
    pub hv_all: f64,
    pub hv_feasible: f64,
    pub pi: f64,
    pub efhv: f64,
    pub reference_point: Vec<f64>,
}

/// `(2, …, 2)`.
pub fn default_reference(m: usize) -> Vec<f64> {
    vec![2.0; m]
}

/// Mean Euclidean distance between index-paired vectors.
pub fn med(reference: &[Vec<f64>], predicted: &[Vec<f64>]) -> Result<f64> {
    check_len(reference.len(), predicted.len())?;
    if reference.is_empty() {
        return Err(Error::Parameter("MED needs at least one pair".into()));
    }
    let mut total = 0.0;
    for (a, b) in reference.iter().zip(predicted) {
        check_len(a.len(), b.len())?;
        total += crate::linalg::dist_sq(a, b).sqrt();
    }
    Ok(total / reference.len() as f64)
}

fn strictly_dominating(points: &[Vec<f64>], reference: &[f64]) -> Result<Vec<Vec<f64>>> {
    let mut kept = Vec::with_capacity(points.len());
    for p in points {
        check_len(reference.len(), p.len())?;
        if p.iter().zip(reference).all(|(a, b)| a < b) {
            kept.push(p.clone());
        }
    }
    Ok(kept)
}

/// Exact hypervolume dominated by `points` and bounded by `reference`, for
/// two or three objectives.
pub fn hypervolume(points: &[Vec<f64>], reference: &[f64]) -> Result<f64> {
    let pts = strictly_dominating(points, reference)?;
    match reference.len() {
        2 => Ok(hv2(pts.iter().map(|p| (p[0], p[1])).collect(), reference[0], reference[1])),
        3 => Ok(hv3(pts, reference)),
        m => Err(Error::Unsupported(format!("hypervolume for {m} objectives"))),
    }
}

fn hv2(mut pts: Vec<(f64, f64)>, rx: f64, ry: f64) -> f64 {
    pts.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    let mut area = 0.0;
    let mut floor = ry;
    for (x, y) in pts {
        if y < floor {
            area += (rx - x) * (floor - y);
            floor = y;
        }
    }
    area
}

fn hv3(mut pts: Vec<Vec<f64>>, reference: &[f64]) -> f64 {
    pts.sort_by(|a, b| a[2].total_cmp(&b[2]));
    let mut volume = 0.0;
    for i in 0..pts.len() {
        let top = if i + 1 < pts.len() { pts[i + 1][2] } else { reference[2] };
        let depth = top - pts[i][2];
        if depth <= 0.0 {
            continue;
        }
        let slice = pts[..=i].iter().map(|p| (p[0], p[1])).collect();
        volume += depth * hv2(slice, reference[0], reference[1]);
    }
    volume
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub value: f64,
    pub std_error: f64,
}

/// Monte-Carlo hypervolume over the box spanned by the componentwise
/// minimum of `points` and `reference`.
pub fn hypervolume_mc(points: &[Vec<f64>], reference: &[f64], samples: usize, seed: u64) -> Result<McEstimate> {
    let pts = strictly_dominating(points, reference)?;
    if pts.is_empty() || samples == 0 {
        return Ok(McEstimate { value: 0.0, std_error: 0.0 });
    }
    let m = reference.len();
    let low: Vec<f64> = (0..m)
        .map(|i| pts.iter().map(|p| p[i]).fold(f64::INFINITY, f64::min))
        .collect();
    let volume: f64 = (0..m).map(|i| reference[i] - low[i]).product();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut sample = vec![0.0; m];
    let mut hits = 0usize;
    for _ in 0..samples {
        for i in 0..m {
            sample[i] = rng.gen_range(low[i]..reference[i]);
        }
        if pts.iter().any(|p| p.iter().zip(&sample).all(|(a, b)| a <= b)) {
            hits += 1;
        }
    }
    let frac = hits as f64 / samples as f64;
    Ok(McEstimate {
        value: volume * frac,
        std_error: volume * (frac * (1.0 - frac) / samples as f64).sqrt(),
    })
}

/// Computes the full report. Ground-truth points are matched by ray index.
pub fn evaluate(
    approx: &ParetoApproximation,
    ground_truth: &[GroundTruthPoint],
    reference: &[f64],
) -> Result<MetricsReport> {
    let mut truth = Vec::new();
    let mut predicted = Vec::new();
    let mut skipped = 0;
    for entry in &approx.entries {
        match ground_truth
            .iter()
            .find(|g| g.ray_index == entry.ray_index)
            .and_then(|g| g.y.as_ref())
        {
            Some(y) => {
                truth.push(y.clone());
                predicted.push(entry.y.clone());
            }
            None => skipped += 1,
        }
    }
    let med_value = if truth.is_empty() { None } else { Some(med(&truth, &predicted)?) };
    let hv_all = hypervolume(&approx.objective_vectors(), reference)?;
    let hv_feasible = hypervolume(&approx.feasible_vectors(), reference)?;
    let total = approx.entries.len();
    let pi = if total == 0 {
        0.0
    } else {
        approx.entries.iter().filter(|e| e.in_q).count() as f64 / total as f64
    };
    Ok(MetricsReport {
        med: med_value,
        med_pairs: truth.len(),
        med_skipped: skipped,
        hv_all,
        hv_feasible,
        pi,
        efhv: pi * hv_feasible,
        reference_point: reference.to_vec(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn med_hand_cases() {
        let a = vec![vec![0.0, 0.0], vec![1.0, 1.0]];
        assert_eq!(med(&a, &a).unwrap(), 0.0);
        assert_eq!(med(&[vec![0.0, 0.0]], &[vec![3.0, 4.0]]).unwrap(), 5.0);
        let b = vec![vec![1.0, 0.0], vec![1.0, 4.0]];
        assert_eq!(med(&a, &b).unwrap(), 2.0);
        assert!(med(&[], &[]).is_err());
    }

    #[test]
    fn hv_hand_cases() {
        let r = [2.0, 2.0];
        assert_eq!(hypervolume(&[vec![0.5, 0.5]], &r).unwrap(), 2.25);
        assert_eq!(hypervolume(&[vec![0.5, 0.5], vec![0.6, 0.6]], &r).unwrap(), 2.25);
        assert_eq!(hypervolume(&[vec![0.0, 1.0], vec![1.0, 0.0]], &r).unwrap(), 3.0);
        assert_eq!(hypervolume(&[vec![2.0, 0.0]], &r).unwrap(), 0.0);
        assert_eq!(hypervolume(&[vec![1.0, 1.0, 1.0]], &[2.0, 2.0, 2.0]).unwrap(), 1.0);
        assert!(matches!(
            hypervolume(&[vec![0.0; 4]], &[1.0; 4]),
            Err(Error::Unsupported(_))
        ));
    }

    #[test]
    fn hv3_inclusion_exclusion() {
        let pts = vec![vec![0.0, 1.0, 1.0], vec![1.0, 0.0, 1.0], vec![1.0, 1.0, 0.0]];
        // Three 2×1×1 slabs pairwise overlapping in 1×1×1 cubes, all three in one.
        assert!((hypervolume(&pts, &[2.0, 2.0, 2.0]).unwrap() - (3.0 * 2.0 - 3.0 + 1.0)).abs() < 1e-12);
    }

    #[test]
    fn mc_single_box() {
        let est = hypervolume_mc(&[vec![0.5, 0.5]], &[2.0, 2.0], 1000, 0).unwrap();
        assert_eq!(est.value, 2.25);
        assert_eq!(hypervolume_mc(&[], &[2.0, 2.0], 1000, 0).unwrap().value, 0.0);
    }
}
