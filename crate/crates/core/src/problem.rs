//! Multi-objective problem instances: objective maps, decision sets and
//! preference vectors.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{check_len, Error, Result};
use crate::linalg::{self, Matrix};
use crate::scalarization::IdealPoint;

/// Rounds of alternating projection used for the sphere-box decision set.
pub const SPHERE_PROJECTION_ROUNDS: usize = 50;

/// Membership tolerance for the sphere-box set.
const SPHERE_TOL: f64 = 1e-9;

/// A vector-valued objective map with a hand-coded Jacobian.
pub trait Objectives: Send + Sync + fmt::Debug {
    /// Decision dimension.
    fn n(&self) -> usize;
    /// Objective dimension.
    fn m(&self) -> usize;
    fn evaluate(&self, x: &[f64]) -> Vec<f64>;
    /// `m × n` Jacobian at `x`.
    fn jacobian(&self, x: &[f64]) -> Matrix;
}

type EvalFn = dyn Fn(&[f64]) -> Vec<f64> + Send + Sync;
type JacFn = dyn Fn(&[f64]) -> Matrix + Send + Sync;

/// Objectives assembled from closures, for problems defined outside the
/// benchmark catalog.
#[derive(Clone)]
pub struct FnObjectives {
    n: usize,
    m: usize,
    evaluate: Arc<EvalFn>,
    jacobian: Arc<JacFn>,
}

impl FnObjectives {
    pub fn new<F, J>(n: usize, m: usize, evaluate: F, jacobian: J) -> Self
    where
        F: Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static,
        J: Fn(&[f64]) -> Matrix + Send + Sync + 'static,
    {
        Self {
            n,
            m,
            evaluate: Arc::new(evaluate),
            jacobian: Arc::new(jacobian),
        }
    }
}

impl fmt::Debug for FnObjectives {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FnObjectives")
            .field("n", &self.n)
            .field("m", &self.m)
            .finish_non_exhaustive()
    }
}

impl Objectives for FnObjectives {
    fn n(&self) -> usize {
        self.n
    }
    fn m(&self) -> usize {
        self.m
    }
    fn evaluate(&self, x: &[f64]) -> Vec<f64> {
        (self.evaluate)(x)
    }
    fn jacobian(&self, x: &[f64]) -> Matrix {
        (self.jacobian)(x)
    }
}

/// The decision set `C`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DecisionSet {
    /// Axis-aligned box `lower ≤ x ≤ upper`.
    Box { lower: Vec<f64>, upper: Vec<f64> },
    /// Unit sphere intersected with a box. Not convex; projection is an
    /// alternating-projection retraction.
    UnitSphereBox { lower: Vec<f64>, upper: Vec<f64> },
}

/// Result of projecting onto a decision set.
#[derive(Debug, Clone, PartialEq)]
pub struct SetProjection {
    pub point: Vec<f64>,
    /// Set when the sphere normalization was undefined (zero vector) and the
    /// canonical point `(1, 0, …, 0)` was returned instead.
    pub degenerate: bool,
}

impl DecisionSet {
    pub fn boxed(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        validate_bounds(&lower, &upper)?;
        Ok(Self::Box { lower, upper })
    }

    pub fn unit_sphere_box(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        validate_bounds(&lower, &upper)?;
        Ok(Self::UnitSphereBox { lower, upper })
    }

    fn bounds(&self) -> (&[f64], &[f64]) {
        match self {
            Self::Box { lower, upper } | Self::UnitSphereBox { lower, upper } => (lower, upper),
        }
    }

    pub fn lower(&self) -> &[f64] {
        self.bounds().0
    }

    pub fn upper(&self) -> &[f64] {
        self.bounds().1
    }

    pub fn dim(&self) -> usize {
        self.lower().len()
    }

    pub fn is_box(&self) -> bool {
        matches!(self, Self::Box { .. })
    }

    /// Membership with an absolute tolerance.
    pub fn contains(&self, x: &[f64], tol: f64) -> bool {
        if x.len() != self.dim() {
            return false;
        }
        let (lo, hi) = self.bounds();
        let in_box = x
            .iter()
            .zip(lo.iter().zip(hi))
            .all(|(&v, (&l, &u))| v >= l - tol && v <= u + tol);
        match self {
            Self::Box { .. } => in_box,
            Self::UnitSphereBox { .. } => in_box && (linalg::norm(x) - 1.0).abs() <= tol.max(SPHERE_TOL),
        }
    }

    /// Metric projection `P_C` (a fixed retraction for the sphere-box set).
    pub fn project(&self, x: &[f64]) -> Vec<f64> {
        self.project_with_status(x).point
    }

    pub fn project_with_status(&self, x: &[f64]) -> SetProjection {
        let (lo, hi) = self.bounds();
        match self {
            Self::Box { .. } => SetProjection {
                point: clamp(x, lo, hi),
                degenerate: false,
            },
            Self::UnitSphereBox { .. } => {
                let mut sphere = match normalized(x) {
                    Some(s) => s,
                    None => return canonical_sphere_point(x.len()),
                };
                for _ in 0..SPHERE_PROJECTION_ROUNDS {
                    let boxed = clamp(&sphere, lo, hi);
                    match normalized(&boxed) {
                        Some(s) => sphere = s,
                        None => return canonical_sphere_point(x.len()),
                    }
                }
                SetProjection {
                    point: sphere,
                    degenerate: false,
                }
            }
        }
    }

    /// Registered Phase-1 starting point: the box center, or `(1, 0, …, 0)`
    /// for the sphere-box set.
    pub fn default_start(&self) -> Vec<f64> {
        match self {
            Self::Box { lower, upper } => lower
                .iter()
                .zip(upper)
                .map(|(l, u)| 0.5 * (l + u))
                .collect(),
            Self::UnitSphereBox { .. } => canonical_sphere_point(self.dim()).point,
        }
    }
}

fn validate_bounds(lower: &[f64], upper: &[f64]) -> Result<()> {
    check_len(lower.len(), upper.len())?;
    if lower.is_empty() {
        return Err(Error::Parameter("decision set must have dimension ≥ 1".into()));
    }
    for (i, (l, u)) in lower.iter().zip(upper).enumerate() {
        if !(l.is_finite() && u.is_finite()) || l > u {
            return Err(Error::Parameter(format!(
                "decision bounds at index {i}: need finite lower ≤ upper, got [{l}, {u}]"
            )));
        }
    }
    Ok(())
}

fn clamp(x: &[f64], lo: &[f64], hi: &[f64]) -> Vec<f64> {
    x.iter()
        .zip(lo.iter().zip(hi))
        .map(|(&v, (&l, &u))| v.clamp(l, u))
        .collect()
}

fn normalized(x: &[f64]) -> Option<Vec<f64>> {
    let n = linalg::norm(x);
    if n > 0.0 && n.is_finite() {
        Some(x.iter().map(|v| v / n).collect())
    } else {
        None
    }
}

fn canonical_sphere_point(n: usize) -> SetProjection {
    let mut point = vec![0.0; n];
    if let Some(first) = point.first_mut() {
        *first = 1.0;
    }
    SetProjection {
        point,
        degenerate: true,
    }
}

/// A multi-objective problem `min_{x ∈ C} F(x)`.
#[derive(Debug, Clone)]
pub struct ProblemInstance {
    name: String,
    objectives: Arc<dyn Objectives>,
    decision_set: DecisionSet,
    ideal_override: Option<IdealPoint>,
    start: Vec<f64>,
}

impl ProblemInstance {
    pub fn new(
        name: impl Into<String>,
        objectives: Arc<dyn Objectives>,
        decision_set: DecisionSet,
    ) -> Result<Self> {
        check_len(objectives.n(), decision_set.dim())?;
        if objectives.m() < 2 {
            return Err(Error::Parameter("need at least two objectives".into()));
        }
        let start = decision_set.default_start();
        Ok(Self {
            name: name.into(),
            objectives,
            decision_set,
            ideal_override: None,
            start,
        })
    }

    /// Registers an analytic ideal point, bypassing numeric estimation.
    pub fn with_ideal_point(mut self, ideal: IdealPoint) -> Result<Self> {
        check_len(self.m(), ideal.len())?;
        self.ideal_override = Some(ideal);
        Ok(self)
    }

    pub fn with_start(mut self, start: Vec<f64>) -> Result<Self> {
        check_len(self.n(), start.len())?;
        self.start = start;
        Ok(self)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn n(&self) -> usize {
        self.objectives.n()
    }

    pub fn m(&self) -> usize {
        self.objectives.m()
    }

    pub fn decision_set(&self) -> &DecisionSet {
        &self.decision_set
    }

    pub fn ideal_override(&self) -> Option<&IdealPoint> {
        self.ideal_override.as_ref()
    }

    /// Phase-1 starting point.
    pub fn start(&self) -> &[f64] {
        &self.start
    }

    pub fn evaluate(&self, x: &[f64]) -> Vec<f64> {
        debug_assert_eq!(x.len(), self.n());
        self.objectives.evaluate(x)
    }

    pub fn jacobian(&self, x: &[f64]) -> Matrix {
        debug_assert_eq!(x.len(), self.n());
        self.objectives.jacobian(x)
    }

    pub fn check_decision(&self, x: &[f64]) -> Result<()> {
        check_len(self.n(), x.len())
    }

    pub fn project(&self, x: &[f64]) -> Vec<f64> {
        self.decision_set.project(x)
    }
}

/// A preference ray `r`: strictly positive weights summing to one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct PreferenceVector(Vec<f64>);

impl PreferenceVector {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.len() < 2 {
            return Err(Error::Parameter("preference vector needs ≥ 2 components".into()));
        }
        if let Some(bad) = weights.iter().find(|w| !(w.is_finite() && **w > 0.0)) {
            return Err(Error::Parameter(format!(
                "preference components must be strictly positive, got {bad}"
            )));
        }
        let sum: f64 = weights.iter().sum();
        if (sum - 1.0).abs() > 1e-12 {
            return Err(Error::Parameter(format!(
                "preference components must sum to 1, got {sum}"
            )));
        }
        Ok(Self(weights))
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl TryFrom<Vec<f64>> for PreferenceVector {
    type Error = Error;
    fn try_from(v: Vec<f64>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<PreferenceVector> for Vec<f64> {
    fn from(r: PreferenceVector) -> Self {
        r.0
    }
}

impl std::ops::Index<usize> for PreferenceVector {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

/// Unclipped uniform points on the probability simplex.
///
/// For `m = 2` the first components are `i/(k-1)`. For `m ≥ 3` this is the
/// triangular lattice of the smallest order with at least `k` points,
/// truncated to the first `k` in lexicographic order.
pub fn simplex_grid(m: usize, k: usize) -> Result<Vec<Vec<f64>>> {
    if m < 2 {
        return Err(Error::Parameter(format!("need m ≥ 2 objectives, got {m}")));
    }
    if k < 2 {
        return Err(Error::Parameter(format!("need K ≥ 2 rays, got {k}")));
    }
    if m == 2 {
        return Ok((0..k)
            .map(|i| {
                let t = i as f64 / (k - 1) as f64;
                vec![t, 1.0 - t]
            })
            .collect());
    }
    let mut order = 1;
    while lattice_size(m, order) < k {
        order += 1;
    }
    let mut points = Vec::with_capacity(lattice_size(m, order));
    let mut current = Vec::with_capacity(m);
    compositions(m, order, &mut current, &mut points);
    // Integer compositions already come out in ascending lexicographic order.
    points.truncate(k);
    Ok(points
        .into_iter()
        .map(|c| c.into_iter().map(|v| v as f64 / order as f64).collect())
        .collect())
}

fn lattice_size(m: usize, order: usize) -> usize {
    // C(order + m - 1, m - 1)
    let mut acc: u128 = 1;
    for i in 1..m as u128 {
        acc = acc * (order as u128 + i) / i;
    }
    acc as usize
}

fn compositions(m: usize, remaining: usize, current: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
    if current.len() == m - 1 {
        current.push(remaining);
        out.push(current.clone());
        current.pop();
        return;
    }
    for v in 0..=remaining {
        current.push(v);
        compositions(m, remaining - v, current, out);
        current.pop();
    }
}

/// `k` uniformly spaced preference rays with every component at least `eps`
/// (before renormalization), sorted lexicographically.
pub fn generate_rays(m: usize, k: usize, eps: f64) -> Result<Vec<PreferenceVector>> {
    if !(eps > 0.0 && eps < 1.0 / m.max(1) as f64) {
        return Err(Error::Parameter(format!(
            "eps must lie in (0, 1/m) = (0, {}), got {eps}",
            1.0 / m.max(1) as f64
        )));
    }
    let grid = simplex_grid(m, k)?;
    let rays = if m == 2 {
        grid.into_iter()
            .map(|p| {
                let r1 = eps + (1.0 - 2.0 * eps) * p[0];
                vec![r1, 1.0 - r1]
            })
            .collect::<Vec<_>>()
    } else {
        grid.into_iter()
            .map(|p| {
                let clipped: Vec<f64> = p.iter().map(|v| v.max(eps)).collect();
                let s: f64 = clipped.iter().sum();
                clipped.into_iter().map(|v| v / s).collect()
            })
            .collect()
    };
    let mut rays = rays;
    rays.sort_by(|a, b| {
        a.iter()
            .zip(b)
            .map(|(x, y)| x.total_cmp(y))
            .find(|o| o.is_ne())
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    rays.into_iter().map(PreferenceVector::new).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unclipped_two_objective_grid() {
        let g = simplex_grid(2, 3).unwrap();
        assert_eq!(g, vec![vec![0.0, 1.0], vec![0.5, 0.5], vec![1.0, 0.0]]);
    }

    #[test]
    fn two_rays_hit_clipped_endpoints() {
        let rays = generate_rays(2, 2, 0.001).unwrap();
        assert_eq!(rays.len(), 2);
        assert!((rays[0][0] - 0.001).abs() < 1e-15 && (rays[0][1] - 0.999).abs() < 1e-15);
        assert!((rays[1][0] - 0.999).abs() < 1e-15 && (rays[1][1] - 0.001).abs() < 1e-15);
    }

    #[test]
    fn three_objective_lattice_of_order_two() {
        // Enumerate (i/2, j/2, k/2) with i+j+k = 2 independently.
        let mut expected = Vec::new();
        for i in 0..=2usize {
            for j in 0..=(2 - i) {
                expected.push(vec![i as f64 / 2.0, j as f64 / 2.0, (2 - i - j) as f64 / 2.0]);
            }
        }
        assert_eq!(expected.len(), 6);
        let grid = simplex_grid(3, 6).unwrap();
        assert_eq!(grid, expected);

        let rays = generate_rays(3, 6, 0.001).unwrap();
        assert_eq!(rays.len(), 6);
        for lattice in &expected {
            let clipped: Vec<f64> = lattice.iter().map(|v| v.max(0.001)).collect();
            let s: f64 = clipped.iter().sum();
            let found = rays.iter().any(|ray| {
                ray.as_slice().iter().zip(&clipped).all(|(a, b)| (a - b / s).abs() < 1e-15)
            });
            assert!(found, "{lattice:?}");
        }
        for pair in rays.windows(2) {
            assert!(pair[0].as_slice() <= pair[1].as_slice());
        }
    }

    #[test]
    fn fifty_rays_in_three_objectives_use_order_nine() {
        let grid = simplex_grid(3, 50).unwrap();
        assert_eq!(grid.len(), 50);
        assert_eq!(lattice_size(3, 9), 55);
        assert_eq!(lattice_size(3, 8), 45);
        assert!(grid.iter().all(|p| (p.iter().sum::<f64>() - 1.0).abs() < 1e-12));
    }

    #[test]
    fn ray_parameter_errors() {
        assert!(generate_rays(2, 1, 0.001).is_err());
        assert!(generate_rays(2, 10, 0.0).is_err());
        assert!(generate_rays(2, 10, 0.5).is_err());
        assert!(generate_rays(3, 10, 0.34).is_err());
    }

    #[test]
    fn preference_vector_validation() {
        assert!(PreferenceVector::new(vec![0.5, 0.5]).is_ok());
        assert!(PreferenceVector::new(vec![0.0, 1.0]).is_err());
        assert!(PreferenceVector::new(vec![0.6, 0.6]).is_err());
        assert!(PreferenceVector::new(vec![1.0]).is_err());
    }

    #[test]
    fn box_projection_examples() {
        let c = DecisionSet::boxed(vec![0.0, 0.0], vec![1.0, 1.0]).unwrap();
        assert_eq!(c.project(&[2.0, -1.0]), vec![1.0, 0.0]);
        let c = DecisionSet::boxed(vec![0.0, 0.0], vec![5.0, 5.0]).unwrap();
        assert_eq!(c.project(&[3.0, 3.0]), vec![3.0, 3.0]);
    }

    #[test]
    fn sphere_box_projection_examples() {
        let c = DecisionSet::unit_sphere_box(vec![0.0; 3], vec![1.0; 3]).unwrap();
        assert_eq!(c.project(&[2.0, 0.0, 0.0]), vec![1.0, 0.0, 0.0]);
        let p = c.project_with_status(&[0.0, 0.0, 0.0]);
        assert!(p.degenerate);
        assert_eq!(p.point, vec![1.0, 0.0, 0.0]);
        // Clamping the negative orthant point leaves the zero vector.
        assert!(c.project_with_status(&[-1.0, -2.0, -3.0]).degenerate);
        let q = c.project(&[1.0, -1.0, 1.0]);
        assert!(c.contains(&q, 1e-9));
    }

    #[test]
    fn invalid_bounds_rejected() {
        assert!(DecisionSet::boxed(vec![1.0], vec![0.0]).is_err());
        assert!(DecisionSet::boxed(vec![0.0, 0.0], vec![1.0]).is_err());
    }
}
