//! Target regions `Q` in objective space and projections onto the extended
//! downward hull `Q⁺ = Q − ℝ₊ᵐ`.

use serde::{Deserialize, Serialize};

use crate::error::{check_len, Error, Result};
use crate::linalg;
use crate::problem::DecisionSet;

/// Step size of the projected-gradient inner solver for ball regions.
pub const BALL_INNER_STEP: f64 = 0.5;
/// Iteration cap of the inner solver.
pub const BALL_INNER_MAX_STEPS: usize = 500;
/// The inner solver stops once an update moves less than this.
pub const BALL_INNER_UPDATE_TOL: f64 = 1e-11;
/// Gradient-mapping norm above which a capped inner solve is flagged.
pub const BALL_INNER_WARN_GRAD: f64 = 1e-8;

/// A closed convex target region `Q`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConstraintRegion {
    /// `lower ≤ y ≤ upper`; a missing lower bound means `-∞`.
    Box {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        lower: Option<Vec<f64>>,
        upper: Vec<f64>,
    },
    /// Closed ball `‖y − center‖ ≤ radius`.
    Ball { center: Vec<f64>, radius: f64 },
}

/// Projection of a point onto `Q⁺` together with its residual.
#[derive(Debug, Clone, PartialEq)]
pub struct ResidualReport {
    /// `P_{Q⁺}(z)`.
    pub p: Vec<f64>,
    /// `z − p`, componentwise nonnegative.
    pub rho: Vec<f64>,
    /// `½ dist²(z, Q⁺)`.
    pub g_value: f64,
    /// Inner minimizer `y* ∈ Q`.
    pub inner_point: Vec<f64>,
    pub inner_steps: usize,
    pub warning: Option<InnerSolverWarning>,
}

/// The ball inner solver hit its step cap without settling.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InnerSolverWarning {
    pub steps: usize,
    pub gradient_norm: f64,
}

impl ConstraintRegion {
    pub fn ball(center: Vec<f64>, radius: f64) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::Parameter(format!("ball radius must be positive, got {radius}")));
        }
        if center.is_empty() || !linalg::all_finite(&center) {
            return Err(Error::Parameter("ball center must be a finite nonempty vector".into()));
        }
        Ok(Self::Ball { center, radius })
    }

    pub fn boxed(lower: Option<Vec<f64>>, upper: Vec<f64>) -> Result<Self> {
        if upper.is_empty() || upper.iter().any(|v| v.is_nan() || *v == f64::INFINITY) {
            return Err(Error::Parameter("box upper bound must be a finite nonempty vector".into()));
        }
        if let Some(lo) = &lower {
            check_len(upper.len(), lo.len())?;
            if let Some(i) = (0..lo.len()).find(|&i| lo[i].is_nan() || lo[i] > upper[i]) {
                return Err(Error::Parameter(format!(
                    "box bounds at index {i}: lower {} exceeds upper {}",
                    lo[i], upper[i]
                )));
            }
        }
        Ok(Self::Box { lower, upper })
    }

    /// Re-checks the invariants of a deserialized region.
    pub fn validate(&self) -> Result<()> {
        match self.clone() {
            Self::Ball { center, radius } => Self::ball(center, radius).map(|_| ()),
            Self::Box { lower, upper } => Self::boxed(lower, upper).map(|_| ()),
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            Self::Box { upper, .. } => upper.len(),
            Self::Ball { center, .. } => center.len(),
        }
    }

    /// Exact membership in `Q` (boundary included).
    pub fn contains(&self, y: &[f64]) -> Result<bool> {
        check_len(self.dim(), y.len())?;
        Ok(match self {
            Self::Box { lower, upper } => {
                let below = y.iter().zip(upper).all(|(v, u)| v <= u);
                let above = lower
                    .as_ref()
                    .map_or(true, |lo| y.iter().zip(lo).all(|(v, l)| v >= l));
                below && above
            }
            Self::Ball { center, radius } => linalg::dist_sq(y, center) <= radius * radius,
        })
    }

    /// Projects `z` onto `Q⁺` via `P_{Q⁺}(z) = min(z, y*)` with
    /// `y* ∈ argmin_{y ∈ Q} ‖(z − y)₊‖²`.
    pub fn project_qplus(&self, z: &[f64]) -> Result<ResidualReport> {
        check_len(self.dim(), z.len())?;
        let (inner_point, inner_steps, warning) = match self {
            Self::Box { lower, upper } => {
                let y = z
                    .iter()
                    .enumerate()
                    .map(|(i, &v)| {
                        let lo = lower.as_ref().map_or(f64::NEG_INFINITY, |l| l[i]);
                        v.min(upper[i]).max(lo)
                    })
                    .collect();
                (y, 0, None)
            }
            Self::Ball { center, radius } => ball_inner_minimizer(z, center, *radius),
        };
        let p: Vec<f64> = z.iter().zip(&inner_point).map(|(a, b)| a.min(*b)).collect();
        let rho = linalg::sub(z, &p);
        let g_value = 0.5 * linalg::norm_sq(&rho);
        Ok(ResidualReport {
            p,
            rho,
            g_value,
            inner_point,
            inner_steps,
            warning,
        })
    }

    /// `dist(z, Q⁺) ≤ tol`, computed through [`Self::project_qplus`].
    pub fn contains_qplus(&self, z: &[f64], tol: f64) -> Result<bool> {
        if tol < 0.0 {
            return Err(Error::Parameter(format!("tolerance must be ≥ 0, got {tol}")));
        }
        let report = self.project_qplus(z)?;
        Ok(linalg::norm(&report.rho) <= tol)
    }

    /// Closed-form `dist(z, Q⁺)`.
    ///
    /// `z ∈ Q⁺` iff the upward orthant `{w ≥ z}` meets `Q`, so the distance
    /// is the gap between `Q` and that orthant. For a ball this is
    /// `max(‖(z − c)₊‖ − R, 0)`; for a box it is `‖(z − upper)₊‖`.
    pub fn qplus_distance(&self, z: &[f64]) -> f64 {
        match self {
            Self::Box { upper, .. } => z
                .iter()
                .zip(upper)
                .map(|(v, u)| (v - u).max(0.0).powi(2))
                .sum::<f64>()
                .sqrt(),
            Self::Ball { center, radius } => {
                let gap = z
                    .iter()
                    .zip(center)
                    .map(|(v, c)| (v - c).max(0.0).powi(2))
                    .sum::<f64>()
                    .sqrt();
                (gap - radius).max(0.0)
            }
        }
    }
}

/// Projected gradient on `g(y) = ½‖(z − y)₊‖²` over the ball.
fn ball_inner_minimizer(
    z: &[f64],
    center: &[f64],
    radius: f64,
) -> (Vec<f64>, usize, Option<InnerSolverWarning>) {
    let project = |y: &mut Vec<f64>| {
        let d = linalg::dist_sq(y, center).sqrt();
        if d > radius {
            let s = radius / d;
            for (v, c) in y.iter_mut().zip(center) {
                *v = c + (*v - c) * s;
            }
        }
    };
    // Warm start at c + u·min(1, R/‖u‖) with u = (z − c)₊, which already
    // minimizes g. Started elsewhere, the iteration slows to a sublinear rate
    // whenever the residual vanishes at the optimum.
    let u: Vec<f64> = z.iter().zip(center).map(|(a, c)| (a - c).max(0.0)).collect();
    let scale = (radius / linalg::norm(&u).max(f64::MIN_POSITIVE)).min(1.0);
    let mut y: Vec<f64> = center.iter().zip(&u).map(|(c, v)| c + scale * v).collect();
    project(&mut y);
    let mut steps = 0;
    let mut next = vec![0.0; y.len()];
    loop {
        for ((n, v), t) in next.iter_mut().zip(&y).zip(z) {
            *n = v + BALL_INNER_STEP * (t - v).max(0.0);
        }
        project(&mut next);
        let update = linalg::dist_sq(&next, &y).sqrt();
        std::mem::swap(&mut y, &mut next);
        steps += 1;
        if update < BALL_INNER_UPDATE_TOL {
            return (y, steps, None);
        }
        if steps >= BALL_INNER_MAX_STEPS {
            let gradient_norm = update / BALL_INNER_STEP;
            let warning = (gradient_norm > BALL_INNER_WARN_GRAD).then_some(InnerSolverWarning {
                steps,
                gradient_norm,
            });
            return (y, steps, warning);
        }
    }
}

/// `H(x) = ½ dist²(x, C)` using the decision set's projection.
pub fn set_distance(x: &[f64], set: &DecisionSet) -> Result<f64> {
    check_len(set.dim(), x.len())?;
    let p = set.project(x);
    Ok(0.5 * linalg::dist_sq(x, &p))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ball() -> ConstraintRegion {
        ConstraintRegion::ball(vec![0.4, 0.4], 0.2).unwrap()
    }

    #[test]
    fn q_membership_examples() {
        let q = ball();
        assert!(q.contains(&[0.4, 0.4]).unwrap());
        assert!(q.contains(&[0.4, 0.6]).unwrap());
        let b = ConstraintRegion::boxed(None, vec![0.3, 0.4]).unwrap();
        assert!(!b.contains(&[0.31, 0.1]).unwrap());
        assert!(matches!(q.contains(&[0.4]), Err(Error::Dimension { .. })));
    }

    #[test]
    fn box_qplus_examples() {
        let b = ConstraintRegion::boxed(None, vec![1.0, 1.0]).unwrap();
        let r = b.project_qplus(&[0.5, 0.5]).unwrap();
        assert_eq!(r.p, vec![0.5, 0.5]);
        assert_eq!(r.rho, vec![0.0, 0.0]);
        let r = b.project_qplus(&[2.0, -1.0]).unwrap();
        assert_eq!(r.p, vec![1.0, -1.0]);
        assert_eq!(r.rho, vec![1.0, 0.0]);
        assert_eq!(r.g_value, 0.5);
    }

    #[test]
    fn box_with_lower_bound_has_same_hull() {
        let b = ConstraintRegion::boxed(Some(vec![0.5, 0.5]), vec![1.0, 1.0]).unwrap();
        let r = b.project_qplus(&[0.0, 2.0]).unwrap();
        assert_eq!(r.p, vec![0.0, 1.0]);
        assert!(!b.contains(&[0.0, 1.0]).unwrap());
        assert!(b.contains_qplus(&[0.0, 1.0], 0.0).unwrap());
    }

    #[test]
    fn ball_qplus_far_corner() {
        // Brute force over a 2000 × 2000 grid of the ball's bounding square.
        let q = ball();
        let z = [1.0, 1.0];
        let n = 2000;
        let mut best = (f64::INFINITY, [0.0, 0.0]);
        for i in 0..=n {
            for j in 0..=n {
                let y = [0.2 + 0.4 * i as f64 / n as f64, 0.2 + 0.4 * j as f64 / n as f64];
                if (y[0] - 0.4f64).powi(2) + (y[1] - 0.4f64).powi(2) > 0.04 {
                    continue;
                }
                let g = (z[0] - y[0]).max(0.0).powi(2) + (z[1] - y[1]).max(0.0).powi(2);
                if g < best.0 {
                    best = (g, y);
                }
            }
        }
        let r = q.project_qplus(&z).unwrap();
        for i in 0..2 {
            assert!((r.p[i] - best.1[i].min(z[i])).abs() < 5e-4);
            assert!((r.p[i] - 0.541_421_356_237_309_5).abs() < 1e-9);
            assert!((r.rho[i] - 0.458_578_643_762_690_5).abs() < 1e-9);
        }
        assert!(!q.contains_qplus(&z, 1e-6).unwrap());
        assert!((linalg::norm(&r.rho) - 0.648_528_137_423_857).abs() < 1e-9);
    }

    #[test]
    fn qplus_contains_q_and_free_disposal() {
        let q = ball();
        assert!(q.contains_qplus(&[0.4, 0.6], 1e-9).unwrap());
        assert!(q.contains_qplus(&[-0.6, -0.4], 1e-9).unwrap());
        assert!(q.contains_qplus(&[0.5, 0.5], 1e-9).unwrap());
    }

    #[test]
    fn closed_form_distance_matches_projection() {
        let q = ball();
        for z in [[1.0, 1.0], [0.9, 0.1], [-3.0, 0.75], [0.55, 0.55]] {
            let r = q.project_qplus(&z).unwrap();
            assert!((linalg::norm(&r.rho) - q.qplus_distance(&z)).abs() < 1e-9, "{z:?}");
        }
    }

    #[test]
    fn set_distance_examples() {
        let c = DecisionSet::boxed(vec![0.0], vec![1.0]).unwrap();
        assert_eq!(set_distance(&[0.5], &c).unwrap(), 0.0);
        assert_eq!(set_distance(&[3.0], &c).unwrap(), 2.0);
        let c = DecisionSet::boxed(vec![0.0, 0.0], vec![5.0, 5.0]).unwrap();
        assert_eq!(set_distance(&[6.0, 7.0], &c).unwrap(), 2.5);
    }

    #[test]
    fn invalid_regions() {
        assert!(ConstraintRegion::ball(vec![0.0, 0.0], 0.0).is_err());
        assert!(ConstraintRegion::boxed(Some(vec![1.0, 0.0]), vec![0.0, 1.0]).is_err());
        assert!(ball().contains_qplus(&[0.0, 0.0], -1.0).is_err());
    }
}
