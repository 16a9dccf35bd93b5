//! Weighted Chebyshev scalarization `φ(x) = maxᵢ rᵢ (fᵢ(x) − zᵢ*)`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{check_len, Error, Result};
use crate::problem::{DecisionSet, PreferenceVector, ProblemInstance};

/// Componentwise infima of the objectives over the decision set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct IdealPoint(Vec<f64>);

impl IdealPoint {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Parameter("ideal point components must be finite".into()));
        }
        Ok(Self(values))
    }

    pub fn zeros(m: usize) -> Self {
        Self(vec![0.0; m])
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

impl TryFrom<Vec<f64>> for IdealPoint {
    type Error = Error;
    fn try_from(v: Vec<f64>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<IdealPoint> for Vec<f64> {
    fn from(z: IdealPoint) -> Self {
        z.0
    }
}

pub fn chebyshev_value(fx: &[f64], r: &PreferenceVector, z_star: &IdealPoint) -> f64 {
    weighted_gaps(fx, r, z_star).fold(f64::NEG_INFINITY, f64::max)
}

/// Smallest index attaining the maximum weighted gap.
pub fn active_index(fx: &[f64], r: &PreferenceVector, z_star: &IdealPoint) -> usize {
    let mut best = (0, f64::NEG_INFINITY);
    for (i, v) in weighted_gaps(fx, r, z_star).enumerate() {
        if v > best.1 {
            best = (i, v);
        }
    }
    best.0
}

fn weighted_gaps<'a>(
    fx: &'a [f64],
    r: &'a PreferenceVector,
    z_star: &'a IdealPoint,
) -> impl Iterator<Item = f64> + 'a {
    debug_assert_eq!(fx.len(), r.len());
    fx.iter()
        .zip(r.as_slice())
        .zip(z_star.as_slice())
        .map(|((f, w), z)| w * (f - z))
}

/// `w = r_{i*} ∇f_{i*}(x)`, a subgradient of `φ` at `x` when the objectives are convex.
pub fn chebyshev_subgradient(
    x: &[f64],
    problem: &ProblemInstance,
    r: &PreferenceVector,
    z_star: &IdealPoint,
) -> Vec<f64> {
    let fx = problem.evaluate(x);
    let jac = problem.jacobian(x);
    let i = active_index(&fx, r, z_star);
    jac.row(i).iter().map(|g| r[i] * g).collect()
}

/// Number of random starts for the numeric ideal-point search.
const IDEAL_STARTS: usize = 64;
const IDEAL_ITERS: usize = 5000;
const IDEAL_LIPSCHITZ_SAMPLES: usize = 100;

/// Ideal point `zᵢ* = inf_{x ∈ C} fᵢ(x)`.
///
/// Uses the problem's registered analytic value when present, otherwise a
/// multi-start projected-gradient search over a box decision set. The numeric
/// route is a heuristic lower estimate for non-convex objectives.
pub fn compute_ideal_point(problem: &ProblemInstance) -> Result<IdealPoint> {
    if let Some(z) = problem.ideal_override() {
        return Ok(z.clone());
    }
    let (lower, upper) = match problem.decision_set() {
        DecisionSet::Box { lower, upper } => (lower, upper),
        other => {
            return Err(Error::Unsupported(format!(
                "numeric ideal point needs a box decision set, got {other:?}"
            )))
        }
    };
    let mut rng = ChaCha8Rng::seed_from_u64(0x1dea1);
    let sample = |rng: &mut ChaCha8Rng| -> Vec<f64> {
        lower
            .iter()
            .zip(upper)
            .map(|(l, u)| if u > l { rng.gen_range(*l..=*u) } else { *l })
            .collect()
    };
    let m = problem.m();
    let mut lipschitz = vec![0.0f64; m];
    for _ in 0..IDEAL_LIPSCHITZ_SAMPLES {
        let a = sample(&mut rng);
        let b = sample(&mut rng);
        let (ga, gb) = (problem.jacobian(&a), problem.jacobian(&b));
        let dx: f64 = a.iter().zip(&b).map(|(p, q)| (p - q).powi(2)).sum::<f64>().sqrt();
        if dx == 0.0 {
            continue;
        }
        for (i, l) in lipschitz.iter_mut().enumerate() {
            let dg: f64 = ga.row(i).iter().zip(gb.row(i)).map(|(p, q)| (p - q).powi(2)).sum::<f64>().sqrt();
            if dg.is_finite() {
                *l = l.max(dg / dx);
            }
        }
    }
    let starts: Vec<Vec<f64>> = std::iter::once(problem.decision_set().default_start())
        .chain((1..IDEAL_STARTS).map(|_| sample(&mut rng)))
        .collect();
    let mut ideal = vec![f64::INFINITY; m];
    for (i, best) in ideal.iter_mut().enumerate() {
        let step = 1.0 / lipschitz[i].max(1e-8);
        for start in &starts {
            let mut x = start.clone();
            for _ in 0..IDEAL_ITERS {
                let f = problem.evaluate(&x)[i];
                if f < *best {
                    *best = f;
                }
                let grad = problem.jacobian(&x);
                let trial: Vec<f64> = x.iter().zip(grad.row(i)).map(|(v, g)| v - step * g).collect();
                let next = problem.project(&trial);
                if next == x {
                    break;
                }
                x = next;
            }
            *best = best.min(problem.evaluate(&x)[i]);
        }
    }
    check_len(m, ideal.len())?;
    IdealPoint::new(ideal)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ray(a: f64, b: f64) -> PreferenceVector {
        PreferenceVector::new(vec![a, b]).unwrap()
    }

    #[test]
    fn value_examples() {
        let z = IdealPoint::zeros(2);
        assert!((chebyshev_value(&[0.2, 0.4], &ray(0.5, 0.5), &z) - 0.2).abs() < 1e-15);
        assert_eq!(chebyshev_value(&[0.0, 0.0], &ray(0.5, 0.5), &z), 0.0);
        assert_eq!(chebyshev_value(&[1.0, 0.0], &ray(0.25, 0.75), &z), 0.25);
    }

    #[test]
    fn active_index_examples() {
        let z = IdealPoint::zeros(2);
        assert_eq!(active_index(&[0.2, 0.4], &ray(0.5, 0.5), &z), 1);
        assert_eq!(active_index(&[0.4, 0.4], &ray(0.5, 0.5), &z), 0);
        let third = 1.0 / 3.0;
        let r3 = PreferenceVector::new(vec![third, third, 1.0 - 2.0 * third]).unwrap();
        assert_eq!(active_index(&[0.0, 1.0, 2.0], &r3, &IdealPoint::zeros(3)), 2);
    }

    #[test]
    fn ideal_point_rejects_non_finite() {
        assert!(IdealPoint::new(vec![0.0, f64::NEG_INFINITY]).is_err());
    }
}
