use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::geometry::ConstraintRegion;
use crate::problem::ProblemInstance;

/// Decision points sampled when estimating `‖J_F‖²_op`.
pub const JACOBIAN_SAMPLES: usize = 100;
pub const CQ_TOL: f64 = 1e-12;
pub const CQ_MAX_ITERS: usize = 20_000;

#[derive(Debug, Clone, PartialEq)]
pub struct CqOutcome {
    /// The visited iterate with the smallest `G`.
    pub x: Vec<f64>,
    pub converged: bool,
    pub iterations: usize,
    /// `G` at the returned point.
    pub g_value: f64,
    /// `G(x^k)` for every evaluated iterate, starting with `x0`.
    pub g_history: Vec<f64>,
}

/// CQ iteration `x ← P_C(x − step·J_F(x)ᵀ(F(x) − P_{Q⁺}(F(x))))` until
/// `G(x) < tol` or `max_iters` steps have been taken.
pub fn cq_solve(
    problem: &ProblemInstance,
    region: &ConstraintRegion,
    x0: &[f64],
    step: f64,
    max_iters: usize,
    tol: f64,
) -> Result<CqOutcome> {
    if !(step > 0.0 && step.is_finite()) {
        return Err(Error::Parameter(format!("CQ step must be positive, got {step}")));
    }
    problem.check_decision(x0)?;
    crate::error::check_len(problem.m(), region.dim())?;

    let mut x = x0.to_vec();
    let mut best = (x.clone(), f64::INFINITY);
    let mut g_history = Vec::new();
    for k in 0..=max_iters {
        let f = problem.evaluate(&x);
        if !crate::linalg::all_finite(&f) {
            return Err(Error::Numeric {
                iteration: k,
                message: "objective value is not finite in CQ".into(),
            });
        }
        let residual = region.project_qplus(&f)?;
        let g = residual.g_value;
        g_history.push(g);
        if g < best.1 {
            best = (x.clone(), g);
        }
        if g < tol {
            return Ok(CqOutcome {
                x,
                converged: true,
                iterations: k,
                g_value: g,
                g_history,
            });
        }
        if k == max_iters {
            break;
        }
        let grad = problem.jacobian(&x).transpose_mul(&residual.rho);
        let trial: Vec<f64> = x.iter().zip(&grad).map(|(xi, gi)| xi - step * gi).collect();
        x = problem.project(&trial);
    }
    Ok(CqOutcome {
        x: best.0,
        converged: false,
        iterations: max_iters,
        g_value: best.1,
        g_history,
    })
}

/// Largest `‖J_F(x)‖²_op` over seeded random points of the decision set.
pub fn estimate_jacobian_bound(problem: &ProblemInstance, samples: usize, seed: u64) -> f64 {
    let set = problem.decision_set();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut bound = 0.0f64;
    for _ in 0..samples.max(1) {
        let raw: Vec<f64> = set
            .lower()
            .iter()
            .zip(set.upper())
            .map(|(l, u)| if u > l { rng.gen_range(*l..=*u) } else { *l })
            .collect();
        let x = set.project(&raw);
        let norm = problem.jacobian(&x).op_norm_sq();
        if norm.is_finite() {
            bound = bound.max(norm);
        }
    }
    bound
}

/// Phase-1 step `0.5 / L̂`.
pub fn phase_one_step(problem: &ProblemInstance, seed: u64) -> f64 {
    0.5 / estimate_jacobian_bound(problem, JACOBIAN_SAMPLES, seed).max(1e-12)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::benchmarks::{build_benchmark, BenchmarkName};

    #[test]
    fn feasible_start_converges_immediately() {
        let spec = build_benchmark(BenchmarkName::Cvx1);
        let out = cq_solve(&spec.problem, &spec.default_region, &[0.4], 0.1, 100, CQ_TOL).unwrap();
        assert!(out.converged);
        assert_eq!(out.iterations, 0);
        assert_eq!(out.x, vec![0.4]);
    }

    #[test]
    fn cvx2_residual_decreases_from_origin() {
        let spec = build_benchmark(BenchmarkName::Cvx2);
        for step in [0.5, 0.1, phase_one_step(&spec.problem, 0).min(0.5)] {
            let out = cq_solve(&spec.problem, &spec.default_region, &[0.0, 0.0], step, 100, 0.0).unwrap();
            assert_eq!(out.g_history.len(), 101);
            for pair in out.g_history.windows(2) {
                assert!(pair[1] <= pair[0] + 1e-15, "{pair:?}");
            }
        }
    }

    #[test]
    fn phase_one_step_uses_jacobian_bound() {
        let spec = build_benchmark(BenchmarkName::Cvx1);
        // |J|² ≤ 1 + 4(x−1)² ≤ 5 on [0, 1].
        let step = phase_one_step(&spec.problem, 0);
        assert!(step >= 0.1 && step < 0.2, "{step}");
    }

    #[test]
    fn rejects_bad_step() {
        let spec = build_benchmark(BenchmarkName::Cvx1);
        assert!(cq_solve(&spec.problem, &spec.default_region, &[0.4], 0.0, 10, CQ_TOL).is_err());
    }
}
