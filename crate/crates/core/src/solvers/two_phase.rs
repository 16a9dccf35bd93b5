use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::abp::{AbpOutcome, PenaltyContext, TraceOptions};
use super::cq::{cq_solve, phase_one_step, CQ_MAX_ITERS, CQ_TOL};
use super::lower_bound::{LowerBound, LowerBoundCache};
use super::SolverConfig;
use crate::error::{check_len, Error, Result};
use crate::geometry::ConstraintRegion;
use crate::metrics::{ApproxEntry, ParetoApproximation};
use crate::problem::{PreferenceVector, ProblemInstance};
use crate::scalarization::{chebyshev_value, compute_ideal_point, IdealPoint};

#[derive(Debug, Clone, PartialEq)]
pub struct TwoPhaseOptions {
    pub solver: SolverConfig,
    /// Per-ray ABP tracing.
    pub trace: TraceOptions,
    pub cq_tol: f64,
    pub cq_max_iters: usize,
}

impl Default for TwoPhaseOptions {
    fn default() -> Self {
        Self {
            solver: SolverConfig::default(),
            trace: TraceOptions::OFF,
            cq_tol: CQ_TOL,
            cq_max_iters: CQ_MAX_ITERS,
        }
    }
}

impl TwoPhaseOptions {
    pub fn with_solver(solver: SolverConfig) -> Self {
        Self {
            solver,
            ..Self::default()
        }
    }
}

/// Outcome of the shared feasibility phase.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseOne {
    pub x_feas: Vec<f64>,
    pub converged: bool,
    pub iterations: usize,
    pub g_value: f64,
    pub step: f64,
}

#[derive(Debug, Clone)]
pub struct RaySolution {
    pub ray_index: usize,
    pub r: PreferenceVector,
    pub lower_bound: LowerBound,
    pub outcome: AbpOutcome,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RayFailure {
    pub ray_index: usize,
    pub message: String,
    /// Iterations completed before the failure.
    pub iterations: usize,
}

#[derive(Debug, Clone)]
pub struct TwoPhaseResult {
    pub ideal: IdealPoint,
    pub phase_one: PhaseOne,
    /// Successful rays in input order.
    pub solutions: Vec<RaySolution>,
    pub failures: Vec<RayFailure>,
    pub approximation: ParetoApproximation,
}

/// Phase 1 finds one feasible start by CQ; Phase 2 runs the lower-bound
/// solver and ABP independently for every ray, in parallel.
///
/// When CQ does not converge, Phase 2 starts from its best point and
/// `phase_one.converged` is false.
pub fn two_phase_solve(
    problem: &ProblemInstance,
    region: &ConstraintRegion,
    rays: &[PreferenceVector],
    options: &TwoPhaseOptions,
) -> Result<TwoPhaseResult> {
    if rays.is_empty() {
        return Err(Error::Parameter("need at least one preference ray".into()));
    }
    options.solver.validate()?;
    region.validate()?;
    check_len(problem.m(), region.dim())?;
    for r in rays {
        check_len(problem.m(), r.len())?;
    }

    let ideal = compute_ideal_point(problem)?;
    let step = phase_one_step(problem, options.solver.seed);
    let cq = cq_solve(problem, region, problem.start(), step, options.cq_max_iters, options.cq_tol)?;
    let phase_one = PhaseOne {
        x_feas: cq.x,
        converged: cq.converged,
        iterations: cq.iterations,
        g_value: cq.g_value,
        step,
    };

    let cache = LowerBoundCache::new();
    let outcomes: Vec<std::result::Result<RaySolution, RayFailure>> = rays
        .par_iter()
        .enumerate()
        .map(|(ray_index, r)| {
            solve_ray(problem, region, r, &ideal, &cache, &phase_one.x_feas, options).map_or_else(
                |(message, iterations)| {
                    Err(RayFailure {
                        ray_index,
                        message,
                        iterations,
                    })
                },
                |(lower_bound, outcome)| {
                    Ok(RaySolution {
                        ray_index,
                        r: r.clone(),
                        lower_bound,
                        outcome,
                    })
                },
            )
        })
        .collect();

    let mut solutions = Vec::new();
    let mut failures = Vec::new();
    for o in outcomes {
        match o {
            Ok(s) => solutions.push(s),
            Err(f) => failures.push(f),
        }
    }
    let entries = solutions
        .iter()
        .map(|s| {
            let y = s.outcome.selected.f.clone();
            let phi = chebyshev_value(&y, &s.r, &ideal);
            ApproxEntry::new(s.ray_index, s.r.clone(), s.outcome.x.clone(), y, phi, region)
        })
        .collect::<Result<Vec<_>>>()?;
    let approximation = ParetoApproximation {
        problem: problem.name().to_string(),
        region: region.clone(),
        entries,
        phase_one_converged: phase_one.converged,
        failures: failures.iter().map(|f| (f.ray_index, f.message.clone())).collect(),
    };
    Ok(TwoPhaseResult {
        ideal,
        phase_one,
        solutions,
        failures,
        approximation,
    })
}

fn solve_ray(
    problem: &ProblemInstance,
    region: &ConstraintRegion,
    r: &PreferenceVector,
    ideal: &IdealPoint,
    cache: &LowerBoundCache,
    x0: &[f64],
    options: &TwoPhaseOptions,
) -> std::result::Result<(LowerBound, AbpOutcome), (String, usize)> {
    let lb = cache
        .get_or_compute(problem, r, ideal, options.solver.seed)
        .map_err(|e| (e.to_string(), 0))?;
    let ctx = PenaltyContext::new(problem, region, r, ideal, lb.value).map_err(|e| (e.to_string(), 0))?;
    let outcome = ctx
        .solve(x0, &options.solver, options.trace)
        .map_err(|f| (f.to_string(), f.trace.len()))?;
    Ok((lb, outcome))
}
