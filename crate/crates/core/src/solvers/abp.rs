use thiserror::Error;

use super::{IterateRecord, IterateTrace, SolverConfig, STALL_WINDOW};
use crate::error::{check_len, Error, Result};
use crate::geometry::ConstraintRegion;
use crate::linalg;
use crate::problem::{PreferenceVector, ProblemInstance};
use crate::scalarization::{active_index, chebyshev_value, IdealPoint};

/// Everything that fixes the penalized problem for one preference ray.
#[derive(Debug, Clone, Copy)]
pub struct PenaltyContext<'a> {
    pub problem: &'a ProblemInstance,
    pub region: &'a ConstraintRegion,
    pub preference: &'a PreferenceVector,
    pub ideal: &'a IdealPoint,
    /// Lower bound on the constrained optimum, `φ_lb ≤ φ*`.
    pub phi_lb: f64,
}

/// The three direction components at `x^k` and their combination.
#[derive(Debug, Clone, PartialEq)]
pub struct StepDirections {
    /// `z^k = x^k − P_C(x^k)`.
    pub z: Vec<f64>,
    /// `v^k = J_F(x^k)ᵀ ρ^k`.
    pub v: Vec<f64>,
    /// `w^k = r_{i*} ∇f_{i*}(x^k)`.
    pub w: Vec<f64>,
    /// Composite direction `d^k`.
    pub d: Vec<f64>,
    /// `p^k = P_{Q⁺}(F(x^k))`.
    pub p: Vec<f64>,
    /// `ρ^k = F(x^k) − p^k`.
    pub rho: Vec<f64>,
}

/// Which iterations of an ABP run are recorded.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct TraceOptions {
    /// Record every `every`-th iteration; 0 disables tracing.
    pub every: usize,
    /// Keep the direction vectors of each recorded iteration.
    pub directions: bool,
}

impl TraceOptions {
    pub const OFF: Self = Self {
        every: 0,
        directions: false,
    };

    /// Every iteration, with directions.
    pub fn full() -> Self {
        Self {
            every: 1,
            directions: true,
        }
    }

    /// Every `every`-th iteration, scalars and iterates only.
    pub fn summary(every: usize) -> Self {
        Self {
            every: every.max(1),
            directions: false,
        }
    }

    fn records(&self, k: usize) -> bool {
        self.every > 0 && k % self.every == 0
    }
}

/// Result of [`PenaltyContext::solve`].
#[derive(Debug, Clone)]
pub struct AbpOutcome {
    /// The selected iterate.
    pub x: Vec<f64>,
    /// Diagnostics of the selected iterate.
    pub selected: IterateRecord,
    /// Whether the selected iterate met the feasibility tolerance.
    pub feasible: bool,
    pub iterations: usize,
    /// The merit stayed below `phi_tol` for [`STALL_WINDOW`] iterations.
    pub stopped_early: bool,
    /// Recorded iterations as selected by [`TraceOptions`].
    pub trace: IterateTrace,
}

/// A numeric failure inside an ABP run, with the trace recorded so far.
#[derive(Debug, Error)]
#[error("ABP run aborted: {source}")]
pub struct AbpFailure {
    #[source]
    pub source: Error,
    pub trace: IterateTrace,
}

impl<'a> PenaltyContext<'a> {
    pub fn new(
        problem: &'a ProblemInstance,
        region: &'a ConstraintRegion,
        preference: &'a PreferenceVector,
        ideal: &'a IdealPoint,
        phi_lb: f64,
    ) -> Result<Self> {
        check_len(problem.m(), region.dim())?;
        check_len(problem.m(), preference.len())?;
        check_len(problem.m(), ideal.len())?;
        if !phi_lb.is_finite() {
            return Err(Error::Parameter(format!("phi_lb must be finite, got {phi_lb}")));
        }
        Ok(Self {
            problem,
            region,
            preference,
            ideal,
            phi_lb,
        })
    }

    /// `φ(x)`.
    pub fn phi(&self, x: &[f64]) -> f64 {
        chebyshev_value(&self.problem.evaluate(x), self.preference, self.ideal)
    }

    /// One ABP iteration from `x = x^k`; returns `x^{k+1}` and the record of `x^k`.
    pub fn step(&self, x: &[f64], config: &SolverConfig, k: usize) -> Result<(Vec<f64>, IterateRecord)> {
        self.problem.check_decision(x)?;
        let numeric = |what: &str| Error::Numeric {
            iteration: k,
            message: format!("{what} is not finite"),
        };
        if !linalg::all_finite(x) {
            return Err(numeric("iterate"));
        }
        let f = self.problem.evaluate(x);
        if !linalg::all_finite(&f) {
            return Err(numeric("objective value"));
        }
        let jac = self.problem.jacobian(x);
        if !jac.is_finite() {
            return Err(numeric("Jacobian"));
        }

        let residual = self.region.project_qplus(&f)?;
        let z = linalg::sub(x, &self.problem.project(x));
        let v = jac.transpose_mul(&residual.rho);
        let i_star = active_index(&f, self.preference, self.ideal);
        let r_i = self.preference[i_star];
        let w: Vec<f64> = jac.row(i_star).iter().map(|g| r_i * g).collect();

        let delta = chebyshev_value(&f, self.preference, self.ideal) - self.phi_lb;
        let indicator = delta >= 0.0;
        let alpha = if indicator { config.alpha } else { 0.0 };
        let d: Vec<f64> = (0..x.len())
            .map(|j| alpha * w[j] + config.beta * z[j] + config.gamma * v[j])
            .collect();
        let eta = config.mu.max(linalg::norm(&d));
        let lambda = config.step_size(k);
        let scale = lambda / eta;
        let next: Vec<f64> = x.iter().zip(&d).map(|(xi, di)| xi - scale * di).collect();

        let h = 0.5 * linalg::norm_sq(&z);
        let g = residual.g_value;
        let phi = config.alpha * delta.max(0.0) + config.beta * h + config.gamma * g;
        let record = IterateRecord {
            k,
            x: x.to_vec(),
            f,
            delta,
            h,
            g,
            phi,
            eta,
            lambda,
            indicator,
            directions: Some(StepDirections {
                z,
                v,
                w,
                d,
                p: residual.p,
                rho: residual.rho,
            }),
        };
        Ok((next, record))
    }

    /// Runs ABP from `x0` until the merit stalls below `phi_tol` or the
    /// iteration budget is spent.
    ///
    /// Returns the visited iterate of least merit among those within
    /// `feasibility_tol` of both `C` and `Q⁺`, falling back to the least
    /// merit overall when no visited iterate is feasible. Ties go to the
    /// later iterate.
    pub fn solve(&self, x0: &[f64], config: &SolverConfig, tracing: TraceOptions) -> Result<AbpOutcome, AbpFailure> {
        let half_tol_sq = 0.5 * config.feasibility_tol * config.feasibility_tol;
        let mut trace = IterateTrace::default();
        let mut x = x0.to_vec();
        let mut best_any: Option<IterateRecord> = None;
        let mut best_feasible: Option<IterateRecord> = None;
        let mut streak = 0;
        let mut stopped_early = false;
        let mut iterations = 0;

        for k in 0..config.max_iters {
            let (next, mut record) = match self.step(&x, config, k) {
                Ok(ok) => ok,
                Err(source) => return Err(AbpFailure { source, trace }),
            };
            iterations = k + 1;
            let feasible = record.h <= half_tol_sq && record.g <= half_tol_sq;
            let summary = IterateRecord {
                directions: None,
                ..record.clone()
            };
            if best_any.as_ref().map_or(true, |b| record.phi <= b.phi) {
                best_any = Some(summary.clone());
            }
            if feasible && best_feasible.as_ref().map_or(true, |b| record.phi <= b.phi) {
                best_feasible = Some(summary);
            }
            streak = if record.phi < config.phi_tol { streak + 1 } else { 0 };
            if tracing.records(k) {
                if !tracing.directions {
                    record.directions = None;
                }
                trace.records.push(record);
            }
            x = next;
            if streak >= STALL_WINDOW {
                stopped_early = true;
                break;
            }
        }

        let feasible = best_feasible.is_some();
        let selected = best_feasible
            .or(best_any)
            .expect("max_iters ≥ 1 guarantees at least one record");
        Ok(AbpOutcome {
            x: selected.x.clone(),
            selected,
            feasible,
            iterations,
            stopped_early,
            trace,
        })
    }
}
