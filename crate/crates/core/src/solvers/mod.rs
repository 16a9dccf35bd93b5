//! Phase-1 CQ feasibility, the lower bound `φ_lb`, the adaptive balanced
//! penalty (ABP) iteration and the two-phase per-ray driver.

mod abp;
mod cq;
mod lower_bound;
mod two_phase;

pub use abp::{AbpFailure, AbpOutcome, PenaltyContext, StepDirections, TraceOptions};
pub use cq::{cq_solve, estimate_jacobian_bound, phase_one_step, CqOutcome, CQ_MAX_ITERS, CQ_TOL, JACOBIAN_SAMPLES};
pub use lower_bound::{lower_bound, LowerBound, LowerBoundCache};
pub use two_phase::{two_phase_solve, PhaseOne, RayFailure, RaySolution, TwoPhaseOptions, TwoPhaseResult};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Consecutive sub-threshold merit values that end an ABP run early.
pub const STALL_WINDOW: usize = 10;

/// Parameters of the ABP iteration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverConfig {
    /// Optimality weight α.
    pub alpha: f64,
    /// Set-feasibility weight β. The large default makes the iteration
    /// settle on the feasible side of positive-gap rays instead of at the
    /// unconstrained penalty minimizer.
    pub beta: f64,
    /// Image-feasibility weight γ.
    pub gamma: f64,
    /// Normalizer floor μ.
    pub mu: f64,
    /// Step exponent ν of `λ_k = 1/(k+1)^ν`.
    pub nu: f64,
    pub max_iters: usize,
    /// Merit threshold for early stopping.
    pub phi_tol: f64,
    /// Distance below which an iterate counts as feasible for `C` and `Q⁺`
    /// when choosing the returned iterate.
    pub feasibility_tol: f64,
    pub seed: u64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            alpha: 1.0,
            beta: 1e4,
            gamma: 1e4,
            mu: 1e-3,
            nu: 1.0,
            max_iters: 20_000,
            phi_tol: 1e-10,
            feasibility_tol: 1e-7,
            seed: 0,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::Config {
                    path: format!("solver.{name}"),
                    message: format!("must be positive and finite, got {v}"),
                })
            }
        };
        positive("alpha", self.alpha)?;
        positive("beta", self.beta)?;
        positive("gamma", self.gamma)?;
        positive("mu", self.mu)?;
        positive("phi_tol", self.phi_tol)?;
        positive("feasibility_tol", self.feasibility_tol)?;
        if !(self.nu > 0.5 && self.nu <= 1.0) {
            return Err(Error::Config {
                path: "solver.nu".into(),
                message: format!("must lie in (0.5, 1], got {}", self.nu),
            });
        }
        if self.max_iters == 0 {
            return Err(Error::Config {
                path: "solver.max_iters".into(),
                message: "must be at least 1".into(),
            });
        }
        Ok(())
    }

    /// `λ_k = 1/(k+1)^ν`.
    pub fn step_size(&self, k: usize) -> f64 {
        ((k + 1) as f64).powf(-self.nu)
    }
}

/// Diagnostics of one ABP iteration at `x^k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterateRecord {
    pub k: usize,
    pub x: Vec<f64>,
    pub f: Vec<f64>,
    pub delta: f64,
    pub h: f64,
    pub g: f64,
    pub phi: f64,
    pub eta: f64,
    pub lambda: f64,
    /// Whether `Δ_k ≥ 0`, i.e. the optimality direction was active.
    pub indicator: bool,
    #[serde(skip)]
    pub directions: Option<StepDirections>,
}

/// The iterate sequence of one ABP run.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct IterateTrace {
    pub records: Vec<IterateRecord>,
}

impl IterateTrace {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, IterateRecord> {
        self.records.iter()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_config_is_valid() {
        SolverConfig::default().validate().unwrap();
    }

    #[test]
    fn nu_range_enforced() {
        for nu in [0.3, 0.5, 1.2] {
            let cfg = SolverConfig { nu, ..Default::default() };
            assert!(matches!(cfg.validate(), Err(Error::Config { path, .. }) if path == "solver.nu"));
        }
        let cfg = SolverConfig { nu: 0.75, ..Default::default() };
        cfg.validate().unwrap();
    }

    #[test]
    fn weights_must_be_positive() {
        let cfg = SolverConfig { gamma: 0.0, ..Default::default() };
        assert!(cfg.validate().is_err());
        let cfg = SolverConfig { mu: -1.0, ..Default::default() };
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn schedule_values() {
        let cfg = SolverConfig { nu: 1.0, ..Default::default() };
        assert_eq!(cfg.step_size(0), 1.0);
        assert_eq!(cfg.step_size(3), 0.25);
    }
}
