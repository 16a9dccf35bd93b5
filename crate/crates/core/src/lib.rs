//! Constrained controllable Pareto front computation.
//!
//! Each preference ray `r` selects the weighted Chebyshev optimum of a
//! multi-objective problem `min_{x ∈ C} F(x)` subject to `F(x) ∈ Q⁺`, where
//! `Q⁺ = Q − ℝ₊ᵐ`. The adaptive balanced penalty (ABP) iteration solves each
//! ray after a shared CQ feasibility phase; [`solvers::two_phase_solve`]
//! drives the whole front.
//!
//! ```no_run
//! use abp_core::{build_benchmark, generate_rays, two_phase_solve, BenchmarkName, TwoPhaseOptions};
//!
//! let spec = build_benchmark(BenchmarkName::Cvx1);
//! let rays = generate_rays(2, 50, 1e-3).unwrap();
//! let result = two_phase_solve(&spec.problem, &spec.default_region, &rays, &TwoPhaseOptions::default()).unwrap();
//! println!("{} rays solved", result.solutions.len());
//! ```

pub mod benchmarks;
pub mod diagnostics;
pub mod error;
pub mod geometry;
pub mod linalg;
pub mod metrics;
pub mod problem;
pub mod scalarization;
mod search;
pub mod solvers;

pub use benchmarks::{build_benchmark, build_benchmark_by_name, ground_truth, BenchmarkName, BenchmarkSpec, GroundTruthPoint};
pub use error::{Error, Result};
pub use geometry::{ConstraintRegion, ResidualReport};
pub use metrics::{MetricsReport, ParetoApproximation};
pub use problem::{generate_rays, simplex_grid, DecisionSet, FnObjectives, Objectives, PreferenceVector, ProblemInstance};
pub use scalarization::{chebyshev_value, compute_ideal_point, IdealPoint};
pub use solvers::{two_phase_solve, IterateTrace, SolverConfig, TwoPhaseOptions, TwoPhaseResult};
