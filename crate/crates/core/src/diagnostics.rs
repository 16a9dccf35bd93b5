//! The half-space surrogate of `G`, executable checks of the descent
//! inequalities along an ABP trace, and the bound-gap report.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::benchmarks::{ground_truth, BenchmarkSpec};
use crate::error::{Error, Result};
use crate::geometry::ConstraintRegion;
use crate::linalg::{dist_sq, dot, norm_sq, sub};
use crate::problem::{PreferenceVector, ProblemInstance};
use crate::solvers::{lower_bound, IterateTrace};

/// Rays with `σ` at or below this value count as zero-gap.
pub const GAP_ZERO_TOL: f64 = 1e-6;
/// Slack of the inner-product and Lyapunov checks.
pub const LEMMA_SLACK: f64 = 1e-9;
pub const FEJER_SLACK: f64 = 1e-6;
pub const MINORANT_SLACK: f64 = 1e-10;
pub const ANCHOR_VALUE_TOL: f64 = 1e-12;
pub const ANCHOR_GRADIENT_TOL: f64 = 1e-10;
/// Anchors drawn from a trace for the minorant check.
pub const MINORANT_ANCHORS: usize = 50;
/// Random decision points per anchor for the minorant check.
pub const MINORANT_POINTS: usize = 100;

/// `(p^k, ρ^k)` from the projection of `F(x^k)` onto `Q⁺`.
#[derive(Debug, Clone, PartialEq)]
pub struct SurrogateAnchor {
    pub p: Vec<f64>,
    pub rho: Vec<f64>,
}

/// `δ(x) = [⟨ρ, F(x) − p⟩]₊² / (2‖ρ‖²)`, identically zero when `ρ = 0`.
pub fn delta_value(x: &[f64], anchor: &SurrogateAnchor, problem: &ProblemInstance) -> f64 {
    let rr = norm_sq(&anchor.rho);
    if rr == 0.0 {
        return 0.0;
    }
    let s = dot(&anchor.rho, &sub(&problem.evaluate(x), &anchor.p)).max(0.0);
    s * s / (2.0 * rr)
}

/// `∇δ(x) = [⟨ρ, F(x) − p⟩]₊ / ‖ρ‖² · J_F(x)ᵀρ`.
pub fn delta_gradient(x: &[f64], anchor: &SurrogateAnchor, problem: &ProblemInstance) -> Vec<f64> {
    let rr = norm_sq(&anchor.rho);
    if rr == 0.0 {
        return vec![0.0; x.len()];
    }
    let s = dot(&anchor.rho, &sub(&problem.evaluate(x), &anchor.p)).max(0.0);
    problem
        .jacobian(x)
        .transpose_mul(&anchor.rho)
        .into_iter()
        .map(|g| s / rr * g)
        .collect()
}

/// Pass/fail tally of one inequality over a trace. A slack is the amount by
/// which the inequality holds, so negative values are violations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckSummary {
    pub name: String,
    pub evaluated: usize,
    pub failed: usize,
    pub worst_slack: f64,
}

impl CheckSummary {
    fn new(name: &str) -> Self {
        Self {
            name: name.to_string(),
            evaluated: 0,
            failed: 0,
            worst_slack: f64::INFINITY,
        }
    }

    fn record(&mut self, slack: f64) {
        self.evaluated += 1;
        if !(slack >= 0.0) {
            self.failed += 1;
        }
        self.worst_slack = self.worst_slack.min(slack);
    }

    pub fn passed(&self) -> bool {
        self.failed == 0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LemmaReport {
    pub checks: Vec<CheckSummary>,
}

impl LemmaReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(CheckSummary::passed)
    }

    pub fn check(&self, name: &str) -> Option<&CheckSummary> {
        self.checks.iter().find(|c| c.name == name)
    }
}

/// What the lemma suite needs besides the trace.
#[derive(Debug, Clone, Copy)]
pub struct LemmaContext<'a> {
    pub problem: &'a ProblemInstance,
    pub region: &'a ConstraintRegion,
    /// Seeds the random points of the minorant check.
    pub seed: u64,
}

/// Checks every record of `trace` against a constrained minimizer `x_star`.
///
/// The inner-product, Lyapunov and quasi-Fejér inequalities are the ones
/// that make ABP converge on zero-gap rays; the surrogate checks confirm
/// that `δ` agrees with `G` at each anchor and stays below it elsewhere.
/// The trace must carry direction vectors.
pub fn check_lemma_suite(trace: &IterateTrace, x_star: &[f64], ctx: &LemmaContext<'_>) -> Result<LemmaReport> {
    let problem = ctx.problem;
    let mut set_inner = CheckSummary::new("set_inner_product");
    let mut image_inner = CheckSummary::new("image_inner_product");
    let mut opt_inner = CheckSummary::new("optimality_inner_product");
    let mut lyapunov = CheckSummary::new("lyapunov");
    let mut fejer = CheckSummary::new("quasi_fejer");
    let mut anchor_value = CheckSummary::new("anchor_value");
    let mut anchor_gradient = CheckSummary::new("anchor_gradient");
    let mut minorant = CheckSummary::new("surrogate_minorant");

    let records = &trace.records;
    let Some(first) = records.first() else {
        return Err(Error::Parameter("empty trace".into()));
    };
    let d0 = dist_sq(&first.x, x_star);
    let mut lambda_sq_sum = 0.0;
    let stride = (records.len() / MINORANT_ANCHORS).max(1);
    let mut rng = ChaCha8Rng::seed_from_u64(ctx.seed);
    let set = problem.decision_set();

    for (idx, rec) in records.iter().enumerate() {
        let dirs = rec
            .directions
            .as_ref()
            .ok_or_else(|| Error::Parameter(format!("trace record {} has no direction vectors", rec.k)))?;
        let diff = sub(&rec.x, x_star);
        set_inner.record(dot(&dirs.z, &diff) - rec.h + LEMMA_SLACK);
        image_inner.record(dot(&dirs.v, &diff) - rec.g + LEMMA_SLACK);
        if rec.indicator {
            opt_inner.record(dot(&dirs.w, &diff) - rec.delta + LEMMA_SLACK);
        }

        let dk = norm_sq(&diff);
        fejer.record(d0 + lambda_sq_sum + FEJER_SLACK - dk);
        lambda_sq_sum += rec.lambda * rec.lambda;
        if let Some(next) = records.get(idx + 1) {
            let bound = dk - 2.0 * rec.lambda / rec.eta * rec.phi + rec.lambda * rec.lambda + LEMMA_SLACK;
            lyapunov.record(bound - dist_sq(&next.x, x_star));
        }

        let anchor = SurrogateAnchor {
            p: dirs.p.clone(),
            rho: dirs.rho.clone(),
        };
        anchor_value.record(ANCHOR_VALUE_TOL - (delta_value(&rec.x, &anchor, problem) - rec.g).abs());
        let grad = delta_gradient(&rec.x, &anchor, problem);
        anchor_gradient.record(ANCHOR_GRADIENT_TOL - dist_sq(&grad, &dirs.v).sqrt());

        if idx % stride == 0 {
            for _ in 0..MINORANT_POINTS {
                let raw: Vec<f64> = set
                    .lower()
                    .iter()
                    .zip(set.upper())
                    .map(|(l, u)| if u > l { rng.gen_range(*l..=*u) } else { *l })
                    .collect();
                let y = problem.project(&raw);
                let g = ctx.region.project_qplus(&problem.evaluate(&y))?.g_value;
                minorant.record(g + MINORANT_SLACK - delta_value(&y, &anchor, problem));
            }
        }
    }
    Ok(LemmaReport {
        checks: vec![
            set_inner,
            image_inner,
            opt_inner,
            lyapunov,
            fejer,
            anchor_value,
            anchor_gradient,
            minorant,
        ],
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapEntry {
    pub ray_index: usize,
    pub r: PreferenceVector,
    pub phi_lb: f64,
    /// `None` when the oracle found no feasible point for this ray.
    pub phi_star: Option<f64>,
    pub sigma: Option<f64>,
}

/// Per-ray `σ = φ* − φ_lb` with aggregates over the rays that have a
/// ground-truth point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapReport {
    pub problem: String,
    pub rays: Vec<GapEntry>,
    pub sigma_min: f64,
    pub sigma_max: f64,
    pub sigma_mean: f64,
    pub zero_ray_count: usize,
    pub zero_tol: f64,
}

pub fn verify_gap(
    spec: &BenchmarkSpec,
    region: &ConstraintRegion,
    rays: &[PreferenceVector],
    seed: u64,
) -> Result<GapReport> {
    let truth = ground_truth(spec, region, rays)?;
    let bounds: Vec<f64> = rays
        .par_iter()
        .map(|r| lower_bound(&spec.problem, r, &spec.ideal, seed).map(|lb| lb.value))
        .collect::<Result<_>>()?;
    let entries: Vec<GapEntry> = truth
        .iter()
        .zip(&bounds)
        .map(|(gt, &phi_lb)| {
            let phi_star = gt.phi(&spec.ideal);
            GapEntry {
                ray_index: gt.ray_index,
                r: gt.r.clone(),
                phi_lb,
                phi_star,
                sigma: phi_star.map(|p| p - phi_lb),
            }
        })
        .collect();
    let sigmas: Vec<f64> = entries.iter().filter_map(|e| e.sigma).collect();
    if sigmas.is_empty() {
        return Err(Error::NoGroundTruth(format!(
            "no ray of {} has a feasible ground-truth point",
            spec.name
        )));
    }
    Ok(GapReport {
        problem: spec.name.to_string(),
        sigma_min: sigmas.iter().copied().fold(f64::INFINITY, f64::min),
        sigma_max: sigmas.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        sigma_mean: sigmas.iter().sum::<f64>() / sigmas.len() as f64,
        zero_ray_count: sigmas.iter().filter(|s| **s <= GAP_ZERO_TOL).count(),
        zero_tol: GAP_ZERO_TOL,
        rays: entries,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::benchmarks::{build_benchmark, BenchmarkName};

    #[test]
    fn zero_residual_gives_zero_surrogate() {
        let spec = build_benchmark(BenchmarkName::Cvx2);
        let anchor = SurrogateAnchor {
            p: vec![0.1, 0.2],
            rho: vec![0.0, 0.0],
        };
        assert_eq!(delta_value(&[1.0, 2.0], &anchor, &spec.problem), 0.0);
        assert_eq!(delta_gradient(&[1.0, 2.0], &anchor, &spec.problem), vec![0.0, 0.0]);
    }

    #[test]
    fn surrogate_matches_g_at_anchor() {
        let spec = build_benchmark(BenchmarkName::Cvx2);
        let x = [4.0, 1.0];
        let f = spec.problem.evaluate(&x);
        let rep = spec.default_region.project_qplus(&f).unwrap();
        let anchor = SurrogateAnchor { p: rep.p, rho: rep.rho.clone() };
        assert!((delta_value(&x, &anchor, &spec.problem) - rep.g_value).abs() <= 1e-12);
        let v = spec.problem.jacobian(&x).transpose_mul(&rep.rho);
        assert!(dist_sq(&delta_gradient(&x, &anchor, &spec.problem), &v).sqrt() <= 1e-12);
    }
}
