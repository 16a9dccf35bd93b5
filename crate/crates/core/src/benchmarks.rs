//! The benchmark catalog: CVX1–CVX3, ZDT1, ZDT2, and their constrained-front
//! oracles.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::ConstraintRegion;
use crate::linalg::Matrix;
use crate::problem::{DecisionSet, Objectives, PreferenceVector, ProblemInstance};
use crate::scalarization::{chebyshev_value, IdealPoint};
use crate::search::zoom_minimize;

/// Decision dimension used for both ZDT problems.
pub const ZDT_DIM: usize = 30;
/// Front samples for the ZDT oracle.
pub const ZDT_FRONT_SAMPLES: usize = 5000;
/// Grid size of the 1-D dense oracle.
pub const GRID_POINTS_1D: usize = 200_000;
/// Points per axis of the 2-D dense oracle.
pub const GRID_POINTS_2D: usize = 2000;
/// Points per angle of the sphere oracle.
pub const SPHERE_GRID_POINTS: usize = 1000;
/// `Q⁺` membership tolerance used by every oracle filter.
pub const ORACLE_FEAS_TOL: f64 = 1e-12;

// Below this x1 the ZDT1 term √(x1·g) continues along its tangent, which
// keeps the Jacobian finite and still points back into the box.
const ZDT_X1_KNOT: f64 = 1e-12;
const ZDT_G_FLOOR: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BenchmarkName {
    #[serde(rename = "CVX1")]
    Cvx1,
    #[serde(rename = "CVX2")]
    Cvx2,
    #[serde(rename = "CVX3")]
    Cvx3,
    #[serde(rename = "ZDT1")]
    Zdt1,
    #[serde(rename = "ZDT2")]
    Zdt2,
}

impl BenchmarkName {
    pub const ALL: [BenchmarkName; 5] = [Self::Cvx1, Self::Cvx2, Self::Cvx3, Self::Zdt1, Self::Zdt2];

    pub fn as_str(self) -> &'static str {
        match self {
            Self::Cvx1 => "CVX1",
            Self::Cvx2 => "CVX2",
            Self::Cvx3 => "CVX3",
            Self::Zdt1 => "ZDT1",
            Self::Zdt2 => "ZDT2",
        }
    }
}

impl fmt::Display for BenchmarkName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for BenchmarkName {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|b| b.as_str().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::UnknownBenchmark(s.to_string()))
    }
}

/// How the constrained ground truth is produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GroundTruthMethod {
    /// Dense decision-space grid, `Q⁺` filter, then window refinement.
    DenseGrid,
    /// Spherical-coordinate grid on the unit-sphere patch.
    SphereGrid,
    /// Samples of the analytic Pareto front.
    AnalyticFront,
}

#[derive(Debug, Clone, Copy)]
struct BenchmarkObjectives {
    name: BenchmarkName,
}

impl Objectives for BenchmarkObjectives {
    fn n(&self) -> usize {
        match self.name {
            BenchmarkName::Cvx1 => 1,
            BenchmarkName::Cvx2 => 2,
            BenchmarkName::Cvx3 => 3,
            BenchmarkName::Zdt1 | BenchmarkName::Zdt2 => ZDT_DIM,
        }
    }

    fn m(&self) -> usize {
        match self.name {
            BenchmarkName::Cvx3 => 3,
            _ => 2,
        }
    }

    fn evaluate(&self, x: &[f64]) -> Vec<f64> {
        match self.name {
            BenchmarkName::Cvx1 => vec![x[0], (x[0] - 1.0).powi(2)],
            BenchmarkName::Cvx2 => vec![
                (x[0] * x[0] + x[1] * x[1]) / 50.0,
                ((x[0] - 5.0).powi(2) + (x[1] - 5.0).powi(2)) / 50.0,
            ],
            BenchmarkName::Cvx3 => {
                let s = x[0] * x[0] + x[1] * x[1] + x[2] * x[2];
                vec![
                    (s + x[1] - 12.0 * x[2] + 12.0) / 14.0,
                    (s + 8.0 * x[0] - 44.8 * x[1] + 8.0 * x[2] + 44.0) / 57.0,
                    (s - 44.8 * x[0] + 8.0 * x[1] + 8.0 * x[2] + 43.7) / 56.0,
                ]
            }
            BenchmarkName::Zdt1 => {
                let g = zdt_g(x).max(ZDT_G_FLOOR);
                vec![x[0], g - zdt1_root(x[0], g).0]
            }
            BenchmarkName::Zdt2 => {
                let g = zdt_g(x).max(ZDT_G_FLOOR);
                vec![x[0], g - x[0] * x[0] / g]
            }
        }
    }

    fn jacobian(&self, x: &[f64]) -> Matrix {
        match self.name {
            BenchmarkName::Cvx1 => Matrix::from_rows(&[vec![1.0], vec![2.0 * (x[0] - 1.0)]]),
            BenchmarkName::Cvx2 => Matrix::from_rows(&[
                vec![x[0] / 25.0, x[1] / 25.0],
                vec![(x[0] - 5.0) / 25.0, (x[1] - 5.0) / 25.0],
            ]),
            BenchmarkName::Cvx3 => Matrix::from_rows(&[
                vec![2.0 * x[0] / 14.0, (2.0 * x[1] + 1.0) / 14.0, (2.0 * x[2] - 12.0) / 14.0],
                vec![(2.0 * x[0] + 8.0) / 57.0, (2.0 * x[1] - 44.8) / 57.0, (2.0 * x[2] + 8.0) / 57.0],
                vec![(2.0 * x[0] - 44.8) / 56.0, (2.0 * x[1] + 8.0) / 56.0, (2.0 * x[2] + 8.0) / 56.0],
            ]),
            BenchmarkName::Zdt1 | BenchmarkName::Zdt2 => {
                let n = x.len();
                let g_raw = zdt_g(x);
                let g = g_raw.max(ZDT_G_FLOOR);
                let dg = if g_raw > ZDT_G_FLOOR { 9.0 / (n - 1) as f64 } else { 0.0 };
                let mut jac = Matrix::zeros(2, n);
                jac.set(0, 0, 1.0);
                let (d1, dtail) = if self.name == BenchmarkName::Zdt1 {
                    let (_, ds_dx1, ds_dg) = zdt1_root(x[0], g);
                    (-ds_dx1, 1.0 - ds_dg)
                } else {
                    (-2.0 * x[0] / g, 1.0 + x[0] * x[0] / (g * g))
                };
                jac.set(1, 0, d1);
                for j in 1..n {
                    jac.set(1, j, dg * dtail);
                }
                jac
            }
        }
    }
}

/// `√(x1·g)` with its partial derivatives, extended linearly in `x1` below
/// the knot.
fn zdt1_root(x1: f64, g: f64) -> (f64, f64, f64) {
    if x1 >= ZDT_X1_KNOT {
        let root = (x1 * g).sqrt();
        (root, 0.5 * g / root, 0.5 * x1 / root)
    } else {
        let t = ZDT_X1_KNOT;
        let root = (t * g).sqrt();
        let slope = 0.5 * g / root;
        let dslope_dg = 0.25 / root;
        (root + (x1 - t) * slope, slope, 0.5 * t / root + (x1 - t) * dslope_dg)
    }
}

fn zdt_g(x: &[f64]) -> f64 {
    let n = x.len();
    1.0 + 9.0 / (n - 1) as f64 * x[1..].iter().sum::<f64>()
}

/// A catalog entry: problem, default target region and oracle.
#[derive(Debug, Clone)]
pub struct BenchmarkSpec {
    pub name: BenchmarkName,
    pub problem: ProblemInstance,
    pub default_region: ConstraintRegion,
    pub ideal: IdealPoint,
    pub ground_truth_method: GroundTruthMethod,
    /// Default step exponent of the ABP schedule.
    pub default_nu: f64,
}

pub fn build_benchmark(name: BenchmarkName) -> BenchmarkSpec {
    let objectives = Arc::new(BenchmarkObjectives { name });
    let n = objectives.n();
    let (decision_set, region, ideal, method, nu) = match name {
        BenchmarkName::Cvx1 => (
            DecisionSet::Box { lower: vec![0.0], upper: vec![1.0] },
            ConstraintRegion::Ball { center: vec![0.4, 0.4], radius: 0.2 },
            vec![0.0, 0.0],
            GroundTruthMethod::DenseGrid,
            1.0,
        ),
        BenchmarkName::Cvx2 => (
            DecisionSet::Box { lower: vec![0.0; 2], upper: vec![5.0; 2] },
            ConstraintRegion::Ball { center: vec![0.4, 0.4], radius: 0.2 },
            vec![0.0, 0.0],
            GroundTruthMethod::DenseGrid,
            1.0,
        ),
        BenchmarkName::Cvx3 => (
            DecisionSet::UnitSphereBox { lower: vec![0.0; 3], upper: vec![1.0; 3] },
            ConstraintRegion::Ball { center: vec![0.5; 3], radius: 0.2 },
            // Each linear part is minimized at a vertex of the sphere patch.
            vec![1.0 / 14.0, 0.2 / 57.0, -0.1 / 56.0],
            GroundTruthMethod::SphereGrid,
            1.0,
        ),
        BenchmarkName::Zdt1 => (
            DecisionSet::Box { lower: vec![0.0; n], upper: vec![1.0; n] },
            ConstraintRegion::Ball { center: vec![0.4, 0.4], radius: 0.2 },
            vec![0.0, 0.0],
            GroundTruthMethod::AnalyticFront,
            0.75,
        ),
        BenchmarkName::Zdt2 => (
            DecisionSet::Box { lower: vec![0.0; n], upper: vec![1.0; n] },
            ConstraintRegion::Ball { center: vec![0.4, 0.5], radius: 0.4 },
            vec![0.0, 0.0],
            GroundTruthMethod::AnalyticFront,
            0.75,
        ),
    };
    let ideal = IdealPoint::new(ideal).expect("finite catalog ideal point");
    let problem = ProblemInstance::new(name.as_str(), objectives, decision_set)
        .and_then(|p| p.with_ideal_point(ideal.clone()))
        .expect("catalog problem dimensions are consistent");
    BenchmarkSpec {
        name,
        problem,
        default_region: region,
        ideal,
        ground_truth_method: method,
        default_nu: nu,
    }
}

pub fn build_benchmark_by_name(name: &str) -> Result<BenchmarkSpec> {
    Ok(build_benchmark(name.parse()?))
}

/// Constrained Chebyshev optimum for one ray; `None` when no sampled point of
/// the constrained front is available.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundTruthPoint {
    pub ray_index: usize,
    pub r: PreferenceVector,
    pub x: Option<Vec<f64>>,
    pub y: Option<Vec<f64>>,
}

impl GroundTruthPoint {
    /// Constrained optimal value `φ*(r)`.
    pub fn phi(&self, ideal: &IdealPoint) -> Option<f64> {
        self.y.as_ref().map(|y| chebyshev_value(y, &self.r, ideal))
    }
}

/// Decision-space samples with their images, restricted to `Q⁺`.
struct FeasibleSamples {
    x: Vec<Vec<f64>>,
    y: Vec<Vec<f64>>,
}

impl FeasibleSamples {
    fn argmin(&self, r: &PreferenceVector, ideal: &IdealPoint) -> Option<usize> {
        let mut best: Option<(usize, f64)> = None;
        for (i, y) in self.y.iter().enumerate() {
            let v = chebyshev_value(y, r, ideal);
            if best.map_or(true, |(_, b)| v < b) {
                best = Some((i, v));
            }
        }
        best.map(|(i, _)| i)
    }
}

fn linspace(lo: f64, hi: f64, count: usize) -> impl Iterator<Item = f64> + Clone {
    (0..count).map(move |i| {
        if i + 1 == count {
            hi
        } else {
            lo + (hi - lo) * i as f64 / (count - 1) as f64
        }
    })
}

fn box_grid(spec: &BenchmarkSpec, region: &ConstraintRegion) -> Result<(FeasibleSamples, f64)> {
    let set = spec.problem.decision_set();
    let (lo, hi) = (set.lower(), set.upper());
    let problem = &spec.problem;
    let keep = |x: Vec<f64>| {
        let y = problem.evaluate(&x);
        (region.qplus_distance(&y) <= ORACLE_FEAS_TOL).then_some((x, y))
    };
    let (pairs, spacing): (Vec<(Vec<f64>, Vec<f64>)>, f64) = match set.dim() {
        1 => (
            linspace(lo[0], hi[0], GRID_POINTS_1D).filter_map(|a| keep(vec![a])).collect(),
            (hi[0] - lo[0]) / (GRID_POINTS_1D - 1) as f64,
        ),
        2 => {
            let axis1: Vec<f64> = linspace(lo[1], hi[1], GRID_POINTS_2D).collect();
            let pairs = linspace(lo[0], hi[0], GRID_POINTS_2D)
                .collect::<Vec<_>>()
                .into_par_iter()
                .flat_map_iter(|a| axis1.iter().filter_map(move |&b| keep(vec![a, b])).collect::<Vec<_>>())
                .collect();
            let spacing = (0..2)
                .map(|i| (hi[i] - lo[i]) / (GRID_POINTS_2D - 1) as f64)
                .fold(0.0, f64::max);
            (pairs, spacing)
        }
        d => {
            return Err(Error::Unsupported(format!(
                "dense-grid oracle handles 1-D and 2-D decision sets, got {d}-D"
            )))
        }
    };
    let (x, y) = pairs.into_iter().unzip();
    Ok((FeasibleSamples { x, y }, spacing))
}

fn sphere_grid(spec: &BenchmarkSpec, region: &ConstraintRegion) -> FeasibleSamples {
    let half_pi = std::f64::consts::FRAC_PI_2;
    let problem = &spec.problem;
    let phis: Vec<f64> = linspace(0.0, half_pi, SPHERE_GRID_POINTS).collect();
    let pairs: Vec<(Vec<f64>, Vec<f64>)> = linspace(0.0, half_pi, SPHERE_GRID_POINTS)
        .collect::<Vec<_>>()
        .into_par_iter()
        .flat_map_iter(|theta| {
            phis.iter()
                .filter_map(|&phi| {
                    let x = vec![theta.sin() * phi.cos(), theta.sin() * phi.sin(), theta.cos()];
                    let y = problem.evaluate(&x);
                    (region.qplus_distance(&y) <= ORACLE_FEAS_TOL).then_some((x, y))
                })
                .collect::<Vec<_>>()
        })
        .collect();
    let (x, y) = pairs.into_iter().unzip();
    FeasibleSamples { x, y }
}

fn front_samples(spec: &BenchmarkSpec, region: &ConstraintRegion) -> FeasibleSamples {
    let n = spec.problem.n();
    let front = |f1: f64| match spec.name {
        BenchmarkName::Zdt1 => 1.0 - f1.sqrt(),
        _ => 1.0 - f1 * f1,
    };
    let (x, y) = linspace(0.0, 1.0, ZDT_FRONT_SAMPLES)
        .filter_map(|f1| {
            let y = vec![f1, front(f1)];
            if region.qplus_distance(&y) > ORACLE_FEAS_TOL {
                return None;
            }
            let mut x = vec![0.0; n];
            x[0] = f1;
            Some((x, y))
        })
        .unzip();
    FeasibleSamples { x, y }
}

/// Chebyshev-optimal points subject to `F(x) ∈ Q⁺`, one per ray.
pub fn ground_truth(
    spec: &BenchmarkSpec,
    region: &ConstraintRegion,
    rays: &[PreferenceVector],
) -> Result<Vec<GroundTruthPoint>> {
    region.validate()?;
    crate::error::check_len(spec.problem.m(), region.dim())?;
    let ideal = &spec.ideal;
    let problem = &spec.problem;
    let with_best = |samples: &FeasibleSamples, refine: &(dyn Fn(usize, &PreferenceVector) -> Vec<f64> + Sync)| {
        rays.par_iter()
            .enumerate()
            .map(|(ray_index, r)| {
                let (x, y) = match samples.argmin(r, ideal) {
                    Some(i) => {
                        let x = refine(i, r);
                        let y = problem.evaluate(&x);
                        (Some(x), Some(y))
                    }
                    None => (None, None),
                };
                GroundTruthPoint { ray_index, r: r.clone(), x, y }
            })
            .collect::<Vec<_>>()
    };
    Ok(match spec.ground_truth_method {
        GroundTruthMethod::DenseGrid => {
            let (samples, spacing) = box_grid(spec, region)?;
            let set = problem.decision_set();
            let refine = |i: usize, r: &PreferenceVector| {
                let objective = |x: &[f64]| {
                    let y = problem.evaluate(x);
                    if region.qplus_distance(&y) <= ORACLE_FEAS_TOL {
                        chebyshev_value(&y, r, ideal)
                    } else {
                        f64::INFINITY
                    }
                };
                zoom_minimize(objective, &samples.x[i], set.lower(), set.upper(), 4.0 * spacing, 1e-15)
                    .0
            };
            with_best(&samples, &refine)
        }
        GroundTruthMethod::SphereGrid => {
            let samples = sphere_grid(spec, region);
            with_best(&samples, &|i, _| samples.x[i].clone())
        }
        GroundTruthMethod::AnalyticFront => {
            let samples = front_samples(spec, region);
            // The front point itself is the image of the returned preimage.
            return Ok(rays
                .iter()
                .enumerate()
                .map(|(ray_index, r)| {
                    let best = samples.argmin(r, ideal);
                    GroundTruthPoint {
                        ray_index,
                        r: r.clone(),
                        x: best.map(|i| samples.x[i].clone()),
                        y: best.map(|i| samples.y[i].clone()),
                    }
                })
                .collect());
        }
    })
}
