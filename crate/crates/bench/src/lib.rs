//! Shared inputs for the criterion benchmarks.

use abp_core::generate_rays;
use abp_core::{build_benchmark, BenchmarkName, BenchmarkSpec, PreferenceVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// A benchmark problem together with `k` preference rays at the default margin.
pub fn problem_with_rays(name: BenchmarkName, k: usize) -> (BenchmarkSpec, Vec<PreferenceVector>) {
    let spec = build_benchmark(name);
    let rays = generate_rays(spec.problem.m(), k, 1e-3).expect("valid ray count");
    (spec, rays)
}

/// Uniform points in `[lo, hi]^m`, reproducible from `seed`.
pub fn random_points(count: usize, m: usize, lo: f64, hi: f64, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| (0..m).map(|_| rng.gen_range(lo..hi)).collect())
        .collect()
}

/// Points on the unit sphere's positive orthant, so none dominates another.
pub fn nondominated_front(count: usize, m: usize, seed: u64) -> Vec<Vec<f64>> {
    random_points(count, m, 0.05, 1.0, seed)
        .into_iter()
        .map(|p| {
            let norm = p.iter().map(|v| v * v).sum::<f64>().sqrt();
            p.iter().map(|v| v / norm).collect()
        })
        .collect()
}
