//! JSON run configuration.
//!
//! ```json
//! {
//!   "benchmark": "CVX1",
//!   "Q": {"ball": {"c": [0.4, 0.4], "R": 0.2}},
//!   "rays": 50,
//!   "eps": 0.001,
//!   "solver": {"nu": 1.0, "max_iters": 20000},
//!   "output_dir": "out",
//!   "emit_trace": false,
//!   "trace_every": 100,
//!   "seed": 0,
//!   "ray_counts": [10, 20, 50, 100]
//! }
//! ```
//!
//! Only `benchmark` is required. `Q` defaults to the benchmark's region and
//! may also be `{"box": {"lower": [...], "upper": [...]}}` with `lower`
//! optional. Solver fields that are left out keep their library defaults,
//! except `nu`, which defaults per benchmark.

use std::path::{Path, PathBuf};

use abp_core::{
    build_benchmark, generate_rays, BenchmarkName, BenchmarkSpec, ConstraintRegion, PreferenceVector, SolverConfig,
};
use serde::Deserialize;
use thiserror::Error;

pub const DEFAULT_RAYS: usize = 50;
pub const DEFAULT_EPS: f64 = 1e-3;
pub const DEFAULT_TRACE_EVERY: usize = 100;
pub const DEFAULT_OUTPUT_DIR: &str = "abp_out";
pub const DEFAULT_RAY_COUNTS: [usize; 4] = [10, 20, 50, 100];

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config file {path}: {source}")]
    Read {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    /// Malformed JSON, wrong types and unknown keys.
    #[error("invalid config at `{path}`: {message}")]
    Syntax { path: String, message: String },

    #[error("unknown benchmark `{name}` at `benchmark` (expected one of CVX1, CVX2, CVX3, ZDT1, ZDT2)")]
    UnknownBenchmark { name: String },

    #[error("value out of range at `{path}`: {message}")]
    Range { path: String, message: String },
}

impl ConfigError {
    /// Key path of the offending value, when there is one.
    pub fn path(&self) -> Option<&str> {
        match self {
            Self::Read { .. } => None,
            Self::Syntax { path, .. } | Self::Range { path, .. } => Some(path),
            Self::UnknownBenchmark { .. } => Some("benchmark"),
        }
    }

    fn range(path: &str, message: impl Into<String>) -> Self {
        Self::Range {
            path: path.to_string(),
            message: message.into(),
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    benchmark: String,
    #[serde(rename = "Q")]
    q: Option<RawRegion>,
    rays: Option<usize>,
    eps: Option<f64>,
    solver: Option<RawSolver>,
    output_dir: Option<PathBuf>,
    emit_trace: Option<bool>,
    trace_every: Option<usize>,
    seed: Option<u64>,
    ray_counts: Option<Vec<usize>>,
    timing: Option<bool>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "snake_case")]
enum RawRegion {
    Ball {
        c: Vec<f64>,
        #[serde(rename = "R")]
        radius: f64,
    },
    Box {
        lower: Option<Vec<f64>>,
        upper: Vec<f64>,
    },
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSolver {
    alpha: Option<f64>,
    beta: Option<f64>,
    gamma: Option<f64>,
    mu: Option<f64>,
    nu: Option<f64>,
    max_iters: Option<usize>,
    phi_tol: Option<f64>,
    feasibility_tol: Option<f64>,
}

/// A validated configuration with every default filled in.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub benchmark: BenchmarkName,
    pub region: ConstraintRegion,
    pub rays: usize,
    pub eps: f64,
    /// Solver parameters; `solver.seed` mirrors `seed`.
    pub solver: SolverConfig,
    pub output_dir: PathBuf,
    pub emit_trace: bool,
    /// Stride between recorded iterations in `trace.jsonl`.
    pub trace_every: usize,
    pub seed: u64,
    /// Ray counts visited by the sweep command, ascending.
    pub ray_counts: Vec<usize>,
    /// Add wall-clock time to `metrics.json`. Off by default so that
    /// outputs stay byte-identical across runs.
    pub timing: bool,
}

impl RunConfig {
    /// Default configuration for a benchmark.
    pub fn for_benchmark(benchmark: BenchmarkName) -> Self {
        let spec = build_benchmark(benchmark);
        Self {
            benchmark,
            region: spec.default_region,
            rays: DEFAULT_RAYS,
            eps: DEFAULT_EPS,
            solver: SolverConfig {
                nu: spec.default_nu,
                ..SolverConfig::default()
            },
            output_dir: PathBuf::from(DEFAULT_OUTPUT_DIR),
            emit_trace: false,
            trace_every: DEFAULT_TRACE_EVERY,
            seed: 0,
            ray_counts: DEFAULT_RAY_COUNTS.to_vec(),
            timing: false,
        }
    }

    pub fn spec(&self) -> BenchmarkSpec {
        build_benchmark(self.benchmark)
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self.solver.seed = seed;
        self
    }

    /// `k` preference rays for this problem. A single ray is the balanced
    /// one, `(1/m, …, 1/m)`.
    pub fn preference_rays(&self, k: usize) -> abp_core::Result<Vec<PreferenceVector>> {
        let m = self.region.dim();
        if k == 1 {
            return Ok(vec![PreferenceVector::new(vec![1.0 / m as f64; m])?]);
        }
        generate_rays(m, k, self.eps)
    }
}

/// Reads and validates a config file.
pub fn parse_config(path: &Path) -> Result<RunConfig, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read {
        path: path.to_path_buf(),
        source,
    })?;
    parse_config_str(&text)
}

/// Parses and validates a JSON config document.
pub fn parse_config_str(text: &str) -> Result<RunConfig, ConfigError> {
    let mut de = serde_json::Deserializer::from_str(text);
    let raw: RawConfig = serde_path_to_error::deserialize(&mut de).map_err(|e| {
        let path = e.path().to_string();
        ConfigError::Syntax {
            path,
            message: e.into_inner().to_string(),
        }
    })?;
    de.end().map_err(|e| ConfigError::Syntax {
        path: ".".into(),
        message: e.to_string(),
    })?;
    resolve(raw)
}

fn resolve(raw: RawConfig) -> Result<RunConfig, ConfigError> {
    let benchmark: BenchmarkName = raw
        .benchmark
        .parse()
        .map_err(|_| ConfigError::UnknownBenchmark { name: raw.benchmark.clone() })?;
    let mut cfg = RunConfig::for_benchmark(benchmark);
    let m = cfg.region.dim();

    if let Some(q) = raw.q {
        cfg.region = match q {
            RawRegion::Ball { c, radius } => {
                if c.len() != m {
                    return Err(ConfigError::range("Q.ball.c", format!("expected {m} entries, got {}", c.len())));
                }
                ConstraintRegion::ball(c, radius).map_err(|e| ConfigError::range("Q.ball.R", e.to_string()))?
            }
            RawRegion::Box { lower, upper } => {
                if upper.len() != m {
                    return Err(ConfigError::range(
                        "Q.box.upper",
                        format!("expected {m} entries, got {}", upper.len()),
                    ));
                }
                if let Some(l) = &lower {
                    if l.len() != m {
                        return Err(ConfigError::range("Q.box.lower", format!("expected {m} entries, got {}", l.len())));
                    }
                }
                ConstraintRegion::boxed(lower, upper).map_err(|e| ConfigError::range("Q.box", e.to_string()))?
            }
        };
    }

    if let Some(rays) = raw.rays {
        if rays == 0 {
            return Err(ConfigError::range("rays", "must be at least 1"));
        }
        cfg.rays = rays;
    }
    if let Some(eps) = raw.eps {
        let limit = 1.0 / m as f64;
        if !(eps > 0.0 && eps < limit) {
            return Err(ConfigError::range("eps", format!("must lie in (0, {limit}), got {eps}")));
        }
        cfg.eps = eps;
    }

    let s = raw.solver.unwrap_or_default();
    let solver = &mut cfg.solver;
    solver.alpha = s.alpha.unwrap_or(solver.alpha);
    solver.beta = s.beta.unwrap_or(solver.beta);
    solver.gamma = s.gamma.unwrap_or(solver.gamma);
    solver.mu = s.mu.unwrap_or(solver.mu);
    solver.nu = s.nu.unwrap_or(solver.nu);
    solver.max_iters = s.max_iters.unwrap_or(solver.max_iters);
    solver.phi_tol = s.phi_tol.unwrap_or(solver.phi_tol);
    solver.feasibility_tol = s.feasibility_tol.unwrap_or(solver.feasibility_tol);
    solver.validate().map_err(|e| match e {
        abp_core::Error::Config { path, message } => ConfigError::Range { path, message },
        other => ConfigError::range("solver", other.to_string()),
    })?;

    if let Some(dir) = raw.output_dir {
        cfg.output_dir = dir;
    }
    cfg.emit_trace = raw.emit_trace.unwrap_or(false);
    if let Some(every) = raw.trace_every {
        if every == 0 {
            return Err(ConfigError::range("trace_every", "must be at least 1"));
        }
        cfg.trace_every = every;
    }
    if let Some(counts) = raw.ray_counts {
        if counts.is_empty() {
            return Err(ConfigError::range("ray_counts", "must not be empty"));
        }
        if counts.iter().any(|&k| k == 0) {
            return Err(ConfigError::range("ray_counts", "every count must be at least 1"));
        }
        if counts.windows(2).any(|w| w[0] >= w[1]) {
            return Err(ConfigError::range("ray_counts", "must be strictly ascending"));
        }
        cfg.ray_counts = counts;
    }
    cfg.timing = raw.timing.unwrap_or(false);
    Ok(cfg.with_seed(raw.seed.unwrap_or(0)))
}
