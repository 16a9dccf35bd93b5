//! The CLI commands as library functions. Each one writes its artifacts
//! under `config.output_dir` and returns a short summary.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use abp_core::diagnostics::{verify_gap, GapReport};
use abp_core::metrics::{default_reference, evaluate, ApproxEntry};
use abp_core::solvers::{IterateRecord, PhaseOne, RayFailure, TraceOptions};
use abp_core::{
    chebyshev_value, ground_truth, two_phase_solve, GroundTruthPoint, MetricsReport, ParetoApproximation,
    PreferenceVector, SolverConfig, TwoPhaseOptions,
};
use serde::Serialize;
use thiserror::Error;

use crate::config::{ConfigError, RunConfig};
use crate::output::{fmt_float, parse_bool, parse_float};

pub const SOLUTIONS_FILE: &str = "solutions.csv";
pub const METRICS_FILE: &str = "metrics.json";
pub const GROUND_TRUTH_FILE: &str = "ground_truth.csv";
pub const TRACE_FILE: &str = "trace.jsonl";
pub const GAP_FILE: &str = "gap.json";
pub const SWEEP_FILE: &str = "sweep.csv";
pub const RECOMPUTED_METRICS_FILE: &str = "metrics_recomputed.json";

#[derive(Debug, Error)]
pub enum CommandError {
    #[error(transparent)]
    Config(#[from] ConfigError),

    #[error(transparent)]
    Solver(#[from] abp_core::Error),

    #[error("all {0} rays failed")]
    AllRaysFailed(usize),

    #[error("malformed {file}: {message}")]
    Input { file: PathBuf, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl CommandError {
    /// 1 for configuration problems, 2 for everything that goes wrong
    /// afterwards.
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Config(_) => 1,
            _ => 2,
        }
    }
}

pub type CommandResult<T> = Result<T, CommandError>;

/// What `solve` produced.
#[derive(Debug, Clone)]
pub struct RunSummary {
    pub output_dir: PathBuf,
    pub solved: usize,
    pub failed: usize,
    pub metrics: MetricsReport,
    pub elapsed_ms: u128,
}

#[derive(Serialize)]
struct MetricsDocument<'a> {
    problem: &'a str,
    rays: usize,
    seed: u64,
    solver: &'a SolverConfig,
    phase_one: &'a PhaseOne,
    solved: usize,
    feasible_selected: usize,
    metrics: &'a MetricsReport,
    failures: &'a [RayFailure],
    #[serde(skip_serializing_if = "Option::is_none")]
    wall_clock_ms: Option<u128>,
}

#[derive(Serialize)]
struct TraceLine<'a> {
    ray_index: usize,
    #[serde(flatten)]
    record: &'a IterateRecord,
}

fn prepare_dir(dir: &Path) -> CommandResult<()> {
    fs::create_dir_all(dir)?;
    Ok(())
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> CommandResult<()> {
    let mut out = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut out, value)?;
    out.write_all(b"\n")?;
    out.flush()?;
    Ok(())
}

fn numbered(prefix: &str, count: usize) -> impl Iterator<Item = String> + '_ {
    (1..=count).map(move |i| format!("{prefix}{i}"))
}

/// Runs the two-phase solver on the configured rays and writes
/// `solutions.csv`, `ground_truth.csv`, `metrics.json` and, when tracing is
/// on, `trace.jsonl`. Fails only when every ray fails.
pub fn run_experiment(config: &RunConfig) -> CommandResult<RunSummary> {
    let start = Instant::now();
    let spec = config.spec();
    let rays = config.preference_rays(config.rays)?;
    let options = TwoPhaseOptions {
        solver: config.solver.clone(),
        trace: if config.emit_trace {
            TraceOptions::summary(config.trace_every)
        } else {
            TraceOptions::OFF
        },
        ..TwoPhaseOptions::default()
    };
    let result = two_phase_solve(&spec.problem, &config.region, &rays, &options)?;
    if result.solutions.is_empty() {
        return Err(CommandError::AllRaysFailed(rays.len()));
    }
    let truth = ground_truth(&spec, &config.region, &rays)?;
    let metrics = evaluate(&result.approximation, &truth, &default_reference(spec.problem.m()))?;
    let elapsed_ms = start.elapsed().as_millis();

    let dir = &config.output_dir;
    prepare_dir(dir)?;
    write_solutions(&dir.join(SOLUTIONS_FILE), &result.approximation, spec.problem.n())?;
    write_ground_truth(&dir.join(GROUND_TRUTH_FILE), &truth, spec.problem.n(), &spec.ideal)?;
    if config.emit_trace {
        let mut out = BufWriter::new(File::create(dir.join(TRACE_FILE))?);
        for s in &result.solutions {
            for record in s.outcome.trace.iter() {
                serde_json::to_writer(
                    &mut out,
                    &TraceLine {
                        ray_index: s.ray_index,
                        record,
                    },
                )?;
                out.write_all(b"\n")?;
            }
        }
        out.flush()?;
    }
    let doc = MetricsDocument {
        problem: spec.problem.name(),
        rays: rays.len(),
        seed: config.seed,
        solver: &config.solver,
        phase_one: &result.phase_one,
        solved: result.solutions.len(),
        feasible_selected: result.solutions.iter().filter(|s| s.outcome.feasible).count(),
        metrics: &metrics,
        failures: &result.failures,
        wall_clock_ms: config.timing.then_some(elapsed_ms),
    };
    write_json(&dir.join(METRICS_FILE), &doc)?;

    Ok(RunSummary {
        output_dir: dir.clone(),
        solved: result.solutions.len(),
        failed: result.failures.len(),
        metrics,
        elapsed_ms,
    })
}

/// Column order: `ray_index, r1.., x1.., y1.., in_Q, in_Qplus, phi, G`.
fn write_solutions(path: &Path, approx: &ParetoApproximation, n: usize) -> CommandResult<()> {
    let m = approx.region.dim();
    let mut w = csv::Writer::from_path(path)?;
    let header: Vec<String> = std::iter::once("ray_index".to_string())
        .chain(numbered("r", m))
        .chain(numbered("x", n))
        .chain(numbered("y", m))
        .chain(["in_Q", "in_Qplus", "phi", "G"].map(String::from))
        .collect();
    w.write_record(&header)?;
    for e in &approx.entries {
        let mut row = vec![e.ray_index.to_string()];
        row.extend(e.r.as_slice().iter().map(|v| fmt_float(*v)));
        row.extend(e.x.iter().map(|v| fmt_float(*v)));
        row.extend(e.y.iter().map(|v| fmt_float(*v)));
        row.push(e.in_q.to_string());
        row.push(e.in_qplus.to_string());
        row.push(fmt_float(e.phi));
        row.push(fmt_float(e.g));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// Column order: `ray_index, r1.., x1.., y1.., phi`; rays without a
/// feasible point leave `x`, `y` and `phi` empty.
fn write_ground_truth(
    path: &Path,
    truth: &[GroundTruthPoint],
    n: usize,
    ideal: &abp_core::IdealPoint,
) -> CommandResult<()> {
    let m = ideal.len();
    let mut w = csv::Writer::from_path(path)?;
    let header: Vec<String> = std::iter::once("ray_index".to_string())
        .chain(numbered("r", m))
        .chain(numbered("x", n))
        .chain(numbered("y", m))
        .chain(std::iter::once("phi".to_string()))
        .collect();
    w.write_record(&header)?;
    for g in truth {
        let mut row = vec![g.ray_index.to_string()];
        row.extend(g.r.as_slice().iter().map(|v| fmt_float(*v)));
        match (&g.x, &g.y) {
            (Some(x), Some(y)) => {
                row.extend(x.iter().map(|v| fmt_float(*v)));
                row.extend(y.iter().map(|v| fmt_float(*v)));
                row.push(fmt_float(chebyshev_value(y, &g.r, ideal)));
            }
            _ => row.extend(std::iter::repeat(String::new()).take(n + m + 1)),
        }
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// Writes `ground_truth.csv` for the configured rays.
pub fn ground_truth_command(config: &RunConfig) -> CommandResult<Vec<GroundTruthPoint>> {
    let spec = config.spec();
    let rays = config.preference_rays(config.rays)?;
    let truth = ground_truth(&spec, &config.region, &rays)?;
    prepare_dir(&config.output_dir)?;
    write_ground_truth(
        &config.output_dir.join(GROUND_TRUTH_FILE),
        &truth,
        spec.problem.n(),
        &spec.ideal,
    )?;
    Ok(truth)
}

/// Writes the per-ray bound gap report to `gap.json`.
pub fn verify_gap_command(config: &RunConfig) -> CommandResult<GapReport> {
    let spec = config.spec();
    let rays = config.preference_rays(config.rays)?;
    let report = verify_gap(&spec, &config.region, &rays, config.seed)?;
    prepare_dir(&config.output_dir)?;
    write_json(&config.output_dir.join(GAP_FILE), &report)?;
    Ok(report)
}

/// One row of `sweep.csv`.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub rays: usize,
    pub solved: usize,
    pub failed: usize,
    pub metrics: MetricsReport,
}

/// Solves the problem once per entry of `config.ray_counts` and writes
/// `sweep.csv` with columns `rays, solved, failed, med, hv_all,
/// hv_feasible, pi, efhv`.
pub fn sweep_rays_command(config: &RunConfig) -> CommandResult<Vec<SweepRow>> {
    let spec = config.spec();
    let options = TwoPhaseOptions::with_solver(config.solver.clone());
    let reference = default_reference(spec.problem.m());
    let mut rows = Vec::with_capacity(config.ray_counts.len());
    for &k in &config.ray_counts {
        let rays = config.preference_rays(k)?;
        let result = two_phase_solve(&spec.problem, &config.region, &rays, &options)?;
        if result.solutions.is_empty() {
            return Err(CommandError::AllRaysFailed(rays.len()));
        }
        let truth = ground_truth(&spec, &config.region, &rays)?;
        rows.push(SweepRow {
            rays: k,
            solved: result.solutions.len(),
            failed: result.failures.len(),
            metrics: evaluate(&result.approximation, &truth, &reference)?,
        });
    }

    prepare_dir(&config.output_dir)?;
    let mut w = csv::Writer::from_path(config.output_dir.join(SWEEP_FILE))?;
    w.write_record(["rays", "solved", "failed", "med", "hv_all", "hv_feasible", "pi", "efhv"])?;
    for row in &rows {
        let m = &row.metrics;
        w.write_record([
            row.rays.to_string(),
            row.solved.to_string(),
            row.failed.to_string(),
            m.med.map(fmt_float).unwrap_or_default(),
            fmt_float(m.hv_all),
            fmt_float(m.hv_feasible),
            fmt_float(m.pi),
            fmt_float(m.efhv),
        ])?;
    }
    w.flush()?;
    Ok(rows)
}

/// Reads a `solutions.csv` written by [`run_experiment`] back into an
/// approximation. Membership flags and `G` are recomputed from `config.region`.
pub fn read_solutions(path: &Path, config: &RunConfig) -> CommandResult<ParetoApproximation> {
    let spec = config.spec();
    let (n, m) = (spec.problem.n(), spec.problem.m());
    let bad = |message: String| CommandError::Input {
        file: path.to_path_buf(),
        message,
    };
    let mut reader = csv::Reader::from_path(path)?;
    let header = reader.headers()?.clone();
    let column = |name: &str| {
        header
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| bad(format!("missing column `{name}`")))
    };
    let ray_col = column("ray_index")?;
    let r_cols: Vec<usize> = numbered("r", m).map(|c| column(&c)).collect::<CommandResult<_>>()?;
    let x_cols: Vec<usize> = numbered("x", n).map(|c| column(&c)).collect::<CommandResult<_>>()?;
    let y_cols: Vec<usize> = numbered("y", m).map(|c| column(&c)).collect::<CommandResult<_>>()?;
    let in_q_col = column("in_Q")?;

    let mut entries = Vec::new();
    for (line, record) in reader.records().enumerate() {
        let record = record?;
        let field = |i: usize| record.get(i).unwrap_or("");
        let float = |i: usize| parse_float(field(i)).ok_or_else(|| bad(format!("row {}: bad number", line + 1)));
        let ray_index: usize = field(ray_col)
            .parse()
            .map_err(|_| bad(format!("row {}: bad ray_index", line + 1)))?;
        let r = r_cols.iter().map(|&i| float(i)).collect::<CommandResult<Vec<_>>>()?;
        let x = x_cols.iter().map(|&i| float(i)).collect::<CommandResult<Vec<_>>>()?;
        let y = y_cols.iter().map(|&i| float(i)).collect::<CommandResult<Vec<_>>>()?;
        parse_bool(field(in_q_col)).ok_or_else(|| bad(format!("row {}: bad in_Q", line + 1)))?;
        let r = PreferenceVector::new(r)?;
        let phi = chebyshev_value(&y, &r, &spec.ideal);
        entries.push(ApproxEntry::new(ray_index, r, x, y, phi, &config.region)?);
    }
    if entries.is_empty() {
        return Err(bad("no rows".into()));
    }
    Ok(ParetoApproximation {
        problem: spec.problem.name().to_string(),
        region: config.region.clone(),
        entries,
        phase_one_converged: true,
        failures: Vec::new(),
    })
}

/// Recomputes the metrics of an existing `solutions.csv` against a fresh
/// ground truth for the same rays and writes `metrics_recomputed.json`.
/// `solutions` defaults to the file inside `config.output_dir`.
pub fn metrics_command(config: &RunConfig, solutions: Option<&Path>) -> CommandResult<MetricsReport> {
    let default_path = config.output_dir.join(SOLUTIONS_FILE);
    let path = solutions.unwrap_or(&default_path);
    let approx = read_solutions(path, config)?;
    let spec = config.spec();
    let rays: Vec<PreferenceVector> = approx.entries.iter().map(|e| e.r.clone()).collect();
    let mut truth = ground_truth(&spec, &config.region, &rays)?;
    for (g, e) in truth.iter_mut().zip(&approx.entries) {
        g.ray_index = e.ray_index;
    }
    let report = evaluate(&approx, &truth, &default_reference(spec.problem.m()))?;
    prepare_dir(&config.output_dir)?;
    write_json(&config.output_dir.join(RECOMPUTED_METRICS_FILE), &report)?;
    Ok(report)
}
