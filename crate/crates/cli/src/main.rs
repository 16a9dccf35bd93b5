use std::path::PathBuf;
use std::process::ExitCode;

use abp_cli::{
    ground_truth_command, metrics_command, parse_config, run_experiment, sweep_rays_command, verify_gap_command,
    CommandError, RunConfig,
};
use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(name = "abp", version, about = "Constrained Pareto front solver with adaptive balanced penalties")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve every preference ray and write solutions, ground truth and metrics.
    Solve(Common),
    /// Write the ground-truth front for the configured rays.
    GroundTruth(Common),
    /// Compare lower bounds with ground-truth optima ray by ray.
    VerifyGap(Common),
    /// Solve once per ray count in `ray_counts` and tabulate the metrics.
    SweepRays(Common),
    /// Recompute metrics from an existing solutions.csv.
    Metrics {
        #[command(flatten)]
        common: Common,
        /// Solutions file; defaults to solutions.csv in the output directory.
        #[arg(long)]
        solutions: Option<PathBuf>,
    },
}

#[derive(Args)]
struct Common {
    /// JSON run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Output directory, overriding `output_dir`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Random seed, overriding `seed`.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads for the per-ray pool; all cores when omitted.
    #[arg(long)]
    threads: Option<usize>,
    /// Write trace.jsonl (solve only).
    #[arg(long)]
    trace: bool,
    /// Add wall-clock time to metrics.json (solve only).
    #[arg(long)]
    timing: bool,
}

impl Common {
    fn load(&self) -> Result<RunConfig, CommandError> {
        let mut cfg = parse_config(&self.config)?;
        if let Some(out) = &self.out {
            cfg.output_dir = out.clone();
        }
        if let Some(seed) = self.seed {
            cfg = cfg.with_seed(seed);
        }
        cfg.emit_trace |= self.trace;
        cfg.timing |= self.timing;
        if let Some(threads) = self.threads {
            // Fails only if a pool already exists, which cannot happen here.
            let _ = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global();
        }
        Ok(cfg)
    }
}

fn run(cli: Cli) -> Result<String, CommandError> {
    match cli.command {
        Command::Solve(common) => {
            let cfg = common.load()?;
            let s = run_experiment(&cfg)?;
            let med = s.metrics.med.map_or("n/a".to_string(), |m| format!("{m:.6}"));
            Ok(format!(
                "{} rays solved, {} failed; MED {med}, HV {:.6}, pi {:.3}; wrote {}",
                s.solved,
                s.failed,
                s.metrics.hv_all,
                s.metrics.pi,
                s.output_dir.display()
            ))
        }
        Command::GroundTruth(common) => {
            let cfg = common.load()?;
            let truth = ground_truth_command(&cfg)?;
            let found = truth.iter().filter(|g| g.y.is_some()).count();
            Ok(format!("{found}/{} rays have a ground-truth point", truth.len()))
        }
        Command::VerifyGap(common) => {
            let cfg = common.load()?;
            let g = verify_gap_command(&cfg)?;
            Ok(format!(
                "{}/{} zero-gap rays; sigma min {:.3e}, mean {:.3e}, max {:.3e}",
                g.zero_ray_count,
                g.rays.len(),
                g.sigma_min,
                g.sigma_mean,
                g.sigma_max
            ))
        }
        Command::SweepRays(common) => {
            let cfg = common.load()?;
            let rows = sweep_rays_command(&cfg)?;
            Ok(rows
                .iter()
                .map(|r| {
                    let med = r.metrics.med.map_or("n/a".to_string(), |m| format!("{m:.6}"));
                    format!("K={}: MED {med}, HV {:.6}", r.rays, r.metrics.hv_all)
                })
                .collect::<Vec<_>>()
                .join("\n"))
        }
        Command::Metrics { common, solutions } => {
            let cfg = common.load()?;
            let m = metrics_command(&cfg, solutions.as_deref())?;
            let med = m.med.map_or("n/a".to_string(), |v| format!("{v:.6}"));
            Ok(format!("MED {med}, HV {:.6}, pi {:.3}, EFHV {:.6}", m.hv_all, m.pi, m.efhv))
        }
    }
}

fn main() -> ExitCode {
    // Usage errors count as configuration errors.
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(message) => {
            println!("{message}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
