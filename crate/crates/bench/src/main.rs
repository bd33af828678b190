//! `metamix` command-line harness.
//!
//! Exit status: 0 on success, 1 on i/o failure, 2 on bad configuration or
//! arguments, 3 on a numerical failure.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use metamix_bench::config::{Experiment, ExperimentConfig};
use metamix_bench::experiments::{run_moments_check, run_pipeline_bench, run_subspace_bench};
use metamix_bench::output::emit_outputs;
use metamix_bench::BenchError;

#[derive(Parser)]
#[command(name = "metamix", version, about = "Robust meta-learning benchmarks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Robust subspace estimation on the spiked benchmark.
    SubspaceBench(Common),
    /// End-to-end estimation and prediction on a separated mixture.
    PipelineBench(Common),
    /// Monte-Carlo moment identities and directional moment bounds.
    MomentsCheck(Common),
}

#[derive(Args)]
struct Common {
    /// TOML experiment configuration; built-in defaults when absent.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Number of seeds; overrides the configuration.
    #[arg(long)]
    seeds: Option<usize>,
    /// Worker threads; 0 uses every core. Defaults to METAMIX_THREADS, then
    /// the configuration, then 0.
    #[arg(long)]
    threads: Option<usize>,
}

fn resolve_threads(flag: Option<usize>, cfg: &ExperimentConfig) -> Result<usize, BenchError> {
    if let Some(t) = flag {
        return Ok(t);
    }
    if let Ok(v) = std::env::var("METAMIX_THREADS") {
        return v
            .trim()
            .parse()
            .map_err(|e| BenchError::Config(format!("METAMIX_THREADS={v:?}: {e}")));
    }
    Ok(cfg.threads.unwrap_or(0))
}

fn run(experiment: Experiment, args: Common) -> Result<(), BenchError> {
    let mut cfg = match &args.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::from_toml("")?,
    };
    if let Some(s) = args.seeds {
        cfg.seeds = s;
    }
    let threads = resolve_threads(args.threads, &cfg)?;
    log::info!("{} with {} seeds on {} threads", experiment.name(), cfg.seeds, threads);
    let records = match experiment {
        Experiment::Subspace => run_subspace_bench(&cfg, threads)?,
        Experiment::Pipeline => run_pipeline_bench(&cfg, threads)?,
        Experiment::Moments => {
            let (checks, records) = run_moments_check(&cfg, threads)?;
            for c in &checks {
                println!(
                    "{} {} seed={} statistic={:.4}",
                    if c.passed { "PASS" } else { "FAIL" },
                    c.name,
                    c.seed,
                    c.statistic
                );
            }
            records
        }
    };
    let files = emit_outputs(&records, experiment.name(), &cfg, threads, &args.out)?;
    for f in files {
        println!("wrote {}", args.out.join(f).display());
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let (experiment, args) = match cli.command {
        Command::SubspaceBench(a) => (Experiment::Subspace, a),
        Command::PipelineBench(a) => (Experiment::Pipeline, a),
        Command::MomentsCheck(a) => (Experiment::Moments, a),
    };
    match run(experiment, args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
