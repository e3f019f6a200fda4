use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use sticky_op::experiment::{run_and_write, Experiment, ExperimentConfig};

/// Monte Carlo experiments on coupled oriented percolation and sticky pairs.
///
/// Exit status: 0 when every asserted check passes, 2 on a statistical
/// failure, 1 on a runtime or configuration error.
#[derive(Parser)]
#[command(name = "sticky-op", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Regeneration moments, speed, diffusivity and the derivative of the speed.
    Moments(Common),
    /// Rescaled terminal value of a single path against N(0, 1).
    SinglePathClt(Common),
    /// Coupled lattice pairs against the exact sticky-pair sampler.
    PairSticky(Common),
    /// Extremal pairs of the branching web against the drift-1 sticky pair.
    DiscreteWeb(Common),
    /// Dynamical percolation marginals and dynamical-web flips.
    Dynamical(Common),
    /// Tail of finite clusters with a log-linear fit.
    Decay(Common),
}

#[derive(Args)]
struct Common {
    /// JSON configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    replicates: Option<usize>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Output directory of a prior moments run to take the scaling from.
    #[arg(long)]
    moments_from: Option<PathBuf>,
}

fn config(experiment: Experiment, args: Common) -> sticky_op::Result<ExperimentConfig> {
    let mut cfg = match &args.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::default(),
    };
    cfg.experiment = experiment;
    if let Some(s) = args.seed {
        cfg.seed = s;
    }
    if let Some(r) = args.replicates {
        cfg.replicates = Some(r);
    }
    if let Some(o) = args.out {
        cfg.out = o;
    }
    if let Some(m) = args.moments_from {
        cfg.moments_from = Some(m);
    }
    Ok(cfg)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let (experiment, args) = match Cli::parse().command {
        Command::Moments(a) => (Experiment::Moments, a),
        Command::SinglePathClt(a) => (Experiment::SinglePathClt, a),
        Command::PairSticky(a) => (Experiment::PairSticky, a),
        Command::DiscreteWeb(a) => (Experiment::DiscreteWeb, a),
        Command::Dynamical(a) => (Experiment::Dynamical, a),
        Command::Decay(a) => (Experiment::Decay, a),
    };
    match config(experiment, args).and_then(|c| run_and_write(&c)) {
        Ok(out) => {
            print!("{}", out.summary());
            if out.passed() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(2)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
