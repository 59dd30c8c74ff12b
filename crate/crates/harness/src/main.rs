use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use shiftlab::config::{ExperimentConfig, Mode};
use shiftlab::report::TrialStatus;
use shiftlab::{forster_verdict, run_experiment};
use shiftlab_core::domain::Point;
use shiftlab_core::io::read_points_file;

#[derive(Parser)]
#[command(name = "shiftlab", version, about = "Run distribution-shift experiments from JSON configs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Membership-query PQ learner for halfspaces.
    PqHalfspace(RunArgs),
    /// Boosted selective classifier from a toy TDS learner.
    Tdsboost(RunArgs),
    /// Forster certificates on generated point sets.
    ForsterCheck(RunArgs),
    /// Weak-distinguisher search.
    Weakdist(RunArgs),
    /// Margin learner recovery.
    Margin(RunArgs),
    /// Balance step frequencies.
    Balance(RunArgs),
    /// Hybrid-argument telescoping.
    Hybrid(RunArgs),
    /// Routing on constructed programs.
    Martingale(RunArgs),
    /// Check a point file.
    Forster {
        #[command(subcommand)]
        action: ForsterAction,
    },
}

#[derive(Subcommand)]
enum ForsterAction {
    /// Print the certificate for the points in a headerless CSV file.
    Check {
        file: PathBuf,
        #[arg(long, default_value_t = 0.5)]
        eps: f64,
        #[arg(long)]
        max_iters: Option<usize>,
    },
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    workers: Option<usize>,
    /// Per-trial wall-time budget in seconds.
    #[arg(long)]
    budget_secs: Option<f64>,
}

fn run(mode: Mode, args: RunArgs) -> Result<(), String> {
    let mut config = ExperimentConfig::load(&args.config).map_err(|e| e.to_string())?;
    if config.mode != mode {
        return Err(format!("{} holds a {} config, not {mode}", args.config.display(), config.mode));
    }
    if let Some(s) = args.seed {
        config.seed = s;
    }
    if let Some(t) = args.trials {
        config.trials = t;
    }
    if args.budget_secs.is_some() {
        config.budget_secs = args.budget_secs;
    }
    let workers = args.workers.unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    let out = args.out.or_else(|| config.output.clone()).unwrap_or_else(|| PathBuf::from("out").join(mode.name()));
    let report = run_experiment(&config, workers).map_err(|e| e.to_string())?;
    report.write(&out).map_err(|e| format!("cannot write {}: {e}", out.display()))?;
    println!(
        "{mode}: {} trials, {} ok, {} error, {} budget",
        report.trials.len(),
        report.count(TrialStatus::Ok),
        report.count(TrialStatus::Error),
        report.count(TrialStatus::Budget)
    );
    for (name, a) in report.aggregates() {
        println!("  {name:<28} mean {:<12.6} std {:<12.6} min {:<12.6} max {:.6}", a.mean, a.std, a.min, a.max);
    }
    println!("wrote {}", out.display());
    Ok(())
}

fn check(file: PathBuf, eps: f64, max_iters: Option<usize>) -> Result<(), String> {
    let raw = read_points_file::<f64>(&file).map_err(|e| e.to_string())?;
    let points: Vec<Point<f64>> = raw
        .iter()
        .enumerate()
        .map(|(i, p)| p.normalized().ok_or(format!("row {} is the zero vector", i + 1)))
        .collect::<Result<_, _>>()?;
    println!("{}", forster_verdict(&points, eps, max_iters).map_err(|e| e.to_string())?);
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::PqHalfspace(a) => run(Mode::PqHalfspace, a),
        Command::Tdsboost(a) => run(Mode::Tdsboost, a),
        Command::ForsterCheck(a) => run(Mode::ForsterCheck, a),
        Command::Weakdist(a) => run(Mode::Weakdist, a),
        Command::Margin(a) => run(Mode::Margin, a),
        Command::Balance(a) => run(Mode::Balance, a),
        Command::Hybrid(a) => run(Mode::Hybrid, a),
        Command::Martingale(a) => run(Mode::Martingale, a),
        Command::Forster { action: ForsterAction::Check { file, eps, max_iters } } => check(file, eps, max_iters),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
