use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use permsmc::diagnose;
use permsmc::experiment::{run_experiment, summary_json, EstimatorChoice, ExperimentSpec, Format, Method};
use permsmc::io::{read_matrix, to_json};
use permsmc::AppResult;

#[derive(Debug, Parser)]
#[command(name = "permsmc", version, about = "Permanent estimation by adaptive sequential Monte Carlo")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Estimate the permanent, optionally over several repeats.
    Estimate(EstimateArgs),
    /// Lemma-1 ratio check, spectral gaps, or variance-bound constants.
    Diagnose(DiagnoseArgs),
    /// Print the activity schedule length and step factor.
    Schedule(ScheduleArgs),
}

#[derive(Debug, Args)]
struct EstimateArgs {
    #[arg(long)]
    matrix: PathBuf,
    #[arg(long, value_enum, default_value = "adaptive")]
    method: Method,
    /// Particles (SMC) or samples per level (SA).
    #[arg(long, default_value_t = 1000)]
    particles: usize,
    /// Resample when ESS drops below this; defaults to N/2.
    #[arg(long)]
    ess_threshold: Option<f64>,
    /// Resample at every step whatever the ESS.
    #[arg(long)]
    resample_every_step: bool,
    #[arg(long, default_value_t = 1e-10)]
    delta: f64,
    /// MCMC proposals per particle per step; defaults to n^2.
    #[arg(long)]
    sweeps: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value = "both")]
    estimator: EstimatorChoice,
    #[arg(long, default_value_t = 1)]
    repeats: usize,
    /// Directory for summary.json, timing.json and the runs file.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
    #[arg(long)]
    step_factor: Option<f64>,
    /// Force the schedule length.
    #[arg(long = "steps")]
    r_override: Option<usize>,
    /// SA burn-in proposals per level.
    #[arg(long, default_value_t = 0)]
    burn_in: usize,
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Debug, Args)]
#[command(group(clap::ArgGroup::new("what").required(true).args(["lemma1", "gap", "constants"])))]
struct DiagnoseArgs {
    #[arg(long)]
    matrix: PathBuf,
    #[arg(long)]
    lemma1: bool,
    #[arg(long)]
    gap: bool,
    #[arg(long)]
    constants: bool,
    /// Poincare constant C (illustrative).
    #[arg(long, default_value_t = 1.0)]
    c_poincare: f64,
    #[arg(long, default_value_t = 1000)]
    particles: usize,
    /// Use the lazy kernel for --gap.
    #[arg(long)]
    lazy: bool,
    #[arg(long)]
    step_factor: Option<f64>,
    #[arg(long = "steps")]
    r_override: Option<usize>,
}

#[derive(Debug, Args)]
struct ScheduleArgs {
    #[arg(long)]
    matrix: PathBuf,
    #[arg(long)]
    step_factor: Option<f64>,
    #[arg(long = "steps")]
    r_override: Option<usize>,
}

fn estimate(args: EstimateArgs) -> AppResult<String> {
    let spec = ExperimentSpec {
        matrix_path: args.matrix,
        method: args.method,
        repeats: args.repeats,
        estimator: args.estimator,
        particles: args.particles,
        ess_threshold: args.ess_threshold,
        resample_every_step: args.resample_every_step,
        delta: args.delta,
        sweeps: args.sweeps,
        seed: args.seed,
        step_factor: args.step_factor,
        r_override: args.r_override,
        burn_in: args.burn_in,
        threads: args.threads,
        out: args.out,
        format: args.format,
    };
    Ok(summary_json(&run_experiment(&spec)?))
}

fn diagnose(args: DiagnoseArgs) -> AppResult<String> {
    let a = read_matrix(&args.matrix)?;
    let s = diagnose::schedule_for(&a, args.step_factor, args.r_override)?;
    if args.lemma1 {
        Ok(to_json(&diagnose::lemma1(&s)?))
    } else if args.gap {
        Ok(to_json(&diagnose::gaps(&s, args.lazy)?))
    } else {
        Ok(to_json(&diagnose::constants(&s, args.c_poincare, args.particles)?))
    }
}

fn schedule(args: ScheduleArgs) -> AppResult<String> {
    let a = read_matrix(&args.matrix)?;
    Ok(to_json(&diagnose::schedule_summary(&a, args.step_factor, args.r_override)?))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Estimate(a) => estimate(a),
        Command::Diagnose(a) => diagnose(a),
        Command::Schedule(a) => schedule(a),
    };
    match result {
        Ok(text) => {
            print!("{text}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
