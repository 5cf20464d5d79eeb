//! Command-line front end. All numeric work lives in the library; this
//! binary parses arguments, loads the config, dispatches, and writes files.
//!
//! On failure it prints a single JSON line to stderr, for example
//! `{"error":"config","message":"config parse: ..."}`, and exits nonzero.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use nalgebra::DVector;
use serde_json::json;

use cs_control::experiment::{
    bounds_for_trial, coefficients_csv_string, config_echo, emit_outputs, rip_for_trial,
    run_monte_carlo, timeseries_csv_string, to_json_file_string, ExperimentConfig,
    ExperimentContext,
};
use cs_control::rip::DELTA_LIMIT;
use cs_control::{Error, Result};

const WORKER_ENV: &str = "CS_CONTROL_WORKERS";

#[derive(Parser)]
#[command(name = "cs-control", version, about = "Sparse frequency-domain control design")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct RunArgs {
    /// Experiment description file.
    #[arg(long)]
    config: PathBuf,
    /// Override the base seed from the config.
    #[arg(long)]
    seed: Option<u64>,
    /// Override the trial count from the config.
    #[arg(long)]
    trials: Option<usize>,
    /// Directory the output files are written into.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Subcommand)]
enum Command {
    /// Run a single trial (or --trials of them) and write its traces.
    #[command(name = "simulate")]
    Simulate(RunArgs),
    /// Solve only the full-data ridge design for trial 0.
    #[command(name = "solve-l2")]
    SolveL2(RunArgs),
    /// Solve only the compressed design for trial 0.
    #[command(name = "solve-l1l2")]
    SolveL1l2(RunArgs),
    /// Monte-Carlo experiment over random sampling patterns.
    #[command(name = "experiment")]
    Experiment(RunArgs),
    /// Isometry constant of trial 0's compressed operator.
    #[command(name = "rip")]
    Rip(RunArgs),
    /// Recovery and tracking bound report for trial 0.
    #[command(name = "bounds")]
    Bounds(RunArgs),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let line = json!({ "error": e.kind(), "message": e.to_string() });
            eprintln!("{line}");
            ExitCode::FAILURE
        }
    }
}

fn init_workers() -> Result<()> {
    match std::env::var(WORKER_ENV) {
        Err(_) => Ok(()),
        Ok(text) => {
            let workers: usize = text.trim().parse().map_err(|_| {
                Error::Config(format!("{WORKER_ENV} must be a positive integer, got {text:?}"))
            })?;
            if workers == 0 {
                return Err(Error::Config(format!("{WORKER_ENV} must be at least 1")));
            }
            rayon::ThreadPoolBuilder::new()
                .num_threads(workers)
                .build_global()
                .map_err(|e| Error::Config(format!("worker pool: {e}")))
        }
    }
}

fn load(args: &RunArgs) -> Result<ExperimentConfig> {
    ExperimentConfig::from_file(&args.config)?.with_overrides(args.seed, args.trials)
}

fn run(command: Command) -> Result<()> {
    init_workers()?;
    match command {
        Command::Simulate(args) => {
            let mut cfg = load(&args)?;
            if args.trials.is_none() {
                cfg.trials = 1;
            }
            let ctx = ExperimentContext::new(cfg)?;
            let summary = run_monte_carlo(&ctx)?;
            emit_outputs(&ctx, &summary, &args.out)?;
            Ok(())
        }
        Command::Experiment(args) => {
            let ctx = ExperimentContext::new(load(&args)?)?;
            let summary = run_monte_carlo(&ctx)?;
            emit_outputs(&ctx, &summary, &args.out)?;
            Ok(())
        }
        Command::SolveL2(args) => solve_one(&args, Design::L2),
        Command::SolveL1l2(args) => solve_one(&args, Design::L1L2),
        Command::Rip(args) => {
            let ctx = ExperimentContext::new(load(&args)?)?;
            let (plan, report) = rip_for_trial(&ctx, 0)?;
            let text = to_json_file_string(&json!({
                "config": config_echo(ctx.config()),
                "seed": ctx.trial_seed(0),
                "plan_indices": plan.indices(),
                "rip": report,
                "delta_limit": DELTA_LIMIT,
                "applicable": report.delta < DELTA_LIMIT,
                "certified": matches!(report.method, cs_control::rip::RipMethod::ExactEnumeration),
            }))?;
            std::fs::create_dir_all(&args.out)?;
            std::fs::write(args.out.join("rip.json"), text)?;
            Ok(())
        }
        Command::Bounds(args) => {
            let ctx = ExperimentContext::new(load(&args)?)?;
            let (plan, report) = bounds_for_trial(&ctx, 0)?;
            let text = to_json_file_string(&json!({
                "config": config_echo(ctx.config()),
                "seed": ctx.trial_seed(0),
                "plan_indices": plan.indices(),
                "bounds": report,
            }))?;
            std::fs::create_dir_all(&args.out)?;
            std::fs::write(args.out.join("bounds.json"), text)?;
            Ok(())
        }
    }
}

enum Design {
    L2,
    L1L2,
}

/// Solves a single design for trial 0 and writes the shared file layout.
/// Columns belonging to the designs that were not solved stay zero.
fn solve_one(args: &RunArgs, design: Design) -> Result<()> {
    let ctx = ExperimentContext::new(load(args)?)?;
    let cfg = ctx.config();
    let x0 = ctx.trial_x0(0);
    let beta = ctx.beta_for(&x0);
    let zeros_grid = DVector::<f64>::zeros(ctx.grid().len());
    let zeros_coef = vec![0.0; cfg.space.len()];

    let (y, err, mags, details) = match design {
        Design::L2 => {
            let theta = ctx.ridge().solve(&beta)?;
            let (y, err) = ctx.output_traces(&theta, &x0)?;
            let mags: Vec<f64> = theta.entries().iter().map(|z| z.norm()).collect();
            let details = json!({
                "design": "l2",
                "sparsity": theta.cardinality(cs_control::signals::DEFAULT_CARDINALITY_ABS_TOL),
                "coef_norm_l2": theta.norm_l2(),
            });
            (y, err, mags, details)
        }
        Design::L1L2 => {
            let plan = cs_control::sensing::draw_plan(&cfg.space, cfg.k, ctx.trial_seed(0))?;
            let (phi, alpha) = cs_control::sensing::compress(ctx.g(), &beta, &plan)?;
            let result = cs_control::solvers::solve_l1l2_fista(&phi, &alpha, &cfg.solver, cfg.space)?;
            let (y, err) = ctx.output_traces(&result.theta, &x0)?;
            let mags: Vec<f64> = result.theta.entries().iter().map(|z| z.norm()).collect();
            let details = json!({
                "design": "l1l2",
                "plan_indices": plan.indices(),
                "sparsity": result.theta.cardinality(cs_control::signals::DEFAULT_CARDINALITY_ABS_TOL),
                "iterations": result.iterations,
                "converged": result.converged,
                "residual": result.residual,
                "objective_final": result.objective_trace.last(),
            });
            (y, err, mags, details)
        }
    };

    let (y_cols, err_cols, mag_l2, mag_l1l2) = match design {
        Design::L2 => (
            [y, zeros_grid.clone(), zeros_grid.clone()],
            [err, zeros_grid.clone(), zeros_grid],
            mags,
            zeros_coef,
        ),
        Design::L1L2 => (
            [zeros_grid.clone(), y, zeros_grid.clone()],
            [zeros_grid.clone(), err, zeros_grid],
            zeros_coef,
            mags,
        ),
    };
    let timeseries = timeseries_csv_string(ctx.grid(), ctx.r_grid(), &y_cols, &err_cols);
    let coefficients = coefficients_csv_string(&cfg.space, &mag_l2, &mag_l1l2);
    let summary = to_json_file_string(&json!({
        "config": config_echo(cfg),
        "seed": ctx.trial_seed(0),
        "solution": details,
    }))?;

    std::fs::create_dir_all(&args.out)?;
    std::fs::write(args.out.join("timeseries.csv"), timeseries)?;
    std::fs::write(args.out.join("coefficients.csv"), coefficients)?;
    std::fs::write(args.out.join("summary.json"), summary)?;
    Ok(())
}
