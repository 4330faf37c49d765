mod config;
mod output;

use std::fs;
use std::process::ExitCode;
use std::time::Instant;

use anyhow::Context;
use clap::{Parser, Subcommand};
use log::{info, warn};
use nepcontour::SolverOptions;

use config::{ExperimentConfig, RunArgs, UsageError, PROBLEMS};
use output::{RunSummary, SweepCell};

const EXIT_UNCONVERGED: u8 = 3;

#[derive(Parser, Debug)]
#[command(author, version, about = "Contour-integration eigensolver for nonlinear eigenvalue problems", long_about = None)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Solve one problem at one node count.
    Solve(RunArgs),
    /// Solve at each node count of a list and tabulate the residual history.
    Sweep(RunArgs),
    /// List the built-in problems and their default contours.
    ListProblems,
}

fn list_problems() {
    for p in PROBLEMS {
        match p.defaults() {
            Some(d) => println!(
                "{:<20} center={},{} radius={} m={} N={} K={}  {}",
                p.name(),
                d.center.re,
                d.center.im,
                d.radius,
                d.subspace,
                d.nodes,
                d.moments,
                p.description()
            ),
            None => println!("{:<20} (needs --radius)  {}", p.name(), p.description()),
        }
    }
}

fn setup(args: &RunArgs, sweep: bool) -> anyhow::Result<ExperimentConfig> {
    let config = ExperimentConfig::resolve(args, sweep)?;
    if let Some(w) = config.workers {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(w).build_global() {
            warn!("could not size the worker pool: {e}");
        }
    }
    fs::create_dir_all(&config.output_dir)
        .with_context(|| format!("cannot create {}", config.output_dir.display()))?;
    Ok(config)
}

fn run_solve(args: &RunArgs) -> anyhow::Result<bool> {
    let config = setup(args, false)?;
    let start = Instant::now();
    let problem = config.build_problem()?;
    info!("solving {} (n = {}) with N = {}", config.problem.name(), problem.dim(), config.opts.nodes);
    let (pairs, record) = nepcontour::solve(&problem, &config.contour, &config.opts)?;
    let elapsed = start.elapsed();

    let dir = &config.output_dir;
    output::write_eigenvalues(dir, &config, &pairs, &config.contour)?;
    output::write_convergence(dir, &config, &record)?;
    let summary = RunSummary::from_record(&config, config.opts.nodes, Some(&pairs), &record);
    output::write_summary(dir, &config, std::slice::from_ref(&summary))?;
    output::write_timing(dir, elapsed)?;

    println!(
        "{}: {} after {} pass(es), {} interior eigenvalue(s), max residual {}",
        config.problem.name(),
        if record.converged { "converged" } else { "not converged" },
        record.passes(),
        summary.interior_count,
        summary
            .max_interior_residual
            .map_or("n/a".to_string(), |r| format!("{r:.3e}")),
    );
    Ok(record.converged)
}

fn run_sweep(args: &RunArgs) -> anyhow::Result<bool> {
    let config = setup(args, true)?;
    let start = Instant::now();
    let problem = config.build_problem()?;
    let mut cells = Vec::with_capacity(config.nodes.len());
    let mut runs = Vec::with_capacity(config.nodes.len());
    let mut all_converged = true;
    for &n in &config.nodes {
        info!("sweep {}: N = {n}", config.problem.name());
        let opts = SolverOptions { nodes: n, ..config.opts.clone() };
        match nepcontour::solve(&problem, &config.contour, &opts) {
            Ok((pairs, record)) => {
                all_converged &= record.converged;
                println!(
                    "N = {n}: {} after {} pass(es)",
                    if record.converged { "converged" } else { "not converged" },
                    record.passes()
                );
                runs.push(RunSummary::from_record(&config, n, Some(&pairs), &record));
                cells.push(SweepCell::Done(record));
            }
            Err(e) => {
                warn!("N = {n} failed: {e}");
                println!("N = {n}: failed: {e}");
                all_converged = false;
                runs.push(RunSummary::failed(n, e.to_string()));
                cells.push(SweepCell::Failed(e.to_string()));
            }
        }
    }
    let elapsed = start.elapsed();
    let dir = &config.output_dir;
    output::write_history(dir, &config, &cells)?;
    output::write_summary(dir, &config, &runs)?;
    output::write_timing(dir, elapsed)?;
    Ok(all_converged)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::ListProblems => {
            list_problems();
            Ok(true)
        }
        Command::Solve(args) => run_solve(args),
        Command::Sweep(args) => run_sweep(args),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(EXIT_UNCONVERGED),
        Err(e) if e.downcast_ref::<UsageError>().is_some() => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
