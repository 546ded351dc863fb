//! Command-line front end.
//!
//! Every subcommand reads one JSON configuration, writes its CSV tables and
//! a `report.json` into `<out>/<subcommand>/`, and exits with
//! 0 (all checks passed), 2 (numerical failure or a failed check),
//! 3 (invalid input) or 4 (I/O failure).

mod commands;
mod config;
mod output;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use thiserror::Error;

pub use commands::Outcome;
pub use config::{
    FluxConfig, OutputConfig, ProfileConfig, RunConfig, SolverConfig, SurfaceConfig, SymmetryConfig, Tolerances,
    VerifyConfig,
};
pub use output::{num, write_atomic, Check, Relation, Report, Table, SCHEMA_VERSION};

/// Environment variable capping the worker threads of parallel sweeps.
pub const THREADS_ENV: &str = "STEFAN_LAB_THREADS";

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Model(#[from] crate::Error),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("I/O error: {0}")]
    Io(String),

    #[error("configuration drift: solution was produced for problem {recorded}, current problem is {current}")]
    Drift { recorded: String, current: String },
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Model(e) if e.is_numerical() => 2,
            CliError::Model(_) | CliError::Config(_) | CliError::Drift { .. } => 3,
            CliError::Io(_) => 4,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "stefan-lab", version, about = "Similarity solutions of a three-phase Stefan problem")]
pub struct Cli {
    /// JSON configuration; the reference configuration when omitted.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    /// Output directory (overrides `output.dir`).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    /// Newton tolerance for both solvers.
    #[arg(long, global = true)]
    pub tol: Option<f64>,

    /// Seed for verification sample points.
    #[arg(long, global = true)]
    pub seed: Option<u64>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve the exact similarity solution for d1 = 1/u, d2 = 1.
    SolveExact,
    /// Solve the reduced two-point problem by shooting.
    SolveBvp,
    /// Check the reconstructed 3-D field against the original equations.
    Verify {
        /// Report of an earlier solve whose parameters should be verified.
        #[arg(long)]
        solution: Option<PathBuf>,
    },
    /// Bracket table, subalgebra catalog, equivalence and invariance checks.
    Symmetry,
    /// Sample both free surfaces.
    Surfaces,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::SolveExact => "solve-exact",
            Command::SolveBvp => "solve-bvp",
            Command::Verify { .. } => "verify",
            Command::Symmetry => "symmetry",
            Command::Surfaces => "surfaces",
        }
    }
}

/// Loads the configuration and applies command-line overrides.
pub fn load_config(cli: &Cli) -> Result<RunConfig, CliError> {
    let mut cfg = match &cli.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
            RunConfig::from_json(&text)?
        }
        None => RunConfig::default(),
    };
    if let Some(dir) = &cli.out {
        cfg.output.dir = dir.clone();
    }
    if let Some(tol) = cli.tol {
        cfg.solver.exact_tol = tol;
        cfg.solver.bvp_tol = tol;
    }
    if let Some(seed) = cli.seed {
        cfg.verify.seed = seed;
        cfg.symmetry.seed = seed;
    }
    cfg.validate()?;
    Ok(cfg)
}

/// Runs one subcommand without writing anything.
pub fn execute(command: &Command, cfg: &RunConfig) -> Result<Outcome, CliError> {
    match command {
        Command::SolveExact => commands::solve_exact(cfg),
        Command::SolveBvp => commands::solve_bvp(cfg),
        Command::Verify { solution } => commands::verify(cfg, solution.as_deref()),
        Command::Symmetry => commands::symmetry(cfg),
        Command::Surfaces => commands::surfaces(cfg),
    }
}

/// Writes the tables and the report of `outcome` into `dir`.
pub fn write_outcome(outcome: &Outcome, dir: &Path) -> Result<(), CliError> {
    for (name, table) in &outcome.tables {
        table.write(&dir.join(name))?;
    }
    let mut json = serde_json::to_vec_pretty(&outcome.report).map_err(|e| CliError::Io(e.to_string()))?;
    json.push(b'\n');
    write_atomic(&dir.join("report.json"), &json)
}

fn configure_threads() -> Result<(), CliError> {
    if let Ok(v) = std::env::var(THREADS_ENV) {
        let n: usize = v
            .parse()
            .ok()
            .filter(|&n| n > 0)
            .ok_or_else(|| CliError::Config(format!("{THREADS_ENV} must be a positive integer, got {v:?}")))?;
        // A second initialization in the same process keeps the first pool.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    Ok(())
}

fn run(cli: &Cli) -> Result<bool, CliError> {
    configure_threads()?;
    let cfg = load_config(cli)?;
    let outcome = execute(&cli.command, &cfg)?;
    let dir = cfg.output.dir.join(cli.command.name());
    write_outcome(&outcome, &dir)?;
    for c in &outcome.report.checks {
        let status = if c.passed { "ok  " } else { "FAIL" };
        println!("{status} {:<28} {:>12.4e} ({:?} {:e})", c.name, c.value, c.relation, c.tolerance);
    }
    println!("wrote {}", dir.display());
    Ok(outcome.report.passed)
}

/// Entry point of the `stefan-lab` binary.
pub fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("stefan-lab: one or more checks failed");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("stefan-lab: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
