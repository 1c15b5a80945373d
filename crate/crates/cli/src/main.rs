use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

mod commands;
mod policy;
mod population;

/// Seed used when `--seed` is not given.
pub const DEFAULT_SEED: u64 = 20210901;

/// Capacitated allocation fairness: simulate, solve, audit, check.
#[derive(Debug, Parser)]
#[command(name = "fairalloc", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run a replicated experiment from a parameter file.
    Simulate(SimulateArgs),
    /// Allocate a population given in CSV under capacities.
    Solve(SolveArgs),
    /// Audit the observed allocation in a household CSV.
    Audit(AuditArgs),
    /// Run the theory verification checks.
    Check(CheckArgs),
    /// Write the synthetic audit fixture CSV.
    Fixture(FixtureArgs),
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Experiment parameter file (JSON), or `experiment1` / `experiment2`
    /// for the bundled presets.
    #[arg(long)]
    pub params: String,
    /// Policy override: a name such as `random`, `utilitarian`,
    /// `priority:group=0`, or a JSON policy object.
    #[arg(long)]
    pub policy: Option<String>,
    /// Replication count override.
    #[arg(long)]
    pub reps: Option<usize>,
    /// Base seed override (the parameter file's `base_seed` otherwise).
    #[arg(long)]
    pub seed: Option<u64>,
    /// Compute in single precision.
    #[arg(long)]
    pub f32: bool,
    #[arg(long, default_value = ".")]
    pub output_dir: PathBuf,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    /// CSV with an optional `id` column, one `u_<service>` column per
    /// service and 0/1 group columns.
    #[arg(long)]
    pub population: PathBuf,
    /// Comma-separated capacities, one per service.
    #[arg(long, value_delimiter = ',', required = true)]
    pub capacities: Vec<usize>,
    #[arg(long, default_value = "utilitarian")]
    pub policy: String,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    /// Group column for the fairness report. Defaults to the only group
    /// column when there is exactly one.
    #[arg(long)]
    pub attribute: Option<String>,
    /// Integer cost scale for utilitarian and min-gain policies.
    #[arg(long)]
    pub tie_break_scale: Option<f64>,
    #[arg(long, default_value = ".")]
    pub output_dir: PathBuf,
}

#[derive(Debug, Args)]
pub struct AuditArgs {
    #[arg(long)]
    pub data: PathBuf,
    /// Schema and comparison config (JSON). Defaults to the bundled preset.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Gaussian KDE bandwidth for the ΔU densities.
    #[arg(long, default_value_t = fairalloc::audit::DEFAULT_BANDWIDTH)]
    pub bandwidth: f64,
    #[arg(long, default_value = ".")]
    pub output_dir: PathBuf,
}

#[derive(Debug, Args)]
pub struct CheckArgs {
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    /// Fewer instances and replications.
    #[arg(long)]
    pub quick: bool,
    /// Also write the outcomes as JSON to this file.
    #[arg(long)]
    pub json: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct FixtureArgs {
    #[arg(long)]
    pub output: PathBuf,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
}

fn configure_threads() {
    if let Some(n) = std::env::var("FAIRALLOC_THREADS").ok().and_then(|v| v.parse::<usize>().ok()) {
        if n > 0 {
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    configure_threads();
    let result = match cli.command {
        Command::Simulate(args) => commands::simulate(&args),
        Command::Solve(args) => commands::solve(&args),
        Command::Audit(args) => commands::audit(&args),
        Command::Check(args) => commands::check(&args),
        Command::Fixture(args) => commands::fixture(&args),
    };
    match result {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            commands::exit_code_for(&err)
        }
    }
}
