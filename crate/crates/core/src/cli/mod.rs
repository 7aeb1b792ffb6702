//! Command-line front end: `qdiff dcoef|simulate|closure|check-paper|sweep`.
//!
//! Exit codes: 0 success, 1 configuration error, 2 numerical failure,
//! 3 a paper claim failed.

pub mod claims;
mod commands;
pub mod config;
mod output;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::error::Error;

pub use commands::{sweep_rows, SweepRow};
pub use config::{parse_config, parse_sweep_config, RunConfig, SweepConfig};
pub use output::format_float;

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 1;
pub const EXIT_NUMERICAL: i32 = 2;
pub const EXIT_CLAIM: i32 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "qdiff",
    version,
    about = "Thermo-quantum diffusion in periodic potentials"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Effective diffusion coefficient by quadrature, closed form and Arrhenius law.
    Dcoef(DcoefArgs),
    /// Evolve a density and write its moments as CSV.
    Simulate(ConfigArg),
    /// Gaussian-closure dispersion: ODE, implicit relation and log law.
    Closure(ClosureArgs),
    /// Reproduce the numeric claims of the model.
    CheckPaper,
    /// Diffusion estimates over a parameter grid.
    Sweep(SweepArgs),
}

#[derive(Debug, Args)]
struct ConfigArg {
    #[arg(long)]
    config: PathBuf,
}

#[derive(Debug, Args)]
pub(crate) struct DcoefArgs {
    #[arg(long, allow_hyphen_values = true)]
    beta_u: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    theta: Option<f64>,
    /// Physical parameters from a `simulate`-style semiclassical config.
    #[arg(long, conflicts_with_all = ["beta_u", "theta"])]
    config: Option<PathBuf>,
    /// Use the full effective potential in the quadrature.
    #[arg(long)]
    nonlinear: bool,
}

#[derive(Debug, Args)]
pub(crate) struct ClosureArgs {
    #[arg(long, value_parser = ["proton", "electron"], default_value = "proton", conflicts_with = "mass_kg")]
    particle: String,
    #[arg(long)]
    mass_kg: Option<f64>,
    #[arg(long, default_value_t = 1e-12)]
    friction_kg_s: f64,
    #[arg(long, conflicts_with = "u_j")]
    u_ev: Option<f64>,
    #[arg(long)]
    u_j: Option<f64>,
    /// Last output time, s.
    #[arg(long)]
    t_max: f64,
    /// Initial packet width, m.
    #[arg(long, default_value_t = 0.0)]
    sigma0: f64,
    #[arg(long, default_value_t = crate::gaussian_closure::CLOSURE_DECADES)]
    decades: usize,
    #[arg(long, default_value_t = crate::gaussian_closure::CLOSURE_ROWS_PER_DECADE)]
    rows_per_decade: usize,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub(crate) struct SweepArgs {
    #[arg(long)]
    config: PathBuf,
    /// Worker threads; defaults to the config value, then to the core count.
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long)]
    output: Option<PathBuf>,
}

/// Error wrapper that carries its exit code.
#[derive(Debug)]
pub(crate) struct Failure {
    code: i32,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Numerical(_) => EXIT_NUMERICAL,
            _ => EXIT_CONFIG,
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

impl Failure {
    pub(crate) fn new(code: i32, message: impl Into<String>) -> Self {
        Self {
            code,
            message: message.into(),
        }
    }

    pub(crate) fn io(path: &std::path::Path, e: std::io::Error) -> Self {
        Self::new(EXIT_CONFIG, format!("{}: {e}", path.display()))
    }
}

/// Runs the CLI on `args` (including the program name) and returns the
/// process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    let result = match cli.command {
        Command::Dcoef(a) => commands::dcoef(&a),
        Command::Simulate(a) => commands::simulate(&a.config),
        Command::Closure(a) => commands::closure(&a),
        Command::CheckPaper => commands::check_paper(),
        Command::Sweep(a) => commands::sweep(&a),
    };
    match result {
        Ok(code) => code,
        Err(f) => {
            eprintln!("qdiff: {}", f.message);
            f.code
        }
    }
}
