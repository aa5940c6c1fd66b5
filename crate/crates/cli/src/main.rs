//! `latta`: batch computation, cross-validation and export for the integral
//! equation with kernel `w^nu K_nu(theta w)` on `[-1, 1]`.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod eta;
mod output;
mod solve;
mod validate;

use std::io::Write;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use latta_core::solver::SolveOptions;
use latta_core::Params;

use crate::output::{Format, Table};

#[derive(Debug, Parser)]
#[command(name = "latta", version, about = "Special solutions, the eta function and invariant checks")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

/// Flags shared by every subcommand.
#[derive(Debug, Clone, Args)]
pub struct Global {
    /// Residual tolerance for integral-equation solves [default: 1e-8 for theta <= 2, 1e-6 above]
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    /// Relative tolerance of the Painleve integration
    #[arg(long, global = true, default_value_t = latta_core::painleve::DEFAULT_TOL)]
    pub ode_tol: f64,
    /// Starting quadrature size for Nystrom solves (grown until the residual target is met)
    #[arg(long, global = true)]
    pub n_quad: Option<usize>,
    /// Spheroidal modes per parity for the series route [default: 16 for eta, adaptive for solve]
    #[arg(long, global = true)]
    pub n_modes: Option<usize>,
    /// Accepted for scripting compatibility; every computation is deterministic
    #[arg(long, global = true)]
    pub seed_free: bool,
    /// Output format
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

impl Global {
    pub fn solve_options(&self) -> SolveOptions {
        SolveOptions { n_quad: self.n_quad, n_modes: self.n_modes, tol_res: self.tol }
    }
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Tabulate eta(theta) by one or more independent methods.
    #[command(after_help = eta::COLUMNS_HELP)]
    Eta(eta::EtaArgs),
    /// Solve the integral equation for cosh, sinh or plane-wave data.
    #[command(after_help = solve::COLUMNS_HELP)]
    Solve(solve::SolveArgs),
    /// Run an invariant suite over a (nu, theta) grid; exit status 1 on any failure.
    #[command(after_help = validate::COLUMNS_HELP)]
    Validate(validate::ValidateArgs),
}

/// How a command can fail, mapped onto the exit-code contract.
#[derive(Debug)]
pub enum CliError {
    /// Invalid flag values or combinations (exit 2).
    Usage(String),
    /// A numerical routine failed (exit 3).
    Numerical(String),
    /// At least one validation check failed (exit 1); the report is still printed.
    Failed(Table, Vec<String>),
}

impl From<latta_core::Error> for CliError {
    fn from(e: latta_core::Error) -> Self {
        CliError::Numerical(e.to_string())
    }
}

pub type CliResult<T> = Result<T, CliError>;

/// Validate `(nu, theta)` as user input.
pub fn user_params(nu: f64, theta: f64) -> CliResult<Params> {
    Params::new(nu, theta).map_err(|e| CliError::Usage(e.to_string()))
}

pub fn require_nonzero_nu(nu: f64, what: &str) -> CliResult<()> {
    if nu == 0.0 {
        return Err(CliError::Usage(format!("nu = 0 is not supported by {what}")));
    }
    Ok(())
}

fn emit(table: &Table, format: Format) -> ExitCode {
    let mut stdout = std::io::stdout().lock();
    if stdout.write_all(table.render(format).as_bytes()).and_then(|_| stdout.flush()).is_err() {
        return ExitCode::from(3);
    }
    ExitCode::SUCCESS
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let g = &cli.global;
    let result = match &cli.command {
        Command::Eta(a) => eta::run(a, g),
        Command::Solve(a) => solve::run(a, g),
        Command::Validate(a) => validate::run(a, g),
    };
    match result {
        Ok(table) => emit(&table, g.format),
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Numerical(msg)) => {
            eprintln!("numerical failure: {msg}");
            ExitCode::from(3)
        }
        Err(CliError::Failed(table, failures)) => {
            for f in &failures {
                eprintln!("FAILED {f}");
            }
            emit(&table, g.format);
            ExitCode::from(1)
        }
    }
}
