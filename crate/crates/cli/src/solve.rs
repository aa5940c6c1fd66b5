use clap::{Args, ValueEnum};
use latta_core::embedding::plane_wave_from;
use latta_core::solver::{residual, special_solutions_with, tol_res, GridFunction, Method};

use crate::output::Table;
use crate::{require_nonzero_nu, user_params, CliError, CliResult, Global};

pub const COLUMNS_HELP: &str = "\
Columns (one row per quadrature node):
  t              node in (-1, 1)
  g              solution value g(t)
  smooth_factor  h(t) = g(t) (1 - t^2)^(nu + 1/2), bounded up to the edges
Summary lines (CSV: trailing '# key=value' comments; JSON: the 'summary' object):
  residual, tolerance, n_quad, and for plane waves the coefficients a_plus, a_minus";

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Rhs {
    Cosh,
    Sinh,
    Planewave,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PairMethod {
    Nystrom,
    Series,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    #[arg(long, allow_negative_numbers = true)]
    pub nu: f64,
    #[arg(long)]
    pub theta: f64,
    /// Right-hand side: cosh(theta x), sinh(theta x) or exp(-theta z x)
    #[arg(long, value_enum)]
    pub rhs: Rhs,
    /// Plane-wave direction, required for --rhs planewave
    #[arg(long, allow_negative_numbers = true)]
    pub z: Option<f64>,
    /// Route for the special solutions
    #[arg(long, value_enum, default_value_t = PairMethod::Nystrom)]
    pub method: PairMethod,
}

pub fn run(args: &SolveArgs, g: &Global) -> CliResult<Table> {
    let p = user_params(args.nu, args.theta)?;
    let z = match (args.rhs, args.z) {
        (Rhs::Planewave, Some(z)) if z.is_finite() => Some(z),
        (Rhs::Planewave, Some(z)) => return Err(CliError::Usage(format!("--z must be finite, got {z}"))),
        (Rhs::Planewave, None) => return Err(CliError::Usage("--rhs planewave requires --z".into())),
        (_, Some(_)) => return Err(CliError::Usage("--z is only meaningful with --rhs planewave".into())),
        (_, None) => None,
    };
    let method = match args.method {
        PairMethod::Nystrom => Method::Nystrom,
        PairMethod::Series => {
            require_nonzero_nu(p.nu, "the series method")?;
            Method::Series
        }
    };
    let tol = g.tol.unwrap_or_else(|| tol_res(p));
    let (gc, gs) = special_solutions_with(p, method, g.solve_options())?;
    let mut extra = Vec::new();
    let (sol, res): (GridFunction, f64) = match args.rhs {
        Rhs::Cosh => {
            let r = gc.residual.unwrap_or(f64::NAN);
            (gc, r)
        }
        Rhs::Sinh => {
            let r = gs.residual.unwrap_or(f64::NAN);
            (gs, r)
        }
        Rhs::Planewave => {
            let z = z.expect("checked above");
            let pw = plane_wave_from(p, z, &gc, &gs)?;
            let r = residual(p, &pw.g, |x| (-p.theta * z * x).exp())?;
            extra.push(("z", z.into()));
            extra.push(("a_plus", pw.a_plus.into()));
            extra.push(("a_minus", pw.a_minus.into()));
            (pw.g, r)
        }
    };
    if !(res <= tol) {
        return Err(CliError::Numerical(format!("residual {res:.3e} exceeds tolerance {tol:.1e}")));
    }

    let a = p.edge_exponent();
    let mut table = Table::new("solve", &["t", "g", "smooth_factor"]);
    for (&t, &h) in sol.nodes().iter().zip(&sol.smooth_values) {
        let g_t = h * ((1.0 - t) * (1.0 + t)).powf(-a);
        table.push(vec![t.into(), g_t.into(), h.into()]);
    }
    table.summary.push(("nu", p.nu.into()));
    table.summary.push(("theta", p.theta.into()));
    table.summary.extend(extra);
    table.summary.push(("residual", res.into()));
    table.summary.push(("tolerance", tol.into()));
    table.summary.push(("n_quad", sol.len().into()));
    Ok(table)
}
