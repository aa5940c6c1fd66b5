use clap::{Args, ValueEnum};
use latta_core::painleve::{integrate_eta_at, rho_from_eta, DEFAULT_THETA0};
use latta_core::solver::{edge_coefficients, eta_from_series, special_solutions_with, Method as SolveMethod};
use rayon::prelude::*;

use crate::output::{Cell, Table};
use crate::{require_nonzero_nu, user_params, CliError, CliResult, Global};

pub const COLUMNS_HELP: &str = "\
Columns:
  theta          kernel scale
  eta            eta(theta) from the given method
  rho            companion function -theta sinh(ln eta) - theta eta'/(2 eta); eta' by central
                 differences for nystrom and series, from the ODE state for painleve
  method         nystrom | series | painleve
  tail_estimate  series only: change in eta from dropping the last mode of each parity
  delta_eta      present with two or more methods: max |eta_i - eta_j| over methods at this theta";

/// Default number of spheroidal modes per parity for the series route.
pub const DEFAULT_SERIES_MODES: usize = 16;
/// Relative step of the central difference used for `eta'`.
const DIFF_STEP: f64 = 5e-4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum EtaMethod {
    Nystrom,
    Series,
    Painleve,
}

impl EtaMethod {
    pub fn name(self) -> &'static str {
        match self {
            EtaMethod::Nystrom => "nystrom",
            EtaMethod::Series => "series",
            EtaMethod::Painleve => "painleve",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Spacing {
    Linear,
    Log,
}

#[derive(Debug, Args)]
pub struct EtaArgs {
    /// Bessel order, |nu| < 1/2
    #[arg(long, allow_negative_numbers = true)]
    pub nu: f64,
    #[arg(long, default_value_t = 0.25)]
    pub theta_min: f64,
    #[arg(long, default_value_t = 4.0)]
    pub theta_max: f64,
    #[arg(long, default_value_t = 16)]
    pub points: usize,
    #[arg(long, value_enum, default_value_t = Spacing::Linear)]
    pub spacing: Spacing,
    /// Comma-separated list of methods
    #[arg(long, value_enum, value_delimiter = ',', default_value = "nystrom")]
    pub method: Vec<EtaMethod>,
}

/// The θ grid described by the flags.
pub fn theta_grid(min: f64, max: f64, points: usize, spacing: Spacing) -> CliResult<Vec<f64>> {
    if !(min > 0.0) || !max.is_finite() {
        return Err(CliError::Usage(format!("theta range must be positive and finite, got [{min}, {max}]")));
    }
    match points {
        0 => Err(CliError::Usage("--points must be at least 1".into())),
        1 if min == max => Ok(vec![min]),
        1 => Err(CliError::Usage("--points 1 requires --theta-min equal to --theta-max".into())),
        _ if !(max > min) => Err(CliError::Usage("--theta-max must exceed --theta-min".into())),
        _ => {
            let last = (points - 1) as f64;
            let mut grid: Vec<f64> = (0..points)
                .map(|i| {
                    let s = i as f64 / last;
                    match spacing {
                        Spacing::Linear => min + (max - min) * s,
                        Spacing::Log => (min.ln() + (max.ln() - min.ln()) * s).exp(),
                    }
                })
                .collect();
            grid[points - 1] = max;
            Ok(grid)
        }
    }
}

/// `eta` and optional tail estimate at one θ by a quadrature or series route.
pub fn eta_point(method: EtaMethod, nu: f64, theta: f64, g: &Global) -> latta_core::Result<(f64, Option<f64>)> {
    let p = latta_core::Params::new(nu, theta)?;
    match method {
        EtaMethod::Nystrom => {
            let (gc, gs) = special_solutions_with(p, SolveMethod::Nystrom, g.solve_options())?;
            Ok((edge_coefficients(&gc, &gs)?.eta, None))
        }
        EtaMethod::Series => {
            let s = eta_from_series(p, g.n_modes.unwrap_or(DEFAULT_SERIES_MODES))?;
            Ok((s.eta, Some(s.tail_estimate)))
        }
        EtaMethod::Painleve => unreachable!("the Painleve route integrates the whole grid at once"),
    }
}

struct Row {
    eta: f64,
    rho: f64,
    tail: Option<f64>,
}

fn pointwise(method: EtaMethod, nu: f64, theta: f64, g: &Global) -> latta_core::Result<Row> {
    let (eta, tail) = eta_point(method, nu, theta, g)?;
    let h = DIFF_STEP * theta;
    let (up, _) = eta_point(method, nu, theta + h, g)?;
    let (down, _) = eta_point(method, nu, theta - h, g)?;
    let eta_p = (up - down) / (2.0 * h);
    Ok(Row { eta, rho: rho_from_eta(theta, eta, eta_p)?, tail })
}

pub fn run(args: &EtaArgs, g: &Global) -> CliResult<Table> {
    let thetas = theta_grid(args.theta_min, args.theta_max, args.points, args.spacing)?;
    for &theta in &thetas {
        user_params(args.nu, theta)?;
    }
    let mut methods: Vec<EtaMethod> = Vec::new();
    for m in &args.method {
        if !methods.contains(m) {
            methods.push(*m);
        }
    }
    if methods.is_empty() {
        return Err(CliError::Usage("at least one --method is required".into()));
    }
    for m in &methods {
        if *m != EtaMethod::Nystrom {
            require_nonzero_nu(args.nu, &format!("the {} method", m.name()))?;
        }
    }
    if methods.contains(&EtaMethod::Painleve) && thetas[0] < DEFAULT_THETA0 {
        return Err(CliError::Usage(format!("the painleve method starts at theta = {DEFAULT_THETA0:e}")));
    }

    let nu = args.nu;
    let painleve = || -> CliResult<Option<Vec<Row>>> {
        if !methods.contains(&EtaMethod::Painleve) {
            return Ok(None);
        }
        let c = integrate_eta_at(nu, DEFAULT_THETA0, &thetas, g.ode_tol)
            .map_err(|e| CliError::Numerical(format!("painleve: {e}")))?;
        Ok(Some((0..c.len()).map(|i| Row { eta: c.eta[i], rho: c.rho[i], tail: None }).collect()))
    };
    let tasks: Vec<(usize, EtaMethod)> = (0..thetas.len())
        .flat_map(|i| methods.iter().filter(|m| **m != EtaMethod::Painleve).map(move |m| (i, *m)))
        .collect();
    let pointwise_all = || -> CliResult<Vec<Row>> {
        tasks
            .par_iter()
            .map(|&(i, m)| {
                pointwise(m, nu, thetas[i], g)
                    .map_err(|e| CliError::Numerical(format!("{} at theta = {}: {e}", m.name(), thetas[i])))
            })
            .collect()
    };
    let (curve, points) = rayon::join(painleve, pointwise_all);
    let curve = curve?;
    let mut points = points?.into_iter();

    let multi = methods.len() > 1;
    let mut cols = vec!["theta", "eta", "rho", "method", "tail_estimate"];
    if multi {
        cols.push("delta_eta");
    }
    let mut table = Table::new("eta", &cols);
    table.summary.push(("nu", nu.into()));
    for (i, &theta) in thetas.iter().enumerate() {
        let rows: Vec<(EtaMethod, Row)> = methods
            .iter()
            .map(|&m| match m {
                EtaMethod::Painleve => {
                    let r = &curve.as_ref().expect("painleve curve computed")[i];
                    (m, Row { eta: r.eta, rho: r.rho, tail: r.tail })
                }
                _ => (m, points.next().expect("one result per task")),
            })
            .collect();
        let spread = rows.iter().map(|r| r.1.eta).fold(f64::NEG_INFINITY, f64::max)
            - rows.iter().map(|r| r.1.eta).fold(f64::INFINITY, f64::min);
        for (m, r) in rows {
            let mut row: Vec<Cell> = vec![theta.into(), r.eta.into(), r.rho.into(), m.name().into(), r.tail.into()];
            if multi {
                row.push(spread.into());
            }
            table.push(row);
        }
    }
    Ok(table)
}
