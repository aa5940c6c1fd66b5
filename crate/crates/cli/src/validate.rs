use std::f64::consts::PI;

use clap::{Args, ValueEnum};
use latta_core::asymptotics::{laguerre_identity, small_theta_eta, wiener_hopf_halfline};
use latta_core::latta::{zero_curvature_at, zero_curvature_residual};
use latta_core::painleve::{
    b_constant, bounded_solution_family, eta_curve, fit_large_theta, integrate_eta_at, EtaCurve, DEFAULT_THETA0,
};
use latta_core::solver::{
    edge_coefficients, eta_from_series, laplace_transforms, positivity_constant, special_solutions_with, tol_res,
    Method,
};
use latta_core::Params;
use rayon::prelude::*;

use crate::eta::DEFAULT_SERIES_MODES;
use crate::output::{Cell, Table};
use crate::{require_nonzero_nu, user_params, CliError, CliResult, Global};

pub const COLUMNS_HELP: &str = "\
Columns (one row per check):
  suite       suite that produced the check
  check       invariant being tested
  nu, theta   parameters (theta empty for checks that do not depend on it)
  value       measured quantity
  comparison  how value is compared with limit: <=, > or ==
  limit       threshold
  passed      true or false
  note        error message when the check could not be evaluated
Default grid: nu in {-0.25, 0.1, 0.25, 0.4}, theta in {0.25, 0.5, 1, 2, 4}.";

const DEFAULT_NUS: [f64; 4] = [-0.25, 0.1, 0.25, 0.4];
const DEFAULT_THETAS: [f64; 5] = [0.25, 0.5, 1.0, 2.0, 4.0];
const SAMPLE_TS: [f64; 5] = [-0.8, -0.4, 0.0, 0.4, 0.8];

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Suite {
    ZeroCurvature,
    Asymptotics,
    Positivity,
    Crosscheck,
    Mccoy,
    WienerHopf,
    All,
}

impl Suite {
    const EACH: [Suite; 6] = [
        Suite::ZeroCurvature,
        Suite::Asymptotics,
        Suite::Positivity,
        Suite::Crosscheck,
        Suite::Mccoy,
        Suite::WienerHopf,
    ];

    fn name(self) -> &'static str {
        match self {
            Suite::ZeroCurvature => "zero-curvature",
            Suite::Asymptotics => "asymptotics",
            Suite::Positivity => "positivity",
            Suite::Crosscheck => "crosscheck",
            Suite::Mccoy => "mccoy",
            Suite::WienerHopf => "wiener-hopf",
            Suite::All => "all",
        }
    }

    fn needs_nonzero_nu(self) -> bool {
        !matches!(self, Suite::Positivity | Suite::WienerHopf)
    }
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    #[arg(long, value_enum, default_value_t = Suite::All)]
    pub suite: Suite,
    /// Comma-separated nu values
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub nu: Vec<f64>,
    /// Comma-separated theta values
    #[arg(long, value_delimiter = ',')]
    pub theta: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Cmp {
    Le,
    Gt,
    Eq,
}

impl Cmp {
    fn symbol(self) -> &'static str {
        match self {
            Cmp::Le => "<=",
            Cmp::Gt => ">",
            Cmp::Eq => "==",
        }
    }

    fn holds(self, value: f64, limit: f64) -> bool {
        match self {
            Cmp::Le => value <= limit,
            Cmp::Gt => value > limit,
            Cmp::Eq => value == limit,
        }
    }
}

#[derive(Debug, Clone)]
struct Check {
    suite: &'static str,
    name: String,
    nu: f64,
    theta: Option<f64>,
    value: f64,
    cmp: Cmp,
    limit: f64,
    note: String,
}

impl Check {
    fn passed(&self) -> bool {
        self.note.is_empty() && self.cmp.holds(self.value, self.limit)
    }
}

/// Where a check is evaluated.
#[derive(Debug, Clone, Copy)]
struct At {
    suite: &'static str,
    nu: f64,
    theta: Option<f64>,
}

impl At {
    fn check(self, name: impl Into<String>, cmp: Cmp, limit: f64, value: latta_core::Result<f64>) -> Check {
        let (value, note) = match value {
            Ok(v) => (v, String::new()),
            Err(e) => (f64::NAN, e.to_string()),
        };
        Check { suite: self.suite, name: name.into(), nu: self.nu, theta: self.theta, value, cmp, limit, note }
    }
}

struct Grid<'a> {
    nus: Vec<f64>,
    thetas: Vec<f64>,
    g: &'a Global,
}

impl Grid<'_> {
    fn pairs(&self) -> Vec<(f64, f64)> {
        self.nus.iter().flat_map(|&nu| self.thetas.iter().map(move |&th| (nu, th))).collect()
    }

    fn params(nu: f64, theta: f64) -> Params {
        Params::new(nu, theta).expect("grid validated on entry")
    }

    fn curve(&self, nu: f64) -> latta_core::Result<EtaCurve> {
        integrate_eta_at(nu, DEFAULT_THETA0, &self.thetas, self.g.ode_tol)
    }
}

fn zero_curvature(grid: &Grid) -> Vec<Check> {
    let suite = Suite::ZeroCurvature.name();
    let per_nu: Vec<Vec<Check>> = grid
        .nus
        .par_iter()
        .map(|&nu| {
            let curve = grid.curve(nu);
            grid.thetas
                .iter()
                .flat_map(|&theta| {
                    let at = At { suite, nu, theta: Some(theta) };
                    let along = curve.as_ref().map_err(Clone::clone).and_then(|c| {
                        SAMPLE_TS.iter().try_fold(0.0f64, |m, &t| Ok(m.max(zero_curvature_residual(nu, theta, t, c)?)))
                    });
                    let fixed = SAMPLE_TS.iter().try_fold(0.0f64, |m, &t| {
                        Ok(m.max(zero_curvature_at(nu, theta, t, 1.0, 0.0, 0.0, 0.0)?.norm()))
                    });
                    [
                        at.check("residual along the bounded solution", Cmp::Le, 1e-7, along),
                        at.check("residual at eta = 1, rho = 0", Cmp::Le, 1e-13, fixed),
                    ]
                })
                .collect()
        })
        .collect();
    per_nu.into_iter().flatten().collect()
}

fn asymptotics(grid: &Grid) -> Vec<Check> {
    let suite = Suite::Asymptotics.name();
    let per_nu: Vec<Vec<Check>> = grid
        .nus
        .par_iter()
        .map(|&nu| {
            let theta = 1e-2;
            let small = (|| {
                let eta = eta_curve(nu, &[theta])?.eta[0];
                Ok((eta - small_theta_eta(nu, theta)?).abs() / eta)
            })();
            let large = fit_large_theta(nu, 5.0, 7.0, 21, DEFAULT_THETA0, grid.g.ode_tol).map(|f| f.relative_error());
            vec![
                At { suite, nu, theta: Some(theta) }.check("small-theta two-term law, relative", Cmp::Le, 0.03, small),
                At { suite, nu, theta: None }.check(
                    "large-theta amplitude vs cos(pi nu)/pi, relative",
                    Cmp::Le,
                    0.02,
                    large,
                ),
            ]
        })
        .collect();
    per_nu.into_iter().flatten().collect()
}

fn positivity(grid: &Grid) -> Vec<Check> {
    let suite = Suite::Positivity.name();
    let per_point: Vec<Vec<Check>> = grid
        .pairs()
        .par_iter()
        .map(|&(nu, theta)| {
            let at = At { suite, nu, theta: Some(theta) };
            let p = Grid::params(nu, theta);
            let data = (|| {
                let (gc, gs) = special_solutions_with(p, Method::Nystrom, grid.g.solve_options())?;
                let e = edge_coefficients(&gc, &gs)?;
                let g1 = laplace_transforms(&gc, &gs, 1.0, theta).g1;
                let rhs = positivity_constant(nu) * theta.powf(1.0 - nu) * g1;
                Ok((g1, e.eta, (e.eta * e.k_c * e.k_c - rhs).abs() / rhs.abs()))
            })();
            let pick = |f: fn(&(f64, f64, f64)) -> f64| data.as_ref().map(f).map_err(Clone::clone);
            vec![
                at.check("G(1)", Cmp::Gt, 0.0, pick(|d| d.0)),
                at.check("eta", Cmp::Gt, 0.0, pick(|d| d.1)),
                at.check("eta k_c^2 = C theta^(1-nu) G(1), relative", Cmp::Le, 1e-4, pick(|d| d.2)),
            ]
        })
        .collect();
    per_point.into_iter().flatten().collect()
}

fn crosscheck(grid: &Grid) -> Vec<Check> {
    let suite = Suite::Crosscheck.name();
    let curves: Vec<latta_core::Result<EtaCurve>> = grid.nus.par_iter().map(|&nu| grid.curve(nu)).collect();
    let per_point: Vec<Vec<Check>> = grid
        .pairs()
        .par_iter()
        .enumerate()
        .map(|(k, &(nu, theta))| {
            let at = At { suite, nu, theta: Some(theta) };
            let p = Grid::params(nu, theta);
            let pair = special_solutions_with(p, Method::Nystrom, grid.g.solve_options());
            let residual = pair
                .as_ref()
                .map_err(Clone::clone)
                .map(|(gc, gs)| gc.residual.unwrap_or(f64::NAN).max(gs.residual.unwrap_or(f64::NAN)));
            let agreement = (|| {
                let (gc, gs) = pair.as_ref().map_err(Clone::clone)?;
                let edge = edge_coefficients(gc, gs)?.eta;
                let series = eta_from_series(p, grid.g.n_modes.unwrap_or(DEFAULT_SERIES_MODES))?.eta;
                let curve = curves[k / grid.thetas.len()].as_ref().map_err(Clone::clone)?;
                let ode = curve.eta[k % grid.thetas.len()];
                Ok((series - edge).abs().max((series - ode).abs()).max((edge - ode).abs()))
            })();
            vec![
                at.check(
                    "Nystrom residual of g_c and g_s",
                    Cmp::Le,
                    grid.g.tol.unwrap_or_else(|| tol_res(p)),
                    residual,
                ),
                at.check("eta: series, Nystrom, Painleve pairwise", Cmp::Le, 1e-4, agreement),
            ]
        })
        .collect();
    per_point.into_iter().flatten().collect()
}

fn mccoy(grid: &Grid) -> Vec<Check> {
    let suite = Suite::Mccoy.name();
    let per_nu: Vec<Vec<Check>> = grid
        .nus
        .par_iter()
        .map(|&nu| {
            let at = At { suite, nu, theta: None };
            let fam = bounded_solution_family(nu);
            let b = fam.as_ref().map_err(Clone::clone).and_then(|f| Ok((f.b - b_constant(nu)?).abs() / f.b.abs()));
            let lambda = fam.as_ref().map_err(Clone::clone).map(|f| (f.lambda - (PI * nu).cos() / PI).abs());
            let b3 = fam.as_ref().map_err(Clone::clone).map(|f| f.b3.abs());
            vec![
                at.check("B(1-2nu, nu) = B(nu), relative", Cmp::Le, 1e-12, b),
                at.check("lambda(1-2nu) = cos(pi nu)/pi", Cmp::Le, 1e-12, lambda),
                at.check("|B3(1-2nu)|", Cmp::Eq, 0.0, b3),
            ]
        })
        .collect();
    per_nu.into_iter().flatten().collect()
}

fn wiener_hopf(grid: &Grid) -> Vec<Check> {
    let suite = Suite::WienerHopf.name();
    let per_nu: Vec<Vec<Check>> = grid
        .nus
        .par_iter()
        .map(|&nu| {
            let at = At { suite, nu, theta: None };
            let sol = wiener_hopf_halfline(nu);
            let mut out = Vec::new();
            for u in [0.5, 1.0, 2.0] {
                let r = sol.as_ref().map_err(Clone::clone).and_then(|s| {
                    let r = s.apply(u)?;
                    Ok((r.value - (-u).exp()).abs() + r.tail_bound)
                });
                out.push(at.check(format!("half-line residual at u = {u}"), Cmp::Le, 1e-5, r));
            }
            for n in 0..3 {
                let r = laguerre_identity(nu, n, 1.0).map(|(l, r)| (l - r).abs() / r.abs());
                out.push(at.check(format!("Laguerre identity n = {n}, relative"), Cmp::Le, 1e-4, r));
            }
            out
        })
        .collect();
    per_nu.into_iter().flatten().collect()
}

pub fn run(args: &ValidateArgs, g: &Global) -> CliResult<Table> {
    let nus = if args.nu.is_empty() { DEFAULT_NUS.to_vec() } else { args.nu.clone() };
    let mut thetas = if args.theta.is_empty() { DEFAULT_THETAS.to_vec() } else { args.theta.clone() };
    thetas.sort_by(f64::total_cmp);
    thetas.dedup();
    for &nu in &nus {
        for &theta in &thetas {
            user_params(nu, theta)?;
        }
    }
    let suites: Vec<Suite> = if args.suite == Suite::All { Suite::EACH.to_vec() } else { vec![args.suite] };
    for s in &suites {
        if s.needs_nonzero_nu() {
            for &nu in &nus {
                require_nonzero_nu(nu, &format!("the {} suite", s.name()))?;
            }
        }
    }
    if thetas[0] < DEFAULT_THETA0 {
        return Err(CliError::Usage(format!("theta values must be at least {DEFAULT_THETA0:e}")));
    }

    let grid = Grid { nus, thetas, g };
    let checks: Vec<Check> = suites
        .iter()
        .flat_map(|s| match s {
            Suite::ZeroCurvature => zero_curvature(&grid),
            Suite::Asymptotics => asymptotics(&grid),
            Suite::Positivity => positivity(&grid),
            Suite::Crosscheck => crosscheck(&grid),
            Suite::Mccoy => mccoy(&grid),
            Suite::WienerHopf => wiener_hopf(&grid),
            Suite::All => unreachable!("expanded above"),
        })
        .collect();

    let mut table =
        Table::new("validate", &["suite", "check", "nu", "theta", "value", "comparison", "limit", "passed", "note"]);
    let mut failures = Vec::new();
    for c in &checks {
        let passed = c.passed();
        if !passed {
            let theta = c.theta.map_or(String::new(), |t| format!(" theta={t}"));
            let why = if c.note.is_empty() { String::new() } else { format!(" ({})", c.note) };
            failures.push(format!(
                "{}: {} nu={}{theta}: value {:.6e}, required {} {:.1e}{why}",
                c.suite,
                c.name,
                c.nu,
                c.value,
                c.cmp.symbol(),
                c.limit
            ));
        }
        table.push(vec![
            c.suite.into(),
            c.name.clone().into(),
            c.nu.into(),
            c.theta.into(),
            c.value.into(),
            c.cmp.symbol().into(),
            c.limit.into(),
            passed.into(),
            if c.note.is_empty() { Cell::Empty } else { c.note.clone().into() },
        ]);
    }
    table.summary.push(("checks", checks.len().into()));
    table.summary.push(("failed", failures.len().into()));
    if failures.is_empty() {
        Ok(table)
    } else {
        Err(CliError::Failed(table, failures))
    }
}
