//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on any failure.

use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::Instant;

use latta_core::asymptotics::{laguerre_identity, small_theta_eta, wiener_hopf_halfline};
use latta_core::embedding::{plane_wave_from, plane_wave_solution};
use latta_core::latta::{zero_curvature_at, zero_curvature_residual};
use latta_core::painleve::{
    b_constant, bounded_solution_family, eta_curve, fit_large_theta, DEFAULT_THETA0, DEFAULT_TOL,
};
use latta_core::quadrature::{tanh_sinh, GaussJacobi};
use latta_core::solver::{
    edge_coefficients, eta_from_series, laplace_transforms, positivity_constant, residual, solve_nystrom,
    special_solutions, Method,
};
use latta_core::specfun::kernel::kernel_eval;
use latta_core::specfun::orthopoly::{gegenbauer, gegenbauer_norm};
use latta_core::spheroidal::{angular_eval_t, mode_set};
use latta_core::{Params, Result};

const NUS: [f64; 4] = [-0.25, 0.1, 0.25, 0.4];
const THETAS: [f64; 5] = [0.25, 0.5, 1.0, 2.0, 4.0];

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: String) -> Result<Outcome> {
    Ok(Outcome { passed, detail })
}

fn params(nu: f64, theta: f64) -> Params {
    Params::new(nu, theta).expect("valid parameters")
}

/// Three routes to eta agree pairwise.
fn triple_agreement() -> Result<Outcome> {
    let mut worst: f64 = 0.0;
    let mut at = (0.0, 0.0);
    for &nu in &NUS {
        let curve = eta_curve(nu, &THETAS)?;
        for (i, &theta) in THETAS.iter().enumerate() {
            let p = params(nu, theta);
            let series = eta_from_series(p, 16)?.eta;
            let (gc, gs) = special_solutions(p, Method::Nystrom)?;
            let edge = edge_coefficients(&gc, &gs)?.eta;
            let ode = curve.eta[i];
            let d = (series - edge).abs().max((series - ode).abs()).max((edge - ode).abs());
            if d > worst {
                worst = d;
                at = (nu, theta);
            }
        }
    }
    outcome(worst <= 1e-4, format!("max pairwise |d eta| = {worst:.2e} at (nu, theta) = {at:?}, limit 1e-4"))
}

/// Two-term small-theta law at theta = 1e-2.
fn small_theta_connection() -> Result<Outcome> {
    let theta = 1e-2;
    let mut worst: f64 = 0.0;
    for &nu in &NUS {
        let eta = eta_curve(nu, &[theta])?.eta[0];
        worst = worst.max((eta - small_theta_eta(nu, theta)?).abs() / eta);
    }
    outcome(worst <= 0.03, format!("max relative deviation {worst:.2e}, limit 3e-2"))
}

/// Fitted large-theta amplitude against cos(pi nu)/pi.
fn large_theta_connection() -> Result<Outcome> {
    let mut worst: f64 = 0.0;
    let mut parts = Vec::new();
    for &nu in &NUS {
        let fit = fit_large_theta(nu, 5.0, 7.0, 21, DEFAULT_THETA0, DEFAULT_TOL)?;
        worst = worst.max(fit.relative_error());
        parts.push(format!("{nu}: {:.5}/{:.5}", fit.lambda, fit.expected));
    }
    outcome(worst <= 0.02, format!("max relative error {worst:.2e}, limit 2e-2 ({})", parts.join(", ")))
}

/// Bounded-family constants reduce to B(nu), B_3 = 0 and lambda = cos(pi nu)/pi.
fn mccoy_identity() -> Result<Outcome> {
    let mut worst_b: f64 = 0.0;
    let mut worst_l: f64 = 0.0;
    let mut b3_zero = true;
    for k in 0..20 {
        let nu = -0.475 + 0.05 * k as f64;
        if nu.abs() < 1e-9 {
            continue;
        }
        let fam = bounded_solution_family(nu)?;
        let b = b_constant(nu)?;
        worst_b = worst_b.max((fam.b - b).abs() / b.abs());
        worst_l = worst_l.max((fam.lambda - (PI * nu).cos() / PI).abs());
        b3_zero &= fam.b3 == 0.0;
    }
    outcome(
        worst_b <= 1e-12 && worst_l <= 1e-12 && b3_zero,
        format!("max |dB|/B = {worst_b:.2e}, max |d lambda| = {worst_l:.2e}, B3 identically zero: {b3_zero}"),
    )
}

/// Zero-curvature residual on a 5x5 (t, theta) grid and at the trivial solution.
fn zero_curvature() -> Result<Outcome> {
    let thetas = [0.3, 0.7, 1.2, 2.0, 3.5];
    let ts = [-0.8, -0.4, 0.0, 0.4, 0.8];
    let mut worst: f64 = 0.0;
    for &nu in &NUS {
        let curve = eta_curve(nu, &thetas)?;
        for &theta in &thetas {
            for &t in &ts {
                worst = worst.max(zero_curvature_residual(nu, theta, t, &curve)?);
            }
        }
    }
    let trivial = zero_curvature_at(0.25, 1.0, 0.5, 1.0, 0.0, 0.0, 0.0)?.norm();
    outcome(
        worst <= 1e-7 && trivial <= 1e-13,
        format!("max residual {worst:.2e} (limit 1e-7), fixed point {trivial:.2e} (limit 1e-13)"),
    )
}

/// Sup-norm residuals of the special solutions on a 3x finer check grid.
fn integral_residuals() -> Result<Outcome> {
    let mut worst: f64 = 0.0;
    for &nu in &[-0.25, 0.25] {
        let p = params(nu, 1.0);
        let (gc, gs) = special_solutions(p, Method::Nystrom)?;
        worst = worst.max(residual(p, &gc, |x| x.cosh())?);
        worst = worst.max(residual(p, &gs, |x| x.sinh())?);
    }
    outcome(worst <= 1e-8, format!("max residual {worst:.2e}, limit 1e-8"))
}

/// G(1) > 0, eta > 0 and the quadratic identity on the full grid.
fn positivity_chain() -> Result<Outcome> {
    let mut worst: f64 = 0.0;
    let mut signs = true;
    for &nu in &NUS {
        for &theta in &THETAS {
            let p = params(nu, theta);
            let (gc, gs) = special_solutions(p, Method::Nystrom)?;
            let e = edge_coefficients(&gc, &gs)?;
            let g1 = laplace_transforms(&gc, &gs, 1.0, theta).g1;
            signs &= g1 > 0.0 && e.eta > 0.0;
            let rhs = positivity_constant(nu) * theta.powf(1.0 - nu) * g1;
            worst = worst.max((e.eta * e.k_c * e.k_c - rhs).abs() / rhs.abs());
        }
    }
    outcome(signs && worst <= 1e-4, format!("signs ok: {signs}, max relative identity error {worst:.2e}, limit 1e-4"))
}

/// Plane-wave solutions: constant data and the two degenerate directions.
fn embedding() -> Result<Outcome> {
    let p = params(0.25, 1.0);
    let g = plane_wave_solution(p, 0.0)?;
    let direct = solve_nystrom(p, |_| 1.0, g.len())?;
    let scale = direct.max_abs();
    let d0 = g.smooth_values.iter().zip(&direct.smooth_values).fold(0.0f64, |m, (a, b)| m.max((a - b).abs() / scale));
    let (gc, gs) = special_solutions(p, Method::Nystrom)?;
    let mut d1: f64 = 0.0;
    for (z, sign) in [(1.0, -1.0), (-1.0, 1.0)] {
        let pw = plane_wave_from(p, z, &gc, &gs)?;
        let want = gc.combine(1.0, &gs, sign)?;
        let s = want.max_abs();
        for (a, b) in pw.g.smooth_values.iter().zip(&want.smooth_values) {
            d1 = d1.max((a - b).abs() / s);
        }
    }
    outcome(
        d0 <= 1e-5 && d1 <= 1e-10,
        format!("z=0 vs direct {d0:.2e} (limit 1e-5), z=+-1 vs g_c -+ g_s {d1:.2e} (limit 1e-10)"),
    )
}

/// Orthogonality, eigen-equation and Gegenbauer checks.
fn spheroidal() -> Result<Outcome> {
    let p = params(0.25, 1.0);
    let (even, odd) = mode_set(p, 3, 32)?;
    let modes: Vec<_> = even.iter().chain(&odd).filter(|m| m.m <= 4).collect();
    let gj = GaussJacobi::edge(80, p.nu)?;
    let mut orth: f64 = 0.0;
    for a in &modes {
        for b in &modes {
            let v = gj.integrate(|t| angular_eval_t(a, t) * angular_eval_t(b, t));
            let want = if a.m == b.m { a.norm } else { 0.0 };
            orth = orth.max((v - want).abs() / a.norm.max(b.norm));
        }
    }
    let mut eig: f64 = 0.0;
    let a = p.nu + 0.5;
    for mode in &modes {
        for &x in &[-0.6, 0.1, 0.7] {
            let left = tanh_sinh(
                |t, dl, dr| (dl * (2.0 - dl)).powf(-a) * kernel_eval(p, dr).unwrap() * angular_eval_t(mode, t),
                -1.0,
                x,
                1e-13,
            );
            let right = tanh_sinh(
                |t, dl, dr| (dr * (2.0 - dr)).powf(-a) * kernel_eval(p, dl).unwrap() * angular_eval_t(mode, t),
                x,
                1.0,
                1e-13,
            );
            eig = eig.max((mode.mu * (left + right) - angular_eval_t(mode, x)).abs());
        }
    }
    let mu = -p.nu;
    let mut gg: f64 = 0.0;
    let rule = GaussJacobi::new(40, mu - 0.5, mu - 0.5)?;
    for n in 1..12usize {
        let x = 0.37;
        let nf = n as f64;
        let rec = (nf + 1.0) * gegenbauer(n + 1, mu, x) - 2.0 * (nf + mu) * x * gegenbauer(n, mu, x)
            + (nf + 2.0 * mu - 1.0) * gegenbauer(n - 1, mu, x);
        let norm = gegenbauer_norm(n, mu);
        let quad = rule.integrate(|t| gegenbauer(n, mu, t).powi(2));
        gg = gg.max(rec.abs()).max((quad - norm).abs() / norm);
    }
    outcome(
        orth <= 1e-8 && eig <= 1e-5 && gg <= 1e-10,
        format!("orthogonality {orth:.2e} (1e-8), eigen-equation {eig:.2e} (1e-5), Gegenbauer {gg:.2e} (1e-10)"),
    )
}

/// Half-line solution and Laguerre eigenfunctions.
fn wiener_hopf() -> Result<Outcome> {
    let mut res: f64 = 0.0;
    let mut lag: f64 = 0.0;
    for &nu in &NUS {
        let s = wiener_hopf_halfline(nu)?;
        for &u in &[0.5, 1.0, 2.0] {
            let r = s.apply(u)?;
            res = res.max((r.value - (-u).exp()).abs() + r.tail_bound);
        }
        for n in 0..3 {
            let (l, r) = laguerre_identity(nu, n, 1.0)?;
            lag = lag.max((l - r).abs() / r.abs());
        }
    }
    outcome(
        res <= 1e-5 && lag <= 1e-4,
        format!("half-line residual {res:.2e} (1e-5), Laguerre identity {lag:.2e} (1e-4)"),
    )
}

/// Log-log slope of g_c at the right edge.
fn edge_exponent() -> Result<Outcome> {
    let mut worst: f64 = 0.0;
    for &nu in &[-0.25, 0.25] {
        let (gc, _) = special_solutions(params(nu, 1.0), Method::Nystrom)?;
        let slope = gc.edge_log_slope(1e-5, 1e-4);
        worst = worst.max((slope + nu + 0.5).abs());
    }
    outcome(worst <= 1e-2, format!("max |slope + nu + 1/2| = {worst:.2e}, limit 1e-2"))
}

type Criterion = (&'static str, fn() -> Result<Outcome>);

fn main() -> ExitCode {
    let criteria: [Criterion; 11] = [
        ("triple agreement on eta", triple_agreement),
        ("small-theta connection", small_theta_connection),
        ("large-theta connection", large_theta_connection),
        ("bounded-family identities", mccoy_identity),
        ("zero curvature", zero_curvature),
        ("integral-equation residuals", integral_residuals),
        ("positivity chain", positivity_chain),
        ("embedding", embedding),
        ("spheroidal infrastructure", spheroidal),
        ("Wiener-Hopf and Laguerre", wiener_hopf),
        ("edge exponent", edge_exponent),
    ];
    let mut failures = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let (passed, detail) = match run() {
            Ok(o) => (o.passed, o.detail),
            Err(e) => (false, format!("error: {e}")),
        };
        if !passed {
            failures += 1;
        }
        println!(
            "[{}] {:>2}. {name}: {detail} ({:.2}s)",
            if passed { "PASS" } else { "FAIL" },
            i + 1,
            start.elapsed().as_secs_f64()
        );
    }
    println!("acceptance: {} of {} criteria passed", criteria.len() - failures, criteria.len());
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
