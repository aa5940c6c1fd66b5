//! The Painleve III transcendent `eta(theta)` selected by the integral equation,
//! its companion `rho(theta)`, and the bounded family it belongs to.
//!
//! Integration runs in `s = ln theta` on `u = ln eta`, where the equation reads
//! `u_ss = 4 nu theta sinh u + 2 theta^2 sinh 2u`. The leading small-`theta` power
//! law is carried analytically and only the deviation `w = u - (p s + c)` is integrated.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ode::Dop853;
use crate::specfun::gamma::{gamma, gamma_fn};

/// Default anchor point for the small-`theta` expansion.
pub const DEFAULT_THETA0: f64 = 1e-8;
/// Default local error target for the integrator.
pub const DEFAULT_TOL: f64 = 1e-13;

/// `eta'' = eta'^2/eta - eta'/theta - 2 nu (1 - eta^2)/theta + eta^3 - 1/eta`.
pub fn painleve_rhs(nu: f64, theta: f64, eta: f64, eta_p: f64) -> Result<f64> {
    if eta == 0.0 {
        return Err(Error::Pole("Painleve III right-hand side at eta = 0".into()));
    }
    if !(theta > 0.0) {
        return Err(Error::Domain(format!("theta must be > 0, got {theta}")));
    }
    Ok(eta_p * eta_p / eta - eta_p / theta - 2.0 * nu * (1.0 - eta * eta) / theta + eta.powi(3) - 1.0 / eta)
}

/// `rho = (theta / 2 eta) (1 - eta' - eta^2)`.
pub fn rho_from_eta(theta: f64, eta: f64, eta_p: f64) -> Result<f64> {
    if eta == 0.0 {
        return Err(Error::Pole("rho at eta = 0".into()));
    }
    Ok(theta / (2.0 * eta) * (1.0 - eta_p - eta * eta))
}

/// `rho' = (nu + 1/2 + rho)/eta - (nu + 1/2 - rho) eta`.
pub fn rho_prime(nu: f64, eta: f64, rho: f64) -> f64 {
    let a = nu + 0.5;
    (a + rho) / eta - (a - rho) * eta
}

/// Derivative of [`rho_from_eta`] along a curve with known `eta''`.
pub fn rho_prime_chain(theta: f64, eta: f64, eta_p: f64, eta_pp: f64) -> f64 {
    let f = 1.0 - eta_p - eta * eta;
    f / (2.0 * eta) + theta * (-eta_pp - 2.0 * eta * eta_p) / (2.0 * eta) - theta * f * eta_p / (2.0 * eta * eta)
}

/// `B(nu) = 2^{-3(1-2nu)} Gamma(nu)^2 / (Gamma(1-nu)^2 Gamma(2nu))`.
pub fn b_constant(nu: f64) -> Result<f64> {
    if nu == 0.0 {
        return Err(Error::Unsupported("B(nu) has a pole at nu = 0".into()));
    }
    let g = gamma_fn(nu)?;
    let g1 = gamma_fn(1.0 - nu)?;
    Ok(2f64.powf(-3.0 * (1.0 - 2.0 * nu)) * g * g / (g1 * g1 * gamma_fn(2.0 * nu)?))
}

/// One member of the bounded family: exponent `sigma`, large-`theta` amplitude
/// `lambda`, and the small-`theta` coefficients.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McCoyFamily {
    pub sigma: f64,
    pub lambda: f64,
    pub b: f64,
    pub b1: f64,
    pub b2: f64,
    pub b3: f64,
    pub nu: f64,
}

/// Family data for a given `sigma` in `(-1, 2)`.
pub fn mccoy_family(sigma: f64, nu: f64) -> Result<McCoyFamily> {
    family_from_gap(1.0 - sigma, sigma, nu)
}

/// The member with `sigma = 1 - 2 nu`, the one realised by the integral equation.
pub fn bounded_solution_family(nu: f64) -> Result<McCoyFamily> {
    family_from_gap(2.0 * nu, 1.0 - 2.0 * nu, nu)
}

/// `gap = 1 - sigma`, passed separately so the `sigma = 1 - 2 nu` member has `B_3 = 0` exactly.
fn family_from_gap(gap: f64, sigma: f64, nu: f64) -> Result<McCoyFamily> {
    if !(sigma > -1.0 && sigma < 2.0) {
        return Err(Error::Domain(format!("sigma must lie in (-1, 2), got {sigma}")));
    }
    if !(nu.abs() < 0.5) {
        return Err(Error::Domain(format!("|nu| must be < 1/2, got {nu}")));
    }
    let plus = 2.0 - gap; // 1 + sigma
    let ga = gamma_fn(0.5 * gap)?;
    let gb = gamma_fn(0.5 * plus)?;
    let b = 2f64.powf(-3.0 * sigma) * ga * ga * gamma_fn(0.5 * plus + nu)? / (gb * gb * gamma_fn(0.5 * gap + nu)?);
    let g2 = gap * gap;
    Ok(McCoyFamily {
        sigma,
        lambda: (0.5 * PI * sigma).sin() / PI,
        b,
        b1: -nu / g2,
        b2: b * b * nu / (plus * plus),
        b3: (2.0 * nu - gap) * (2.0 * nu + gap) / (16.0 * b * g2 * g2),
        nu,
    })
}

/// `sigma = (2/pi) arcsin(pi lambda)`.
pub fn sigma_from_lambda(lambda: f64) -> f64 {
    2.0 / PI * (PI * lambda).asin()
}

/// Leading law `eta ~ e^c theta^p` removed before integrating.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Leading {
    p: f64,
    c: f64,
    /// `theta e^{-L} = -2 nu` exactly (linear law for `nu < 0`), enabling a
    /// cancellation-free right-hand side.
    linear: bool,
}

impl Leading {
    const NONE: Leading = Leading { p: 0.0, c: 0.0, linear: false };

    fn at(&self, s: f64) -> f64 {
        self.p * s + self.c
    }
}

/// Four-term expansion as the leading law plus `(w, w_s)` at `s0 = ln theta0`.
fn four_term(nu: f64, theta0: f64) -> Result<(Leading, f64, f64)> {
    if nu == 0.0 {
        return Err(Error::Unsupported("small-theta anchor requires nu != 0".into()));
    }
    if !(theta0 > 0.0 && theta0 <= 1e-2) {
        return Err(Error::Domain(format!("anchor point must be in (0, 1e-2], got {theta0}")));
    }
    let fam = bounded_solution_family(nu)?;
    let sigma = fam.sigma;
    let x = 2.0 * theta0;
    let ln2 = 2f64.ln();
    // terms as (coefficient, exponent of 2 theta)
    let mut terms = vec![(fam.b, sigma), (fam.b1, 1.0), (fam.b2, 1.0 + 2.0 * sigma)];
    if nu > 0.0 {
        terms.push((fam.b3, 2.0 - sigma));
    }
    let lead_idx = if nu > 0.0 { 0 } else { 1 };
    let (cl, el) = terms[lead_idx];
    let lead = Leading { p: el, c: cl.ln() + el * ln2, linear: nu < 0.0 };
    // eta / lead = 1 + r, with r and d(r)/ds summed directly
    let mut r = 0.0;
    let mut rs = 0.0;
    for (i, &(c, e)) in terms.iter().enumerate() {
        if i == lead_idx {
            continue;
        }
        let rel = c / cl * x.powf(e - el);
        r += rel;
        rs += (e - el) * rel;
    }
    let w = r.ln_1p();
    let ws = rs / (1.0 + r);
    Ok((lead, w, ws))
}

/// Anchor used by the integrators.
///
/// Besides the four-term expansion, the solution carries a full series in
/// `z = theta^{2|nu|}` generated by the `1/eta` terms of the equation. Truncating
/// it seeds the off-family mode, which grows like `e^{4 theta}` relative to the
/// large-`theta` gap, so the series is summed to convergence here.
fn anchor(nu: f64, theta0: f64) -> Result<(Leading, f64, f64)> {
    let (lead, _, _) = four_term(nu, theta0)?;
    let s0 = theta0.ln();
    let fam = bounded_solution_family(nu)?;
    let kappa = 2.0 * nu.abs();
    let mut a = vec![0.0; ANCHOR_TERMS + 1];
    let z;
    if nu > 0.0 {
        // w'' = -2 nu z e^{-w} - z^2 e^{-2w}, z = theta^{2nu} e^{-c}
        z = (kappa * s0 - lead.c).exp();
        for k in 1..=ANCHOR_TERMS {
            let e1 = exp_coeffs(&a[..k], -1.0);
            let e2 = exp_coeffs(&a[..k.saturating_sub(1).max(1)], -2.0);
            let e2_km2 = if k >= 2 { e2[k - 2] } else { 0.0 };
            a[k] = (-2.0 * nu * e1[k - 1] - e2_km2) / (kappa * kappa * (k * k) as f64);
        }
    } else {
        // w'' = kappa^2 (e^{-w} - e^{-2w}), w = sum b_k zeta^k, zeta = theta^kappa
        z = (kappa * s0).exp();
        a[1] = kappa * fam.b * 2f64.powf(fam.sigma);
        for k in 2..=ANCHOR_TERMS {
            let e1 = exp_coeffs(&a[..=k], -1.0);
            let e2 = exp_coeffs(&a[..=k], -2.0);
            a[k] = (e1[k] - e2[k]) / ((k * k) as f64 - 1.0);
        }
    }
    let (mut w, mut ws) = (0.0, 0.0);
    let mut zk = 1.0;
    let mut last = f64::INFINITY;
    for (k, &ak) in a.iter().enumerate().skip(1) {
        zk *= z;
        let term = ak * zk;
        w += term;
        ws += kappa * k as f64 * term;
        last = term.abs();
        if last <= 1e-18 * w.abs().max(1e-300) {
            break;
        }
    }
    if !(last <= 1e-16 * w.abs().max(1e-300)) {
        return Err(Error::Truncation { what: "small-theta anchor series".into(), tail: last });
    }
    // first correction from the theta*eta terms
    if nu > 0.0 {
        let sp = 1.0 + fam.sigma;
        let y = nu * fam.b * (2.0 * theta0).powf(sp) / (sp * sp);
        w += y;
        ws += sp * y;
    } else {
        w -= 0.25 * theta0 * theta0;
        ws -= 0.5 * theta0 * theta0;
    }
    Ok((lead, w, ws))
}

const ANCHOR_TERMS: usize = 80;

/// Taylor coefficients of `exp(m * sum_{k>=1} a_k z^k)` up to the length of `a`
/// (`a[0]` is ignored and taken as zero).
fn exp_coeffs(a: &[f64], m: f64) -> Vec<f64> {
    let n = a.len();
    let mut e = vec![0.0; n.max(1)];
    e[0] = 1.0;
    for k in 1..n {
        let mut acc = 0.0;
        for j in 1..=k {
            acc += j as f64 * m * a[j] * e[k - j];
        }
        e[k] = acc / k as f64;
    }
    e
}

/// `(eta, eta')` at `theta0` from the four-term small-`theta` expansion.
pub fn small_theta_anchor(nu: f64, theta0: f64) -> Result<(f64, f64)> {
    let (lead, w, ws) = four_term(nu, theta0)?;
    let s = theta0.ln();
    let eta = (lead.at(s) + w).exp();
    Ok((eta, eta * (lead.p + ws) / theta0))
}

/// Sampled solution with everything the Lax pair needs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EtaCurve {
    pub nu: f64,
    pub thetas: Vec<f64>,
    pub eta: Vec<f64>,
    pub eta_prime: Vec<f64>,
    pub eta_second: Vec<f64>,
    pub rho: Vec<f64>,
    pub rho_prime: Vec<f64>,
    /// `1 - eta`, without cancellation near `eta = 1`.
    pub gap: Vec<f64>,
}

impl EtaCurve {
    pub fn len(&self) -> usize {
        self.thetas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.thetas.is_empty()
    }

    /// Index of a sample at `theta` (relative match to 1e-14).
    pub fn find(&self, theta: f64) -> Option<usize> {
        self.thetas.iter().position(|&t| (t - theta).abs() <= 1e-14 * theta.abs())
    }

    /// `(eta, eta')` at `theta` by quintic Hermite interpolation between samples.
    pub fn interpolate(&self, theta: f64) -> Option<(f64, f64)> {
        if let Some(i) = self.find(theta) {
            return Some((self.eta[i], self.eta_prime[i]));
        }
        let j = self.thetas.iter().position(|&t| t > theta)?;
        if j == 0 {
            return None;
        }
        let i = j - 1;
        let h = self.thetas[j] - self.thetas[i];
        let x = (theta - self.thetas[i]) / h;
        let (y0, d0, s0) = (self.eta[i], self.eta_prime[i] * h, self.eta_second[i] * h * h);
        let (y1, d1, s1) = (self.eta[j], self.eta_prime[j] * h, self.eta_second[j] * h * h);
        let (x2, x3) = (x * x, x * x * x);
        let (x4, x5) = (x3 * x, x3 * x2);
        let h0 = 1.0 - 10.0 * x3 + 15.0 * x4 - 6.0 * x5;
        let h1 = x - 6.0 * x3 + 8.0 * x4 - 3.0 * x5;
        let h2 = 0.5 * (x2 - 3.0 * x3 + 3.0 * x4 - x5);
        let dh0 = -30.0 * x2 + 60.0 * x3 - 30.0 * x4;
        let dh1 = 1.0 - 18.0 * x2 + 32.0 * x3 - 15.0 * x4;
        let dh2 = 0.5 * (2.0 * x - 9.0 * x2 + 12.0 * x3 - 5.0 * x4);
        let y = h0 * y0 + h1 * d0 + h2 * s0 + (1.0 - h0) * y1 + tail_h1(x) * d1 + tail_h2(x) * s1;
        let dy = dh0 * y0 + dh1 * d0 + dh2 * s0 - dh0 * y1 + tail_dh1(x) * d1 + tail_dh2(x) * s1;
        Some((y, dy / h))
    }

    /// Scaled large-`theta` gap `(1-eta) 2^{2nu} theta^{nu+1/2} e^{2 theta} / Gamma(nu+1/2)` at each sample.
    pub fn scaled_gaps(&self) -> Vec<f64> {
        self.thetas.iter().zip(&self.gap).map(|(&t, &g)| scaled_gap(self.nu, t, g)).collect()
    }
}

// right-end quintic Hermite basis functions
fn tail_h1(x: f64) -> f64 {
    -4.0 * x.powi(3) + 7.0 * x.powi(4) - 3.0 * x.powi(5)
}
fn tail_h2(x: f64) -> f64 {
    0.5 * (x.powi(3) - 2.0 * x.powi(4) + x.powi(5))
}
fn tail_dh1(x: f64) -> f64 {
    -12.0 * x * x + 28.0 * x.powi(3) - 15.0 * x.powi(4)
}
fn tail_dh2(x: f64) -> f64 {
    0.5 * (3.0 * x * x - 8.0 * x.powi(3) + 5.0 * x.powi(4))
}

/// `(1 - eta) 2^{2nu} theta^{nu+1/2} e^{2 theta} / Gamma(nu+1/2)`, which tends to `lambda`.
pub fn scaled_gap(nu: f64, theta: f64, gap: f64) -> f64 {
    gap * (2.0 * nu * 2f64.ln() + (nu + 0.5) * theta.ln() + 2.0 * theta).exp() / gamma(nu + 0.5)
}

/// Integrate the bounded solution from the small-`theta` anchor to `theta1`,
/// keeping every accepted step.
pub fn integrate_eta(nu: f64, theta0: f64, theta1: f64, tol: f64) -> Result<EtaCurve> {
    if !(theta1 > theta0) {
        return Err(Error::Domain(format!("need theta0 < theta1, got {theta0} and {theta1}")));
    }
    let (lead, w, ws) = anchor(nu, theta0)?;
    Integration { nu, lead, tol }.run(theta0.ln(), [w, ws], &[theta1], true)
}

/// Same solution sampled exactly at the given increasing `thetas`.
pub fn integrate_eta_at(nu: f64, theta0: f64, thetas: &[f64], tol: f64) -> Result<EtaCurve> {
    check_outputs(theta0, thetas)?;
    let (lead, w, ws) = anchor(nu, theta0)?;
    Integration { nu, lead, tol }.run(theta0.ln(), [w, ws], thetas, false)
}

/// Sample the bounded solution with the default anchor and tolerance.
pub fn eta_curve(nu: f64, thetas: &[f64]) -> Result<EtaCurve> {
    integrate_eta_at(nu, DEFAULT_THETA0, thetas, DEFAULT_TOL)
}

/// Integrate from user-supplied data `(eta, eta')` at `theta_start`; works for any `nu`.
pub fn integrate_eta_from(
    nu: f64,
    theta_start: f64,
    eta: f64,
    eta_p: f64,
    thetas: &[f64],
    tol: f64,
) -> Result<EtaCurve> {
    if !(eta > 0.0) {
        return Err(Error::Domain(format!("initial eta must be positive, got {eta}")));
    }
    check_outputs(theta_start, thetas)?;
    let w = eta.ln();
    let ws = theta_start * eta_p / eta;
    Integration { nu, lead: Leading::NONE, tol }.run(theta_start.ln(), [w, ws], thetas, false)
}

fn check_outputs(theta0: f64, thetas: &[f64]) -> Result<()> {
    if thetas.is_empty() {
        return Err(Error::Domain("no output points requested".into()));
    }
    if thetas[0] < theta0 || thetas.windows(2).any(|p| !(p[1] > p[0])) {
        return Err(Error::Domain("output thetas must increase from the starting point".into()));
    }
    Ok(())
}

struct Integration {
    nu: f64,
    lead: Leading,
    tol: f64,
}

/// Magnitude of `ln eta` treated as reaching zero or a pole.
const BLOWUP: f64 = 300.0;

impl Integration {
    /// `u_ss` as a function of `(s, w)`.
    fn accel(&self, s: f64, w: f64) -> f64 {
        let nu = self.nu;
        let l = self.lead.at(s);
        let y = (s + l + w).exp(); // theta eta
        let x = (s - l - w).exp(); // theta / eta
        let minus = if self.lead.linear {
            // x = -2 nu e^{-w}: 2 nu + x = -2 nu expm1(-w)
            x * (-2.0 * nu * (-w).exp_m1())
        } else {
            x * (2.0 * nu + x)
        };
        y * (2.0 * nu + y) - minus
    }

    fn run(&self, s0: f64, y0: [f64; 2], thetas: &[f64], keep_steps: bool) -> Result<EtaCurve> {
        let outs: Vec<f64> = thetas.iter().map(|t| t.ln()).collect();
        let rhs = |s: f64, y: &[f64], dy: &mut [f64]| -> Result<()> {
            dy[0] = y[1];
            dy[1] = self.accel(s, y[0]);
            if !dy[1].is_finite() {
                return Err(Error::Singularity { theta: s.exp(), reason: "non-finite right-hand side".into() });
            }
            Ok(())
        };
        let solver = Dop853::new(self.tol, self.tol * 1e-3);
        let mut steps: Vec<(f64, [f64; 2])> = Vec::new();
        let observe = |s: f64, y: &[f64]| -> Result<()> {
            let u = self.lead.at(s) + y[0];
            if !u.is_finite() || u.abs() > BLOWUP {
                let reason = if u < 0.0 { "eta reached zero" } else { "eta reached a pole" };
                return Err(Error::Singularity { theta: s.exp(), reason: reason.into() });
            }
            if keep_steps {
                steps.push((s, [y[0], y[1]]));
            }
            Ok(())
        };
        let result = solver.integrate_observed(rhs, s0, &y0, &outs, observe);
        let (samples, _) = match result {
            Err(Error::StepUnderflow(s)) => {
                return Err(Error::Singularity { theta: s.exp(), reason: "step size underflow".into() })
            }
            other => other?,
        };
        let points: Vec<(f64, [f64; 2])> = if keep_steps {
            let mut pts = vec![(s0, y0)];
            pts.extend(steps);
            pts.dedup_by(|a, b| a.0 == b.0);
            pts
        } else {
            samples.iter().map(|smp| (smp.t, [smp.y[0], smp.y[1]])).collect()
        };
        self.curve(&points)
    }

    fn curve(&self, points: &[(f64, [f64; 2])]) -> Result<EtaCurve> {
        let n = points.len();
        let mut c = EtaCurve {
            nu: self.nu,
            thetas: Vec::with_capacity(n),
            eta: Vec::with_capacity(n),
            eta_prime: Vec::with_capacity(n),
            eta_second: Vec::with_capacity(n),
            rho: Vec::with_capacity(n),
            rho_prime: Vec::with_capacity(n),
            gap: Vec::with_capacity(n),
        };
        for &(s, [w, ws]) in points {
            let theta = s.exp();
            let u = self.lead.at(s) + w;
            let us = self.lead.p + ws;
            let uss = self.accel(s, w);
            let eta = u.exp();
            let eta_p = eta * us / theta;
            // theta^2 eta'' = eta (u_ss + u_s^2 - u_s)
            let eta_pp = eta * (uss + us * us - us) / (theta * theta);
            let rho = -theta * u.sinh() - 0.5 * us;
            c.thetas.push(theta);
            c.eta.push(eta);
            c.eta_prime.push(eta_p);
            c.eta_second.push(eta_pp);
            c.rho.push(rho);
            c.rho_prime.push(rho_prime_chain(theta, eta, eta_p, eta_pp));
            c.gap.push(-u.exp_m1());
        }
        Ok(c)
    }
}

/// Result of fitting the scaled gap over a window of large `theta`.
///
/// The model is `lambda + kappa / theta + mu e^{4 theta} theta^{2 nu}`. The last
/// column is the growing solution of the linearised equation relative to the
/// decaying one; rounding seeds it along the whole integration and it would
/// otherwise dominate the window.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LargeThetaFit {
    pub lambda: f64,
    pub kappa: f64,
    /// Coefficient of the growing mode, normalised to one at the window's right end.
    pub growing: f64,
    /// Largest misfit of the model over the window.
    pub misfit: f64,
    /// `cos(pi nu) / pi`.
    pub expected: f64,
}

impl LargeThetaFit {
    pub fn relative_error(&self) -> f64 {
        (self.lambda - self.expected).abs() / self.expected.abs()
    }
}

/// Least-squares fit of the scaled gap over `[lo, hi]` sampled at `points` thetas.
pub fn fit_large_theta(nu: f64, lo: f64, hi: f64, points: usize, theta0: f64, tol: f64) -> Result<LargeThetaFit> {
    if !(hi > lo) || points < 4 {
        return Err(Error::Domain("large-theta window needs hi > lo and at least 4 points".into()));
    }
    let thetas: Vec<f64> = (0..points).map(|i| lo + (hi - lo) * i as f64 / (points - 1) as f64).collect();
    let curve = integrate_eta_at(nu, theta0, &thetas, tol)?;
    let lam = curve.scaled_gaps();
    let grow = |t: f64| (4.0 * (t - hi) + 2.0 * nu * (t / hi).ln()).exp();
    let design = DMatrix::from_fn(points, 3, |i, j| match j {
        0 => 1.0,
        1 => 1.0 / thetas[i],
        _ => grow(thetas[i]),
    });
    let rhs = DVector::from_column_slice(&lam);
    let coef = design
        .clone()
        .svd(true, true)
        .solve(&rhs, 1e-14)
        .map_err(|e| Error::Domain(format!("large-theta fit: {e}")))?;
    let misfit = (design * &coef - rhs).amax();
    Ok(LargeThetaFit { lambda: coef[0], kappa: coef[1], growing: coef[2], misfit, expected: (PI * nu).cos() / PI })
}
