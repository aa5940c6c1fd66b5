//! The linear systems `dg/dt = M g` and `dg/dtheta = N g` satisfied by the special
//! solutions `g = (g_c, g_s)`, and reconstruction of `g` from the Painleve data.

use std::sync::Arc;

use nalgebra::Matrix2;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ode::Dop853;
use crate::painleve::{painleve_rhs, rho_from_eta, rho_prime_chain, EtaCurve};
use crate::params::Params;
use crate::quadrature::GaussJacobi;
use crate::solver::{apply_operator, default_quadrature_size, positivity_constant, GridFunction};
use crate::spheroidal::Parity;

/// `M(t) = [[0, theta], [theta, 0]] + P / (1 - t^2)`.
pub fn matrix_m(nu: f64, theta: f64, t: f64, eta: f64, rho: f64) -> Result<Matrix2<f64>> {
    if t.abs() >= 1.0 {
        return Err(Error::Pole(format!("M has poles at t = +-1, got t = {t}")));
    }
    if eta == 0.0 {
        return Err(Error::Pole("M at eta = 0".into()));
    }
    let a = nu + 0.5;
    let d = 1.0 / ((1.0 - t) * (1.0 + t));
    Ok(Matrix2::new(d * t * (a - rho), theta + d * (a + rho) / eta, theta + d * eta * (a - rho), d * t * (a + rho)))
}

/// `N(t) = [[(1/2 + rho)/theta, t], [t, (1/2 - rho)/theta]]`.
pub fn matrix_n(theta: f64, t: f64, rho: f64) -> Matrix2<f64> {
    Matrix2::new((0.5 + rho) / theta, t, t, (0.5 - rho) / theta)
}

/// `(eta, eta', rho, rho')` at `theta` from a curve: exact samples are used as
/// stored, other points are interpolated and completed through the ODE.
fn curve_state(curve: &EtaCurve, theta: f64) -> Result<(f64, f64, f64, f64)> {
    if let Some(i) = curve.find(theta) {
        return Ok((curve.eta[i], curve.eta_prime[i], curve.rho[i], curve.rho_prime[i]));
    }
    let (eta, eta_p) = curve
        .interpolate(theta)
        .ok_or_else(|| Error::Domain(format!("theta = {theta} lies outside the sampled curve")))?;
    let eta_pp = painleve_rhs(curve.nu, theta, eta, eta_p)?;
    Ok((eta, eta_p, rho_from_eta(theta, eta, eta_p)?, rho_prime_chain(theta, eta, eta_p, eta_pp)))
}

/// Frobenius norm of `dN/dt - dM/dtheta - [M, N]` along a curve.
pub fn zero_curvature_residual(nu: f64, theta: f64, t: f64, curve: &EtaCurve) -> Result<f64> {
    let (eta, eta_p, rho, rho_p) = curve_state(curve, theta)?;
    Ok(zero_curvature_at(nu, theta, t, eta, eta_p, rho, rho_p)?.norm())
}

/// Residual matrix for explicitly given `(eta, eta', rho, rho')`.
pub fn zero_curvature_at(
    nu: f64,
    theta: f64,
    t: f64,
    eta: f64,
    eta_p: f64,
    rho: f64,
    rho_p: f64,
) -> Result<Matrix2<f64>> {
    let m = matrix_m(nu, theta, t, eta, rho)?;
    let n = matrix_n(theta, t, rho);
    let a = nu + 0.5;
    let d = 1.0 / ((1.0 - t) * (1.0 + t));
    let dn_dt = Matrix2::new(0.0, 1.0, 1.0, 0.0);
    let dm_dth = Matrix2::new(
        -d * t * rho_p,
        1.0 + d * (rho_p * eta - (a + rho) * eta_p) / (eta * eta),
        1.0 + d * (eta_p * (a - rho) - eta * rho_p),
        d * t * rho_p,
    );
    Ok(dn_dt - dm_dth - (m * n - n * m))
}

/// How the reconstructed pair is scaled.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Normalization {
    /// `eta k_c^2 = C(nu) theta^{1-nu} G(1)`.
    #[default]
    Positivity,
    /// `(Gamma g_c)(0) = 1`, using the integral operator once.
    Operator,
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct ReconstructOptions {
    pub normalization: Normalization,
    pub n_quad: Option<usize>,
    /// Integrator tolerance (default `1e-12`).
    pub tol: Option<f64>,
}

/// Reconstructed pair with the edge data produced along the way.
#[derive(Debug, Clone)]
pub struct Reconstruction {
    pub gc: GridFunction,
    pub gs: GridFunction,
    /// `h_s(1) / h_c(1)` of the integrated system.
    pub edge_ratio: f64,
    /// `k_c` after scaling.
    pub k_c: f64,
    /// `G(1)` after scaling.
    pub g1: f64,
    pub scale: f64,
}

/// Allowed gap between the reconstructed edge ratio and the curve's `eta`.
pub const COMPATIBILITY_TOL: f64 = 1e-6;

/// Offsets from `t = 1` used to extrapolate the smooth factor to the edge.
const EDGE_OFFSETS: [f64; 4] = [4e-4, 3e-4, 2e-4, 1e-4];
/// Cubic extrapolation weights from `EDGE_OFFSETS` to zero offset.
const EDGE_WEIGHTS: [f64; 4] = [-1.0, 4.0, -6.0, 4.0];

pub fn reconstruct_solutions(nu: f64, theta: f64, curve: &EtaCurve) -> Result<(GridFunction, GridFunction)> {
    let r = reconstruct_with(nu, theta, curve, ReconstructOptions::default())?;
    Ok((r.gc, r.gs))
}

/// Integrate the `t`-system for `h = (1-t^2)^{nu+1/2} g` from `t = 0` with
/// `h = (1, 0)`, then fix the overall scale.
pub fn reconstruct_with(nu: f64, theta: f64, curve: &EtaCurve, opts: ReconstructOptions) -> Result<Reconstruction> {
    let p = Params::new(nu, theta)?;
    if curve.nu != nu {
        return Err(Error::Domain(format!("curve is for nu = {}, not {nu}", curve.nu)));
    }
    let (eta, _, rho, _) = curve_state(curve, theta)?;
    if !(eta > 0.0) {
        return Err(Error::Positivity(format!("eta = {eta} at theta = {theta}")));
    }
    let n = opts.n_quad.unwrap_or_else(|| default_quadrature_size(p)).max(16);
    let rule = Arc::new(GaussJacobi::edge(n, nu)?);
    let a = nu + 0.5;

    // outputs: non-negative nodes and the edge stencil, merged in increasing order
    let mut outs: Vec<f64> = rule.nodes.iter().copied().filter(|&t| t >= 0.0).collect();
    outs.extend(EDGE_OFFSETS.iter().map(|d| 1.0 - d));
    outs.sort_by(|x, y| x.partial_cmp(y).unwrap());
    outs.dedup();

    let rhs = |t: f64, h: &[f64], dh: &mut [f64]| -> Result<()> {
        let d = 1.0 / ((1.0 - t) * (1.0 + t));
        dh[0] = theta * h[1] + d * (a + rho) * (h[1] / eta - t * h[0]);
        dh[1] = theta * h[0] + d * (a - rho) * (eta * h[0] - t * h[1]);
        Ok(())
    };
    let tol = opts.tol.unwrap_or(1e-12);
    let (samples, _) = Dop853::new(tol, tol * 1e-2).integrate(rhs, 0.0, &[1.0, 0.0], &outs)?;
    let lookup = |t: f64| -> &[f64] {
        let i = outs.binary_search_by(|x| x.partial_cmp(&t).unwrap()).expect("output point");
        &samples[i].y
    };

    let mut edge = [0.0; 2];
    for (d, w) in EDGE_OFFSETS.iter().zip(EDGE_WEIGHTS) {
        let y = lookup(1.0 - d);
        edge[0] += w * y[0];
        edge[1] += w * y[1];
    }
    let edge_ratio = edge[1] / edge[0];
    if !((edge_ratio - eta).abs() <= COMPATIBILITY_TOL * eta.abs().max(1.0)) {
        return Err(Error::Compatibility(format!(
            "edge ratio h_s/h_c = {edge_ratio:.12e} differs from eta = {eta:.12e}"
        )));
    }

    let mut hc = vec![0.0; n];
    let mut hs = vec![0.0; n];
    for (j, &t) in rule.nodes.iter().enumerate() {
        let y = lookup(t.abs());
        hc[j] = y[0];
        hs[j] = if t < 0.0 { -y[1] } else { y[1] };
    }
    let gc = GridFunction::new(rule.clone(), hc)?.with_parity(Parity::Even);
    let gs = GridFunction::new(rule, hs)?.with_parity(Parity::Odd);

    let g1_raw = gc.integrate(|t| (theta * t).exp()) + gs.integrate(|t| (theta * t).exp());
    let kc_raw = edge[0] / 2f64.powf(a);
    let scale = match opts.normalization {
        Normalization::Positivity => positivity_constant(nu) * theta.powf(1.0 - nu) * g1_raw / (eta * kc_raw * kc_raw),
        Normalization::Operator => 1.0 / apply_operator(p, &gc, &[0.0])?[0],
    };
    if !(scale > 0.0) || !scale.is_finite() {
        return Err(Error::Positivity(format!("normalisation scale {scale:.6e} is not positive")));
    }
    Ok(Reconstruction {
        gc: gc.scaled(scale),
        gs: gs.scaled(scale),
        edge_ratio,
        k_c: kc_raw * scale,
        g1: g1_raw * scale,
        scale,
    })
}
