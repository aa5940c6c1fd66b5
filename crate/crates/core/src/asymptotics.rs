//! Closed-form limits: the power kernel at small `theta`, the half-line problem
//! and its Laguerre eigenfunctions, and the two-edge approximation at large `theta`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::painleve::b_constant;
use crate::params::Params;
use crate::quadrature::tanh_sinh;
use crate::specfun::gamma::{gamma, gamma_fn};
use crate::specfun::kernel::kernel_eval;
use crate::specfun::orthopoly::laguerre;

/// Solutions of `int |x-t|^{2nu} g(t) dt = 1` and `= x` on `[-1, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerKernelSolutions {
    pub nu: f64,
}

impl PowerKernelSolutions {
    /// `cos(pi nu) / (pi (1-t^2)^{nu+1/2})`.
    pub fn g0(&self, t: f64) -> f64 {
        (PI * self.nu).cos() / (PI * ((1.0 - t) * (1.0 + t)).powf(self.nu + 0.5))
    }

    /// `-cos(pi nu) t / (2 pi nu (1-t^2)^{nu+1/2})`.
    pub fn g1(&self, t: f64) -> f64 {
        -t * self.g0(t) / (2.0 * self.nu)
    }
}

pub fn power_kernel_solutions(nu: f64) -> Result<PowerKernelSolutions> {
    if !(nu != 0.0 && nu.abs() < 0.5) {
        return Err(Error::Domain(format!("power-kernel solutions need 0 < |nu| < 1/2, got {nu}")));
    }
    Ok(PowerKernelSolutions { nu })
}

/// `(mu_c, mu_s)` with `g_c ~ mu_c g0` and `g_s ~ mu_s g1` as `theta -> 0`.
pub fn small_theta_mu(nu: f64, theta: f64) -> Result<(f64, f64)> {
    power_kernel_solutions(nu)?;
    let p = Params::new(nu, theta)?;
    let sing = p.theta.powf(nu) * gamma_fn(-nu)? / 2f64.powf(1.0 + nu);
    let smooth = p.theta.powf(-nu) * (PI * nu).cos() * gamma(0.5 - nu) * gamma_fn(nu)?
        / (PI.sqrt() * 2f64.powf(1.0 - nu) * gamma(1.0 - nu));
    Ok((1.0 / (sing + smooth), theta / sing))
}

/// `eta(theta) ~ B (2 theta)^{1-2nu} - theta / (2 nu)` as `theta -> 0`.
///
/// The first term dominates for `nu > 0` and the second for `nu < 0`; both are
/// kept so that the leading correction is included either way.
pub fn small_theta_eta(nu: f64, theta: f64) -> Result<f64> {
    power_kernel_solutions(nu)?;
    Params::new(nu, theta)?;
    Ok(b_constant(nu)? * (2.0 * theta).powf(1.0 - 2.0 * nu) - theta / (2.0 * nu))
}

/// `C_nu = sqrt(2) cos(pi nu) / pi^{3/2}`.
pub fn wiener_hopf_constant(nu: f64) -> f64 {
    2f64.sqrt() * (PI * nu).cos() / PI.powf(1.5)
}

/// Upper limit replacing infinity in half-line quadratures.
pub const HALF_LINE_CUTOFF: f64 = 40.0;

/// Solution `C_nu v^{-nu-1/2} e^{-v}` of the half-line equation with data `e^{-u}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HalfLineSolution {
    pub nu: f64,
    pub c_nu: f64,
}

/// A truncated half-line integral with a bound on the discarded tail.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HalfLineIntegral {
    pub value: f64,
    pub tail_bound: f64,
}

impl HalfLineSolution {
    pub fn eval(&self, v: f64) -> f64 {
        self.c_nu * v.powf(-self.nu - 0.5) * (-v).exp()
    }

    /// `int_0^inf |u-v|^nu K_nu(|u-v|) g0(v) dv`, which should equal `e^{-u}`.
    pub fn apply(&self, u: f64) -> Result<HalfLineIntegral> {
        let a = self.nu + 0.5;
        let c = self.c_nu;
        let value = half_line(self.nu, 1.0, u, |v, dv| c * dv.powf(-a) * (-v).exp())?;
        // beyond the cutoff K(w) <= K(cutoff - u) and v^{-a} <= cutoff^{-a}
        let k = kernel_eval(Params::new(self.nu, 1.0)?, HALF_LINE_CUTOFF - u)?;
        let tail_bound = c.abs() * HALF_LINE_CUTOFF.powf(-a) * k * (-HALF_LINE_CUTOFF).exp();
        Ok(HalfLineIntegral { value, tail_bound })
    }
}

pub fn wiener_hopf_halfline(nu: f64) -> Result<HalfLineSolution> {
    Params::new(nu, 1.0)?;
    Ok(HalfLineSolution { nu, c_nu: wiener_hopf_constant(nu) })
}

/// `int_0^cutoff K(|u-v|) f(v) dv` for a kernel of scale `theta`, with `f`
/// receiving `v` and its distance from zero.
fn half_line(nu: f64, theta: f64, u: f64, f: impl Fn(f64, f64) -> f64) -> Result<f64> {
    if !(u > 0.0 && u < HALF_LINE_CUTOFF) {
        return Err(Error::Domain(format!("evaluation point must lie in (0, {HALF_LINE_CUTOFF}), got {u}")));
    }
    let p = Params::new(nu, theta)?;
    let k = |w: f64| if w > 0.0 { kernel_eval(p, w).unwrap_or(0.0) } else { 0.0 };
    let left = tanh_sinh(|v, dv, du| k(du) * f(v, dv), 0.0, u, 1e-13);
    let right = tanh_sinh(|v, du, _| k(du) * f(v, v), u, HALF_LINE_CUTOFF, 1e-13);
    Ok(left + right)
}

/// Both sides of the Laguerre eigen-identity
/// `n! int_0^inf |x-t|^nu K_nu(|x-t|/2) t^{-nu-1/2} e^{-t/2} L_n(t) dt
///  = sqrt(pi) Gamma(nu+1/2) Gamma(n+1/2-nu) e^{-x/2} L_n(x)`, with `L_n = L_n^{-nu-1/2}`.
pub fn laguerre_identity(nu: f64, n: usize, x: f64) -> Result<(f64, f64)> {
    let lam = -nu - 0.5;
    let fact: f64 = (1..=n).map(|k| k as f64).product();
    let lhs = fact * half_line(nu, 0.5, x, |t, dt| dt.powf(lam) * (-0.5 * t).exp() * laguerre(n, lam, t))?;
    let rhs = PI.sqrt() * gamma(nu + 0.5) * gamma(n as f64 + 0.5 - nu) * (-0.5 * x).exp() * laguerre(n, lam, x);
    Ok((lhs, rhs))
}

/// Two-edge approximation of the solution with data `e^{-theta x}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GMinusApprox {
    pub nu: f64,
    pub theta: f64,
    pub c_nu: f64,
    /// Weight of the right-edge term.
    pub delta: f64,
}

impl GMinusApprox {
    pub fn eval(&self, t: f64) -> f64 {
        let a = self.nu + 0.5;
        let left = (1.0 + t).powf(-a) * (-t * self.theta).exp();
        let right = self.delta * (1.0 - t).powf(-a) * (t * self.theta).exp();
        self.c_nu * self.theta.sqrt() * (left + right)
    }

    /// `lim_{t->1} (g(-t) - g(t)) / (g(-t) + g(t)) = (1 - delta) / (1 + delta)`.
    pub fn eta_limit(&self) -> f64 {
        (1.0 - self.delta) / (1.0 + self.delta)
    }
}

pub fn gminus_large_theta(nu: f64, theta: f64) -> Result<GMinusApprox> {
    Params::new(nu, theta)?;
    if theta < 3.0 {
        return Err(Error::Domain(format!("two-edge approximation needs theta >= 3, got {theta}")));
    }
    Ok(GMinusApprox { nu, theta, c_nu: wiener_hopf_constant(nu), delta: 0.5 * large_theta_gap(nu, theta) })
}

/// `1 - eta ~ (cos(pi nu)/pi) Gamma(nu+1/2) 2^{-2nu} theta^{-nu-1/2} e^{-2 theta}`.
pub fn large_theta_gap(nu: f64, theta: f64) -> f64 {
    (PI * nu).cos() / PI * gamma(nu + 0.5) * (-2.0 * nu * 2f64.ln() - (nu + 0.5) * theta.ln() - 2.0 * theta).exp()
}

pub fn large_theta_eta(nu: f64, theta: f64) -> f64 {
    1.0 - large_theta_gap(nu, theta)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn power_kernel_constant_solution() {
        let s = power_kernel_solutions(0.25).unwrap();
        assert_relative_eq!(s.g0(0.0), 0.225_079_079, max_relative = 1e-8);
        assert_eq!(s.g1(-0.4), -s.g1(0.4));
        // int |x-t|^{1/2} g0(t) dt at x = 0.3, split at x to resolve both singularities
        let (nu, x) = (0.25, 0.3);
        let a = nu + 0.5;
        let c = s.g0(0.0);
        let left = tanh_sinh(|_, da, db| c * db.powf(2.0 * nu) * (da * (2.0 - da)).powf(-a), -1.0, x, 1e-14);
        let right = tanh_sinh(|_, da, db| c * da.powf(2.0 * nu) * (db * (2.0 - db)).powf(-a), x, 1.0, 1e-14);
        assert_relative_eq!(left + right, 1.0, max_relative = 1e-8);
        assert!(power_kernel_solutions(0.0).is_err());
    }

    #[test]
    fn small_theta_limits() {
        let b = b_constant(0.25).unwrap();
        assert_relative_eq!(small_theta_eta(0.25, 1e-3).unwrap(), b * 0.002f64.sqrt() - 0.002, max_relative = 1e-14);
        assert_relative_eq!(small_theta_eta(-0.25, 1e-3).unwrap(), 2e-3, max_relative = 2e-2);
        for &(nu, th) in &[(0.25, 1e-3), (-0.25, 1e-3), (0.1, 0.05)] {
            let (mc, ms) = small_theta_mu(nu, th).unwrap();
            let via_mu = -ms / (2.0 * nu * mc);
            assert_relative_eq!(via_mu, small_theta_eta(nu, th).unwrap(), max_relative = 1e-10);
        }
    }

    #[test]
    fn half_line_solution() {
        assert_relative_eq!(wiener_hopf_constant(0.0), 0.253_974, max_relative = 1e-5);
        let s = wiener_hopf_halfline(0.25).unwrap();
        let r = s.apply(1.0).unwrap();
        assert!((r.value - (-1f64).exp()).abs() < 1e-5, "{}", r.value);
        assert!(r.tail_bound < 1e-15);
    }

    #[test]
    fn laguerre_eigenfunctions() {
        for n in 0..3 {
            let (l, r) = laguerre_identity(0.25, n, 1.0).unwrap();
            assert_relative_eq!(l, r, max_relative = 1e-5);
        }
        let (l, r) = laguerre_identity(-0.2, 1, 2.5).unwrap();
        assert_relative_eq!(l, r, max_relative = 1e-5);
    }

    #[test]
    fn two_edge_approximation() {
        let g = gminus_large_theta(0.25, 5.0).unwrap();
        let want = (0.5 / PI) * 5f64.powf(-0.75) * 2f64.powf(-0.5) * (PI / 4.0).cos() * (-10f64).exp() * gamma(0.75);
        assert_relative_eq!(g.delta, want, max_relative = 1e-13);
        assert!((g.eta_limit() - large_theta_eta(0.25, 5.0)).abs() < 4.0 * g.delta * g.delta);
        // at t = 0 the left-edge term is 1 and the right-edge term is delta
        assert!(1.0 / g.delta >= 10f64.exp());
        assert!(gminus_large_theta(0.25, 2.0).is_err());
    }
}
