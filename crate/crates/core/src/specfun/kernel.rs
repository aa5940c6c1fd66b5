//! The kernel `K(w) = w^nu K_nu(theta w)`, its Fourier transform, and the split
//! used for product integration.

use std::f64::consts::PI;

use super::bessel::bessel_k;
use super::gamma::gamma;
use crate::error::{Error, Result};
use crate::params::Params;

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// `K(w)` for `w > 0`.
pub fn kernel_eval(p: Params, w: f64) -> Result<f64> {
    if !(w > 0.0) {
        return Err(Error::Domain(format!("kernel needs w > 0, got {w}; the diagonal is handled by the caller")));
    }
    Ok(w.powf(p.nu) * bessel_k(p.nu, p.theta * w)?)
}

/// Limit of `K(w)` as `w -> 0+`: finite for `nu > 0`, infinite otherwise.
pub fn kernel_at_zero(p: Params) -> f64 {
    if p.nu > 0.0 {
        p.theta.powf(-p.nu) * 2f64.powf(p.nu - 1.0) * gamma(p.nu)
    } else {
        f64::INFINITY
    }
}

/// `int K(|w|) e^{i k w} dw = (2 theta)^nu sqrt(pi) Gamma(nu+1/2) / (k^2 + theta^2)^{nu+1/2}`.
pub fn kernel_fourier(p: Params, momentum: f64) -> f64 {
    (2.0 * p.theta).powf(p.nu) * PI.sqrt() * gamma(p.nu + 0.5)
        / (momentum * momentum + p.theta * p.theta).powf(p.nu + 0.5)
}

/// Singular factor multiplying the second series of [`KernelSplit`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Singular {
    /// `|w|^{2 nu}`
    Power(f64),
    /// `ln |w|`
    Log,
}

/// `K(w) = S(w^2) - sing(w) R(w^2)` with entire `S`, `R` given by Taylor coefficients in `u = w^2`.
#[derive(Debug, Clone)]
pub struct KernelSplit {
    pub singular: Singular,
    pub s: Vec<f64>,
    pub r: Vec<f64>,
}

impl KernelSplit {
    /// Coefficients are kept until they are negligible for `|w| <= w_max`.
    pub fn new(p: Params, w_max: f64) -> Self {
        let nu = p.nu;
        let h = 0.5 * p.theta;
        let q = h * h;
        let umax = (w_max * w_max).max(1.0);
        let mut s = Vec::new();
        let mut r = Vec::new();
        let negligible = |c: f64, k: usize, first: f64| -> bool {
            k > 2 && c.abs() * umax.powi(k as i32) < 1e-18 * first.abs().max(1e-300)
        };
        if nu == 0.0 {
            // K_0(theta w) = -ln(w) I_0(theta w) + P(w^2)
            let shift = -(h.ln()) - EULER_GAMMA;
            let mut c = 1.0;
            let mut harmonic = 0.0;
            for k in 0.. {
                if k > 0 {
                    c *= q / ((k * k) as f64);
                    harmonic += 1.0 / k as f64;
                }
                r.push(c);
                s.push(c * (harmonic + shift));
                if negligible(c, k, 1.0) {
                    break;
                }
            }
            return Self { singular: Singular::Log, s, r };
        }
        let pref = PI / (2.0 * (nu * PI).sin());
        let mut cs = pref * h.powf(-nu) / gamma(1.0 - nu);
        let mut cr = pref * h.powf(nu) / gamma(1.0 + nu);
        let (s0, r0) = (cs, cr);
        for k in 0.. {
            if k > 0 {
                let fk = k as f64;
                cs *= q / (fk * (fk - nu));
                cr *= q / (fk * (fk + nu));
            }
            s.push(cs);
            r.push(cr);
            if negligible(cs, k, s0) && negligible(cr, k, r0) {
                break;
            }
        }
        Self { singular: Singular::Power(2.0 * nu), s, r }
    }

    fn horner(c: &[f64], u: f64) -> f64 {
        c.iter().rev().fold(0.0, |acc, &ck| acc * u + ck)
    }

    pub fn smooth(&self, u: f64) -> f64 {
        Self::horner(&self.s, u)
    }

    pub fn singular_coeff(&self, u: f64) -> f64 {
        Self::horner(&self.r, u)
    }

    pub fn singular_factor(&self, w: f64) -> f64 {
        match self.singular {
            Singular::Power(e) => w.abs().powf(e),
            Singular::Log => w.abs().ln(),
        }
    }

    /// Reassembled kernel, for checking the split.
    pub fn eval(&self, w: f64) -> f64 {
        let u = w * w;
        self.smooth(u) - self.singular_factor(w) * self.singular_coeff(u)
    }
}
