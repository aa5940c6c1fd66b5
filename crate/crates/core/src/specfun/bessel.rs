//! Modified Bessel functions of real order and positive real argument.
//!
//! `K` uses Temme's series for `x < 2` and Steed's continued fraction above,
//! followed by upward recurrence in the order. `I` is summed from its
//! power series, which has only positive terms for order `> -1`.

use std::f64::consts::PI;

use super::gamma::{gamma, ln_gamma, temme_gammas};
use crate::error::{Error, Result};

/// Argument at which `K` switches from the Temme series to the continued fraction.
pub const K_SEAM: f64 = 2.0;

const EPS: f64 = 1e-16;
const MAXIT: usize = 100_000;

/// `(K_mu(x), K_{mu+1}(x))` for `|mu| <= 1/2` from Temme's series (`x` small).
pub(crate) fn k_pair_temme(mu: f64, x: f64) -> (f64, f64) {
    let x2 = 0.5 * x;
    let pimu = PI * mu;
    let fact = if pimu.abs() < EPS { 1.0 } else { pimu / pimu.sin() };
    let d = -x2.ln();
    let e = mu * d;
    let fact2 = if e.abs() < EPS { 1.0 } else { e.sinh() / e };
    let (gam1, gam2) = temme_gammas(mu);
    let gampl = gam2 - mu * gam1; // 1/Gamma(1+mu)
    let gammi = gam2 + mu * gam1; // 1/Gamma(1-mu)
    let mut ff = fact * (gam1 * e.cosh() + gam2 * fact2 * d);
    let mut sum = ff;
    let ee = e.exp();
    let mut p = 0.5 * ee / gampl;
    let mut q = 0.5 / (ee * gammi);
    let mut c = 1.0;
    let dd = x2 * x2;
    let mut sum1 = p;
    let mu2 = mu * mu;
    for i in 1..MAXIT {
        let fi = i as f64;
        ff = (fi * ff + p + q) / (fi * fi - mu2);
        c *= dd / fi;
        p /= fi - mu;
        q /= fi + mu;
        let del = c * ff;
        sum += del;
        sum1 += c * (p - fi * ff);
        if del.abs() < sum.abs() * EPS {
            break;
        }
    }
    (sum, sum1 * 2.0 / x)
}

/// `(e^x K_mu(x), e^x K_{mu+1}(x))` for `|mu| <= 1/2` from Steed's form of the
/// second continued fraction (`x` not small).
pub(crate) fn k_pair_cf2_scaled(mu: f64, x: f64) -> (f64, f64) {
    let mut b = 2.0 * (1.0 + x);
    let mut d = 1.0 / b;
    let mut h = d;
    let mut delh = d;
    let mut q1 = 0.0;
    let mut q2 = 1.0;
    let a1 = 0.25 - mu * mu;
    let mut q = a1;
    let mut c = a1;
    let mut a = -a1;
    let mut s = 1.0 + q * delh;
    for i in 1..MAXIT {
        let fi = i as f64;
        a -= 2.0 * fi;
        c = -a * c / (fi + 1.0);
        let qnew = (q1 - b * q2) / a;
        q1 = q2;
        q2 = qnew;
        q += c * qnew;
        b += 2.0;
        d = 1.0 / (b + a * d);
        delh *= b * d - 1.0;
        h += delh;
        let dels = q * delh;
        s += dels;
        if (dels / s).abs() < EPS {
            break;
        }
    }
    h *= a1;
    let k0 = (PI / (2.0 * x)).sqrt() / s;
    let k1 = k0 * (mu + x + 0.5 - h) / x;
    (k0, k1)
}

/// `(e^x K_mu(x), e^x K_{mu+1}(x))` for `|mu| <= 1/2`, choosing the branch by `x`.
pub fn k_pair_scaled(mu: f64, x: f64) -> (f64, f64) {
    if x < K_SEAM {
        let (a, b) = k_pair_temme(mu, x);
        (a * x.exp(), b * x.exp())
    } else {
        k_pair_cf2_scaled(mu, x)
    }
}

/// `e^x K_nu(x)` for any real order.
pub fn bessel_k_scaled(nu: f64, x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::Domain(format!("bessel_k needs w > 0, got {x}")));
    }
    let nu = nu.abs();
    let nl = (nu + 0.5).floor();
    let mu = nu - nl;
    let (mut k0, mut k1) = k_pair_scaled(mu, x);
    let mut order = mu;
    for _ in 0..nl as usize {
        let next = 2.0 * (order + 1.0) / x * k1 + k0;
        k0 = k1;
        k1 = next;
        order += 1.0;
    }
    Ok(k0)
}

/// Modified Bessel function of the third kind `K_nu(w)`.
pub fn bessel_k(nu: f64, w: f64) -> Result<f64> {
    Ok(bessel_k_scaled(nu, w)? * (-w).exp())
}

/// Modified Bessel function of the first kind `I_nu(w)` for `w >= 0`.
pub fn bessel_i(nu: f64, w: f64) -> Result<f64> {
    if !(w >= 0.0) || !w.is_finite() {
        return Err(Error::Domain(format!("bessel_i needs w >= 0, got {w}")));
    }
    if nu <= -1.0 && nu != nu.round() {
        // I_{-a} = I_a + (2/pi) sin(a pi) K_a
        let a = -nu;
        return Ok(bessel_i(a, w)? + 2.0 / PI * (a * PI).sin() * bessel_k(a, w)?);
    }
    if nu < 0.0 && nu == nu.round() {
        return bessel_i(-nu, w);
    }
    if w == 0.0 {
        return Ok(if nu == 0.0 {
            1.0
        } else if nu > 0.0 {
            0.0
        } else {
            f64::INFINITY
        });
    }
    Ok(i_series(nu, w))
}

fn i_series(nu: f64, w: f64) -> f64 {
    let half = 0.5 * w;
    let lead =
        if nu + 1.0 < 60.0 { half.powf(nu) / gamma(nu + 1.0) } else { (nu * half.ln() - ln_gamma(nu + 1.0)).exp() };
    let q = half * half;
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..MAXIT {
        let fk = k as f64;
        term *= q / (fk * (fk + nu));
        sum += term;
        if term < EPS * sum {
            break;
        }
    }
    lead * sum
}

/// Derivative `K_nu'(w) = -K_{nu+1}(w) + (nu/w) K_nu(w)`.
pub fn bessel_k_deriv(nu: f64, w: f64) -> Result<f64> {
    Ok(-bessel_k(nu + 1.0, w)? + nu / w * bessel_k(nu, w)?)
}

/// Derivative `I_nu'(w) = I_{nu+1}(w) + (nu/w) I_nu(w)`.
pub fn bessel_i_deriv(nu: f64, w: f64) -> Result<f64> {
    Ok(bessel_i(nu + 1.0, w)? + nu / w * bessel_i(nu, w)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn half_integer_closed_forms() {
        let k = bessel_k(0.5, 1.0).unwrap();
        assert_relative_eq!(k, (PI / 2.0).sqrt() * (-1.0f64).exp(), max_relative = 1e-14);
        assert_relative_eq!(k, 0.461_068_504_447_894_4, max_relative = 1e-13);
        let i = bessel_i(0.5, 1.0).unwrap();
        assert_relative_eq!(i, (2.0 / PI).sqrt() * 1.0f64.sinh(), max_relative = 1e-14);
        assert_eq!(bessel_i(0.25, 0.0).unwrap(), 0.0);
        // K_{3/2}(x) = sqrt(pi/2x) e^{-x} (1 + 1/x), exercises recurrence on both branches
        for &x in &[0.3, 1.7, 2.5, 9.0] {
            let exact = (PI / (2.0 * x)).sqrt() * (-x).exp() * (1.0 + 1.0 / x);
            assert_relative_eq!(bessel_k(1.5, x).unwrap(), exact, max_relative = 1e-13);
        }
    }

    #[test]
    fn small_and_large_argument_limits() {
        let nu = 0.25;
        let w: f64 = 1e-6;
        let lead = 2f64.powf(nu - 1.0) * gamma(nu) * w.powf(-nu) + 2f64.powf(-nu - 1.0) * gamma(-nu) * w.powf(nu);
        assert_relative_eq!(bessel_k(nu, w).unwrap(), lead, max_relative = 1e-6);
        let w = 30.0;
        let r = bessel_k(nu, w).unwrap() / ((PI / (2.0 * w)).sqrt() * (-w).exp());
        assert!((r - 1.0).abs() < 0.01);
    }

    #[test]
    fn seam_continuity() {
        for &mu in &[-0.5, -0.37, -0.1, 0.0, 0.25, 0.49, 0.5] {
            let (a0, a1) = k_pair_temme(mu, K_SEAM);
            let (b0, b1) = k_pair_cf2_scaled(mu, K_SEAM);
            let s = (-K_SEAM).exp();
            assert_relative_eq!(a0, b0 * s, max_relative = 1e-13);
            assert_relative_eq!(a1, b1 * s, max_relative = 1e-13);
        }
    }

    #[test]
    fn wronskian() {
        let (nu, w) = (0.25, 2.0);
        let lhs = bessel_i(nu, w).unwrap() * bessel_k_deriv(nu, w).unwrap()
            - bessel_i_deriv(nu, w).unwrap() * bessel_k(nu, w).unwrap();
        assert!((lhs + 1.0 / w).abs() < 1e-10, "{lhs}");
        for &(nu, w) in &[(0.4, 0.3), (-0.3, 5.0), (7.75, 3.0), (0.1, 25.0)] {
            let lhs = bessel_i(nu, w).unwrap() * bessel_k_deriv(nu, w).unwrap()
                - bessel_i_deriv(nu, w).unwrap() * bessel_k(nu, w).unwrap();
            assert_relative_eq!(lhs, -1.0 / w, max_relative = 1e-12);
        }
    }

    #[test]
    fn k_from_i_reflection() {
        // K_nu = pi/(2 sin nu pi) (I_{-nu} - I_nu), two independent routes
        for &(nu, w) in &[(0.25, 0.7), (0.4, 1.9), (-0.2, 0.05)] {
            let via_i = PI / (2.0 * (nu * PI).sin()) * (bessel_i(-nu, w).unwrap() - bessel_i(nu, w).unwrap());
            assert_relative_eq!(bessel_k(nu, w).unwrap(), via_i, max_relative = 1e-12);
        }
    }

    #[test]
    fn domain_errors() {
        assert!(bessel_k(0.2, 0.0).is_err());
        assert!(bessel_k(0.2, -1.0).is_err());
        assert!(bessel_i(0.2, -1.0).is_err());
    }
}
