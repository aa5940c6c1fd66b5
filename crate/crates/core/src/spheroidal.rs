//! Angular and radial spheroidal functions of the kernel's Green-function
//! equation, expanded in Gegenbauer polynomials `C_n^{-nu}`.
//!
//! Angular modes come from a tridiagonal pencil acting on coefficients of one
//! parity. The symmetric eigensolve gives starting values. Coefficients are then
//! rebuilt from two-sided continued fractions, so even the tiny tail terms carry
//! full relative accuracy. The radial series of the third kind needs that
//! accuracy.

use std::f64::consts::PI;

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ode::Dop853;
use crate::params::Params;
use crate::specfun::bessel::{bessel_i, k_pair_scaled};
use crate::specfun::gamma::{gamma, ln_gamma};
use crate::specfun::orthopoly::{gegenbauer_all, gegenbauer_norm};

/// Smallest coefficient kept, relative to the largest.
const COEFF_FLOOR: f64 = 1e-200;
/// Required decay of the pencil eigenvectors at the truncation edge.
const DECAY: f64 = 1e-12;
const MAX_TRUNC: usize = 1024;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Parity {
    Even,
    Odd,
}

impl Parity {
    pub fn of(m: usize) -> Self {
        if m.is_multiple_of(2) {
            Parity::Even
        } else {
            Parity::Odd
        }
    }

    /// Lowest index `n` of this parity.
    pub fn offset(self) -> usize {
        match self {
            Parity::Even => 0,
            Parity::Odd => 1,
        }
    }
}

/// Coefficients `(A_n, B_n, D_n)` of
/// `cos 2g C_n = A_n C_n + B_{n-2} C_{n-2} + D_{n+2} C_{n+2}` for `C_n = C_n^{-nu}(cos g)`.
pub fn pencil_coeffs(nu: f64, n: usize) -> (f64, f64, f64) {
    let n = n as f64;
    let a = -nu * (1.0 + nu) / ((n - nu).powi(2) - 1.0);
    let b = (n - 2.0 * nu + 1.0) * (n - 2.0 * nu) / (2.0 * (n - nu + 2.0) * (n - nu + 1.0));
    let d = if n < 2.0 { 0.0 } else { (n - 1.0) * n / (2.0 * (n - nu - 2.0) * (n - nu - 1.0)) };
    (a, b, d)
}

/// Rows `n = p, p+2, ...` of
/// `[theta^2 A_n/2 - n(n-2nu)] b_n + theta^2 B_n/2 b_{n+2} + theta^2 D_n/2 b_{n-2} = alpha b_n`.
#[derive(Debug, Clone)]
pub struct Pencil {
    pub parity: Parity,
    pub nu: f64,
    pub theta: f64,
    pub indices: Vec<usize>,
    pub diag: Vec<f64>,
    /// Coefficient of `b_{n+2}` in row `n`.
    pub upper: Vec<f64>,
    /// Coefficient of `b_{n-2}` in row `n`.
    pub lower: Vec<f64>,
}

fn row(nu: f64, theta: f64, n: usize) -> (f64, f64, f64) {
    let (a, b, d) = pencil_coeffs(nu, n);
    let h = 0.5 * theta * theta;
    let nf = n as f64;
    (h * a - nf * (nf - 2.0 * nu), h * b, h * d)
}

pub fn build_pencil(p: Params, parity: Parity, n_trunc: usize) -> Pencil {
    let indices: Vec<usize> = (0..n_trunc).map(|k| parity.offset() + 2 * k).collect();
    let mut diag = Vec::with_capacity(n_trunc);
    let mut upper = Vec::with_capacity(n_trunc);
    let mut lower = Vec::with_capacity(n_trunc);
    for &n in &indices {
        let (d, u, l) = row(p.nu, p.theta, n);
        diag.push(d);
        upper.push(u);
        lower.push(l);
    }
    Pencil { parity, nu: p.nu, theta: p.theta, indices, diag, upper, lower }
}

impl Pencil {
    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    /// Dense form of the (non-symmetric) truncated matrix.
    pub fn to_dense(&self) -> DMatrix<f64> {
        let n = self.len();
        let mut m = DMatrix::zeros(n, n);
        for k in 0..n {
            m[(k, k)] = self.diag[k];
            if k + 1 < n {
                m[(k, k + 1)] = self.upper[k];
                m[(k + 1, k)] = self.lower[k + 1];
            }
        }
        m
    }

    /// Similarity by `diag(sqrt(h_n))` with the Gegenbauer norms `h_n`, which makes the
    /// matrix symmetric because `B_n h_n = D_{n+2} h_{n+2}`.
    pub fn symmetrized(&self) -> DMatrix<f64> {
        let n = self.len();
        let mu = -self.nu;
        let norms: Vec<f64> = self.indices.iter().map(|&i| gegenbauer_norm(i, mu)).collect();
        let mut m = DMatrix::zeros(n, n);
        for k in 0..n {
            m[(k, k)] = self.diag[k];
            if k + 1 < n {
                let e = self.upper[k] * (norms[k] / norms[k + 1]).sqrt();
                m[(k, k + 1)] = e;
                m[(k + 1, k)] = e;
            }
        }
        m
    }
}

/// One angular eigenpair with its radial data.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SpheroidalMode {
    pub m: usize,
    pub parity: Parity,
    pub nu: f64,
    pub theta: f64,
    pub alpha: f64,
    /// `b_n` for `n = parity.offset() + 2k`, scaled so `max |b_n| = 1`.
    pub coeffs: Vec<f64>,
    pub norm: f64,
    pub mu: f64,
    pub edge_a: f64,
    pub edge_b: f64,
    /// Size of the pencil that produced the starting eigenvector.
    pub n_trunc: usize,
}

impl SpheroidalMode {
    pub fn index(&self, k: usize) -> usize {
        self.parity.offset() + 2 * k
    }

    pub fn params(&self) -> Params {
        Params { nu: self.nu, theta: self.theta }
    }
}

/// First `count` modes of one parity, `alpha` descending.
pub fn angular_modes(p: Params, parity: Parity, count: usize, n_trunc: usize) -> Result<Vec<SpheroidalMode>> {
    p.require_nonzero_nu("spheroidal expansion")?;
    if n_trunc < 8 {
        return Err(Error::Domain(format!("N_trunc must be >= 8, got {n_trunc}")));
    }
    if 2 * count > n_trunc {
        return Err(Error::Domain(format!("mode count {count} exceeds N_trunc/2 = {}", n_trunc / 2)));
    }
    let mut size = n_trunc;
    loop {
        let pencil = build_pencil(p, parity, size);
        let sym = pencil.symmetrized();
        if sym.iter().any(|v| !v.is_finite()) {
            return Err(Error::EigenSolve(format!("non-finite pencil entries at size {size}")));
        }
        let eig = SymmetricEigen::new(sym);
        let mut order: Vec<usize> = (0..size).collect();
        order.sort_by(|&i, &j| eig.eigenvalues[j].partial_cmp(&eig.eigenvalues[i]).unwrap());
        let mu = -p.nu;
        let mut decayed = true;
        let mut starts = Vec::with_capacity(count);
        for &col in order.iter().take(count) {
            let v = eig.eigenvectors.column(col);
            let b: Vec<f64> = (0..size).map(|k| v[k] / gegenbauer_norm(pencil.indices[k], mu).sqrt()).collect();
            let bmax = b.iter().fold(0.0f64, |m, x| m.max(x.abs()));
            if b[size - 1].abs() > DECAY * bmax {
                decayed = false;
                break;
            }
            starts.push((eig.eigenvalues[col], b));
        }
        if !decayed {
            if size * 2 > MAX_TRUNC {
                return Err(Error::Truncation {
                    what: format!("pencil coefficients have not decayed at N_trunc = {size}"),
                    tail: f64::NAN,
                });
            }
            size *= 2;
            continue;
        }
        let mut modes = Vec::with_capacity(count);
        for (k, (alpha0, b0)) in starts.into_iter().enumerate() {
            let peak = b0
                .iter()
                .enumerate()
                .max_by(|a, b| a.1.abs().partial_cmp(&b.1.abs()).unwrap())
                .map(|(i, _)| i)
                .unwrap();
            let (alpha, coeffs) = refine_mode(p, parity, alpha0, peak, size)?;
            let norm: f64 =
                coeffs.iter().enumerate().map(|(j, b)| b * b * gegenbauer_norm(parity.offset() + 2 * j, mu)).sum();
            let mut mode = SpheroidalMode {
                m: parity.offset() + 2 * k,
                parity,
                nu: p.nu,
                theta: p.theta,
                alpha,
                coeffs,
                norm,
                mu: f64::NAN,
                edge_a: f64::NAN,
                edge_b: f64::NAN,
                n_trunc: size,
            };
            let (a, b) = radial_edge_data(&mode)?;
            mode.edge_a = a;
            mode.edge_b = b;
            mode.mu = operator_eigenvalue(&mode, p)?;
            modes.push(mode);
        }
        return Ok(modes);
    }
}

/// Continued-fraction sweeps for a given `alpha`: `b_n / b_{n-2}` above the peak and
/// `b_n / b_{n+2}` below. Returns the mismatch of the peak row and the ratios.
fn sweeps(nu: f64, theta: f64, parity: Parity, alpha: f64, peak: usize, top: usize) -> (f64, Vec<f64>, Vec<f64>) {
    let idx = |k: usize| parity.offset() + 2 * k;
    // up[k] = b_k / b_{k-1} for k > peak (index in k)
    let mut up = vec![0.0; top + 1];
    let mut r = 0.0;
    for k in (peak + 1..=top).rev() {
        let (d, u, l) = row(nu, theta, idx(k));
        r = -l / ((d - alpha) + u * r);
        up[k] = r;
    }
    // down[k] = b_k / b_{k+1} for k < peak
    let mut down = vec![0.0; peak];
    let mut s = 0.0;
    for (k, slot) in down.iter_mut().enumerate() {
        let (d, u, l) = row(nu, theta, idx(k));
        s = -u / ((d - alpha) + l * s);
        *slot = s;
    }
    let (d, u, l) = row(nu, theta, idx(peak));
    let r_next = if peak < top { up[peak + 1] } else { 0.0 };
    let s_prev = if peak > 0 { down[peak - 1] } else { 0.0 };
    (d - alpha + u * r_next + l * s_prev, up, down)
}

fn refine_mode(p: Params, parity: Parity, alpha0: f64, peak: usize, size: usize) -> Result<(f64, Vec<f64>)> {
    let top = size + 80;
    let mut alpha = alpha0;
    let (mut g, _, _) = sweeps(p.nu, p.theta, parity, alpha, peak, top);
    for _ in 0..4 {
        let step = 1e-7 * alpha.abs().max(1.0);
        let (g2, _, _) = sweeps(p.nu, p.theta, parity, alpha + step, peak, top);
        let dg = (g2 - g) / step;
        if dg == 0.0 || !dg.is_finite() {
            break;
        }
        let cand = alpha - g / dg;
        let (gc, _, _) = sweeps(p.nu, p.theta, parity, cand, peak, top);
        if gc.abs() < g.abs() {
            alpha = cand;
            g = gc;
        } else {
            break;
        }
        if g.abs() < 1e-15 * alpha.abs().max(1.0) {
            break;
        }
    }
    let (_, up, down) = sweeps(p.nu, p.theta, parity, alpha, peak, top);
    let mut b = vec![0.0; top + 1];
    b[peak] = 1.0;
    for k in (0..peak).rev() {
        b[k] = down[k] * b[k + 1];
    }
    let mut last = top;
    for k in peak + 1..=top {
        b[k] = up[k] * b[k - 1];
        if b[k].abs() < COEFF_FLOOR {
            last = k;
            break;
        }
    }
    b.truncate(last + 1);
    let (imax, bmax) =
        b.iter().enumerate().max_by(|a, b| a.1.abs().partial_cmp(&b.1.abs()).unwrap()).map(|(i, v)| (i, *v)).unwrap();
    let _ = imax;
    for v in b.iter_mut() {
        *v /= bmax;
    }
    if b.iter().any(|v| !v.is_finite()) {
        return Err(Error::EigenSolve(format!("continued-fraction refinement failed near alpha = {alpha0}")));
    }
    Ok((alpha, b))
}

/// `Y_m(gamma) = sum_n b_n C_n^{-nu}(cos gamma)`.
pub fn angular_eval(mode: &SpheroidalMode, gamma: f64) -> f64 {
    angular_eval_t(mode, gamma.cos())
}

/// `Y_m` as a function of `t = cos gamma`.
pub fn angular_eval_t(mode: &SpheroidalMode, t: f64) -> f64 {
    let nmax = mode.index(mode.coeffs.len() - 1);
    let c = gegenbauer_all(nmax, -mode.nu, t);
    mode.coeffs.iter().enumerate().map(|(k, b)| b * c[mode.index(k)]).sum()
}

/// `(Y, dY/dt, d^2Y/dt^2)` from `d/dx C_n^mu = 2 mu C_{n-1}^{mu+1}`.
pub fn angular_eval_t_derivs(mode: &SpheroidalMode, t: f64) -> (f64, f64, f64) {
    let mu = -mode.nu;
    let nmax = mode.index(mode.coeffs.len() - 1);
    let c0 = gegenbauer_all(nmax, mu, t);
    let c1 = gegenbauer_all(nmax, mu + 1.0, t);
    let c2 = gegenbauer_all(nmax, mu + 2.0, t);
    let (mut y, mut dy, mut ddy) = (0.0, 0.0, 0.0);
    for (k, b) in mode.coeffs.iter().enumerate() {
        let n = mode.index(k);
        y += b * c0[n];
        if n >= 1 {
            dy += b * 2.0 * mu * c1[n - 1];
        }
        if n >= 2 {
            ddy += b * 4.0 * mu * (mu + 1.0) * c2[n - 2];
        }
    }
    (y, dy, ddy)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RadialKind {
    /// Solution growing at large `xi`, from the Bessel-I series.
    First,
    /// Solution decaying at large `xi`, from the Bessel-K series.
    Third,
}

/// Common prefactor `2^{-nu} sqrt(pi) Gamma(1/2 - nu) / (N_m Gamma(-2 nu))` of both radial series.
pub fn radial_prefactor(mode: &SpheroidalMode) -> f64 {
    2f64.powf(-mode.nu) * PI.sqrt() * gamma(0.5 - mode.nu) / (mode.norm * gamma(-2.0 * mode.nu))
}

/// `Gamma(n - 2 nu) / n!`.
fn series_weight(nu: f64, n: usize) -> f64 {
    if n < 120 {
        let mut r = gamma(-2.0 * nu);
        for j in 0..n {
            r *= (j as f64 - 2.0 * nu) / (j as f64 + 1.0);
        }
        r
    } else {
        (ln_gamma(n as f64 - 2.0 * nu) - ln_gamma(n as f64 + 1.0)).exp()
    }
}

/// Radial function and its `xi` derivative.
pub fn radial_eval_with_derivative(mode: &SpheroidalMode, xi: f64, kind: RadialKind) -> Result<(f64, f64)> {
    if !(xi >= 0.0) {
        return Err(Error::Domain(format!("radial functions need xi >= 0, got {xi}")));
    }
    match kind {
        RadialKind::First => first_kind(mode, xi),
        RadialKind::Third => {
            let plan = ThirdKindPlan::new(mode)?;
            plan.eval(mode, xi)
        }
    }
}

/// `X~_m(xi)` (first kind) or `X_m(xi)` (third kind).
pub fn radial_eval(mode: &SpheroidalMode, xi: f64, kind: RadialKind) -> Result<f64> {
    Ok(radial_eval_with_derivative(mode, xi, kind)?.0)
}

fn first_kind(mode: &SpheroidalMode, xi: f64) -> Result<(f64, f64)> {
    let nu = mode.nu;
    let z = mode.theta * xi.cosh();
    let dz = mode.theta * xi.sinh();
    let zn = z.powf(nu);
    let mut sum = 0.0;
    let mut dsum = 0.0;
    let mut last = 0.0;
    for (k, b) in mode.coeffs.iter().enumerate() {
        let n = mode.index(k);
        let a = n as f64 - nu;
        let w = b * series_weight(nu, n);
        let i_a = bessel_i(a, z)?;
        let i_am1 = bessel_i(a - 1.0, z)?;
        let term = w * i_a;
        sum += term;
        // d/dz (z^nu I_a) = z^nu [I_{a-1} - (n - 2 nu)/z I_a]
        dsum += w * (i_am1 - (n as f64 - 2.0 * nu) / z * i_a);
        last = term;
        if k > 2 && term.abs() < 1e-18 * sum.abs() {
            break;
        }
    }
    if last.abs() > 1e-12 * sum.abs() {
        return Err(Error::Truncation { what: "first-kind radial series".into(), tail: (last / sum).abs() });
    }
    let pf = radial_prefactor(mode);
    Ok((pf * zn * sum, pf * zn * dsum * dz))
}

/// Sum of the third-kind series at `xi > 0`, together with its derivative and the
/// ratio `sum |terms| / |sum|` that measures cancellation.
fn third_series(mode: &SpheroidalMode, xi: f64) -> Result<(f64, f64, f64)> {
    let nu = mode.nu;
    let z = mode.theta * xi.cosh();
    let dz = mode.theta * xi.sinh();
    // ladder (K_{a-1}, K_a) for a = n - nu, scaled by e^z and a running log scale
    let (k0, k1) = k_pair_scaled(-nu, z);
    let p = mode.parity.offset();
    let (mut kprev, mut kcur, mut order) = if p == 0 {
        // K_{-1-nu} = K_{1-nu} + (2 nu / z) K_{-nu}
        (k1 + 2.0 * nu / z * k0, k0, -nu)
    } else {
        (k0, k1, 1.0 - nu)
    };
    let mut lnscale = -z;
    let mut sum = 0.0;
    let mut dsum = 0.0;
    let mut abs_sum = 0.0;
    let mut small = 0;
    let mut converged = false;
    for (k, b) in mode.coeffs.iter().enumerate() {
        let n = p + 2 * k;
        if k > 0 {
            // advance two orders
            for _ in 0..2 {
                let next = kprev + 2.0 * order / z * kcur;
                kprev = kcur;
                kcur = next;
                order += 1.0;
            }
            if kcur.abs() > 1e200 {
                kprev *= 1e-200;
                kcur *= 1e-200;
                lnscale += 200.0 * 10f64.ln();
            }
        }
        if *b == 0.0 {
            continue;
        }
        let sign = if n.is_multiple_of(2) { 1.0 } else { -1.0 };
        let w = sign * b * series_weight(nu, n);
        let lnw = w.abs().ln() + lnscale;
        let term = w.signum() * (lnw + kcur.abs().ln()).exp() * kcur.signum();
        // d/dz (z^nu K_a) = z^nu [-K_{a-1} - (n - 2 nu)/z K_a]
        let dk = -kprev - (n as f64 - 2.0 * nu) / z * kcur;
        let dterm = if dk == 0.0 { 0.0 } else { w.signum() * (lnw + dk.abs().ln()).exp() * dk.signum() };
        sum += term;
        dsum += dterm;
        abs_sum += term.abs();
        if term.abs() < 1e-18 * sum.abs() && k > 2 {
            small += 1;
            if small >= 3 {
                converged = true;
                break;
            }
        } else {
            small = 0;
        }
    }
    if !converged {
        return Err(Error::Truncation {
            what: format!("third-kind radial series at xi = {xi} did not converge in {} terms", mode.coeffs.len()),
            tail: f64::NAN,
        });
    }
    let zn = z.powf(nu);
    let pf = radial_prefactor(mode);
    Ok((pf * zn * sum, pf * zn * dsum * dz, abs_sum / sum.abs()))
}

/// Frobenius solutions of the radial equation at `xi = 0`, exponents `0` and `1 + 2 nu`.
struct Frobenius {
    rho: [f64; 2],
    coeffs: [Vec<f64>; 2],
}

impl Frobenius {
    fn new(nu: f64, theta: f64, alpha: f64, xi_max: f64) -> Self {
        let kmax = 400;
        let mut inv_fact = vec![1.0; kmax + 3];
        for i in 1..inv_fact.len() {
            inv_fact[i] = inv_fact[i - 1] / i as f64;
        }
        let mut q = vec![0.0; kmax + 3];
        let mut pow3 = 1.0f64;
        for i in 0..q.len() {
            if i > 0 {
                pow3 *= 3.0;
            }
            if i % 2 == 1 {
                q[i] = (alpha - 0.25 * theta * theta * (pow3 - 1.0)) * inv_fact[i];
            }
        }
        let f = |r: f64| r * (r - 1.0 - 2.0 * nu);
        let build = |rho: f64| -> Vec<f64> {
            let mut c = vec![1.0];
            let mut small = 0;
            for k in 1..kmax {
                let mut acc = 0.0;
                let mut i = 3;
                while i <= k + 1 {
                    let j = k + 1 - i;
                    let r = j as f64 + rho;
                    acc += c[j] * r * (r - 1.0) * inv_fact[i];
                    i += 2;
                }
                let mut i = 2;
                while i <= k {
                    let j = k - i;
                    acc -= 2.0 * nu * c[j] * (j as f64 + rho) * inv_fact[i];
                    i += 2;
                }
                let mut i = 1;
                while i < k {
                    let j = k - 1 - i;
                    acc += q[i] * c[j];
                    i += 2;
                }
                let ck = -acc / f(k as f64 + rho);
                c.push(ck);
                if (ck * xi_max.powi(k as i32)).abs() < 1e-19 {
                    small += 1;
                    if small > 4 {
                        break;
                    }
                } else {
                    small = 0;
                }
            }
            c
        };
        let rho = [0.0, 1.0 + 2.0 * nu];
        Self { rho, coeffs: [build(rho[0]), build(rho[1])] }
    }

    fn eval(&self, which: usize, xi: f64) -> (f64, f64) {
        let rho = self.rho[which];
        let mut v = 0.0;
        let mut dv = 0.0;
        let mut pk = xi.powf(rho);
        for (k, c) in self.coeffs[which].iter().enumerate() {
            v += c * pk;
            let e = k as f64 + rho;
            if e != 0.0 {
                dv += c * e * pk / xi;
            }
            pk *= xi;
        }
        (v, dv)
    }
}

/// Everything needed to evaluate the third-kind function on `[0, inf)`.
struct ThirdKindPlan {
    xi_match: f64,
    xi_series: f64,
    start: (f64, f64),
    frob: Frobenius,
    a: f64,
    b: f64,
}

fn radial_rhs(nu: f64, theta: f64, alpha: f64) -> impl Fn(f64, &[f64], &mut [f64]) -> Result<()> {
    move |xi, y, dy| {
        dy[0] = y[1];
        dy[1] = 2.0 * nu / xi.tanh() * y[1] - (alpha - 0.5 * theta * theta * (2.0 * xi).cosh()) * y[0];
        Ok(())
    }
}

impl ThirdKindPlan {
    fn new(mode: &SpheroidalMode) -> Result<Self> {
        let (nu, theta, alpha) = (mode.nu, mode.theta, mode.alpha);
        let mut xi_series = 1.5;
        let start = loop {
            let (x, dx, cancel) = third_series(mode, xi_series)?;
            if cancel < 1e3 || xi_series >= 4.0 {
                break (x, dx);
            }
            xi_series += 0.5;
        };
        let xi_match = (2.0 / ((alpha - 0.5 * theta * theta).abs() + 1.0).sqrt()).min(0.5);
        let frob = Frobenius::new(nu, theta, alpha, xi_match);
        let ode = Dop853::new(1e-13, 1e-300);
        let (out, _) = ode.integrate(radial_rhs(nu, theta, alpha), xi_series, &[start.0, start.1], &[xi_match])?;
        let (x, dx) = (out[0].y[0], out[0].y[1]);
        let (u1, du1) = frob.eval(0, xi_match);
        let (u2, du2) = frob.eval(1, xi_match);
        let det = u1 * du2 - u2 * du1;
        let a = (x * du2 - dx * u2) / det;
        let b = (u1 * dx - du1 * x) / det;
        Ok(Self { xi_match, xi_series, start, frob, a, b })
    }

    fn eval(&self, mode: &SpheroidalMode, xi: f64) -> Result<(f64, f64)> {
        if xi >= self.xi_series {
            let (x, dx, _) = third_series(mode, xi)?;
            return Ok((x, dx));
        }
        if xi <= self.xi_match {
            let (u1, du1) = self.frob.eval(0, xi);
            let (u2, du2) = self.frob.eval(1, xi);
            return Ok((self.a * u1 + self.b * u2, self.a * du1 + self.b * du2));
        }
        let ode = Dop853::new(1e-13, 1e-300);
        let (out, _) = ode.integrate(
            radial_rhs(mode.nu, mode.theta, mode.alpha),
            self.xi_series,
            &[self.start.0, self.start.1],
            &[xi],
        )?;
        Ok((out[0].y[0], out[0].y[1]))
    }
}

/// Small-`xi` coefficients `(A_m, B_m)` of `X_m(xi) ~ A_m + B_m xi^{1+2nu}`.
pub fn radial_edge_data(mode: &SpheroidalMode) -> Result<(f64, f64)> {
    let plan = ThirdKindPlan::new(mode)?;
    Ok((plan.a, plan.b))
}

/// `mu_m = -2^nu theta^{-nu} (2nu+1) B_m / (sqrt(pi) Gamma(1/2-nu) A_m)`.
pub fn operator_eigenvalue(mode: &SpheroidalMode, p: Params) -> Result<f64> {
    let (a, b) = (mode.edge_a, mode.edge_b);
    if !a.is_finite() || !b.is_finite() || a.abs() <= 1e-280 || a.abs() < 1e-14 * b.abs() * 1e-10 {
        return Err(Error::Degenerate { what: format!("A_{} of mode", mode.m), value: a });
    }
    let nu = p.nu;
    Ok(-2f64.powf(nu) * p.theta.powf(-nu) * (2.0 * nu + 1.0) * b / (PI.sqrt() * gamma(0.5 - nu) * a))
}

/// Both parities, `count` modes each, with the default truncation rule.
pub fn mode_set(p: Params, count: usize, n_trunc: usize) -> Result<(Vec<SpheroidalMode>, Vec<SpheroidalMode>)> {
    let n_trunc = n_trunc.max(2 * count).max(8);
    Ok((angular_modes(p, Parity::Even, count, n_trunc)?, angular_modes(p, Parity::Odd, count, n_trunc)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn p(nu: f64, theta: f64) -> Params {
        Params::new(nu, theta).unwrap()
    }

    #[test]
    fn pencil_coefficients() {
        let (a2, _, _) = pencil_coeffs(0.25, 2);
        assert_relative_eq!(a2, -0.25 * 1.25 / (1.75f64.powi(2) - 1.0), max_relative = 1e-15);
        assert_relative_eq!(a2, -0.151_515_151_515_151_5, max_relative = 1e-14);
        assert_eq!(pencil_coeffs(0.25, 0).2, 0.0);
        assert_eq!(pencil_coeffs(0.25, 1).2, 0.0);
        let (a0, _, _) = pencil_coeffs(0.3, 0);
        assert_relative_eq!(a0, 0.3 / 0.7, max_relative = 1e-14);
    }

    #[test]
    fn cos2g_expansion_identity() {
        // cos 2g C_n = A_n C_n + B_{n-2} C_{n-2} + D_{n+2} C_{n+2}
        let nu = 0.25;
        let g: f64 = 0.7;
        let c = gegenbauer_all(12, -nu, g.cos());
        for n in 2..10 {
            let (a, _, _) = pencil_coeffs(nu, n);
            let (_, bm2, _) = pencil_coeffs(nu, n - 2);
            let (_, _, dp2) = pencil_coeffs(nu, n + 2);
            let rhs = a * c[n] + bm2 * c[n - 2] + dp2 * c[n + 2];
            assert_relative_eq!((2.0 * g).cos() * c[n], rhs, max_relative = 1e-12, epsilon = 1e-14);
        }
    }

    #[test]
    fn symmetrizing_weights_identity() {
        for &nu in &[0.25, -0.25, 0.4, -0.45] {
            for n in 0..30 {
                let (_, b, _) = pencil_coeffs(nu, n);
                let (_, _, d) = pencil_coeffs(nu, n + 2);
                let lhs = b * gegenbauer_norm(n, -nu);
                let rhs = d * gegenbauer_norm(n + 2, -nu);
                assert_relative_eq!(lhs, rhs, max_relative = 1e-12);
            }
        }
    }

    #[test]
    fn decoupled_limit() {
        let q = Params { nu: 0.25, theta: 0.0 };
        let pen = build_pencil(q, Parity::Even, 10);
        for k in 0..10 {
            let n = (2 * k) as f64;
            assert_eq!(pen.diag[k], -n * (n - 0.5));
            assert_eq!(pen.upper[k], 0.0);
        }
    }

    #[test]
    fn modes_satisfy_recurrence_and_decay() {
        let q = p(0.25, 1.0);
        for parity in [Parity::Even, Parity::Odd] {
            let modes = angular_modes(q, parity, 5, 32).unwrap();
            for w in modes.windows(2) {
                assert!(w[0].alpha > w[1].alpha);
            }
            for mode in &modes {
                let bmax = mode.coeffs.iter().fold(0.0f64, |m, v| m.max(v.abs()));
                assert_relative_eq!(bmax, 1.0, max_relative = 1e-15);
                assert!(mode.coeffs.last().unwrap().abs() <= 1e-12);
                assert!(mode.norm > 0.0);
                for k in 0..mode.coeffs.len() - 1 {
                    let n = mode.index(k);
                    let (d, u, l) = row(q.nu, q.theta, n);
                    let prev = if k > 0 { mode.coeffs[k - 1] } else { 0.0 };
                    let res = (d - mode.alpha) * mode.coeffs[k] + u * mode.coeffs[k + 1] + l * prev;
                    let scale = (d.abs() + mode.alpha.abs()) * mode.coeffs[k].abs().max(1e-300) + 1e-300;
                    assert!(res.abs() < 1e-10 * scale.max(1e-12), "row {n} residual {res}");
                }
            }
        }
    }

    #[test]
    fn truncation_stability() {
        let q = p(-0.25, 2.0);
        let a = angular_modes(q, Parity::Even, 4, 16).unwrap();
        let b = angular_modes(q, Parity::Even, 4, 26).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert!((x.alpha - y.alpha).abs() < 1e-10);
        }
    }

    #[test]
    fn angular_ode_residual() {
        let q = p(0.25, 1.0);
        let modes = angular_modes(q, Parity::Odd, 3, 32).unwrap();
        let g = PI / 3.0;
        for mode in &modes {
            let (y, yt, ytt) = angular_eval_t_derivs(mode, g.cos());
            let (s, c) = g.sin_cos();
            let yg = -s * yt;
            let ygg = s * s * ytt - c * yt;
            let res = ygg - 2.0 * mode.nu * c / s * yg - (mode.alpha - 0.5 * q.theta.powi(2) * (2.0 * g).cos()) * y;
            assert!(res.abs() < 1e-10, "m = {} residual {res}", mode.m);
        }
    }

    #[test]
    fn radial_ode_residual_both_kinds() {
        let q = p(0.25, 1.3);
        let modes = angular_modes(q, Parity::Even, 3, 32).unwrap();
        for mode in &modes {
            for kind in [RadialKind::First, RadialKind::Third] {
                for &xi in &[0.3, 0.8, 1.7] {
                    let (x, dx) = radial_eval_with_derivative(mode, xi, kind).unwrap();
                    let h = 1e-4;
                    let (_, dp) = radial_eval_with_derivative(mode, xi + h, kind).unwrap();
                    let (_, dm) = radial_eval_with_derivative(mode, xi - h, kind).unwrap();
                    let ddx = (dp - dm) / (2.0 * h);
                    let res = ddx - 2.0 * mode.nu / xi.tanh() * dx
                        + (mode.alpha - 0.5 * q.theta.powi(2) * (2.0 * xi).cosh()) * x;
                    let scale = x.abs() + dx.abs() + ddx.abs();
                    assert!(res.abs() < 1e-7 * scale, "m={} {kind:?} xi={xi} res={res} scale={scale}", mode.m);
                }
            }
        }
    }

    #[test]
    fn plane_wave_expansion() {
        let q = p(0.25, 1.0);
        let (even, odd) = mode_set(q, 10, 40).unwrap();
        let (xi, g): (f64, f64) = (0.5, 1.0);
        let sum: f64 =
            even.iter().chain(&odd).map(|m| angular_eval(m, g) * radial_eval(m, xi, RadialKind::First).unwrap()).sum();
        let exact = (q.theta * xi.cosh() * g.cos()).exp();
        assert!((sum - exact).abs() < 1e-6 * exact, "{sum} vs {exact}");
    }

    #[test]
    fn first_kind_matches_projection_integral() {
        let q = p(-0.3, 1.7);
        let (even, odd) = mode_set(q, 4, 32).unwrap();
        let gj = crate::quadrature::GaussJacobi::edge(60, q.nu).unwrap();
        let xi: f64 = 0.4;
        for m in even.iter().chain(&odd) {
            let direct = gj.integrate(|t| (q.theta * xi.cosh() * t).exp() * angular_eval_t(m, t)) / m.norm;
            let series = radial_eval(m, xi, RadialKind::First).unwrap();
            assert!((series - direct).abs() < 1e-12, "m={} {series} {direct}", m.m);
        }
    }

    #[test]
    fn completeness_proxy() {
        for &(nu, theta) in &[(0.25, 1.0), (-0.25, 2.0)] {
            let q = p(nu, theta);
            let even = angular_modes(q, Parity::Even, 20, 40).unwrap();
            for &t in &[0.0, 0.3, 0.77, 0.99] {
                let sum: f64 =
                    even.iter().map(|m| angular_eval_t(m, t) * radial_eval(m, 0.0, RadialKind::First).unwrap()).sum();
                let exact = (theta * t).cosh();
                assert!((sum - exact).abs() < 1e-8 * exact, "t={t} {sum} {exact}");
            }
        }
    }

    #[test]
    fn orthogonality() {
        let q = p(0.25, 1.0);
        let (even, odd) = mode_set(q, 3, 32).unwrap();
        let modes: Vec<_> = even.iter().chain(&odd).collect();
        let gj = crate::quadrature::GaussJacobi::edge(80, q.nu).unwrap();
        for a in &modes {
            for b in &modes {
                let v = gj.integrate(|t| angular_eval_t(a, t) * angular_eval_t(b, t));
                let want = if a.m == b.m { a.norm } else { 0.0 };
                assert!((v - want).abs() < 1e-8 * a.norm.max(b.norm), "({}, {}) {v}", a.m, b.m);
            }
        }
    }

    #[test]
    fn angular_symmetries() {
        let q = p(0.25, 1.0);
        let odd = angular_modes(q, Parity::Odd, 2, 16).unwrap();
        let g = 0.4;
        let y = angular_eval(&odd[0], g);
        assert_relative_eq!(angular_eval(&odd[0], PI - g), -y, max_relative = 1e-13);
        assert_relative_eq!(angular_eval(&odd[0], -g), y, max_relative = 1e-13);
    }

    #[test]
    fn eigen_equation_by_quadrature() {
        use crate::quadrature::tanh_sinh;
        use crate::specfun::kernel::kernel_eval;
        for &(nu, theta) in &[(0.25, 1.0), (-0.25, 1.0), (0.4, 2.5)] {
            let q = p(nu, theta);
            let (even, odd) = mode_set(q, 3, 32).unwrap();
            for mode in even.iter().chain(&odd) {
                let x = 0.1;
                let left = tanh_sinh(
                    |t, dl, dr| {
                        (dl * (2.0 - dl)).powf(-nu - 0.5) * kernel_eval(q, dr).unwrap() * angular_eval_t(mode, t)
                    },
                    -1.0,
                    x,
                    1e-13,
                );
                let right = tanh_sinh(
                    |t, dl, dr| {
                        (dr * (2.0 - dr)).powf(-nu - 0.5) * kernel_eval(q, dl).unwrap() * angular_eval_t(mode, t)
                    },
                    x,
                    1.0,
                    1e-13,
                );
                let lhs = mode.mu * (left + right);
                let rhs = angular_eval_t(mode, x);
                assert!((lhs - rhs).abs() < 1e-9, "nu={nu} m={} {lhs} {rhs}", mode.m);
            }
        }
    }

    #[test]
    fn third_kind_decays_like_its_asymptote() {
        let q = p(0.25, 1.0);
        let modes = angular_modes(q, Parity::Even, 2, 16).unwrap();
        for mode in &modes {
            let scaled = |xi: f64| {
                let z = q.theta * xi.cosh();
                radial_eval(mode, xi, RadialKind::Third).unwrap() * z.exp() * z.powf(0.5 - q.nu)
            };
            let (s3, s4, s5) = (scaled(3.0), scaled(4.0), scaled(5.0));
            assert!(((s5 - s4) / s5).abs() < 0.5 * ((s4 - s3) / s5).abs());
            // remaining drift is a 1/z correction: extrapolations from both pairs agree
            let z = |xi: f64| q.theta * f64::cosh(xi);
            let lim_a = (s4 * z(4.0) - s3 * z(3.0)) / (z(4.0) - z(3.0));
            let lim_b = (s5 * z(5.0) - s4 * z(4.0)) / (z(5.0) - z(4.0));
            assert!(((lim_a - lim_b) / lim_b).abs() < 1e-2);
        }
    }

    #[test]
    fn small_xi_fit_recovers_edge_data() {
        for &nu in &[0.25, -0.25] {
            let q = p(nu, 1.0);
            let modes = angular_modes(q, Parity::Even, 3, 16).unwrap();
            for mode in &modes {
                // least squares on {1, xi^{1+2nu}, xi^2, xi^{3+2nu}}
                let e = 1.0 + 2.0 * nu;
                let pts: Vec<f64> = (0..24).map(|i| 1e-4 * (1.0 + i as f64 * 0.8)).collect();
                let a = DMatrix::from_fn(pts.len(), 4, |i, j| {
                    let x = pts[i];
                    [1.0, x.powf(e), x * x, x.powf(e + 2.0)][j]
                });
                let y = nalgebra::DVector::from_iterator(
                    pts.len(),
                    pts.iter().map(|&x| radial_eval(mode, x, RadialKind::Third).unwrap()),
                );
                let sol = a.svd(true, true).solve(&y, 1e-15).unwrap();
                assert_relative_eq!(sol[0], mode.edge_a, max_relative = 1e-6);
                assert_relative_eq!(sol[1], mode.edge_b, max_relative = 1e-6);
            }
        }
    }

    #[test]
    fn mu_is_single_signed() {
        let q = p(0.25, 1.0);
        let (even, odd) = mode_set(q, 4, 16).unwrap();
        assert!(even.iter().chain(&odd).all(|m| m.mu > 0.0));
    }

    #[test]
    fn requires_nonzero_nu() {
        assert!(matches!(angular_modes(p(0.0, 1.0), Parity::Even, 2, 16), Err(Error::Unsupported(_))));
    }
}
