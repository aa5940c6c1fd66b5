//! Direct (Nyström) and spheroidal-series solutions of
//! `int_{-1}^1 K(|x-t|) g(t) dt = f(x)`.
//!
//! Solutions are kept in factored form `g(t) = h(t) (1-t^2)^{-(nu+1/2)}`, with the
//! smooth factor `h` sampled at the Gauss-Jacobi nodes of that same weight.

use std::f64::consts::PI;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector, Dyn, LU};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::Params;
use crate::quadrature::GaussJacobi;
use crate::specfun::gamma::gamma;
use crate::specfun::kernel::{KernelSplit, Singular};
use crate::spheroidal::{angular_eval_t, angular_modes, radial_eval, Parity, RadialKind, SpheroidalMode};

/// Largest quadrature size the adaptive drivers will try.
pub const MAX_QUAD: usize = 512;
/// Condition-number ceiling for the collocation matrix.
pub const CONDITION_LIMIT: f64 = 1e12;

/// Default residual target: `1e-8` up to `theta = 2`, `1e-6` beyond.
pub fn tol_res(p: Params) -> f64 {
    if p.theta <= 2.0 {
        1e-8
    } else {
        1e-6
    }
}

/// Starting quadrature size, growing linearly with `theta`.
pub fn default_quadrature_size(p: Params) -> usize {
    ((32.0 + 8.0 * p.theta).ceil() as usize).min(MAX_QUAD)
}

/// `C(nu) = cos(pi nu) / (2^{nu+1} pi^{3/2} Gamma(1/2 - nu))`.
pub fn positivity_constant(nu: f64) -> f64 {
    (PI * nu).cos() / (2f64.powf(nu + 1.0) * PI.powf(1.5) * gamma(0.5 - nu))
}

/// Which end of the interval.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Edge {
    Left,
    Right,
}

impl Edge {
    fn sign(self) -> f64 {
        match self {
            Edge::Left => -1.0,
            Edge::Right => 1.0,
        }
    }
}

/// A function on `(-1, 1)` in factored form, sampled at Gauss-Jacobi nodes.
#[derive(Debug, Clone)]
pub struct GridFunction {
    pub nu: f64,
    pub rule: Arc<GaussJacobi>,
    /// `h(t_j)` at the rule's nodes.
    pub smooth_values: Vec<f64>,
    pub parity: Option<Parity>,
    /// Sup-norm residual of the integral equation, when it was checked.
    pub residual: Option<f64>,
    coeffs: Vec<f64>,
}

impl GridFunction {
    pub fn new(rule: Arc<GaussJacobi>, smooth_values: Vec<f64>) -> Result<Self> {
        if rule.alpha != rule.beta {
            return Err(Error::Domain("grid functions need a symmetric edge weight".into()));
        }
        if smooth_values.len() != rule.len() {
            return Err(Error::Domain(format!("{} values for a {}-node rule", smooth_values.len(), rule.len())));
        }
        if let Some(bad) = smooth_values.iter().position(|v| !v.is_finite()) {
            return Err(Error::Domain(format!("non-finite smooth value at node {bad}")));
        }
        let nu = -rule.alpha - 0.5;
        let coeffs = spectral_coefficients(&rule, &smooth_values);
        Ok(Self { nu, rule, smooth_values, parity: None, residual: None, coeffs })
    }

    /// Sample a smooth factor `h` on an `n`-node edge rule.
    pub fn from_smooth_fn(nu: f64, n: usize, h: impl FnMut(f64) -> f64) -> Result<Self> {
        Self::on_rule(Arc::new(GaussJacobi::edge(n, nu)?), h)
    }

    pub fn on_rule(rule: Arc<GaussJacobi>, h: impl FnMut(f64) -> f64) -> Result<Self> {
        let values = rule.nodes.iter().copied().map(h).collect();
        Self::new(rule, values)
    }

    pub fn len(&self) -> usize {
        self.smooth_values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.smooth_values.is_empty()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.rule.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.rule.weights
    }

    pub fn edge_exponent(&self) -> f64 {
        self.nu + 0.5
    }

    /// Interpolated smooth factor `h(t)`; also valid at `t = +-1`.
    pub fn smooth(&self, t: f64) -> f64 {
        let rec = &self.rule.recurrence;
        let n = self.coeffs.len();
        let mut q_prev = 0.0;
        let mut q = 1.0 / rec.b[0].sqrt();
        let mut sum = self.coeffs[0] * q;
        for k in 0..n - 1 {
            let sb = if k == 0 { 0.0 } else { rec.b[k].sqrt() };
            let next = ((t - rec.a[k]) * q - sb * q_prev) / rec.b[k + 1].sqrt();
            q_prev = q;
            q = next;
            sum += self.coeffs[k + 1] * q;
        }
        sum
    }

    /// `g(t) = h(t) (1-t^2)^{-(nu+1/2)}` for `|t| < 1`.
    pub fn eval(&self, t: f64) -> f64 {
        self.smooth(t) * ((1.0 - t) * (1.0 + t)).powf(-self.edge_exponent())
    }

    /// `int_{-1}^1 g(t) f(t) dt` on the function's own nodes.
    pub fn integrate(&self, mut f: impl FnMut(f64) -> f64) -> f64 {
        self.rule.nodes.iter().zip(&self.rule.weights).zip(&self.smooth_values).map(|((&t, &w), &h)| w * h * f(t)).sum()
    }

    /// Same function on an `n`-node rule, through the interpolant.
    pub fn resample(&self, n: usize) -> Result<Self> {
        if n == self.len() {
            return Ok(self.clone());
        }
        let mut out = Self::from_smooth_fn(self.nu, n, |t| self.smooth(t))?;
        out.parity = self.parity;
        Ok(out)
    }

    /// Project onto one parity by averaging mirrored nodes.
    pub fn with_parity(&self, parity: Parity) -> Self {
        let n = self.len();
        let s = match parity {
            Parity::Even => 1.0,
            Parity::Odd => -1.0,
        };
        let mut v = self.smooth_values.clone();
        for i in 0..n / 2 {
            let j = n - 1 - i;
            let a = 0.5 * (self.smooth_values[i] + s * self.smooth_values[j]);
            v[i] = a;
            v[j] = s * a;
        }
        if n % 2 == 1 && parity == Parity::Odd {
            v[n / 2] = 0.0;
        }
        let mut out = Self::new(self.rule.clone(), v).expect("finite values stay finite");
        // wrong-parity coefficients are rounding noise; drop them so h(0) = 0 exactly when odd
        let skip = match parity {
            Parity::Even => 1,
            Parity::Odd => 0,
        };
        for c in out.coeffs.iter_mut().skip(skip).step_by(2) {
            *c = 0.0;
        }
        out.parity = Some(parity);
        out.residual = self.residual;
        out
    }

    /// Largest mismatch `|h(t_i) -+ h(-t_i)|` over mirrored nodes.
    pub fn parity_defect(&self, parity: Parity) -> f64 {
        let n = self.len();
        let s = match parity {
            Parity::Even => 1.0,
            Parity::Odd => -1.0,
        };
        (0..n).map(|i| (self.smooth_values[i] - s * self.smooth_values[n - 1 - i]).abs()).fold(0.0, f64::max)
    }

    /// `a * self + b * other` on a shared node set.
    pub fn combine(&self, a: f64, other: &Self, b: f64) -> Result<Self> {
        if other.len() != self.len() || other.nu != self.nu {
            return Err(Error::Domain("combining grid functions on different rules".into()));
        }
        let v = self.smooth_values.iter().zip(&other.smooth_values).map(|(x, y)| a * x + b * y).collect();
        let mut out = Self::new(self.rule.clone(), v)?;
        out.parity = match (self.parity, other.parity) {
            (Some(p), Some(q)) if p == q => Some(p),
            (Some(p), _) if b == 0.0 => Some(p),
            (_, Some(q)) if a == 0.0 => Some(q),
            _ => None,
        };
        Ok(out)
    }

    pub fn scaled(&self, c: f64) -> Self {
        let mut out =
            Self::new(self.rule.clone(), self.smooth_values.iter().map(|v| c * v).collect()).expect("finite scale");
        out.parity = self.parity;
        out
    }

    pub fn max_abs(&self) -> f64 {
        self.smooth_values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// `h(+-1)` from the global interpolant.
    pub fn edge_value(&self, edge: Edge) -> f64 {
        self.smooth(edge.sign())
    }

    /// `h(+-1)` from a degree-4 least-squares polynomial in `1 -+ t` over the six nodes
    /// nearest the edge.
    pub fn edge_fit(&self, edge: Edge) -> Result<f64> {
        let n = self.len();
        if n < 6 {
            return Err(Error::EdgeFit(format!("need six nodes, have {n}")));
        }
        let idx: Vec<usize> = match edge {
            Edge::Right => (n - 6..n).collect(),
            Edge::Left => (0..6).collect(),
        };
        let dist: Vec<f64> = idx.iter().map(|&i| 1.0 - edge.sign() * self.rule.nodes[i]).collect();
        let scale = dist.iter().fold(0.0f64, |m, d| m.max(*d));
        let mut vand = DMatrix::<f64>::zeros(6, 5);
        let mut rhs = DVector::<f64>::zeros(6);
        for (r, (&i, &d)) in idx.iter().zip(&dist).enumerate() {
            let s = d / scale;
            let mut pw = 1.0;
            for c in 0..5 {
                vand[(r, c)] = pw;
                pw *= s;
            }
            rhs[r] = self.smooth_values[i];
        }
        let svd = vand.svd(true, true);
        let sol = svd.solve(&rhs, 1e-14).map_err(|e| Error::EdgeFit(format!("least squares failed: {e}")))?;
        let v = sol[0];
        if !v.is_finite() {
            return Err(Error::EdgeFit("non-finite extrapolated value".into()));
        }
        Ok(v)
    }

    /// Log-log slope of `|g|` against `1 - t` between `1 - s_far` and `1 - s_near`.
    pub fn edge_log_slope(&self, s_near: f64, s_far: f64) -> f64 {
        let g1 = self.eval(1.0 - s_near).abs();
        let g2 = self.eval(1.0 - s_far).abs();
        (g1.ln() - g2.ln()) / (s_near.ln() - s_far.ln())
    }
}

/// `c_k = sum_j w_j h_j q_k(t_j)`: exact interpolation coefficients in the orthonormal basis.
fn spectral_coefficients(rule: &GaussJacobi, values: &[f64]) -> Vec<f64> {
    let n = rule.len();
    let mut c = vec![0.0; n];
    let mut q = Vec::with_capacity(n);
    for ((&t, &w), &h) in rule.nodes.iter().zip(&rule.weights).zip(values) {
        rule.recurrence.orthonormal_into(t, n, &mut q);
        for (ck, qk) in c.iter_mut().zip(&q) {
            *ck += w * h * qk;
        }
    }
    c
}

/// Expansion coefficients of the singular factor against the edge weight:
/// `int sing(x-t) q_k(t) (1-t^2)^{-nu-1/2} dt = lambda_k q_k(x)`.
pub fn singular_moments(nu: f64, singular: Singular, count: usize) -> Result<Vec<f64>> {
    let mut lam = Vec::with_capacity(count);
    match singular {
        Singular::Power(e) => {
            if (e - 2.0 * nu).abs() > 1e-12 {
                return Err(Error::Domain(format!(
                    "product weights need the singular power 2 nu = {}, got {e}",
                    2.0 * nu
                )));
            }
            let mut l = PI / (PI * nu).cos();
            for k in 0..count {
                if k > 0 {
                    l *= (k as f64 - 1.0 - 2.0 * nu) / k as f64;
                }
                lam.push(l);
            }
        }
        Singular::Log => {
            if nu != 0.0 {
                return Err(Error::Domain("logarithmic split requires nu = 0".into()));
            }
            for k in 0..count {
                lam.push(if k == 0 { -PI * 2f64.ln() } else { -PI / k as f64 });
            }
        }
    }
    Ok(lam)
}

/// Product-integration weights for the singular part on one rule.
#[derive(Debug, Clone)]
struct ProductRule {
    rule: Arc<GaussJacobi>,
    lambda: Vec<f64>,
    /// `basis[(k, j)] = q_k(t_j)`
    basis: DMatrix<f64>,
}

impl ProductRule {
    fn new(rule: Arc<GaussJacobi>, singular: Singular) -> Result<Self> {
        let n = rule.len();
        let nu = -rule.alpha - 0.5;
        let lambda = singular_moments(nu, singular, n)?;
        let mut basis = DMatrix::<f64>::zeros(n, n);
        let mut q = Vec::with_capacity(n);
        for (j, &t) in rule.nodes.iter().enumerate() {
            rule.recurrence.orthonormal_into(t, n, &mut q);
            for k in 0..n {
                basis[(k, j)] = q[k];
            }
        }
        Ok(Self { rule, lambda, basis })
    }

    /// `W[(i, j)] = w_j sum_k lambda_k q_k(x_i) q_k(t_j)`, so that
    /// `int sing(x_i - t) p(t) w(t) dt = sum_j W_ij p(t_j)` for polynomials of degree `< n`.
    fn weights_at(&self, xs: &[f64]) -> DMatrix<f64> {
        let n = self.rule.len();
        let mut left = DMatrix::<f64>::zeros(xs.len(), n);
        let mut q = Vec::with_capacity(n);
        for (i, &x) in xs.iter().enumerate() {
            self.rule.recurrence.orthonormal_into(x, n, &mut q);
            for k in 0..n {
                left[(i, k)] = self.lambda[k] * q[k];
            }
        }
        let mut w = left * &self.basis;
        for (j, &wj) in self.rule.weights.iter().enumerate() {
            w.column_mut(j).scale_mut(wj);
        }
        w
    }

    /// `(Gamma g)(x)` for `g` given by smooth values on this rule.
    fn apply(&self, split: &KernelSplit, h: &[f64], xs: &[f64]) -> Vec<f64> {
        let w = self.weights_at(xs);
        xs.iter()
            .enumerate()
            .map(|(i, &x)| {
                self.rule
                    .nodes
                    .iter()
                    .zip(&self.rule.weights)
                    .zip(h)
                    .enumerate()
                    .map(|(j, ((&t, &wj), &hj))| {
                        let u = (x - t) * (x - t);
                        (wj * split.smooth(u) - w[(i, j)] * split.singular_coeff(u)) * hj
                    })
                    .sum()
            })
            .collect()
    }
}

fn check_split(p: Params, split: &KernelSplit) -> Result<()> {
    match split.singular {
        Singular::Power(e) if (e - 2.0 * p.nu).abs() <= 1e-12 && (p.nu == 0.0 || p.nu.abs() >= 1e-6) => Ok(()),
        Singular::Log if p.nu == 0.0 => Ok(()),
        _ => Err(Error::Unsupported(format!(
            "kernel split {:?} cannot be product-integrated at nu = {}",
            split.singular, p.nu
        ))),
    }
}

/// Kernel split used by default: the full `w^nu K_nu(theta w)` on distances up to 2.
pub fn default_split(p: Params) -> KernelSplit {
    KernelSplit::new(p, 2.0)
}

/// Chebyshev check points, `m` of them, strictly inside `(-1, 1)`.
pub fn check_grid(m: usize) -> Vec<f64> {
    (0..m).map(|i| -(PI * (i as f64 + 0.5) / m as f64).cos()).collect()
}

/// `(Gamma g)(x)` at the given points with an arbitrary split, integrating the
/// interpolant of `g` on a rule twice as fine as its own.
pub fn apply_operator_with(split: &KernelSplit, g: &GridFunction, xs: &[f64]) -> Result<Vec<f64>> {
    let fine = Arc::new(GaussJacobi::edge(2 * g.len(), g.nu)?);
    let product = ProductRule::new(fine.clone(), split.singular)?;
    let h: Vec<f64> = fine.nodes.iter().map(|&t| g.smooth(t)).collect();
    Ok(product.apply(split, &h, xs))
}

/// `(Gamma g)(x)` for the kernel of `p`.
pub fn apply_operator(p: Params, g: &GridFunction, xs: &[f64]) -> Result<Vec<f64>> {
    let split = default_split(p);
    check_split(p, &split)?;
    apply_operator_with(&split, g, xs)
}

/// `sup |Gamma g - f|` on a Chebyshev grid three times finer than `g`'s nodes.
pub fn residual_with(split: &KernelSplit, g: &GridFunction, rhs: impl Fn(f64) -> f64) -> Result<f64> {
    let xs = check_grid(3 * g.len());
    let lhs = apply_operator_with(split, g, &xs)?;
    Ok(xs.iter().zip(&lhs).map(|(&x, &v)| (v - rhs(x)).abs()).fold(0.0, f64::max))
}

pub fn residual(p: Params, g: &GridFunction, rhs: impl Fn(f64) -> f64) -> Result<f64> {
    residual_with(&default_split(p), g, rhs)
}

/// Collocation at the Gauss-Jacobi nodes with product integration of the singular part.
#[derive(Debug)]
pub struct NystromSolver {
    pub params: Params,
    pub condition: f64,
    split: KernelSplit,
    product: ProductRule,
    fine: ProductRule,
    lu: LU<f64, Dyn, Dyn>,
}

impl NystromSolver {
    pub fn new(p: Params, n: usize) -> Result<Self> {
        Self::with_split(p, n, default_split(p))
    }

    /// Any kernel `S(w^2) - sing(w) R(w^2)` whose singular factor matches the edge weight.
    pub fn with_split(p: Params, n: usize, split: KernelSplit) -> Result<Self> {
        if n < 16 {
            return Err(Error::Domain(format!("quadrature size must be >= 16, got {n}")));
        }
        check_split(p, &split)?;
        let rule = Arc::new(GaussJacobi::edge(n, p.nu)?);
        let product = ProductRule::new(rule.clone(), split.singular)?;
        let w = product.weights_at(&rule.nodes);
        let mut a = DMatrix::<f64>::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                let d = rule.nodes[i] - rule.nodes[j];
                let u = d * d;
                a[(i, j)] = rule.weights[j] * split.smooth(u) - w[(i, j)] * split.singular_coeff(u);
            }
        }
        let norm1 =
            |m: &DMatrix<f64>| m.column_iter().map(|c| c.iter().map(|v| v.abs()).sum::<f64>()).fold(0.0, f64::max);
        let a_norm = norm1(&a);
        let lu = a.lu();
        let inv = lu.try_inverse().ok_or(Error::IllConditioned { condition: f64::INFINITY, limit: CONDITION_LIMIT })?;
        let condition = a_norm * norm1(&inv);
        if !(condition <= CONDITION_LIMIT) {
            return Err(Error::IllConditioned { condition, limit: CONDITION_LIMIT });
        }
        let fine = ProductRule::new(Arc::new(GaussJacobi::edge(2 * n, p.nu)?), split.singular)?;
        Ok(Self { params: p, condition, split, product, fine, lu })
    }

    pub fn len(&self) -> usize {
        self.product.rule.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn rule(&self) -> &Arc<GaussJacobi> {
        &self.product.rule
    }

    /// Solve without the residual check.
    pub fn solve_unchecked(&self, rhs: impl Fn(f64) -> f64) -> Result<GridFunction> {
        let f = DVector::from_iterator(self.len(), self.product.rule.nodes.iter().map(|&x| rhs(x)));
        let h = self.lu.solve(&f).ok_or(Error::IllConditioned { condition: f64::INFINITY, limit: CONDITION_LIMIT })?;
        GridFunction::new(self.product.rule.clone(), h.iter().copied().collect())
    }

    /// Solve and record the residual on the 3x check grid.
    pub fn solve(&self, rhs: impl Fn(f64) -> f64) -> Result<GridFunction> {
        let mut g = self.solve_unchecked(&rhs)?;
        g.residual = Some(self.residual(&g, &rhs)?);
        Ok(g)
    }

    /// Solve and project onto the parity of the right-hand side.
    pub fn solve_with_parity(&self, rhs: impl Fn(f64) -> f64, parity: Parity) -> Result<GridFunction> {
        let mut g = self.solve_unchecked(&rhs)?.with_parity(parity);
        g.residual = Some(self.residual(&g, &rhs)?);
        Ok(g)
    }

    pub fn residual(&self, g: &GridFunction, rhs: impl Fn(f64) -> f64) -> Result<f64> {
        let xs = check_grid(3 * g.len());
        let lhs = if 2 * g.len() == self.fine.rule.len() && g.nu == self.params.nu {
            let h: Vec<f64> = self.fine.rule.nodes.iter().map(|&t| g.smooth(t)).collect();
            self.fine.apply(&self.split, &h, &xs)
        } else {
            apply_operator_with(&self.split, g, &xs)?
        };
        Ok(xs.iter().zip(&lhs).map(|(&x, &v)| (v - rhs(x)).abs()).fold(0.0, f64::max))
    }

    /// `(Gamma g)(x)` on this solver's fine rule.
    pub fn apply(&self, g: &GridFunction, xs: &[f64]) -> Result<Vec<f64>> {
        apply_operator_with(&self.split, g, xs)
    }
}

/// Solve with quadrature growing from `n_quad` until the residual meets [`tol_res`].
pub fn solve_nystrom(p: Params, rhs: impl Fn(f64) -> f64, n_quad: usize) -> Result<GridFunction> {
    solve_nystrom_with(p, default_split(p), rhs, n_quad, tol_res(p))
}

pub fn solve_nystrom_with(
    p: Params,
    split: KernelSplit,
    rhs: impl Fn(f64) -> f64,
    n_quad: usize,
    tol: f64,
) -> Result<GridFunction> {
    let mut n = n_quad;
    loop {
        let solver = NystromSolver::with_split(p, n, split.clone())?;
        let g = solver.solve(&rhs)?;
        let r = g.residual.unwrap_or(f64::INFINITY);
        if r <= tol {
            return Ok(g);
        }
        if n >= MAX_QUAD {
            return Err(Error::NonConvergence(format!(
                "Nystrom residual {r:.3e} above {tol:.1e} at the largest quadrature size {n}"
            )));
        }
        n = ((n as f64 * 1.5).ceil() as usize).min(MAX_QUAD);
    }
}

/// Which independent route produces the special solutions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Nystrom,
    Series,
}

/// Overrides for the automatic sizing rules.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct SolveOptions {
    pub n_quad: Option<usize>,
    pub n_modes: Option<usize>,
    pub tol_res: Option<f64>,
}

/// `(g_c, g_s)` solving `Gamma g_c = cosh(theta x)`, `Gamma g_s = sinh(theta x)`.
pub fn special_solutions(p: Params, method: Method) -> Result<(GridFunction, GridFunction)> {
    special_solutions_with(p, method, SolveOptions::default())
}

pub fn special_solutions_with(p: Params, method: Method, opts: SolveOptions) -> Result<(GridFunction, GridFunction)> {
    let tol = opts.tol_res.unwrap_or_else(|| tol_res(p));
    let cosh = move |x: f64| (p.theta * x).cosh();
    let sinh = move |x: f64| (p.theta * x).sinh();
    match method {
        Method::Nystrom => {
            let mut n = opts.n_quad.unwrap_or_else(|| default_quadrature_size(p)).max(16);
            loop {
                let solver = NystromSolver::new(p, n)?;
                let gc = solver.solve_with_parity(cosh, Parity::Even)?;
                let gs = solver.solve_with_parity(sinh, Parity::Odd)?;
                let worst = gc.residual.unwrap().max(gs.residual.unwrap());
                if worst <= tol {
                    return Ok((gc, gs));
                }
                if n >= MAX_QUAD {
                    return Err(Error::NonConvergence(format!(
                        "special solutions: residual {worst:.3e} above {tol:.1e} at n = {n}"
                    )));
                }
                n = ((n as f64 * 1.5).ceil() as usize).min(MAX_QUAD);
            }
        }
        Method::Series => {
            p.require_nonzero_nu("spheroidal series")?;
            let n = opts.n_quad.unwrap_or_else(|| default_quadrature_size(p)).max(16);
            let mut out = Vec::with_capacity(2);
            for (parity, rhs) in [(Parity::Even, &cosh as &dyn Fn(f64) -> f64), (Parity::Odd, &sinh)] {
                let terms = series_terms(p, parity, opts.n_modes)?;
                let mut g = GridFunction::from_smooth_fn(p.nu, n, |t| {
                    terms.iter().map(|(m, c)| c * angular_eval_t(m, t)).sum()
                })?
                .with_parity(parity);
                let r = residual(p, &g, rhs)?;
                g.residual = Some(r);
                if r > tol {
                    return Err(Error::Truncation {
                        what: format!("{parity:?} spheroidal series with {} modes", terms.len()),
                        tail: r,
                    });
                }
                out.push(g);
            }
            let gs = out.pop().unwrap();
            let gc = out.pop().unwrap();
            Ok((gc, gs))
        }
    }
}

/// Modes of one parity with their solution coefficients `mu_m X~_m(0)`.
///
/// Without an explicit count, the number of modes doubles from 8 until the last
/// term is below `1e-14` of the sum at `t = 1`.
pub fn series_terms(p: Params, parity: Parity, n_modes: Option<usize>) -> Result<Vec<(SpheroidalMode, f64)>> {
    let build = |count: usize| -> Result<Vec<(SpheroidalMode, f64)>> {
        let modes = angular_modes(p, parity, count, (2 * count + 16).max(32))?;
        modes
            .into_iter()
            .map(|m| {
                let c = m.mu * radial_eval(&m, 0.0, RadialKind::First)?;
                Ok((m, c))
            })
            .collect()
    };
    if let Some(count) = n_modes {
        return build(count.max(1));
    }
    let mut count = 8;
    loop {
        let terms = build(count)?;
        let sizes: Vec<f64> = terms.iter().map(|(m, c)| (c * angular_eval_t(m, 1.0)).abs()).collect();
        let total: f64 = sizes.iter().sum();
        let tail = *sizes.last().unwrap();
        if tail <= 1e-14 * total {
            return Ok(terms);
        }
        if count >= 64 {
            return Err(Error::Truncation { what: format!("{parity:?} spheroidal series"), tail: tail / total });
        }
        count *= 2;
    }
}

/// Ratio of spheroidal sums for `eta`, with the change from dropping the last term
/// of each sum as a tail estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeriesEta {
    pub eta: f64,
    pub tail_estimate: f64,
    pub modes: usize,
}

pub fn eta_from_series(p: Params, m: usize) -> Result<SeriesEta> {
    if m < 4 {
        return Err(Error::Domain(format!("eta series needs at least 4 modes per parity, got {m}")));
    }
    p.require_nonzero_nu("eta series")?;
    let edge_terms = |parity| -> Result<Vec<f64>> {
        Ok(series_terms(p, parity, Some(m))?.iter().map(|(mode, c)| c * angular_eval_t(mode, 1.0)).collect())
    };
    let even = edge_terms(Parity::Even)?;
    let odd = edge_terms(Parity::Odd)?;
    let den: f64 = even.iter().sum();
    let scale: f64 = even.iter().map(|v| v.abs()).sum();
    if !(den.abs() > 1e-12 * scale) || den == 0.0 {
        return Err(Error::Degenerate { what: "even spheroidal sum".into(), value: den.abs() });
    }
    let num: f64 = odd.iter().sum();
    let eta = num / den;
    let prev = (num - odd[m - 1]) / (den - even[m - 1]);
    Ok(SeriesEta { eta, tail_estimate: (eta - prev).abs(), modes: m })
}

/// Laplace transforms `G^_c(p)`, `G^_s(p)` at one argument, plus `G(1)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LaplaceData {
    pub p: f64,
    pub gc: f64,
    pub gs: f64,
    pub g1: f64,
}

impl LaplaceData {
    /// `G(p) = G^_c(p) + G^_s(p)`.
    pub fn g(&self) -> f64 {
        self.gc + self.gs
    }

    /// `G(-p)` from the parities of the two transforms.
    pub fn g_reflected(&self) -> f64 {
        self.gc - self.gs
    }
}

/// `int g e^{p theta t} dt` for both special solutions.
pub fn laplace_transforms(gc: &GridFunction, gs: &GridFunction, p_arg: f64, theta: f64) -> LaplaceData {
    let at = |g: &GridFunction, z: f64| g.integrate(|t| (z * theta * t).exp());
    LaplaceData { p: p_arg, gc: at(gc, p_arg), gs: at(gs, p_arg), g1: at(gc, 1.0) + at(gs, 1.0) }
}

/// Edge amplitudes `g ~ k (1-t)^{-(nu+1/2)}` as `t -> 1`, and their ratio.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EdgeCoefficients {
    pub k_c: f64,
    pub k_s: f64,
    pub eta: f64,
}

/// Tolerance between the global interpolant and the local edge fit, relative to `max |h|`.
const EDGE_FIT_AGREEMENT: f64 = 1e-6;

pub fn edge_coefficients(gc: &GridFunction, gs: &GridFunction) -> Result<EdgeCoefficients> {
    if gc.nu != gs.nu {
        return Err(Error::Domain("edge coefficients of solutions for different nu".into()));
    }
    let amp = |g: &GridFunction| -> Result<f64> {
        let global = g.edge_value(Edge::Right);
        let local = g.edge_fit(Edge::Right)?;
        let scale = g.max_abs().max(global.abs());
        if (global - local).abs() > EDGE_FIT_AGREEMENT * scale {
            return Err(Error::EdgeFit(format!(
                "interpolant gives h(1) = {global:.12e}, six-node fit gives {local:.12e}"
            )));
        }
        Ok(global / 2f64.powf(g.edge_exponent()))
    };
    let k_c = amp(gc)?;
    let k_s = amp(gs)?;
    if k_c == 0.0 || !k_c.is_finite() {
        return Err(Error::Degenerate { what: "k_c".into(), value: k_c.abs() });
    }
    Ok(EdgeCoefficients { k_c, k_s, eta: k_s / k_c })
}
