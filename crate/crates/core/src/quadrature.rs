//! Gauss-Jacobi rules and a tanh-sinh integrator for endpoint-singular integrands.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};
use crate::specfun::orthopoly::JacobiRecurrence;

/// Gauss rule for `int_{-1}^1 (1-t)^alpha (1+t)^beta f(t) dt`; nodes ascending.
#[derive(Debug, Clone)]
pub struct GaussJacobi {
    pub alpha: f64,
    pub beta: f64,
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    pub recurrence: JacobiRecurrence,
}

impl GaussJacobi {
    pub fn new(n: usize, alpha: f64, beta: f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::Domain("quadrature needs at least one node".into()));
        }
        if !(alpha > -1.0 && beta > -1.0) {
            return Err(Error::Domain(format!("Jacobi exponents must exceed -1, got ({alpha}, {beta})")));
        }
        let full = JacobiRecurrence::new(n + 1, alpha, beta);
        let b_next = full.b[n];
        let rec = JacobiRecurrence { alpha, beta, a: full.a[..n].to_vec(), b: full.b[..n].to_vec() };
        // Golub-Welsch for starting values
        let mut jm = DMatrix::<f64>::zeros(n, n);
        for k in 0..n {
            jm[(k, k)] = rec.a[k];
            if k + 1 < n {
                let off = rec.b[k + 1].sqrt();
                jm[(k, k + 1)] = off;
                jm[(k + 1, k)] = off;
            }
        }
        let eig = SymmetricEigen::new(jm);
        let mut nodes: Vec<f64> = eig.eigenvalues.iter().copied().collect();
        nodes.sort_by(|a, b| a.partial_cmp(b).unwrap());
        // polish with Newton on the orthonormal q_n
        for x in nodes.iter_mut() {
            for _ in 0..3 {
                let (q, d) = rec.top_with_derivative(*x, b_next);
                if d == 0.0 {
                    break;
                }
                let dx = q / d;
                *x -= dx;
                if dx.abs() < 1e-17 {
                    break;
                }
            }
        }
        if alpha == beta {
            for i in 0..n / 2 {
                let x = 0.5 * (nodes[n - 1 - i] - nodes[i]);
                nodes[i] = -x;
                nodes[n - 1 - i] = x;
            }
            if n % 2 == 1 {
                nodes[n / 2] = 0.0;
            }
        }
        // Christoffel weights 1 / sum_k q_k(x)^2
        let mut buf = Vec::with_capacity(n);
        let mut weights: Vec<f64> = nodes
            .iter()
            .map(|&x| {
                rec.orthonormal_into(x, n, &mut buf);
                1.0 / buf.iter().map(|v| v * v).sum::<f64>()
            })
            .collect();
        if alpha == beta {
            for i in 0..n / 2 {
                let w = 0.5 * (weights[i] + weights[n - 1 - i]);
                weights[i] = w;
                weights[n - 1 - i] = w;
            }
        }
        Ok(Self { alpha, beta, nodes, weights, recurrence: rec })
    }

    /// Symmetric edge weight `(1-t^2)^{-a}` with `a = nu + 1/2`.
    pub fn edge(n: usize, nu: f64) -> Result<Self> {
        Self::new(n, -nu - 0.5, -nu - 0.5)
    }

    pub fn legendre(n: usize) -> Result<Self> {
        Self::new(n, 0.0, 0.0)
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn integrate(&self, mut f: impl FnMut(f64) -> f64) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(&x, &w)| w * f(x)).sum()
    }

    /// Nodes and weights mapped to `[lo, hi]`, weight becoming
    /// `(hi-x)^alpha (x-lo)^beta`.
    pub fn mapped(&self, lo: f64, hi: f64) -> (Vec<f64>, Vec<f64>) {
        let half = 0.5 * (hi - lo);
        let scale = half.powf(1.0 + self.alpha + self.beta);
        let x = self.nodes.iter().map(|t| lo + half * (t + 1.0)).collect();
        let w = self.weights.iter().map(|w| w * scale).collect();
        (x, w)
    }
}

/// Double-exponential quadrature on `[a, b]`.
///
/// The integrand receives `(x, x - a, b - x)` with both distances computed
/// without cancellation, so endpoint singularities like `(b-x)^{-0.9}` are resolved.
pub fn tanh_sinh<F>(mut f: F, a: f64, b: f64, tol: f64) -> f64
where
    F: FnMut(f64, f64, f64) -> f64,
{
    let half = 0.5 * (b - a);
    let tmax = 6.5;
    let eval = |f: &mut F, t: f64| -> f64 {
        let u = 0.5 * std::f64::consts::PI * t.sinh();
        let e = (-2.0 * u.abs()).exp();
        // 1/cosh^2 u = 4 e^{-2|u|} / (1 + e^{-2|u|})^2, safe for large |u|
        let w = 0.5 * std::f64::consts::PI * t.cosh() * 4.0 * e / ((1.0 + e) * (1.0 + e));
        // distance from the nearer endpoint: half * (1 - tanh|u|)
        let near = half * 2.0 * e / (1.0 + e);
        let far = 2.0 * half - near;
        let (x, da, db) = if u >= 0.0 { (b - near, far, near) } else { (a + near, near, far) };
        if near <= 0.0 || w == 0.0 {
            return 0.0;
        }
        half * w * f(x, da, db)
    };
    let mut h = 1.0;
    let mut sum = eval(&mut f, 0.0);
    let mut k = 1;
    while k as f64 * h <= tmax {
        let t = k as f64 * h;
        sum += eval(&mut f, t) + eval(&mut f, -t);
        k += 1;
    }
    let mut est = sum * h;
    for _level in 0..12 {
        h *= 0.5;
        let mut add = 0.0;
        let mut k = 1;
        while k as f64 * h <= tmax {
            let t = k as f64 * h;
            add += eval(&mut f, t) + eval(&mut f, -t);
            k += 2;
        }
        sum += add;
        let next = sum * h;
        let diff = (next - est).abs();
        est = next;
        if diff <= tol * est.abs().max(1e-300) && _level >= 2 {
            break;
        }
    }
    est
}

/// Smooth-integrand helper: composite Gauss-Legendre with `panels` pieces of `order` nodes.
pub fn composite_legendre(f: impl Fn(f64) -> f64, a: f64, b: f64, panels: usize, order: usize) -> f64 {
    let gl = GaussJacobi::legendre(order).expect("legendre rule");
    let h = (b - a) / panels as f64;
    (0..panels)
        .map(|i| {
            let lo = a + h * i as f64;
            let (x, w) = gl.mapped(lo, lo + h);
            x.iter().zip(&w).map(|(x, w)| w * f(*x)).sum::<f64>()
        })
        .sum()
}
