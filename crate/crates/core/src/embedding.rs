//! Solutions for plane-wave data `e^{-theta z x}` assembled from `g_c` and `g_s`.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::params::Params;
use crate::quadrature::GaussJacobi;
use crate::solver::{laplace_transforms, residual, special_solutions, tol_res, GridFunction, LaplaceData, Method};

/// `a_+- = -(1 -+ z) G(-+z) / (2 G(1))`.
pub fn embedding_coefficients(_p: Params, z: f64, lap1: &LaplaceData, lapz: &LaplaceData) -> Result<(f64, f64)> {
    let g1 = lap1.g1;
    if !(g1 > 0.0) {
        return Err(Error::Positivity(format!("G(1) = {g1:.6e} is not positive")));
    }
    if lapz.p != z {
        return Err(Error::Domain(format!("Laplace data at p = {} used for z = {z}", lapz.p)));
    }
    let plus = -(1.0 - z) * lapz.g_reflected() / (2.0 * g1);
    let minus = -(1.0 + z) * lapz.g() / (2.0 * g1);
    Ok((plus, minus))
}

/// Everything produced while assembling a plane-wave solution.
#[derive(Debug, Clone)]
pub struct PlaneWave {
    pub g: GridFunction,
    pub psi: GridFunction,
    pub a_plus: f64,
    pub a_minus: f64,
    /// `|Psi(1)|` before it is forced to vanish, relative to the integrand scale.
    pub edge_defect: f64,
}

/// Allowed relative size of `Psi(1)` computed from the closed integral.
const EDGE_DEFECT_TOL: f64 = 1e-8;
/// Nodes of the Jacobi rule used for each indefinite integral.
const PIECE_NODES: usize = 48;

/// Solution of `Gamma g = e^{-theta z x}` using Nystrom special solutions.
pub fn plane_wave_solution(p: Params, z: f64) -> Result<GridFunction> {
    let (gc, gs) = special_solutions(p, Method::Nystrom)?;
    let mut pw = plane_wave_from(p, z, &gc, &gs)?;
    let r = residual(p, &pw.g, |x| (-p.theta * z * x).exp())?;
    pw.g.residual = Some(r);
    let tol = tol_res(p);
    if r > tol {
        return Err(Error::Embedding(format!("plane-wave residual {r:.3e} above {tol:.1e}")));
    }
    Ok(pw.g)
}

/// Assemble `g = Psi - a_+ g_+ - a_- g_-` from a given pair.
pub fn plane_wave_from(p: Params, z: f64, gc: &GridFunction, gs: &GridFunction) -> Result<PlaneWave> {
    if !z.is_finite() {
        return Err(Error::Domain(format!("z must be finite, got {z}")));
    }
    let theta = p.theta;
    let lap1 = laplace_transforms(gc, gs, 1.0, theta);
    let lapz = laplace_transforms(gc, gs, z, theta);
    let (a_plus, a_minus) = embedding_coefficients(p, z, &lap1, &lapz)?;

    // Psi' / theta + z Psi = r(t) (1-t^2)^{-a}
    let src = gs.combine(lapz.gc, gc, -lapz.gs)?.scaled((z * z - 1.0) / lap1.g1);
    let a = p.edge_exponent();
    let left = GaussJacobi::new(PIECE_NODES, 0.0, -a)?;
    let right = GaussJacobi::new(PIECE_NODES, -a, 0.0)?;
    let zt = z * theta;
    // int over [lo, hi] of e^{z theta (y - t)} src(y), nearer edge factor carried by the rule
    let piece = |rule: &GaussJacobi, lo: f64, hi: f64, t: f64, left_edge: bool| -> f64 {
        let (ys, ws) = rule.mapped(lo, hi);
        ys.iter()
            .zip(&ws)
            .map(|(&y, &w)| {
                let other = if left_edge { 1.0 - y } else { 1.0 + y };
                w * other.powf(-a) * src.smooth(y) * (zt * (y - t)).exp()
            })
            .sum()
    };
    let psi_h: Vec<f64> = gc
        .nodes()
        .iter()
        .map(|&t| {
            let psi = if t <= 0.0 {
                theta * piece(&left, -1.0, t, t, true)
            } else {
                -theta * piece(&right, t, 1.0, t, false)
            };
            psi * ((1.0 - t) * (1.0 + t)).powf(a)
        })
        .collect();
    let psi = GridFunction::new(Arc::clone(&gc.rule), psi_h)?;

    let full = src.integrate(|y| (zt * y).exp());
    let scale = src.integrate(|y| (zt * y).exp().abs()).abs().max(src.max_abs()) + f64::MIN_POSITIVE;
    let edge_defect = full.abs() / scale;
    if edge_defect > EDGE_DEFECT_TOL {
        return Err(Error::Embedding(format!("Psi(1) = {full:.3e} does not vanish (relative {edge_defect:.3e})")));
    }

    let g_plus = gc.combine(1.0, gs, 1.0)?;
    let g_minus = gc.combine(1.0, gs, -1.0)?;
    let g = psi.combine(1.0, &g_plus, -a_plus)?.combine(1.0, &g_minus, -a_minus)?;
    Ok(PlaneWave { g, psi, a_plus, a_minus, edge_defect })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solver::{solve_nystrom, Edge};
    use approx::assert_relative_eq;

    fn pair(nu: f64, theta: f64) -> (Params, GridFunction, GridFunction) {
        let p = Params::new(nu, theta).unwrap();
        let (gc, gs) = special_solutions(p, Method::Nystrom).unwrap();
        (p, gc, gs)
    }

    #[test]
    fn coefficients_at_special_z() {
        let (p, gc, gs) = pair(0.25, 1.0);
        let l1 = laplace_transforms(&gc, &gs, 1.0, 1.0);
        let (ap, am) = embedding_coefficients(p, 1.0, &l1, &l1).unwrap();
        assert_eq!(ap, 0.0);
        assert_relative_eq!(am, -1.0, max_relative = 1e-15);
        let lm = laplace_transforms(&gc, &gs, -1.0, 1.0);
        let (ap, am) = embedding_coefficients(p, -1.0, &l1, &lm).unwrap();
        assert_relative_eq!(ap, -1.0, max_relative = 1e-14);
        assert_eq!(am, 0.0);
        let l0 = laplace_transforms(&gc, &gs, 0.0, 1.0);
        let (ap, am) = embedding_coefficients(p, 0.0, &l1, &l0).unwrap();
        assert_relative_eq!(ap, am, max_relative = 1e-14);
        assert_relative_eq!(ap, -gc.integrate(|_| 1.0) / (2.0 * l1.g1), max_relative = 1e-12);
        let bad = LaplaceData { g1: -1.0, ..l1 };
        assert!(matches!(embedding_coefficients(p, 0.3, &bad, &l0), Err(Error::Positivity(_)) | Err(Error::Domain(_))));
    }

    #[test]
    fn z_one_is_g_minus() {
        let (p, gc, gs) = pair(0.25, 1.0);
        let pw = plane_wave_from(p, 1.0, &gc, &gs).unwrap();
        assert!(pw.psi.max_abs() == 0.0);
        let want = gc.combine(1.0, &gs, -1.0).unwrap();
        for (a, b) in pw.g.smooth_values.iter().zip(&want.smooth_values) {
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn constant_rhs_matches_nystrom() {
        let p = Params::new(0.25, 1.0).unwrap();
        let g = plane_wave_solution(p, 0.0).unwrap();
        let direct = solve_nystrom(p, |_| 1.0, g.len()).unwrap();
        for &t in &[-0.9, -0.4, 0.0, 0.3, 0.8] {
            assert_relative_eq!(g.eval(t), direct.eval(t), max_relative = 1e-8);
        }
    }

    #[test]
    fn residual_for_negative_nu() {
        let p = Params::new(-0.25, 2.0).unwrap();
        let g = plane_wave_solution(p, 0.5).unwrap();
        assert!(g.residual.unwrap() <= 1e-6);
    }

    #[test]
    fn psi_vanishes_at_edges_and_moments_agree() {
        let (p, gc, gs) = pair(0.1, 1.5);
        let z = 0.4;
        let pw = plane_wave_from(p, z, &gc, &gs).unwrap();
        let edge_l = pw.psi.edge_value(Edge::Left);
        let edge_r = pw.psi.edge_value(Edge::Right);
        assert!(edge_l.abs() < 1e-8 && edge_r.abs() < 1e-8, "{edge_l} {edge_r}");
        let g = |q: f64| laplace_transforms(&gc, &gs, q, p.theta).g();
        let g1 = g(1.0);
        let direct = pw.psi.integrate(|t| (p.theta * t).exp());
        let via = g(-z) + pw.a_plus * g1 + pw.a_minus * g(-1.0);
        assert!((direct - via).abs() < 1e-8 * (1.0 + via.abs()));
        let direct = pw.psi.integrate(|t| (-p.theta * t).exp());
        let via = g(z) + pw.a_plus * g(-1.0) + pw.a_minus * g1;
        assert!((direct - via).abs() < 1e-8 * (1.0 + via.abs()));
    }

    #[test]
    fn superposition() {
        let (p, gc, gs) = pair(0.25, 1.0);
        let g1 = plane_wave_from(p, 0.3, &gc, &gs).unwrap().g;
        let g2 = plane_wave_from(p, -0.7, &gc, &gs).unwrap().g;
        let sum = g1.combine(1.0, &g2, 1.0).unwrap();
        let r = residual(p, &sum, |x| (-0.3 * x).exp() + (0.7 * x).exp()).unwrap();
        assert!(r < 1e-8);
    }
}
