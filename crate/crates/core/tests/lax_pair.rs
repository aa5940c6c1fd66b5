use latta_core::latta::{matrix_n, reconstruct_solutions, zero_curvature_residual};
use latta_core::painleve::{eta_curve, integrate_eta_at, DEFAULT_THETA0, DEFAULT_TOL};
use latta_core::solver::{
    edge_coefficients, laplace_transforms, special_solutions_with, Edge, GridFunction, Method, SolveOptions,
};
use latta_core::Params;
use nalgebra::Vector2;
use proptest::prelude::*;

fn nu_strategy() -> impl Strategy<Value = f64> {
    prop_oneof![-0.45f64..-0.02, 0.02f64..0.45]
}

fn nystrom_pair(nu: f64, theta: f64) -> (GridFunction, GridFunction) {
    let p = Params::new(nu, theta).unwrap();
    let opts = SolveOptions { n_quad: Some(64), ..SolveOptions::default() };
    special_solutions_with(p, Method::Nystrom, opts).unwrap()
}

/// Largest `|d_theta g - N g|` over interior points, relative to `|g|`, with
/// `d_theta` by central differences of pairs produced by `pair`.
fn theta_system_defect(nu: f64, theta: f64, pair: impl Fn(f64) -> (GridFunction, GridFunction)) -> f64 {
    let h = 1e-4 * theta;
    let curve = integrate_eta_at(nu, DEFAULT_THETA0, &[theta - h, theta, theta + h], DEFAULT_TOL).unwrap();
    let rho = curve.rho[1];
    let (lo, mid, hi) = (pair(theta - h), pair(theta), pair(theta + h));
    let mut worst: f64 = 0.0;
    for &t in &[-0.8, -0.5, -0.1, 0.2, 0.6, 0.9] {
        // (1-t^2)^{-a} does not depend on theta, so the smooth factors obey the same system
        let at = |g: &(GridFunction, GridFunction)| Vector2::new(g.0.smooth(t), g.1.smooth(t));
        let d = (at(&hi) - at(&lo)) / (2.0 * h);
        let v = at(&mid);
        let defect = d - matrix_n(theta, t, rho) * v;
        worst = worst.max(defect.norm() / v.norm());
    }
    worst
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn nystrom_pair_obeys_theta_system(nu in nu_strategy(), theta in 0.3f64..3.0) {
        let d = theta_system_defect(nu, theta, |th| nystrom_pair(nu, th));
        prop_assert!(d <= 1e-5, "defect {d:e}");
    }

    #[test]
    fn reconstructed_pair_obeys_theta_system(nu in nu_strategy(), theta in 0.3f64..3.0) {
        let h = 1e-4 * theta;
        let curve = integrate_eta_at(nu, DEFAULT_THETA0, &[theta - h, theta, theta + h], DEFAULT_TOL).unwrap();
        let d = theta_system_defect(nu, theta, |th| reconstruct_solutions(nu, th, &curve).unwrap());
        prop_assert!(d <= 1e-5, "defect {d:e}");
    }

    /// `g_c - (t/eta) g_s` and `g_s - t eta g_c` stay bounded at both edges, so the
    /// smooth factors satisfy `h_s(+-1) = +-eta h_c(+-1)`.
    #[test]
    fn edge_brackets_vanish(nu in nu_strategy(), theta in 0.2f64..4.0) {
        let (gc, gs) = nystrom_pair(nu, theta);
        let eta = edge_coefficients(&gc, &gs).unwrap().eta;
        for (edge, t) in [(Edge::Right, 1.0), (Edge::Left, -1.0)] {
            let (hc, hs) = (gc.edge_value(edge), gs.edge_value(edge));
            prop_assert!((hc - t * hs / eta).abs() <= 1e-8 * hc.abs());
            prop_assert!((hs - t * eta * hc).abs() <= 1e-8 * hc.abs());
        }
    }

    #[test]
    fn log_derivative_of_g1(nu in nu_strategy(), theta in 0.2f64..4.0) {
        let h = 1e-4 * theta;
        let g1 = |th: f64| {
            let (gc, gs) = nystrom_pair(nu, th);
            laplace_transforms(&gc, &gs, 1.0, th).g1
        };
        let fd = (g1(theta + h).ln() - g1(theta - h).ln()) / (2.0 * h);
        let eta = eta_curve(nu, &[theta]).unwrap().eta[0];
        let want = nu / theta + eta + 1.0 / eta;
        prop_assert!((fd - want).abs() <= 1e-5 * want.abs(), "{fd} vs {want}");
    }

    #[test]
    fn zero_curvature_at_random_points(nu in nu_strategy(), theta in 0.2f64..5.0, t in -0.99f64..0.99) {
        let curve = eta_curve(nu, &[theta]).unwrap();
        prop_assert!(zero_curvature_residual(nu, theta, t, &curve).unwrap() <= 1e-7);
    }
}

#[test]
fn edge_amplitude_follows_theta_system() {
    // k_c' = ((1/2 + rho)/theta + eta) k_c, the t = 1 row of the theta-system
    for nu in [-0.25, 0.1, 0.4] {
        let theta = 1.3;
        let h = 1e-4;
        let kc = |th: f64| {
            let (gc, gs) = nystrom_pair(nu, th);
            edge_coefficients(&gc, &gs).unwrap().k_c
        };
        let curve = eta_curve(nu, &[theta]).unwrap();
        let (eta, rho) = (curve.eta[0], curve.rho[0]);
        let fd = (kc(theta + h).ln() - kc(theta - h).ln()) / (2.0 * h);
        let want = (0.5 + rho) / theta + eta;
        assert!((fd - want).abs() <= 1e-5 * want.abs(), "nu {nu}: {fd} vs {want}");
    }
}
