use latta_core::quadrature::GaussJacobi;
use latta_core::specfun::bessel::bessel_k;
use latta_core::specfun::gamma::gamma;
use latta_core::specfun::kernel::{kernel_eval, kernel_fourier};
use latta_core::specfun::orthopoly::{gegenbauer, gegenbauer_norm};
use latta_core::Params;
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn bessel_k_is_even_in_order(nu in -0.499f64..0.499, w in 1e-3f64..60.0) {
        let a = bessel_k(nu, w).unwrap();
        let b = bessel_k(-nu, w).unwrap();
        prop_assert!((a - b).abs() <= 1e-12 * a.abs(), "K({nu},{w}): {a} vs {b}");
    }

    #[test]
    fn kernel_fourier_is_positive(nu in -0.499f64..0.499, theta in 1e-3f64..50.0, q in 0.0f64..1e4) {
        let p = Params::new(nu, theta).unwrap();
        prop_assert!(kernel_fourier(p, q) > 0.0);
    }

    /// Two leading terms of `w^nu K_nu(theta w)` as `w -> 0` for `nu > 0`.
    #[test]
    fn small_w_kernel_limit(nu in 0.05f64..0.45, theta in 0.1f64..5.0) {
        let p = Params::new(nu, theta).unwrap();
        let w: f64 = 1e-6;
        let lead = 0.5 * gamma(nu) * (theta / 2.0).powf(-nu);
        let next = 0.5 * gamma(-nu) * (theta / 2.0).powf(nu) * w.powf(2.0 * nu);
        let k = kernel_eval(p, w).unwrap();
        // the next omitted term is O(w^2)
        prop_assert!((k - lead - next).abs() <= 1e-9 * lead, "{k} vs {}", lead + next);
    }
}

#[test]
fn gegenbauer_orthogonality_up_to_degree_ten() {
    for &mu in &[-0.45, -0.25, 0.1, 0.25, 0.45, 0.75] {
        let rule = GaussJacobi::new(40, mu - 0.5, mu - 0.5).unwrap();
        for n in 0..=10usize {
            for m in 0..=10usize {
                let v = rule.integrate(|t| gegenbauer(n, mu, t) * gegenbauer(m, mu, t));
                let want = if n == m { gegenbauer_norm(n, mu) } else { 0.0 };
                let scale = (gegenbauer_norm(n, mu) * gegenbauer_norm(m, mu)).sqrt();
                assert!((v - want).abs() <= 1e-8 * scale, "mu {mu} n {n} m {m}: {v} vs {want}");
            }
        }
    }
}
