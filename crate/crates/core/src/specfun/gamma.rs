//! Euler Gamma function and companions.

use std::f64::consts::PI;

use crate::error::{Error, Result};

const LANCZOS_G: f64 = 7.0;
// published table digits, kept verbatim
#[allow(clippy::excessive_precision)]
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

/// Taylor coefficients of `1/Gamma(z) = sum c_k z^k`, k = 1..26.
const RGAMMA_TAYLOR: [f64; 26] = [
    1.0,
    0.577_215_664_901_532_9,
    -0.655_878_071_520_253_8,
    -0.042_002_635_034_095_2,
    0.166_538_611_382_291_5,
    -0.042_197_734_555_544_3,
    -0.009_621_971_527_877_0,
    0.007_218_943_246_663_0,
    -0.001_165_167_591_859_1,
    -0.000_215_241_674_114_9,
    0.000_128_050_282_388_2,
    -0.000_020_134_854_780_7,
    -0.000_001_250_493_482_1,
    0.000_001_133_027_232_0,
    -0.000_000_205_633_841_7,
    0.000_000_006_116_095_0,
    0.000_000_005_002_007_5,
    -0.000_000_001_181_274_6,
    0.000_000_000_104_342_7,
    0.000_000_000_007_782_3,
    -0.000_000_000_003_696_8,
    0.000_000_000_000_510_0,
    -0.000_000_000_000_020_6,
    -0.000_000_000_000_005_4,
    0.000_000_000_000_001_4,
    0.000_000_000_000_000_1,
];

fn lanczos_sum(x: f64) -> f64 {
    let mut acc = LANCZOS[0];
    for (i, c) in LANCZOS.iter().enumerate().skip(1) {
        acc += c / (x + i as f64);
    }
    acc
}

/// `sin(pi x)` with exact argument reduction, so zeros at the integers are exact.
pub fn sinpi(x: f64) -> f64 {
    let n = x.round();
    let r = x - n;
    let s = (PI * r).sin();
    if (n as i64) % 2 == 0 {
        s
    } else {
        -s
    }
}

fn is_nonpositive_integer(x: f64) -> bool {
    x <= 0.0 && x == x.round()
}

/// Euler Gamma function. Poles at non-positive integers are reported as errors.
pub fn gamma_fn(x: f64) -> Result<f64> {
    if !x.is_finite() {
        return Err(Error::Domain(format!("gamma of non-finite argument {x}")));
    }
    if is_nonpositive_integer(x) {
        return Err(Error::Pole(format!("Gamma has a pole at x = {x}")));
    }
    Ok(gamma(x))
}

/// Gamma without the pole check; returns +-inf or NaN at the poles.
pub fn gamma(x: f64) -> f64 {
    if x == x.round() && x > 0.0 && x <= 171.0 {
        let mut f = 1.0;
        let mut k = 2.0;
        while k < x {
            f *= k;
            k += 1.0;
        }
        return f;
    }
    if x < 0.5 {
        return PI / (sinpi(x) * gamma(1.0 - x));
    }
    let z = x - 1.0;
    let t = z + LANCZOS_G + 0.5;
    let s = lanczos_sum(z);
    // split the power to delay overflow
    let half = t.powf(0.5 * (z + 0.5));
    (2.0 * PI).sqrt() * half * (half * (-t).exp()) * s
}

/// Natural log of |Gamma(x)| for x > 0.
pub fn ln_gamma(x: f64) -> f64 {
    assert!(x > 0.0, "ln_gamma requires x > 0");
    if x < 0.5 {
        return (PI / sinpi(x)).ln() - ln_gamma(1.0 - x);
    }
    let z = x - 1.0;
    let t = z + LANCZOS_G + 0.5;
    0.5 * (2.0 * PI).ln() + (z + 0.5) * t.ln() - t + lanczos_sum(z).ln()
}

/// `1/Gamma(1+x)` for |x| <= 1/2 from the Taylor series of `1/Gamma`.
#[cfg(test)]
pub(crate) fn rgamma1p(x: f64) -> f64 {
    debug_assert!(x.abs() <= 0.5 + 1e-12);
    // 1/Gamma(1+x) = (1/Gamma(x)) / x = sum c_{k} x^{k-1}
    let mut acc = 0.0;
    for c in RGAMMA_TAYLOR.iter().rev() {
        acc = acc * x + c;
    }
    acc
}

/// Temme's auxiliary functions `(1/Gamma(1-mu) - 1/Gamma(1+mu)) / (2 mu)` and
/// `(1/Gamma(1-mu) + 1/Gamma(1+mu)) / 2`, evaluated without cancellation.
pub(crate) fn temme_gammas(mu: f64) -> (f64, f64) {
    // f(y) = 1/Gamma(1+y) = sum_j c_{j+1} y^j; odd part gives gam1, even part gam2.
    let mut odd = 0.0;
    let mut even = 0.0;
    let mu2 = mu * mu;
    for j in (0..RGAMMA_TAYLOR.len()).rev() {
        let c = RGAMMA_TAYLOR[j];
        if j % 2 == 1 {
            odd = odd * mu2 + c;
        } else {
            even = even * mu2 + c;
        }
    }
    // odd accumulates sum_{j odd} c_{j+1} mu^{j-1}; even accumulates sum_{j even} c_{j+1} mu^j
    (-odd, even)
}

/// Pochhammer-style ratio `Gamma(n + a) / n!` built by forward products, for `a` not a
/// non-positive integer.
pub fn gamma_ratio_factorial(n: usize, a: f64) -> f64 {
    if n < 150 {
        let mut r = gamma(a);
        for j in 0..n {
            r *= (j as f64 + a) / (j as f64 + 1.0);
        }
        r
    } else {
        let sign = if a > 0.0 || gamma(a) > 0.0 { 1.0 } else { -1.0 };
        sign * (ln_gamma(n as f64 + a) - ln_gamma(n as f64 + 1.0)).exp()
    }
}
