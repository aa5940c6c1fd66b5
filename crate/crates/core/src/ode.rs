//! Explicit Runge-Kutta integrator of order 8 (Dormand-Prince 8(5,3)) with
//! adaptive step control.

use crate::error::{Error, Result};

const C: [f64; 12] = [
    0.0,
    0.05260015195876773,
    0.0789002279381516,
    0.1183503419072274,
    0.2816496580927726,
    0.3333333333333333,
    0.25,
    0.3076923076923077,
    0.6512820512820513,
    0.6,
    0.8571428571428571,
    1.0,
];
const A: [[f64; 12]; 12] = [
    [0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [0.05260015195876773, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [0.0197250569845379, 0.0591751709536137, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [0.02958758547680685, 0.0, 0.08876275643042054, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [0.2413651341592667, 0.0, -0.8845494793282861, 0.924834003261792, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [0.037037037037037035, 0.0, 0.0, 0.17082860872947386, 0.12546768756682242, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [0.037109375, 0.0, 0.0, 0.17025221101954405, 0.06021653898045596, -0.017578125, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [
        0.03709200011850479,
        0.0,
        0.0,
        0.17038392571223998,
        0.10726203044637328,
        -0.015319437748624402,
        0.008273789163814023,
        0.0,
        0.0,
        0.0,
        0.0,
        0.0,
    ],
    [
        0.6241109587160757,
        0.0,
        0.0,
        -3.3608926294469414,
        -0.868219346841726,
        27.59209969944671,
        20.154067550477894,
        -43.48988418106996,
        0.0,
        0.0,
        0.0,
        0.0,
    ],
    [
        0.47766253643826434,
        0.0,
        0.0,
        -2.4881146199716677,
        -0.590290826836843,
        21.230051448181193,
        15.279233632882423,
        -33.28821096898486,
        -0.020331201708508627,
        0.0,
        0.0,
        0.0,
    ],
    [
        -0.9371424300859873,
        0.0,
        0.0,
        5.186372428844064,
        1.0914373489967295,
        -8.149787010746927,
        -18.52006565999696,
        22.739487099350505,
        2.4936055526796523,
        -3.0467644718982196,
        0.0,
        0.0,
    ],
    [
        2.273310147516538,
        0.0,
        0.0,
        -10.53449546673725,
        -2.0008720582248625,
        -17.9589318631188,
        27.94888452941996,
        -2.8589982771350235,
        -8.87285693353063,
        12.360567175794303,
        0.6433927460157636,
        0.0,
    ],
];
const B: [f64; 12] = [
    0.054293734116568765,
    0.0,
    0.0,
    0.0,
    0.0,
    4.450312892752409,
    1.8915178993145003,
    -5.801203960010585,
    0.3111643669578199,
    -0.1521609496625161,
    0.20136540080403034,
    0.04471061572777259,
];
const ER: [f64; 12] = [
    0.01312004499419488,
    0.0,
    0.0,
    0.0,
    0.0,
    -1.2251564463762044,
    -0.4957589496572502,
    1.6643771824549864,
    -0.35032884874997366,
    0.3341791187130175,
    0.08192320648511571,
    -0.022355307863886294,
];
const BHH: [f64; 3] = [0.244_094_488_188_976_4, 0.733_846_688_281_611_4, 0.022_058_823_529_411_76];

/// Adaptive integrator settings.
#[derive(Debug, Clone)]
pub struct Dop853 {
    pub rtol: f64,
    pub atol: f64,
    pub h_max: f64,
    pub max_steps: usize,
}

/// One accepted step: time and state.
#[derive(Debug, Clone)]
pub struct Sample {
    pub t: f64,
    pub y: Vec<f64>,
}

#[derive(Debug, Clone, Default)]
pub struct Stats {
    pub accepted: usize,
    pub rejected: usize,
    pub evaluations: usize,
}

impl Default for Dop853 {
    fn default() -> Self {
        Self { rtol: 1e-12, atol: 1e-14, h_max: f64::INFINITY, max_steps: 200_000 }
    }
}

impl Dop853 {
    pub fn new(rtol: f64, atol: f64) -> Self {
        Self { rtol, atol, ..Self::default() }
    }

    pub fn with_h_max(mut self, h_max: f64) -> Self {
        self.h_max = h_max;
        self
    }

    /// Integrates from `t0` and returns the state at each of `t_out`, which must be
    /// monotone in the direction of integration. Steps land exactly on every output.
    pub fn integrate<F>(&self, f: F, t0: f64, y0: &[f64], t_out: &[f64]) -> Result<(Vec<Sample>, Stats)>
    where
        F: FnMut(f64, &[f64], &mut [f64]) -> Result<()>,
    {
        let mut out = Vec::with_capacity(t_out.len());
        let stats = self.drive(f, t0, y0, t_out, |_, _| Ok(()), &mut out)?;
        Ok((out, stats))
    }

    /// Like [`Dop853::integrate`] but also hands every accepted step to `on_step`,
    /// which may abort the integration by returning an error.
    pub fn integrate_observed<F, O>(
        &self,
        f: F,
        t0: f64,
        y0: &[f64],
        t_out: &[f64],
        on_step: O,
    ) -> Result<(Vec<Sample>, Stats)>
    where
        F: FnMut(f64, &[f64], &mut [f64]) -> Result<()>,
        O: FnMut(f64, &[f64]) -> Result<()>,
    {
        let mut out = Vec::with_capacity(t_out.len());
        let stats = self.drive(f, t0, y0, t_out, on_step, &mut out)?;
        Ok((out, stats))
    }

    fn drive<F, O>(
        &self,
        mut f: F,
        t0: f64,
        y0: &[f64],
        t_out: &[f64],
        mut on_step: O,
        out: &mut Vec<Sample>,
    ) -> Result<Stats>
    where
        F: FnMut(f64, &[f64], &mut [f64]) -> Result<()>,
        O: FnMut(f64, &[f64]) -> Result<()>,
    {
        let n = y0.len();
        let mut stats = Stats::default();
        let Some(&t_last) = t_out.last() else {
            return Ok(stats);
        };
        let dir = if t_last >= t0 { 1.0 } else { -1.0 };
        let mut t = t0;
        let mut y = y0.to_vec();
        let mut k = vec![vec![0.0; n]; 12];
        let mut ytmp = vec![0.0; n];
        let mut ynew = vec![0.0; n];
        f(t, &y, &mut k[0])?;
        stats.evaluations += 1;
        let mut h = self.initial_step(&mut f, t, &y, &k[0], dir, (t_last - t0).abs())?;
        stats.evaluations += 1;
        let mut next_out = 0;
        while next_out < t_out.len() && (t_out[next_out] - t) * dir <= 0.0 {
            out.push(Sample { t: t_out[next_out], y: y.clone() });
            next_out += 1;
        }
        let mut last_rejected = false;
        while next_out < t_out.len() {
            if stats.accepted + stats.rejected >= self.max_steps {
                return Err(Error::NonConvergence(format!("integrator exceeded {} steps at t = {t}", self.max_steps)));
            }
            let target = t_out[next_out];
            let mut hit = false;
            if (t + h - target) * dir >= 0.0 {
                h = target - t;
                hit = true;
            }
            if h.abs() <= 1e-15 * t.abs().max(1e-300) * 4.0 {
                return Err(Error::StepUnderflow(t));
            }
            // stages
            for s in 1..12 {
                for i in 0..n {
                    let mut acc = 0.0;
                    for j in 0..s {
                        acc += A[s][j] * k[j][i];
                    }
                    ytmp[i] = y[i] + h * acc;
                }
                let (head, tail) = k.split_at_mut(s);
                let _ = head;
                f(t + C[s] * h, &ytmp, &mut tail[0])?;
            }
            stats.evaluations += 11;
            let mut err5 = 0.0;
            let mut err3 = 0.0;
            for i in 0..n {
                let mut acc = 0.0;
                let mut e5 = 0.0;
                for s in 0..12 {
                    acc += B[s] * k[s][i];
                    e5 += ER[s] * k[s][i];
                }
                ynew[i] = y[i] + h * acc;
                let e3 = acc - BHH[0] * k[0][i] - BHH[1] * k[8][i] - BHH[2] * k[11][i];
                let sk = self.atol + self.rtol * y[i].abs().max(ynew[i].abs());
                err5 += (e5 / sk).powi(2);
                err3 += (e3 / sk).powi(2);
            }
            let mut deno = err5 + 0.01 * err3;
            if deno <= 0.0 {
                deno = 1.0;
            }
            let err = h.abs() * err5 / (n as f64 * deno).sqrt();
            if !err.is_finite() || ynew.iter().any(|v| !v.is_finite()) {
                // treat as a rejected step with a sharp cut
                stats.rejected += 1;
                h *= 0.2;
                last_rejected = true;
                continue;
            }
            let fac11 = err.powf(0.125);
            let mut fac = fac11 / 0.9;
            fac = fac.clamp(1.0 / 6.0, 3.0);
            if err <= 1.0 {
                let t_new = if hit { target } else { t + h };
                let mut fnew = vec![0.0; n];
                f(t_new, &ynew, &mut fnew)?;
                stats.evaluations += 1;
                stats.accepted += 1;
                t = t_new;
                std::mem::swap(&mut y, &mut ynew);
                k[0] = fnew;
                on_step(t, &y)?;
                while next_out < t_out.len() && (t_out[next_out] - t) * dir <= 0.0 {
                    out.push(Sample { t: t_out[next_out], y: y.clone() });
                    next_out += 1;
                }
                let mut hnew = h / fac;
                if last_rejected {
                    hnew = dir * hnew.abs().min(h.abs());
                }
                last_rejected = false;
                if hnew.abs() > self.h_max {
                    hnew = dir * self.h_max;
                }
                // do not let a shortened landing step shrink the next one
                if !hit || hnew.abs() >= h.abs() {
                    h = hnew;
                }
            } else {
                stats.rejected += 1;
                h /= (fac11 / 0.9).min(6.0);
                last_rejected = true;
            }
        }
        Ok(stats)
    }

    fn initial_step<F>(&self, f: &mut F, t: f64, y: &[f64], f0: &[f64], dir: f64, span: f64) -> Result<f64>
    where
        F: FnMut(f64, &[f64], &mut [f64]) -> Result<()>,
    {
        let n = y.len();
        let mut dnf = 0.0;
        let mut dny = 0.0;
        for i in 0..n {
            let sk = self.atol + self.rtol * y[i].abs();
            dnf += (f0[i] / sk).powi(2);
            dny += (y[i] / sk).powi(2);
        }
        let mut h = if dnf <= 1e-10 || dny <= 1e-10 { 1e-6 } else { (dny / dnf).sqrt() * 0.01 };
        h = h.min(self.h_max).min(span.max(1e-300));
        let y1: Vec<f64> = (0..n).map(|i| y[i] + dir * h * f0[i]).collect();
        let mut f1 = vec![0.0; n];
        f(t + dir * h, &y1, &mut f1)?;
        let mut der2 = 0.0;
        for i in 0..n {
            let sk = self.atol + self.rtol * y[i].abs();
            der2 += ((f1[i] - f0[i]) / sk).powi(2);
        }
        let der2 = der2.sqrt() / h;
        let der12 = der2.max(dnf.sqrt());
        let h1 = if der12 <= 1e-15 { (h * 1e-3).max(1e-6) } else { (0.01 / der12).powf(1.0 / 8.0) };
        let h = (100.0 * h).min(h1).min(self.h_max).min(span.max(1e-300));
        Ok(dir * h)
    }
}
