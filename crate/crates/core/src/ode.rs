//! Adaptive Dormand–Prince 5(4) integration of complex linear systems.
//!
//! The state is a slice of `Complex64`; error control treats real and
//! imaginary parts as separate components. Output times are hit exactly by
//! clipping the step, without dense interpolation.

use num_complex::Complex64;

use crate::error::{domain, Error, Result};

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;

const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OdeOptions {
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Upper bound on the step size (infinite by default).
    pub max_step: f64,
    pub max_steps: usize,
}

impl Default for OdeOptions {
    fn default() -> Self {
        Self {
            rel_tol: 1e-10,
            abs_tol: 1e-12,
            max_step: f64::INFINITY,
            max_steps: 50_000_000,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct OdeStats {
    pub accepted: usize,
    pub rejected: usize,
    pub evaluations: usize,
}

impl OdeStats {
    pub fn merge(&mut self, other: &OdeStats) {
        self.accepted += other.accepted;
        self.rejected += other.rejected;
        self.evaluations += other.evaluations;
    }
}

/// Integrates y' = rhs(t, y) from `times[0]` with `y(times[0]) = y0` and
/// hands the state at every entry of `times` to `sink`.
pub fn integrate<F, S>(mut rhs: F, y0: &[Complex64], times: &[f64], opts: &OdeOptions, mut sink: S) -> Result<OdeStats>
where
    F: FnMut(f64, &[Complex64], &mut [Complex64]),
    S: FnMut(usize, &[Complex64]),
{
    if !(opts.rel_tol > 0.0 && opts.abs_tol > 0.0) {
        return Err(domain("integration tolerances must be positive"));
    }
    if times.is_empty() {
        return Ok(OdeStats::default());
    }
    if times.windows(2).any(|w| !(w[0] < w[1])) || times.iter().any(|t| !t.is_finite()) {
        return Err(domain("output times must be finite and strictly increasing"));
    }

    let n = y0.len();
    let zero = Complex64::new(0.0, 0.0);
    let mut y = y0.to_vec();
    let mut ynew = vec![zero; n];
    let mut tmp = vec![zero; n];
    let mut k: [Vec<Complex64>; 7] = std::array::from_fn(|_| vec![zero; n]);
    let mut stats = OdeStats::default();

    let mut t = times[0];
    sink(0, &y);
    if times.len() == 1 {
        return Ok(stats);
    }

    rhs(t, &y, &mut k[0]);
    stats.evaluations += 1;
    let (k0, rest) = k.split_at_mut(1);
    let mut h = initial_step(&mut rhs, t, &y, &k0[0], opts, &mut tmp, &mut rest[0], &mut stats);
    let mut next = 1;

    while next < times.len() {
        let target = times[next];
        let mut landing = false;
        let mut h_try = h.min(opts.max_step);
        if t + h_try >= target - 1e-13 * target.abs().max(1.0) {
            h_try = target - t;
            landing = true;
        }
        if h_try < 1e-14 * t.abs().max(1.0) {
            return Err(Error::Stiffness { t, h: h_try });
        }
        if stats.accepted + stats.rejected >= opts.max_steps {
            return Err(Error::Stiffness { t, h: h_try });
        }

        let err = step(&mut rhs, t, h_try, &y, &mut ynew, &mut tmp, &mut k, opts);
        stats.evaluations += 6;

        if err <= 1.0 {
            stats.accepted += 1;
            t = if landing { target } else { t + h_try };
            std::mem::swap(&mut y, &mut ynew);
            // First-same-as-last: the final stage is the next step's first.
            k.swap(0, 6);
            let fac = if err == 0.0 { 10.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 10.0) };
            // A step clipped to hit an output time does not shrink the
            // controller's proposal.
            let h_new = h_try * fac;
            h = if landing { h.max(h_new) } else { h_new };
            if landing {
                sink(next, &y);
                next += 1;
            }
        } else {
            stats.rejected += 1;
            h = h_try * (0.9 * err.powf(-0.2)).clamp(0.2, 1.0);
        }
    }
    Ok(stats)
}

#[allow(clippy::too_many_arguments)]
#[inline]
fn step<F>(
    rhs: &mut F,
    t: f64,
    h: f64,
    y: &[Complex64],
    ynew: &mut [Complex64],
    tmp: &mut [Complex64],
    k: &mut [Vec<Complex64>; 7],
    opts: &OdeOptions,
) -> f64
where
    F: FnMut(f64, &[Complex64], &mut [Complex64]),
{
    let n = y.len();
    for i in 0..n {
        tmp[i] = y[i] + h * (A21 * k[0][i]);
    }
    rhs(t + C2 * h, tmp, &mut k[1]);
    for i in 0..n {
        tmp[i] = y[i] + h * (A31 * k[0][i] + A32 * k[1][i]);
    }
    rhs(t + C3 * h, tmp, &mut k[2]);
    for i in 0..n {
        tmp[i] = y[i] + h * (A41 * k[0][i] + A42 * k[1][i] + A43 * k[2][i]);
    }
    rhs(t + C4 * h, tmp, &mut k[3]);
    for i in 0..n {
        tmp[i] = y[i] + h * (A51 * k[0][i] + A52 * k[1][i] + A53 * k[2][i] + A54 * k[3][i]);
    }
    rhs(t + C5 * h, tmp, &mut k[4]);
    for i in 0..n {
        tmp[i] = y[i] + h * (A61 * k[0][i] + A62 * k[1][i] + A63 * k[2][i] + A64 * k[3][i] + A65 * k[4][i]);
    }
    rhs(t + h, tmp, &mut k[5]);
    for i in 0..n {
        ynew[i] = y[i] + h * (A71 * k[0][i] + A73 * k[2][i] + A74 * k[3][i] + A75 * k[4][i] + A76 * k[5][i]);
    }
    rhs(t + h, ynew, &mut k[6]);

    let mut acc = 0.0;
    for i in 0..n {
        let e = h * (E1 * k[0][i] + E3 * k[2][i] + E4 * k[3][i] + E5 * k[4][i] + E6 * k[5][i] + E7 * k[6][i]);
        let sr = opts.abs_tol + opts.rel_tol * y[i].re.abs().max(ynew[i].re.abs());
        let si = opts.abs_tol + opts.rel_tol * y[i].im.abs().max(ynew[i].im.abs());
        acc += (e.re / sr).powi(2) + (e.im / si).powi(2);
    }
    (acc / (2 * n).max(1) as f64).sqrt()
}

/// Starting step from the local derivative scale (Hairer–Nørsett–Wanner).
#[allow(clippy::too_many_arguments)]
fn initial_step<F>(
    rhs: &mut F,
    t: f64,
    y: &[Complex64],
    f0: &[Complex64],
    opts: &OdeOptions,
    tmp: &mut [Complex64],
    f1: &mut [Complex64],
    stats: &mut OdeStats,
) -> f64
where
    F: FnMut(f64, &[Complex64], &mut [Complex64]),
{
    let n = y.len().max(1);
    let scale = |v: &Complex64| opts.abs_tol + opts.rel_tol * v.norm();
    let d0 = (y.iter().map(|v| (v.norm() / scale(v)).powi(2)).sum::<f64>() / n as f64).sqrt();
    let d1 = (f0.iter().zip(y).map(|(f, v)| (f.norm() / scale(v)).powi(2)).sum::<f64>() / n as f64).sqrt();
    let h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
    for i in 0..y.len() {
        tmp[i] = y[i] + h0 * f0[i];
    }
    rhs(t + h0, tmp, f1);
    stats.evaluations += 1;
    let d2 = (f1
        .iter()
        .zip(f0)
        .zip(y)
        .map(|((a, b), v)| ((a - b).norm() / scale(v)).powi(2))
        .sum::<f64>()
        / n as f64)
        .sqrt()
        / h0;
    let h1 = if d1.max(d2) <= 1e-15 {
        (h0 * 1e-3).max(1e-6)
    } else {
        (0.01 / d1.max(d2)).powf(0.2)
    };
    (100.0 * h0).min(h1).min(opts.max_step)
}
