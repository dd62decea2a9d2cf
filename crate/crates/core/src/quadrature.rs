//! Globally adaptive Gauss–Kronrod (7/15) quadrature of vector-valued
//! integrands over a union of intervals.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{domain, Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
// Gauss weights for the nodes XGK[1], XGK[3], XGK[5], XGK[7].
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadOptions {
    /// Target error relative to the integral of |f| (componentwise maximum).
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_intervals: usize,
}

impl Default for QuadOptions {
    fn default() -> Self {
        Self {
            rel_tol: 1e-9,
            abs_tol: 1e-14,
            max_intervals: 20_000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadResult<const N: usize> {
    pub value: [f64; N],
    /// Summed Kronrod–Gauss differences (largest component).
    pub error: f64,
    /// ∫|f| for the component with the largest absolute integral.
    pub abs_integral: f64,
    pub intervals: usize,
    pub evaluations: usize,
}

struct Piece<const N: usize> {
    a: f64,
    b: f64,
    value: [f64; N],
    abs: [f64; N],
    error: f64,
}

impl<const N: usize> PartialEq for Piece<N> {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl<const N: usize> Eq for Piece<N> {}
impl<const N: usize> PartialOrd for Piece<N> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl<const N: usize> Ord for Piece<N> {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn kronrod<const N: usize, F: Fn(f64) -> [f64; N]>(f: &F, a: f64, b: f64) -> Piece<N> {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let samples: [([f64; N], [f64; N]); 7] = std::array::from_fn(|j| (f(c - h * XGK[j]), f(c + h * XGK[j])));
    let mut k = [0.0; N];
    let mut g = [0.0; N];
    let mut abs = [0.0; N];
    let mut error: f64 = 0.0;
    // Error heuristic of the classic QUADPACK routines: the Kronrod–Gauss
    // difference is scaled against the integral of |f − mean| so that a
    // rule which has not resolved a feature is not trusted.
    for n in 0..N {
        k[n] = WGK[7] * fc[n];
        g[n] = WG[3] * fc[n];
        abs[n] = WGK[7] * fc[n].abs();
        for (j, (f1, f2)) in samples.iter().enumerate() {
            k[n] += WGK[j] * (f1[n] + f2[n]);
            abs[n] += WGK[j] * (f1[n].abs() + f2[n].abs());
            if j % 2 == 1 {
                g[n] += WG[j / 2] * (f1[n] + f2[n]);
            }
        }
        let mean = 0.5 * k[n];
        let mut asc = WGK[7] * (fc[n] - mean).abs();
        for (j, (f1, f2)) in samples.iter().enumerate() {
            asc += WGK[j] * ((f1[n] - mean).abs() + (f2[n] - mean).abs());
        }
        k[n] *= h;
        g[n] *= h;
        abs[n] *= h.abs();
        asc *= h.abs();
        let mut e = (k[n] - g[n]).abs();
        if asc != 0.0 && e != 0.0 {
            e = asc * (200.0 * e / asc).powf(1.5).min(1.0);
        }
        if abs[n] > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
            e = e.max(50.0 * f64::EPSILON * abs[n]);
        }
        error = error.max(e);
    }
    Piece {
        a,
        b,
        value: k,
        abs,
        error,
    }
}

/// Integrates `f` over [points[0], points[last]] with forced subdivision at
/// every interior entry of `points` (which must be increasing).
pub fn integrate<const N: usize, F: Fn(f64) -> [f64; N]>(f: F, points: &[f64], opts: &QuadOptions) -> Result<QuadResult<N>> {
    if points.len() < 2 {
        return Err(domain("quadrature needs at least two points"));
    }
    if points.windows(2).any(|w| !(w[0] <= w[1])) || points.iter().any(|p| !p.is_finite()) {
        return Err(domain("quadrature breakpoints must be finite and non-decreasing"));
    }
    let mut heap: BinaryHeap<Piece<N>> = points
        .windows(2)
        .filter(|w| w[1] > w[0])
        .map(|w| kronrod(&f, w[0], w[1]))
        .collect();
    let mut evaluations = 15 * heap.len();

    let totals = |heap: &BinaryHeap<Piece<N>>| {
        let mut value = [0.0; N];
        let mut abs = [0.0; N];
        let mut err = 0.0;
        for p in heap.iter() {
            for n in 0..N {
                value[n] += p.value[n];
                abs[n] += p.abs[n];
            }
            err += p.error;
        }
        (value, abs.iter().cloned().fold(0.0, f64::max), err)
    };

    // Running sums are updated incrementally and refreshed exactly before
    // every convergence decision that would terminate the loop.
    let (_, mut abs_integral, mut error) = totals(&heap);
    let mut abs_parts = [0.0; N];
    for p in heap.iter() {
        for n in 0..N {
            abs_parts[n] += p.abs[n];
        }
    }
    loop {
        let tolerance = opts.abs_tol.max(opts.rel_tol * abs_integral);
        if error <= tolerance {
            let (value, abs_exact, err_exact) = totals(&heap);
            if err_exact <= opts.abs_tol.max(opts.rel_tol * abs_exact) {
                return Ok(QuadResult {
                    value,
                    error: err_exact,
                    abs_integral: abs_exact,
                    intervals: heap.len(),
                    evaluations,
                });
            }
            error = err_exact;
        }
        let worst = heap.pop().expect("heap is non-empty while refining");
        let mid = 0.5 * (worst.a + worst.b);
        if heap.len() + 2 > opts.max_intervals || !(mid > worst.a && mid < worst.b) {
            heap.push(worst);
            let (value, _, error) = totals(&heap);
            return Err(Error::Accuracy {
                estimate: error,
                tolerance,
                partial: value.to_vec(),
            });
        }
        let left = kronrod(&f, worst.a, mid);
        let right = kronrod(&f, mid, worst.b);
        error += left.error + right.error - worst.error;
        for n in 0..N {
            abs_parts[n] += left.abs[n] + right.abs[n] - worst.abs[n];
        }
        abs_integral = abs_parts.iter().cloned().fold(0.0, f64::max);
        heap.push(left);
        heap.push(right);
        evaluations += 30;
    }
}
