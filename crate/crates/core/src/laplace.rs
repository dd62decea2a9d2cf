//! Laplace-domain solution of the coefficient equations for arbitrary
//! ω1, ω2, with inversion by partial fractions.
//!
//! With f̄(s) = F/(s+p), F = Γγ/2, p = γ+iω0, the transformed equations are a
//! 2×2 linear system. Multiplying through by (s+p) clears f̄:
//!
//!   a'(s) = (s+iω1)(s+p) + (w1+w0)F,  b'(s) = (s+iω2)(s+p) + (w2+w0)F,
//!   o' = w0·F,  det'(s) = a'b' − o'²,
//!
//! so every coefficient transform is a polynomial ratio over det'(s), times
//! (s+iω) for the bath coefficients driven at frequency ω.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::model::{KernelWeights, ModelParams};
use crate::poly::Poly;
use crate::propagator::ChannelAmplitudes;

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };
const ONE: Complex64 = Complex64 { re: 1.0, im: 0.0 };
const MINUS_I: Complex64 = Complex64 { re: 0.0, im: -1.0 };

/// Relative distance below which computed poles are merged into one
/// repeated pole.
pub const COALESCENCE: f64 = 1e-9;
/// Relative distance below which poles are inverted together, as a divided
/// difference over the group, instead of by separate residues.
pub const CLUSTER: f64 = 1e-3;
/// Root condition number above which a transfer is flagged ill-conditioned.
pub const ILL_CONDITIONED: f64 = 1e12;

/// Drive vectors per unit coupling for the common channel and the two
/// private channels.
const CHANNEL_DRIVES: [(Complex64, Complex64); 3] = [(MINUS_I, MINUS_I), (MINUS_I, ZERO), (ZERO, MINUS_I)];

/// f̄(s) = (Γγ/2)/(s + γ + iω0).
pub fn transfer_kernel(s: Complex64, p: &ModelParams) -> Result<Complex64> {
    let m = s + p.memory_rate();
    if m.norm() <= 1e-15 * p.memory_rate().norm() {
        return Err(Error::Singular(format!("kernel transform has a pole at s = {s}")));
    }
    Ok(p.kernel_amplitude() / m)
}

/// One pole of a rational transfer and its time-domain coefficients:
/// the pole contributes e^{pole·t}·Σ_r coefficients[r]·t^r/r!.
#[derive(Debug, Clone, PartialEq)]
pub struct PoleTerm {
    pub pole: Complex64,
    pub multiplicity: usize,
    pub coefficients: Vec<Complex64>,
}

impl PoleTerm {
    /// Coefficient of 1/(s − pole) in the partial-fraction expansion.
    pub fn residue(&self) -> Complex64 {
        self.coefficients[0]
    }
}

/// num(s)/den(s) with the denominator kept as a product of factors whose
/// roots are found separately.
#[derive(Debug, Clone, PartialEq)]
pub struct RationalTransfer {
    numerator: Poly,
    denominator: Poly,
    terms: Vec<PoleTerm>,
    groups: Vec<PoleGroup>,
    condition: f64,
}

/// Roots closer than [`CLUSTER`] to each other. Their joint contribution
/// num·e^{st}/den summed over the group is the divided difference of
/// h(s) = num(s)·e^{st}/q(s) over the roots, q being the denominator
/// without them. It equals the top-right entry of h(J) for the bidiagonal
/// J with the roots on the diagonal and ones above it, which stays exact
/// for repeated roots and loses nothing to cancellation for close ones.
#[derive(Debug, Clone, PartialEq)]
struct PoleGroup {
    center: Complex64,
    /// t(J − center) without the factor t.
    shifted: DMatrix<Complex64>,
    /// num(J)·q(J)⁻¹.
    weight: DMatrix<Complex64>,
}

impl PoleGroup {
    fn new(nodes: &[Complex64], outside: &[Complex64], numerator: &Poly, lead: Complex64) -> Result<Self> {
        let m = nodes.len();
        let center = nodes.iter().sum::<Complex64>() / m as f64;
        let j = DMatrix::from_fn(m, m, |r, c| {
            if r == c {
                nodes[r]
            } else if c == r + 1 {
                ONE
            } else {
                ZERO
            }
        });
        let eye = DMatrix::<Complex64>::identity(m, m);
        let num = numerator
            .coeffs()
            .iter()
            .rev()
            .fold(DMatrix::zeros(m, m), |acc: DMatrix<Complex64>, c| &acc * &j + &eye * *c);
        let q = outside.iter().fold(&eye * lead, |acc, r| acc * (&j - &eye * *r));
        let q_inv = q
            .try_inverse()
            .ok_or_else(|| Error::NearSingular("pole group shares a root with the rest of the denominator".into()))?;
        Ok(Self {
            center,
            shifted: &j - &eye * center,
            weight: num * q_inv,
        })
    }

    fn invert(&self, t: f64) -> Complex64 {
        let m = self.shifted.nrows();
        if m == 1 {
            return self.weight[(0, 0)] * (self.center * t).exp();
        }
        let e = (&self.shifted * Complex64::new(t, 0.0)).exp();
        (&self.weight * e)[(0, m - 1)] * (self.center * t).exp()
    }
}

/// Single-linkage groups of roots closer than [`CLUSTER`] relative to their
/// size.
fn group_roots(roots: &[Complex64]) -> Vec<Vec<usize>> {
    let n = roots.len();
    let mut label: Vec<usize> = (0..n).collect();
    for a in 0..n {
        for b in a + 1..n {
            let scale = roots[a].norm().max(roots[b].norm()).max(1e-300);
            if (roots[a] - roots[b]).norm() <= CLUSTER * scale && label[a] != label[b] {
                let (keep, drop) = (label[a].min(label[b]), label[a].max(label[b]));
                for l in label.iter_mut() {
                    if *l == drop {
                        *l = keep;
                    }
                }
            }
        }
    }
    let mut groups: Vec<Vec<usize>> = Vec::new();
    for (i, l) in label.iter().enumerate() {
        match groups.iter_mut().find(|g| label[g[0]] == *l) {
            Some(g) => g.push(i),
            None => groups.push(vec![i]),
        }
    }
    groups
}

impl RationalTransfer {
    /// Builds `numerator / Π factors`. Roots of each factor are computed on
    /// their own, so exactly known factors such as (s + iω) stay exact.
    pub fn from_factors(numerator: Poly, factors: &[Poly]) -> Result<Self> {
        let denominator = factors.iter().fold(Poly::constant(ONE), |acc, f| &acc * f);
        let deg_d = denominator.degree().unwrap_or(0);
        if !numerator.is_zero() && numerator.degree().unwrap_or(0) >= deg_d {
            return Err(Error::Domain("transfer must be strictly proper".into()));
        }
        let mut roots: Vec<Complex64> = Vec::with_capacity(deg_d);
        for f in factors {
            roots.extend(factor_roots(f));
        }
        let lead = denominator.leading();
        let groups = if numerator.is_zero() {
            Vec::new()
        } else {
            group_roots(&roots)
                .iter()
                .map(|g| {
                    let nodes: Vec<Complex64> = g.iter().map(|&i| roots[i]).collect();
                    let outside: Vec<Complex64> = (0..roots.len()).filter(|i| !g.contains(i)).map(|i| roots[i]).collect();
                    PoleGroup::new(&nodes, &outside, &numerator, lead)
                })
                .collect::<Result<_>>()?
        };

        // Cluster coincident roots.
        let mut clusters: Vec<Vec<Complex64>> = Vec::new();
        for r in roots {
            match clusters
                .iter_mut()
                .find(|c| (c[0] - r).norm() <= COALESCENCE * c[0].norm().max(r.norm()).max(1e-300))
            {
                Some(c) => c.push(r),
                None => clusters.push(vec![r]),
            }
        }

        let mut terms = Vec::with_capacity(clusters.len());
        let mut condition: f64 = 1.0;
        for (ci, cluster) in clusters.iter().enumerate() {
            let m = cluster.len();
            let pole = cluster.iter().sum::<Complex64>() / m as f64;
            let others: Vec<Complex64> = clusters
                .iter()
                .enumerate()
                .filter(|(j, _)| *j != ci)
                .flat_map(|(_, c)| c.iter().copied())
                .collect();
            let q = Poly::from_roots(lead, &others);
            let g = series_quotient(&numerator.taylor_at(pole), &q.taylor_at(pole), m);
            // coefficients[r] multiplies t^r/r!; g_n pairs with t^{m−1−n}.
            let coefficients = (0..m).map(|r| g[m - 1 - r]).collect();
            terms.push(PoleTerm {
                pole,
                multiplicity: m,
                coefficients,
            });
            if m == 1 {
                let slope = denominator.derivative().eval(pole).norm();
                let k = denominator.magnitude_at(pole) / (pole.norm().max(1e-300) * slope.max(1e-300));
                condition = condition.max(k);
            }
        }
        Ok(Self {
            numerator,
            denominator,
            terms,
            groups,
            condition,
        })
    }

    pub fn zero(denominator_factors: &[Poly]) -> Result<Self> {
        Self::from_factors(Poly::zero(), denominator_factors)
    }

    pub fn numerator(&self) -> &Poly {
        &self.numerator
    }

    pub fn denominator(&self) -> &Poly {
        &self.denominator
    }

    pub fn terms(&self) -> &[PoleTerm] {
        &self.terms
    }

    pub fn poles(&self) -> Vec<Complex64> {
        self.terms.iter().map(|t| t.pole).collect()
    }

    pub fn eval(&self, s: Complex64) -> Complex64 {
        self.numerator.eval(s) / self.denominator.eval(s)
    }

    /// lim_{s→∞} s·num/den, the value at t = 0⁺.
    pub fn initial_value(&self) -> Complex64 {
        match (self.numerator.degree(), self.denominator.degree()) {
            (Some(n), Some(d)) if n + 1 == d => self.numerator.leading() / self.denominator.leading(),
            _ => ZERO,
        }
    }

    pub fn residue_sum(&self) -> Complex64 {
        self.terms.iter().map(PoleTerm::residue).sum()
    }

    /// Largest root condition number over the simple poles.
    pub fn condition_number(&self) -> f64 {
        self.condition
    }

    pub fn is_ill_conditioned(&self) -> bool {
        self.condition > ILL_CONDITIONED
    }

    /// Inverse transform at t: the sum of residues of num·e^{st}/den, taken
    /// group by group over nearby poles.
    pub fn invert(&self, t: f64) -> Complex64 {
        self.groups.iter().map(|g| g.invert(t)).sum()
    }
}

/// First `m` Taylor coefficients of num/den given both series.
fn series_quotient(num: &[Complex64], den: &[Complex64], m: usize) -> Vec<Complex64> {
    let at = |v: &[Complex64], k: usize| v.get(k).copied().unwrap_or(ZERO);
    let mut g = vec![ZERO; m];
    for n in 0..m {
        let mut acc = at(num, n);
        for k in 0..n {
            acc -= g[k] * at(den, n - k);
        }
        g[n] = acc / at(den, 0);
    }
    g
}

/// Roots of a factor; quadratics go through the cancellation-free formula.
fn factor_roots(f: &Poly) -> Vec<Complex64> {
    match f.degree() {
        Some(2) => {
            let c = f.coeffs();
            let (a, b, cc) = (c[2], c[1] / c[2], c[0] / c[2]);
            let _ = a;
            let disc = (b * b - 4.0 * cc).sqrt();
            let sign = if (b.conj() * disc).re >= 0.0 { 1.0 } else { -1.0 };
            let q = -0.5 * (b + sign * disc);
            if q == ZERO {
                vec![ZERO, ZERO]
            } else {
                vec![q, cc / q]
            }
        }
        _ => f.roots(),
    }
}

/// Polynomial pieces of the cleared linear system.
#[derive(Debug, Clone)]
pub struct LaplaceSystem {
    params: ModelParams,
    weights: KernelWeights,
    a: Poly,
    b: Poly,
    off: Complex64,
    memory: Poly,
    det_factors: Vec<Poly>,
    poles: Vec<Complex64>,
}

impl LaplaceSystem {
    pub fn new(p: &ModelParams) -> Result<Self> {
        p.validate()?;
        let w = p.kernel_weights();
        let f = p.kernel_amplitude();
        let memory = Poly::new(vec![p.memory_rate(), ONE]);
        let lin = |omega: f64| Poly::new(vec![Complex64::new(0.0, omega), ONE]);
        let a = &(&lin(p.omega1) * &memory) + &Poly::constant(Complex64::new((w.individual + w.collective) * f, 0.0));
        let b = &(&lin(p.omega2) * &memory) + &Poly::constant(Complex64::new((w.individual + w.collective) * f, 0.0));
        let off = Complex64::new(w.collective * f, 0.0);
        // det' factors exactly when the oscillators are identical (a' = b')
        // or uncoupled (o' = 0); otherwise it is a genuine quartic.
        let det_factors = if off == ZERO {
            vec![a.clone(), b.clone()]
        } else if p.is_symmetric() {
            vec![&a - &Poly::constant(off), &a + &Poly::constant(off)]
        } else {
            vec![&(&a * &b) - &Poly::constant(off * off)]
        };
        let poles = det_factors.iter().flat_map(factor_roots).collect();
        Ok(Self {
            params: *p,
            weights: w,
            a,
            b,
            off,
            memory,
            det_factors,
            poles,
        })
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    /// Roots of det'(s): the system's characteristic poles (with the
    /// memory pole −p appearing when it cancels, e.g. at θ = 0).
    pub fn poles(&self) -> &[Complex64] {
        &self.poles
    }

    pub fn determinant(&self) -> Poly {
        self.det_factors.iter().fold(Poly::constant(ONE), |acc, f| &acc * f)
    }

    /// Smallest decay rate |Re s| over poles that do not cancel against
    /// the memory factor.
    pub fn slow_decay_rate(&self) -> f64 {
        self.physical_poles().iter().map(|s| s.re.abs()).fold(f64::INFINITY, f64::min)
    }

    fn physical_poles(&self) -> Vec<Complex64> {
        let p = self.params.memory_rate();
        let mut out = Vec::new();
        let mut skipped = false;
        for &s in &self.poles {
            let cancels = (s + p).norm() <= COALESCENCE * p.norm();
            // Only one copy of −p cancels against the (s+p) numerator factor.
            if cancels && !skipped && self.memory_pole_cancels() {
                skipped = true;
                continue;
            }
            out.push(s);
        }
        out
    }

    fn memory_pole_cancels(&self) -> bool {
        let s = -self.params.memory_rate();
        let det = self.determinant();
        det.eval(s).norm() <= 1e-12 * det.magnitude_at(s)
    }

    /// Errors if any pole that survives cancellation has Re ≥ 0.
    pub fn check_decaying(&self) -> Result<()> {
        for s in self.physical_poles() {
            if s.re >= -1e-12 * s.norm() {
                return Err(Error::NoSteadyState(s));
            }
        }
        Ok(())
    }

    /// Numerators (X1, X2) of the cleared solve for right-hand side (r1, r2).
    fn solve_numerators(&self, r1: Complex64, r2: Complex64) -> (Poly, Poly) {
        let r1p = Poly::constant(r1);
        let r2p = Poly::constant(r2);
        let offp = Poly::constant(self.off);
        let x1 = &(&(&self.b * &r1p) - &(&offp * &r2p)) * &self.memory;
        let x2 = &(&(&self.a * &r2p) - &(&offp * &r1p)) * &self.memory;
        (x1, x2)
    }

    pub fn transfer_c(&self) -> Result<[[RationalTransfer; 2]; 2]> {
        let (c11, c12) = self.solve_numerators(ONE, ZERO);
        let (c21, c22) = self.solve_numerators(ZERO, ONE);
        let f = &self.det_factors;
        Ok([
            [RationalTransfer::from_factors(c11, f)?, RationalTransfer::from_factors(c12, f)?],
            [RationalTransfer::from_factors(c21, f)?, RationalTransfer::from_factors(c22, f)?],
        ])
    }

    pub fn transfer_b(&self, omega: f64) -> Result<[[RationalTransfer; 2]; 3]> {
        let mut factors = self.det_factors.clone();
        factors.push(Poly::new(vec![Complex64::new(0.0, omega), ONE]));
        let mut out: Vec<[RationalTransfer; 2]> = Vec::with_capacity(3);
        for (k, (u1, u2)) in CHANNEL_DRIVES.iter().enumerate() {
            if self.weights.channel(k) == 0.0 {
                out.push([RationalTransfer::zero(&factors)?, RationalTransfer::zero(&factors)?]);
                continue;
            }
            let (x1, x2) = self.solve_numerators(*u1, *u2);
            out.push([
                RationalTransfer::from_factors(x1, &factors)?,
                RationalTransfer::from_factors(x2, &factors)?,
            ]);
        }
        let mut it = out.into_iter();
        Ok([it.next().unwrap(), it.next().unwrap(), it.next().unwrap()])
    }

    /// Steady-state amplitudes B̃_k^j(ω), the residues at the driving pole
    /// s = −iω.
    pub fn steady_amplitudes(&self, omega: f64) -> Result<ChannelAmplitudes> {
        self.steady_amplitudes_offset(omega - self.params.omega1)
    }

    /// Steady-state amplitudes at ω = ω1 + u. The factors are formed from
    /// frequency differences rather than expanded polynomials, and the
    /// offset keeps resonances narrower than the spacing of doubles near ω
    /// resolved.
    pub fn steady_amplitudes_offset(&self, u: f64) -> Result<ChannelAmplitudes> {
        let p = &self.params;
        let f = p.kernel_amplitude();
        let local = (self.weights.individual + self.weights.collective) * f;
        let m = Complex64::new(p.width, (p.omega0 - p.omega1) - u);
        let a = Complex64::new(0.0, -u) * m + local;
        let b = Complex64::new(0.0, (p.omega2 - p.omega1) - u) * m + local;
        let det = a * b - self.off * self.off;
        if det.norm() <= 1e-14 * (a.norm() * b.norm() + self.off.norm_sqr()) {
            return Err(Error::NearSingular(format!(
                "det'(-i*(omega1 + {u})) vanishes: drive is resonant with an undamped mode"
            )));
        }
        let mut out = [[ZERO; 2]; 3];
        for (k, (u1, u2)) in CHANNEL_DRIVES.iter().enumerate() {
            if self.weights.channel(k) == 0.0 {
                continue;
            }
            out[k] = [
                (b * u1 - self.off * u2) * m / det,
                (a * u2 - self.off * u1) * m / det,
            ];
        }
        Ok(out)
    }
}

/// C̄_i^j(s) for all (i, j).
#[allow(non_snake_case)]
pub fn transfer_C(p: &ModelParams) -> Result<[[RationalTransfer; 2]; 2]> {
    LaplaceSystem::new(p)?.transfer_c()
}

/// B̃̄_k^j(s) per unit coupling for drive frequency ω, for all (k, j).
#[allow(non_snake_case)]
pub fn transfer_B(p: &ModelParams, omega: f64) -> Result<[[RationalTransfer; 2]; 3]> {
    LaplaceSystem::new(p)?.transfer_b(omega)
}

/// Time-domain value of a rational transform at t ≥ 0.
pub fn invert_rational(rt: &RationalTransfer, t: f64) -> Complex64 {
    rt.invert(t)
}

/// Amplitude of e^{−iωt} as t → ∞: the residue at the driving pole s = −iω
/// (zero when the transfer has no such pole).
pub fn steady_state_from_residue(rt: &RationalTransfer, omega: f64) -> Result<Complex64> {
    let drive = Complex64::new(0.0, -omega);
    let near = |s: Complex64| (s - drive).norm() <= COALESCENCE * drive.norm().max(1.0);
    let mut amplitude = ZERO;
    for term in rt.terms() {
        if near(term.pole) {
            if term.multiplicity > 1 && term.coefficients[1..].iter().any(|c| c.norm() > 0.0) {
                return Err(Error::NearSingular(format!(
                    "driving pole at -i*{omega} coincides with a system pole"
                )));
            }
            amplitude = term.residue();
            continue;
        }
        let negligible = term.coefficients.iter().all(|c| c.norm() == 0.0);
        if !negligible && term.pole.re >= -1e-12 * term.pole.norm() {
            return Err(Error::NoSteadyState(term.pole));
        }
    }
    Ok(amplitude)
}
