//! Closed-form solutions for identical oscillators (ω1 = ω2).
//!
//! The sum and difference combinations A¹ = C¹ + C², A² = C¹ − C² (and
//! D¹, D² for the bath coefficients) decouple into second-order ODEs
//! ẍ + (a+ib)ẋ + (c+id)x = h·e^{−iωt}, solved here through their
//! characteristic roots.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::FrequencyGrid;
use crate::model::{occupation, KernelWeights, ModelParams};
use crate::propagator::{CoefficientSet, ChannelAmplitudes};

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };
const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

/// Relative root separation below which the confluent form is used.
pub const DEGENERACY_THRESHOLD: f64 = 1e-9;
/// Smallest admissible particular-solution denominator, and the smallest
/// steady-state denominator relative to the size of its terms.
pub const RESONANCE_THRESHOLD: f64 = 1e-14;

/// ẍ + (a+ib)ẋ + (c+id)x = h·e^{−i·omega_drive·t} with x(0) = x0, ẋ(0) = xdot0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadraticOde {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
    pub h: Complex64,
    pub omega_drive: f64,
    pub x0: Complex64,
    pub xdot0: Complex64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RootPair {
    pub lambda1: Complex64,
    pub lambda2: Complex64,
    pub degenerate: bool,
}

/// (y1, y2, y3): damping of both combinations, then the stiffness of the
/// symmetric and antisymmetric combinations.
pub fn y_coefficients(p: &ModelParams) -> Result<(Complex64, Complex64, Complex64)> {
    require_symmetric(p)?;
    let w = p.kernel_weights();
    let f = p.kernel_amplitude();
    let base = Complex64::new(-p.omega1 * p.omega0, p.omega1 * p.width);
    Ok((
        Complex64::new(p.width, p.omega0 + p.omega1),
        base + (w.individual + 2.0 * w.collective) * f,
        base + w.individual * f,
    ))
}

fn require_symmetric(p: &ModelParams) -> Result<()> {
    p.validate()?;
    if !p.is_symmetric() {
        return Err(Error::Unsupported(format!(
            "closed forms need omega1 == omega2 (got {} and {}); use the Laplace solver",
            p.omega1, p.omega2
        )));
    }
    Ok(())
}

/// Roots of λ² + (a+ib)λ + (c+id) = 0 without cancellation.
pub fn characteristic_roots(a: f64, b: f64, c: f64, d: f64) -> RootPair {
    let bb = Complex64::new(a, b);
    let cc = Complex64::new(c, d);
    let disc = (bb * bb - 4.0 * cc).sqrt();
    let sign = if (bb.conj() * disc).re >= 0.0 { 1.0 } else { -1.0 };
    let q = -0.5 * (bb + sign * disc);
    let (l1, l2) = if q == ZERO { (ZERO, ZERO) } else { (q, cc / q) };
    let degenerate = (l1 - l2).norm() <= DEGENERACY_THRESHOLD * (l1 + l2).norm();
    RootPair {
        lambda1: l1,
        lambda2: l2,
        degenerate,
    }
}

/// Characteristic roots and integration constants of a [`QuadraticOde`],
/// ready for evaluation at many times.
#[derive(Debug, Clone, Copy)]
pub struct QuadraticSolution {
    pub roots: RootPair,
    /// Amplitude of the particular solution A·e^{−iωt}.
    pub particular: Complex64,
    omega: f64,
    y0: Complex64,
    ydot0: Complex64,
}

impl QuadraticOde {
    pub fn solve(&self) -> Result<QuadraticSolution> {
        let roots = characteristic_roots(self.a, self.b, self.c, self.d);
        let w = self.omega_drive;
        let particular = if self.h == ZERO {
            ZERO
        } else {
            let den = Complex64::new(self.c + self.b * w - w * w, self.d - self.a * w);
            if den.norm() < RESONANCE_THRESHOLD {
                return Err(Error::Resonance(den.norm()));
            }
            self.h / den
        };
        Ok(QuadraticSolution {
            roots,
            particular,
            omega: w,
            y0: self.x0 - particular,
            ydot0: self.xdot0 + I * w * particular,
        })
    }
}

impl QuadraticSolution {
    pub fn at(&self, t: f64) -> Complex64 {
        let RootPair { lambda1, lambda2, degenerate } = self.roots;
        let homogeneous = if degenerate {
            let l = 0.5 * (lambda1 + lambda2);
            (self.y0 + (self.ydot0 - l * self.y0) * t) * (l * t).exp()
        } else {
            // y0·e^{λ2 t} + (ẏ0 − λ2 y0)·(e^{λ1 t} − e^{λ2 t})/(λ1 − λ2), with the
            // divided difference written through φ1(z) = (e^z − 1)/z.
            let e2 = (lambda2 * t).exp();
            self.y0 * e2 + (self.ydot0 - lambda2 * self.y0) * e2 * t * phi1((lambda1 - lambda2) * t)
        };
        homogeneous + self.particular * Complex64::new(0.0, -self.omega * t).exp()
    }
}

fn phi1(z: Complex64) -> Complex64 {
    if z.norm() < 0.1 {
        let mut term = Complex64::new(1.0, 0.0);
        let mut sum = term;
        for k in 2..14 {
            term = term * z / k as f64;
            sum += term;
        }
        sum
    } else {
        (z.exp() - 1.0) / z
    }
}

/// x(t) for the given ODE.
pub fn solve_quadratic_ode(q: &QuadraticOde, t: f64) -> Result<Complex64> {
    Ok(q.solve()?.at(t))
}

/// Drive amplitudes (u1, u2) of D¹ = B̃¹ + B̃², D² = B̃¹ − B̃² per channel.
const DRIVES: [(Complex64, Complex64); 3] = [
    (Complex64 { re: 0.0, im: -2.0 }, ZERO),
    (Complex64 { re: 0.0, im: -1.0 }, Complex64 { re: 0.0, im: -1.0 }),
    (Complex64 { re: 0.0, im: -1.0 }, Complex64 { re: 0.0, im: 1.0 }),
];

/// Symmetric-case solver with roots computed once per parameter point.
#[derive(Debug, Clone)]
pub struct ClosedForm {
    params: ModelParams,
    weights: KernelWeights,
    y: (Complex64, Complex64, Complex64),
    sym: [QuadraticSolution; 2],
    anti: [QuadraticSolution; 2],
}

impl ClosedForm {
    pub fn new(p: &ModelParams) -> Result<Self> {
        let y = y_coefficients(p)?;
        let w1 = p.omega1;
        let mut sym = Vec::new();
        let mut anti = Vec::new();
        for (a1, a2) in [(1.0, 1.0), (1.0, -1.0)] {
            sym.push(homogeneous(y.0, y.1, Complex64::new(a1, 0.0), w1).solve()?);
            anti.push(homogeneous(y.0, y.2, Complex64::new(a2, 0.0), w1).solve()?);
        }
        Ok(Self {
            params: *p,
            weights: p.kernel_weights(),
            y,
            sym: [sym[0], sym[1]],
            anti: [anti[0], anti[1]],
        })
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    /// Roots of the symmetric and antisymmetric characteristic equations.
    pub fn roots(&self) -> (RootPair, RootPair) {
        (self.sym[0].roots, self.anti[0].roots)
    }

    /// Smallest |Re λ| over both characteristic equations.
    pub fn slow_decay_rate(&self) -> f64 {
        let (s, a) = self.roots();
        [s.lambda1, s.lambda2, a.lambda1, a.lambda2]
            .iter()
            .map(|l| l.re.abs())
            .fold(f64::INFINITY, f64::min)
    }

    /// C[i][j] = C_i^j(t).
    pub fn c(&self, t: f64) -> [[Complex64; 2]; 2] {
        let mut c = [[ZERO; 2]; 2];
        for i in 0..2 {
            let (a1, a2) = (self.sym[i].at(t), self.anti[i].at(t));
            c[i] = [0.5 * (a1 + a2), 0.5 * (a1 - a2)];
        }
        c
    }

    /// B̃_k^j(ω, t) for all channels; channels without coupling are zero.
    pub fn btilde(&self, omega: f64, t: f64) -> Result<ChannelAmplitudes> {
        let mut out = [[ZERO; 2]; 3];
        let p = &self.params;
        let h = Complex64::new(p.width, p.omega0 - omega);
        for (k, (u1, u2)) in DRIVES.iter().enumerate() {
            if self.weights.channel(k) == 0.0 {
                continue;
            }
            let d1 = driven(self.y.0, self.y.1, h * u1, omega, *u1).solve()?.at(t);
            let d2 = driven(self.y.0, self.y.2, h * u2, omega, *u2).solve()?.at(t);
            out[k] = [0.5 * (d1 + d2), 0.5 * (d1 - d2)];
        }
        Ok(out)
    }

    pub fn coefficient_set(&self, grid: &FrequencyGrid, t: f64) -> Result<CoefficientSet> {
        let btilde = grid.nodes().iter().map(|&w| self.btilde(w, t)).collect::<Result<Vec<_>>>()?;
        Ok(CoefficientSet { time: t, c: self.c(t), btilde })
    }
}

fn homogeneous(y1: Complex64, y: Complex64, x0: Complex64, omega1: f64) -> QuadraticOde {
    QuadraticOde {
        a: y1.re,
        b: y1.im,
        c: y.re,
        d: y.im,
        h: ZERO,
        omega_drive: 0.0,
        x0,
        xdot0: Complex64::new(0.0, -omega1) * x0,
    }
}

fn driven(y1: Complex64, y: Complex64, h: Complex64, omega: f64, u: Complex64) -> QuadraticOde {
    QuadraticOde {
        a: y1.re,
        b: y1.im,
        c: y.re,
        d: y.im,
        h,
        omega_drive: omega,
        x0: ZERO,
        xdot0: u,
    }
}

/// C and B̃ on `grid` at time `t` from the closed forms.
pub fn analytic_coefficients(p: &ModelParams, grid: &FrequencyGrid, t: f64) -> Result<CoefficientSet> {
    ClosedForm::new(p)?.coefficient_set(grid, t)
}

/// Stationary amplitudes of B̃_k^j(ω, t)·e^{iωt} per unit coupling.
#[allow(non_snake_case)]
pub fn steady_state_B(p: &ModelParams, omega: f64) -> Result<ChannelAmplitudes> {
    steady_state_B_offset(p, omega - p.omega1)
}

/// Stationary amplitudes at ω = ω1 + u. Working from the offset keeps
/// resonances narrower than the spacing of doubles near ω1 resolved.
#[allow(non_snake_case)]
pub fn steady_state_B_offset(p: &ModelParams, u: f64) -> Result<ChannelAmplitudes> {
    require_symmetric(p)?;
    let w = p.kernel_weights();
    let f = p.kernel_amplitude();
    let d0 = (p.omega1 - p.omega0) + u;
    let base = Complex64::new(-d0 * u, -p.width * u);
    // K vanishes only through cancellation between its terms, so it is
    // compared with their size rather than with an absolute floor.
    let scale = base.re.abs() + base.im.abs();
    let checked = |shift: f64| -> Result<Complex64> {
        let k = base + shift;
        if k.norm() <= RESONANCE_THRESHOLD * (scale + shift) {
            return Err(Error::NearSingular(format!("|K| = {:.3e} at omega = omega1 + {u}", k.norm())));
        }
        Ok(k)
    };
    let x = Complex64::new(d0, p.width);
    let mut out = [[ZERO; 2]; 3];
    if w.collective > 0.0 {
        let kc = checked(f * (2.0 * w.collective + w.individual))?;
        out[0] = [-x / kc, -x / kc];
    }
    if w.individual > 0.0 {
        let kc = checked(f * (2.0 * w.collective + w.individual))?;
        let ks = checked(f * w.individual)?;
        let same = -0.5 * x * (1.0 / ks + 1.0 / kc);
        let other = 0.5 * x * (1.0 / ks - 1.0 / kc);
        out[1] = [same, other];
        out[2] = [other, same];
    }
    Ok(out)
}

/// Offsets u = ω − ω1 of the complex frequencies at which the steady-state
/// denominators vanish, one pair per active channel family. Returned as
/// offsets so that narrow resonances keep full relative precision.
pub fn steady_resonances(p: &ModelParams) -> Result<Vec<Complex64>> {
    require_symmetric(p)?;
    let w = p.kernel_weights();
    let f = p.kernel_amplitude();
    let mut shifts = vec![f * (2.0 * w.collective + w.individual)];
    if w.individual > 0.0 {
        shifts.push(f * w.individual);
    }
    // With u = ω − ω1 the denominator is −(u² + (ω1 − ω0 + iγ)u − shift).
    let b = Complex64::new(p.omega1 - p.omega0, p.width);
    let mut out = Vec::new();
    for shift in shifts {
        let root = (b * b + 4.0 * shift).sqrt();
        let q = if (b.conj() * root).re >= 0.0 { -0.5 * (b + root) } else { -0.5 * (b - root) };
        out.push(q);
        if q != ZERO {
            out.push(-shift / q);
        }
    }
    Ok(out)
}

/// Thermal coherence predicted for a spectrum much broader than the
/// coupling: n̄(ω1) at θ = 0, −2cos⁴θ/sin⁴θ·n̄(ω1) otherwise.
pub fn limit_markovian_sstc(p: &ModelParams) -> f64 {
    let w = p.kernel_weights();
    let n = occupation(p.omega1, p.temperature);
    if p.theta == 0.0 {
        n
    } else {
        -2.0 * w.collective / w.individual * n
    }
}

/// Thermal coherence predicted for a spectrum much narrower than the
/// coupling: (γ/Γ)·n̄(ω1) at θ = 0,
/// 4γcos⁴θ/(Γ sin⁴θ (sin⁴θ + 2cos⁴θ)²)·n̄(ω1) otherwise. Evaluated as written,
/// so γ = 0 gives exactly 0 and Γ = 0 is not finite.
pub fn limit_narrowband_sstc(p: &ModelParams) -> f64 {
    let w = p.kernel_weights();
    let n = occupation(p.omega1, p.temperature);
    let ratio = p.width / p.coupling;
    if p.theta == 0.0 {
        ratio * n
    } else if w.collective == 0.0 {
        0.0
    } else {
        let mix = w.individual + 2.0 * w.collective;
        4.0 * ratio * w.collective / (w.individual * mix * mix) * n
    }
}

/// Long-time C at θ = 0: the symmetric mode has decayed and the
/// antisymmetric mode rotates freely, C_j^1 = −C_j^2 = ±e^{−iω1 t}/2.
#[allow(non_snake_case)]
pub fn theta_zero_vacuum_C(omega1: f64, t: f64) -> [[Complex64; 2]; 2] {
    let e = 0.5 * Complex64::new(0.0, -omega1 * t).exp();
    [[e, -e], [-e, e]]
}
