//! Complex-coefficient polynomials in the Laplace variable and their roots.

use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };
const ONE: Complex64 = Complex64 { re: 1.0, im: 0.0 };

/// Polynomial with coefficients in ascending degree.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Poly {
    coeffs: Vec<Complex64>,
}

impl Poly {
    pub fn new(coeffs: Vec<Complex64>) -> Self {
        let mut p = Self { coeffs };
        p.trim();
        p
    }

    pub fn zero() -> Self {
        Self { coeffs: vec![] }
    }

    pub fn constant(c: Complex64) -> Self {
        Self::new(vec![c])
    }

    /// The monic linear factor (s − root).
    pub fn linear(root: Complex64) -> Self {
        Self::new(vec![-root, ONE])
    }

    pub fn from_roots(lead: Complex64, roots: &[Complex64]) -> Self {
        roots.iter().fold(Self::constant(lead), |acc, r| &acc * &Self::linear(*r))
    }

    fn trim(&mut self) {
        while matches!(self.coeffs.last(), Some(c) if *c == ZERO) {
            self.coeffs.pop();
        }
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree; the zero polynomial reports `None`.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn leading(&self) -> Complex64 {
        self.coeffs.last().copied().unwrap_or(ZERO)
    }

    pub fn eval(&self, s: Complex64) -> Complex64 {
        self.coeffs.iter().rev().fold(ZERO, |acc, c| acc * s + c)
    }

    pub fn derivative(&self) -> Self {
        Self::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, c)| c * k as f64)
                .collect(),
        )
    }

    pub fn scale(&self, k: Complex64) -> Self {
        Self::new(self.coeffs.iter().map(|c| c * k).collect())
    }

    /// Taylor coefficients of p(a + ε) in ε, ascending.
    pub fn taylor_at(&self, a: Complex64) -> Vec<Complex64> {
        let mut c = self.coeffs.clone();
        let n = c.len();
        // Repeated synthetic division (Horner shift).
        for i in 0..n {
            for j in (i..n - 1).rev() {
                let next = c[j + 1];
                c[j] += a * next;
            }
        }
        c
    }

    /// Sum over coefficients of |a_k|·|s|^k, the scale against which
    /// rounding in `eval` is measured.
    pub fn magnitude_at(&self, s: Complex64) -> f64 {
        let r = s.norm();
        self.coeffs.iter().rev().fold(0.0, |acc, c| acc * r + c.norm())
    }

    /// All complex roots: eigenvalues of the companion matrix of the
    /// variable-scaled polynomial, each refined by Newton's method.
    pub fn roots(&self) -> Vec<Complex64> {
        let Some(deg) = self.degree() else {
            return vec![];
        };
        if deg == 0 {
            return vec![];
        }
        // Leading zero roots are exact.
        let zeros = self.coeffs.iter().take_while(|c| **c == ZERO).count();
        let reduced = Self::new(self.coeffs[zeros..].to_vec());
        let mut roots = vec![ZERO; zeros];
        roots.extend(reduced.nonzero_roots());
        roots
    }

    fn nonzero_roots(&self) -> Vec<Complex64> {
        let deg = self.degree().unwrap_or(0);
        if deg == 0 {
            return vec![];
        }
        let lead = self.leading();
        if deg == 1 {
            return vec![-self.coeffs[0] / lead];
        }
        // Balance by substituting s = σ·x with σ the geometric root scale.
        let sigma = (self.coeffs[0].norm() / lead.norm()).powf(1.0 / deg as f64);
        let sigma = if sigma.is_finite() && sigma > 0.0 { sigma } else { 1.0 };
        let monic: Vec<Complex64> = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(k, c)| c / lead * sigma.powi(k as i32 - deg as i32))
            .collect();
        let mut m = DMatrix::<Complex64>::zeros(deg, deg);
        for i in 1..deg {
            m[(i, i - 1)] = ONE;
        }
        for i in 0..deg {
            m[(i, deg - 1)] = -monic[i];
        }
        let eig = match m.clone().schur().eigenvalues() {
            Some(e) => e.iter().copied().collect::<Vec<_>>(),
            None => durand_kerner(&monic),
        };
        let dp = self.derivative();
        eig.into_iter().map(|x| self.polish(&dp, x * sigma)).collect()
    }

    fn polish(&self, dp: &Poly, mut z: Complex64) -> Complex64 {
        let mut best = (self.eval(z).norm(), z);
        for _ in 0..8 {
            let d = dp.eval(z);
            if d == ZERO {
                break;
            }
            let step = self.eval(z) / d;
            let cand = z - step;
            let r = self.eval(cand).norm();
            if !(r < best.0) {
                break;
            }
            best = (r, cand);
            z = cand;
            if step.norm() <= 1e-16 * z.norm() {
                break;
            }
        }
        best.1
    }
}

/// Simultaneous root iteration for a monic polynomial (ascending coefficients,
/// leading coefficient 1); fallback when the eigenvalue route declines.
fn durand_kerner(monic: &[Complex64]) -> Vec<Complex64> {
    let deg = monic.len() - 1;
    let p = Poly::new(monic.to_vec());
    let seed = Complex64::new(0.4, 0.9);
    let mut z: Vec<Complex64> = (0..deg).map(|k| seed.powu(k as u32)).collect();
    for _ in 0..500 {
        let mut moved: f64 = 0.0;
        for i in 0..deg {
            let denom = (0..deg).filter(|&j| j != i).fold(ONE, |acc, j| acc * (z[i] - z[j]));
            if denom == ZERO {
                continue;
            }
            let dz = p.eval(z[i]) / denom;
            z[i] -= dz;
            moved = moved.max(dz.norm());
        }
        if moved < 1e-15 {
            break;
        }
    }
    z
}

impl Add for &Poly {
    type Output = Poly;
    fn add(self, rhs: &Poly) -> Poly {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        Poly::new(
            (0..n)
                .map(|k| self.coeffs.get(k).copied().unwrap_or(ZERO) + rhs.coeffs.get(k).copied().unwrap_or(ZERO))
                .collect(),
        )
    }
}

impl Sub for &Poly {
    type Output = Poly;
    fn sub(self, rhs: &Poly) -> Poly {
        self + &(-rhs)
    }
}

impl Neg for &Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        Poly::new(self.coeffs.iter().map(|c| -c).collect())
    }
}

impl Mul for &Poly {
    type Output = Poly;
    fn mul(self, rhs: &Poly) -> Poly {
        if self.is_zero() || rhs.is_zero() {
            return Poly::zero();
        }
        let mut out = vec![ZERO; self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in rhs.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Poly::new(out)
    }
}
