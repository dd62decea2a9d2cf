//! Physical parameters, the Lorentzian reservoir spectrum and its memory
//! kernel, Bose occupations, coupling weights and initial-state moments.

use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};

/// Parameters of the two-oscillator, three-reservoir model.
///
/// All frequencies and rates share one (user-chosen) unit; the temperature is
/// an energy with k_B = ħ = 1 and is common to the three reservoirs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub omega1: f64,
    pub omega2: f64,
    /// Mixing angle in [0, π/2]: 0 is purely collective, π/2 purely individual.
    pub theta: f64,
    /// System-reservoir coupling strength Γ.
    pub coupling: f64,
    /// Spectral width γ of the Lorentzian.
    pub width: f64,
    /// Spectral center frequency ω0.
    pub omega0: f64,
    pub temperature: f64,
}

impl ModelParams {
    /// Symmetric parameter set with ω1 = ω2.
    pub fn symmetric(omega: f64, theta: f64, coupling: f64, width: f64, omega0: f64, temperature: f64) -> Self {
        Self {
            omega1: omega,
            omega2: omega,
            theta,
            coupling,
            width,
            omega0,
            temperature,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [
            self.omega1,
            self.omega2,
            self.theta,
            self.coupling,
            self.width,
            self.omega0,
            self.temperature,
        ]
        .iter()
        .all(|v| v.is_finite());
        if !finite {
            return Err(domain("model parameters must be finite"));
        }
        if self.omega1 <= 0.0 || self.omega2 <= 0.0 {
            return Err(domain(format!(
                "oscillator frequencies must be positive (omega1 = {}, omega2 = {})",
                self.omega1, self.omega2
            )));
        }
        if self.coupling < 0.0 {
            return Err(domain(format!("Gamma must be >= 0, got {}", self.coupling)));
        }
        if self.width <= 0.0 {
            return Err(domain(format!("gamma must be > 0, got {}", self.width)));
        }
        if self.omega0 <= 0.0 {
            return Err(domain(format!("omega0 must be > 0, got {}", self.omega0)));
        }
        if self.temperature < 0.0 {
            return Err(domain(format!("temperature must be >= 0, got {}", self.temperature)));
        }
        check_theta(self.theta)
    }

    /// True when ω1 and ω2 coincide to within a few ulps.
    pub fn is_symmetric(&self) -> bool {
        (self.omega1 - self.omega2).abs() <= 4.0 * f64::EPSILON * self.omega1.abs().max(self.omega2.abs())
    }

    /// Γγ/2, the kernel value at zero delay.
    pub fn kernel_amplitude(&self) -> f64 {
        0.5 * self.coupling * self.width
    }

    /// γ + iω0, the kernel's complex decay rate.
    pub fn memory_rate(&self) -> Complex64 {
        Complex64::new(self.width, self.omega0)
    }

    pub fn kernel_weights(&self) -> KernelWeights {
        KernelWeights::from_theta(self.theta)
    }
}

fn check_theta(theta: f64) -> Result<()> {
    if !(0.0..=FRAC_PI_2).contains(&theta) {
        return Err(domain(format!("theta must lie in [0, pi/2], got {theta}")));
    }
    Ok(())
}

/// (sin θ, cos θ), with the endpoint θ = π/2 mapped to exactly (1, 0).
pub(crate) fn mixing_sin_cos(theta: f64) -> (f64, f64) {
    if theta == FRAC_PI_2 {
        (1.0, 0.0)
    } else {
        theta.sin_cos()
    }
}

/// Weights of the three memory kernels: cos⁴θ for the common reservoir
/// (channel 0) and sin⁴θ for each private reservoir (channels 1 and 2).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelWeights {
    pub collective: f64,
    pub individual: f64,
}

impl KernelWeights {
    pub fn from_theta(theta: f64) -> Self {
        let (s, c) = mixing_sin_cos(theta);
        let (s2, c2) = (s * s, c * c);
        Self {
            collective: c2 * c2,
            individual: s2 * s2,
        }
    }

    /// Weight of channel `k` (0 common, 1 and 2 private).
    pub fn channel(&self, k: usize) -> f64 {
        if k == 0 {
            self.collective
        } else {
            self.individual
        }
    }
}

/// J(ω) = (Γ/2π)·γ²/((ω−ω0)² + γ²).
pub fn spectral_density(omega: f64, p: &ModelParams) -> f64 {
    let d = omega - p.omega0;
    let g2 = p.width * p.width;
    p.coupling / (2.0 * PI) * g2 / (d * d + g2)
}

/// f(τ) = (Γγ/2)·exp(−(γ+iω0)τ).
pub fn correlation_kernel(tau: f64, p: &ModelParams) -> Result<Complex64> {
    if !(tau >= 0.0) {
        return Err(domain(format!("kernel delay must be >= 0, got {tau}")));
    }
    Ok(p.kernel_amplitude() * (-p.memory_rate() * tau).exp())
}

/// n̄(ω) = 1/(e^{ω/T} − 1), exactly 0 at T = 0.
pub fn bose_occupation(omega: f64, temperature: f64) -> Result<f64> {
    if !(omega > 0.0) {
        return Err(domain(format!("Bose occupation needs omega > 0, got {omega}")));
    }
    if temperature < 0.0 {
        return Err(domain(format!("temperature must be >= 0, got {temperature}")));
    }
    Ok(occupation(omega, temperature))
}

/// Unchecked occupation for hot loops; callers guarantee ω > 0.
#[inline]
pub(crate) fn occupation(omega: f64, temperature: f64) -> f64 {
    if temperature == 0.0 {
        return 0.0;
    }
    let x = omega / temperature;
    if x > 700.0 {
        0.0
    } else {
        1.0 / x.exp_m1()
    }
}

/// Coupling weights (cos²θ, sin²θ) of the common and private reservoirs.
pub fn coupling_weights(theta: f64) -> Result<(f64, f64)> {
    check_theta(theta)?;
    let (s, c) = mixing_sin_cos(theta);
    Ok((c * c, s * s))
}

/// Second moments ⟨c_i†c_j⟩ of the oscillators' initial state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InitialMoments {
    pub n11: f64,
    pub n22: f64,
    pub n12: Complex64,
}

impl InitialMoments {
    pub fn new(n11: f64, n22: f64, n12: Complex64) -> Result<Self> {
        if !(n11 >= 0.0 && n22 >= 0.0) {
            return Err(domain(format!("occupations must be >= 0, got ({n11}, {n22})")));
        }
        let excess = n12.norm_sqr() - n11 * n22;
        if excess > 1e-12 * (1.0 + n11 * n22) {
            return Err(domain(format!(
                "moment matrix is not positive semidefinite: |n12|^2 - n11*n22 = {excess:.3e}"
            )));
        }
        Ok(Self { n11, n22, n12 })
    }

    /// Moments of sinκ|01⟩ + cosκ|10⟩.
    pub fn from_kappa(kappa: f64) -> Self {
        let (s, c) = kappa.sin_cos();
        Self {
            n11: c * c,
            n22: s * s,
            n12: Complex64::new(s * c, 0.0),
        }
    }

    /// m_ij = ⟨c_i†c_j⟩ with zero-based indices.
    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        match (i, j) {
            (0, 0) => Complex64::new(self.n11, 0.0),
            (1, 1) => Complex64::new(self.n22, 0.0),
            (0, 1) => self.n12,
            (1, 0) => self.n12.conj(),
            _ => panic!("moment index ({i}, {j}) out of range"),
        }
    }
}

/// Initial-state moments from κ (see [`InitialMoments::from_kappa`]).
pub fn initial_moments_from_kappa(kappa: f64) -> InitialMoments {
    InitialMoments::from_kappa(kappa)
}
