#![allow(dead_code)]

use num_complex::Complex64;
use oscbath_core::propagator::{ChannelAmplitudes, SolverControls};
use oscbath_core::ModelParams;

/// Γ = ω1 = ω2 = ω0 = T = 1, γ = 0.1.
pub fn fig1a(theta: f64) -> ModelParams {
    ModelParams::symmetric(1.0, theta, 1.0, 0.1, 1.0, 1.0)
}

/// As `fig1a` with γ = 10.
pub fn fig1b(theta: f64) -> ModelParams {
    ModelParams::symmetric(1.0, theta, 1.0, 10.0, 1.0, 1.0)
}

pub fn tight() -> SolverControls {
    SolverControls {
        rel_tol: 1e-12,
        abs_tol: 1e-14,
    }
}

pub fn c_dev(a: &[[Complex64; 2]; 2], b: &[[Complex64; 2]; 2]) -> f64 {
    let mut m: f64 = 0.0;
    for i in 0..2 {
        for j in 0..2 {
            m = m.max((a[i][j] - b[i][j]).norm());
        }
    }
    m
}

pub fn amp_dev(a: &ChannelAmplitudes, b: &ChannelAmplitudes) -> f64 {
    let mut m: f64 = 0.0;
    for k in 0..3 {
        for j in 0..2 {
            m = m.max((a[k][j] - b[k][j]).norm());
        }
    }
    m
}
