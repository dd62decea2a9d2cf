mod common;

use common::{c_dev, fig1a, tight};
use num_complex::Complex64;
use oscbath_core::propagator::DiscreteBath;
use oscbath_core::propagator::{evolve_coefficients, evolve_system, SolverControls};
use oscbath_core::ModelParams;
use std::f64::consts::{FRAC_PI_4, FRAC_PI_8};

/// Largest deviation between the oracle's system rows and the propagator,
/// over C and the bath amplitudes g·B̃ on the oracle's own modes.
fn oracle_deviation(p: &ModelParams, modes: usize, span: (f64, f64), times: &[f64], controls: &SolverControls) -> f64 {
    let bath = DiscreteBath::new(p, modes, span).unwrap();
    let traj = evolve_coefficients(p, bath.grid(), times, controls).unwrap();
    let w = p.kernel_weights();
    let mut worst: f64 = 0.0;
    for snap in &traj.snapshots {
        let exact = bath.coefficient_set(snap.time);
        worst = worst.max(c_dev(&exact.c, &snap.c));
        for (n, (omega, dw)) in bath.grid().iter().enumerate() {
            let g = (oscbath_core::spectral_density(omega, p) * dw).sqrt();
            for k in 0..3 {
                // B = g_k·B̃ with g_k = g·cos²θ or g·sin²θ.
                let gk = g * w.channel(k).sqrt();
                for j in 0..2 {
                    let d = gk * (exact.btilde[n][k][j] - snap.btilde[n][k][j]);
                    worst = worst.max(d.norm());
                }
            }
        }
    }
    worst
}

#[test]
fn propagator_matches_discrete_bath_at_moderate_time() {
    let p = fig1a(FRAC_PI_4);
    let bath = DiscreteBath::new(&p, 200, (p.omega0 - 40.0 * p.width, p.omega0 + 40.0 * p.width)).unwrap();
    let c = evolve_system(&p, &[0.0, 5.0], &tight()).unwrap();
    assert!(c_dev(&bath.coefficient_set(5.0).c, &c.snapshots[1].c) < 1e-3);
}

#[test]
fn oracle_agreement_over_memory_time() {
    for theta in [0.0, FRAC_PI_8, FRAC_PI_4] {
        let p = fig1a(theta);
        let span = (p.omega0 - 40.0 * p.width, p.omega0 + 40.0 * p.width);
        let times: Vec<f64> = (0..=10).map(|n| n as f64 / p.width).collect();
        let dev = oracle_deviation(&p, 400, span, &times, &SolverControls::default());
        assert!(dev < 1e-3, "theta {theta}: deviation {dev}");
    }
}

#[test]
fn discrete_bath_rows_are_normalized() {
    let p = fig1a(0.5);
    let bath = DiscreteBath::new(&p, 100, (-3.0, 5.0)).unwrap();
    let rows = bath.system_rows(7.0);
    for row in rows {
        let norm: f64 = row.iter().map(Complex64::norm_sqr).sum();
        assert!((norm - 1.0).abs() < 1e-12);
    }
}
