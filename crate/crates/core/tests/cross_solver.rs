mod common;

use common::{amp_dev, c_dev, fig1a, tight};
use num_complex::Complex64;
use oscbath_core::closedform::{analytic_coefficients, steady_state_B, ClosedForm};
use oscbath_core::laplace::{invert_rational, steady_state_from_residue, transfer_B, transfer_C, LaplaceSystem};
use oscbath_core::propagator::{evolve_coefficients, evolve_system};
use oscbath_core::{FrequencyGrid, ModelParams};
use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, FRAC_PI_6};

fn small_grid() -> FrequencyGrid {
    FrequencyGrid::from_nodes(0.0, 3.0, vec![0.4, 0.95, 1.3, 2.2], vec![1.0; 4]).unwrap()
}

fn laplace_c(p: &ModelParams, t: f64) -> [[Complex64; 2]; 2] {
    let tc = transfer_C(p).unwrap();
    let mut c = [[Complex64::new(0.0, 0.0); 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            c[i][j] = invert_rational(&tc[i][j], t);
        }
    }
    c
}

#[test]
fn closed_form_laplace_and_propagator_agree_on_fig1a() {
    let times = [0.0, 1.0, 5.0, 20.0, 50.0];
    let grid = small_grid();
    for theta in [0.0, FRAC_PI_6, FRAC_PI_4, 1.3, FRAC_PI_2] {
        let p = fig1a(theta);
        let traj = evolve_coefficients(&p, &grid, &times, &tight()).unwrap();
        for snap in &traj.snapshots {
            let t = snap.time;
            let cf = analytic_coefficients(&p, &grid, t).unwrap();
            assert!(c_dev(&cf.c, &snap.c) < 1e-8, "theta {theta}, t {t}: closed form vs propagator");
            assert!(c_dev(&laplace_c(&p, t), &snap.c) < 1e-8, "theta {theta}, t {t}: laplace vs propagator");
            for (n, &w) in grid.nodes().iter().enumerate() {
                assert!(amp_dev(&cf.btilde[n], &snap.btilde[n]) < 1e-8, "theta {theta}, t {t}, omega {w}");
                let tb = transfer_B(&p, w).unwrap();
                for k in 0..3 {
                    for j in 0..2 {
                        let v = invert_rational(&tb[k][j], t);
                        assert!((v - snap.btilde[n][k][j]).norm() < 1e-8, "theta {theta}, t {t}, k {k}, j {j}");
                    }
                }
            }
        }
    }
}

#[test]
fn asymmetric_laplace_matches_propagator() {
    let grid = FrequencyGrid::from_nodes(0.0, 3.0, vec![0.7, 1.05, 1.6], vec![1.0; 3]).unwrap();
    for (theta, delta) in [(0.4, 0.2), (FRAC_PI_4, 0.5), (1.2, 0.2)] {
        let p = ModelParams {
            omega1: 1.0 + delta / 2.0,
            omega2: 1.0 - delta / 2.0,
            ..fig1a(theta)
        };
        let traj = evolve_coefficients(&p, &grid, &[0.0, 2.0, 10.0, 30.0], &tight()).unwrap();
        for snap in &traj.snapshots {
            assert!(c_dev(&laplace_c(&p, snap.time), &snap.c) < 1e-6);
            for (n, &w) in grid.nodes().iter().enumerate() {
                let tb = transfer_B(&p, w).unwrap();
                for k in 0..3 {
                    for j in 0..2 {
                        let v = invert_rational(&tb[k][j], snap.time);
                        assert!((v - snap.btilde[n][k][j]).norm() < 1e-6, "theta {theta}, t {}, k {k}", snap.time);
                    }
                }
            }
        }
    }
}

#[test]
fn steady_amplitudes_agree_between_residue_and_closed_form() {
    for theta in [0.2, FRAC_PI_4, 1.2, FRAC_PI_2] {
        let p = fig1a(theta);
        for w in [0.3, 0.9, 1.0, 1.3, 2.5] {
            let cf = steady_state_B(&p, w).unwrap();
            let fast = LaplaceSystem::new(&p).unwrap().steady_amplitudes(w).unwrap();
            // Relative to the amplitude scale, which reaches ~10³ at small θ.
            let scale = 1.0 + cf.iter().flatten().map(|z| z.norm()).fold(0.0, f64::max);
            assert!(amp_dev(&cf, &fast) < 1e-10 * scale, "theta {theta}, omega {w}");
            let tb = transfer_B(&p, w).unwrap();
            for k in 0..3 {
                for j in 0..2 {
                    let r = steady_state_from_residue(&tb[k][j], w).unwrap();
                    assert!((r - cf[k][j]).norm() < 1e-10 * scale, "theta {theta}, omega {w}, k {k}, j {j}");
                }
            }
        }
    }
}

#[test]
fn c_transfers_have_no_driving_pole() {
    let p = fig1a(FRAC_PI_4);
    for row in transfer_C(&p).unwrap() {
        for rt in row {
            assert_eq!(steady_state_from_residue(&rt, 1.3).unwrap(), Complex64::new(0.0, 0.0));
        }
    }
}

#[test]
fn steady_state_b_is_long_time_limit_of_propagator() {
    let w = 1.3;
    let grid = FrequencyGrid::from_nodes(0.0, 3.0, vec![w], vec![1.0]).unwrap();
    for theta in [FRAC_PI_6, FRAC_PI_4] {
        let p = fig1a(theta);
        let rate = ClosedForm::new(&p).unwrap().slow_decay_rate();
        let t = 40.0 / rate;
        let traj = evolve_coefficients(&p, &grid, &[0.0, t], &tight()).unwrap();
        let phase = Complex64::new(0.0, w * t).exp();
        let ss = steady_state_B(&p, w).unwrap();
        let mut numeric = traj.snapshots[1].btilde[0];
        for a in numeric.iter_mut() {
            for x in a.iter_mut() {
                *x *= phase;
            }
        }
        assert!(amp_dev(&numeric, &ss) < 1e-4, "theta {theta}");
    }
}

#[test]
fn asymmetric_steady_amplitude_is_long_time_limit() {
    let p = ModelParams {
        omega1: 1.25,
        omega2: 0.75,
        ..fig1a(FRAC_PI_4)
    };
    let w = 1.1;
    let grid = FrequencyGrid::from_nodes(0.0, 3.0, vec![w], vec![1.0]).unwrap();
    let t = 200.0 / p.width;
    let traj = evolve_coefficients(&p, &grid, &[0.0, t], &tight()).unwrap();
    let phase = Complex64::new(0.0, w * t).exp();
    let tb = transfer_B(&p, w).unwrap();
    for k in 0..3 {
        for j in 0..2 {
            let r = steady_state_from_residue(&tb[k][j], w).unwrap();
            assert!((traj.snapshots[1].btilde[0][k][j] * phase - r).norm() < 1e-4);
        }
    }
}

#[test]
fn characteristic_roots_set_the_observed_decay() {
    // Fit log|A(t)| of the symmetric combination at θ = 0. Both roots
    // share a real part here, so the fit spans whole beat periods.
    let p = fig1a(0.0);
    let (sym, _) = ClosedForm::new(&p).unwrap().roots();
    assert!((sym.lambda1.re - sym.lambda2.re).abs() < 1e-12);
    let rate = -sym.lambda1.re;
    let beat = 2.0 * std::f64::consts::PI / (sym.lambda1.im - sym.lambda2.im).abs();
    let (t1, t2) = (20.0, 20.0 + 5.0 * beat);
    let traj = evolve_system(&p, &[0.0, t1, t2], &tight()).unwrap();
    let amp = |n: usize| {
        let c = traj.snapshots[n].c;
        (c[0][0] + c[0][1]).norm()
    };
    let fit = -(amp(2).ln() - amp(1).ln()) / (t2 - t1);
    assert!((fit - rate).abs() < 1e-6, "fit {fit} vs {rate}");
}
