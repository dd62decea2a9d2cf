//! Acceptance criteria. Prints one PASS/FAIL line per criterion and exits
//! nonzero when any of them fails.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, FRAC_PI_8};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use num_complex::Complex64;
use oscbath::{figure_preset, run_family, Axis, ResultTable, PRESETS};
use oscbath_core::closedform::{analytic_coefficients, limit_markovian_sstc, limit_narrowband_sstc};
use oscbath_core::laplace::{invert_rational, transfer_B, transfer_C};
use oscbath_core::observables::{steady_state_record, steady_thermal, SpectralOptions};
use oscbath_core::propagator::{default_grid, evolve_coefficients, unitarity_defect, DiscreteBath, SolverControls};
use oscbath_core::{spectral_density, FrequencyGrid, InitialMoments, ModelParams};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const ORACLE_MODES: usize = 400;
const ORACLE_TOL: f64 = 1e-3;
const ORACLE_BUDGET: Duration = Duration::from_secs(60);
const TRIANGLE_POINTS: usize = 20;
const TRIANGLE_SEED: u64 = 20_240_601;
const TRIANGLE_TOL: f64 = 1e-8;
const TRIANGLE_BUDGET: Duration = Duration::from_secs(60);
const UNITARITY_TOL: f64 = 1e-3;
const UNITARITY_GRID_POINTS: usize = 1024;
const MARKOV_RATIO: f64 = 1e3;
const MARKOV_TOL: f64 = 0.05;
const MARKOV_BUDGET: Duration = Duration::from_secs(120);
const NARROW_RATIO: f64 = 1e-4;
const NARROW_TOL: f64 = 0.10;
const VACUUM_TOL: f64 = 1e-9;
const KAPPA_SPREAD_TOL: f64 = 1e-6;
/// A sweep value counts as zero below this magnitude.
const ZERO_TOL: f64 = 1e-9;
/// Largest |SSTC| accepted as "→ 0" at γ/Γ = 1e−8 in fig2.
const FIG2_ZERO_TOL: f64 = 1e-6;
/// |SSTC| at the largest Γ of fig3 relative to the sweep maximum.
const FIG3_TAIL_FRACTION: f64 = 0.05;
/// Relative change across the last fifth of the fig5 detuning axis.
const PLATEAU_TOL: f64 = 0.01;
const SWEEP_BUDGET: Duration = Duration::from_secs(300);
const JY_TOL: f64 = 1e-6;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn rel(value: f64, target: f64) -> f64 {
    (value - target).abs() / target.abs()
}

fn fig1a(theta: f64) -> ModelParams {
    ModelParams::symmetric(1.0, theta, 1.0, 0.1, 1.0, 1.0)
}

fn fig1b(theta: f64) -> ModelParams {
    ModelParams::symmetric(1.0, theta, 1.0, 10.0, 1.0, 1.0)
}

fn sstc(p: &ModelParams) -> f64 {
    steady_thermal(p, &SpectralOptions::default()).expect("steady thermal integral").0.values[0]
}

fn oracle() -> Outcome {
    let start = Instant::now();
    let gamma = 0.1;
    let mut worst: f64 = 0.0;
    for theta in [0.0, FRAC_PI_8, FRAC_PI_4] {
        let p = fig1a(theta);
        let bath = DiscreteBath::new(&p, ORACLE_MODES, (p.omega0 - 40.0 * gamma, p.omega0 + 40.0 * gamma)).unwrap();
        let times: Vec<f64> = (0..=20).map(|n| n as f64 * 0.5 / gamma).collect();
        let traj = evolve_coefficients(&p, bath.grid(), &times, &SolverControls::default()).unwrap();
        let w = p.kernel_weights();
        for snap in &traj.snapshots {
            let exact = bath.coefficient_set(snap.time);
            for i in 0..2 {
                for j in 0..2 {
                    worst = worst.max((exact.c[i][j] - snap.c[i][j]).norm());
                }
            }
            for (n, (omega, dw)) in bath.grid().iter().enumerate() {
                let g = (spectral_density(omega, &p) * dw).sqrt();
                for k in 0..3 {
                    let gk = g * w.channel(k).sqrt();
                    for j in 0..2 {
                        worst = worst.max(gk * (exact.btilde[n][k][j] - snap.btilde[n][k][j]).norm());
                    }
                }
            }
        }
    }
    let elapsed = start.elapsed();
    outcome(
        worst <= ORACLE_TOL && elapsed < ORACLE_BUDGET,
        format!("max deviation {worst:.2e} (tol {ORACLE_TOL:e}), {:.1} s", elapsed.as_secs_f64()),
    )
}

fn triangle() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(TRIANGLE_SEED);
    let controls = SolverControls {
        rel_tol: 1e-12,
        abs_tol: 1e-14,
    };
    let times = [0.0, 1.0, 5.0, 20.0];
    let mut worst: f64 = 0.0;
    for _ in 0..TRIANGLE_POINTS {
        let p = ModelParams::symmetric(
            rng.gen_range(0.3..3.0),
            rng.gen_range(0.0..FRAC_PI_2),
            rng.gen_range(0.05..3.0),
            rng.gen_range(0.05..5.0),
            rng.gen_range(0.3..3.0),
            1.0,
        );
        let mut nodes: Vec<f64> = (0..6).map(|_| rng.gen_range(0.1..4.0)).collect();
        nodes.sort_by(f64::total_cmp);
        let grid = FrequencyGrid::from_nodes(0.0, 4.0, nodes, vec![1.0; 6]).unwrap();
        let traj = evolve_coefficients(&p, &grid, &times, &controls).unwrap();
        let tc = transfer_C(&p).unwrap();
        let tb: Vec<_> = grid.nodes().iter().map(|&w| transfer_B(&p, w).unwrap()).collect();
        for snap in &traj.snapshots {
            let t = snap.time;
            let cf = analytic_coefficients(&p, &grid, t).unwrap();
            let mut dev = |a: Complex64, b: Complex64, c: Complex64| {
                worst = worst.max((a - b).norm()).max((b - c).norm()).max((a - c).norm());
            };
            for i in 0..2 {
                for j in 0..2 {
                    dev(cf.c[i][j], invert_rational(&tc[i][j], t), snap.c[i][j]);
                }
            }
            for n in 0..grid.len() {
                for k in 0..3 {
                    for j in 0..2 {
                        dev(cf.btilde[n][k][j], invert_rational(&tb[n][k][j], t), snap.btilde[n][k][j]);
                    }
                }
            }
        }
    }
    let elapsed = start.elapsed();
    outcome(
        worst <= TRIANGLE_TOL && elapsed < TRIANGLE_BUDGET,
        format!("max pairwise deviation {worst:.2e} (tol {TRIANGLE_TOL:e}), {:.1} s", elapsed.as_secs_f64()),
    )
}

fn unitarity() -> Outcome {
    let mut worst: f64 = 0.0;
    for (name, make) in [("fig1a", fig1a as fn(f64) -> ModelParams), ("fig1b", fig1b)] {
        for theta in [0.0, FRAC_PI_8, FRAC_PI_4, 3.0 * FRAC_PI_8, FRAC_PI_2] {
            let p = make(theta);
            let t_max = 20.0 / p.width.min(p.omega1);
            let omega_min = SpectralOptions::default().bounds(&p).0;
            let grid = default_grid(&p, omega_min, UNITARITY_GRID_POINTS).unwrap();
            let times: Vec<f64> = (0..=40).map(|n| n as f64 * t_max / 40.0).collect();
            let traj = evolve_coefficients(&p, &grid, &times, &SolverControls::default()).unwrap();
            for snap in &traj.snapshots {
                let d = unitarity_defect(snap, &p, &grid).unwrap();
                let m = d[0].abs().max(d[1].abs());
                if m > worst {
                    worst = m;
                    if m > UNITARITY_TOL {
                        eprintln!("  unitarity {name} theta {theta:.4} t {}: {m:.2e}", snap.time);
                    }
                }
            }
        }
    }
    outcome(worst < UNITARITY_TOL, format!("max defect {worst:.2e} (tol {UNITARITY_TOL:e})"))
}

fn markovian() -> Outcome {
    let start = Instant::now();
    let mut pass = true;
    let mut parts = Vec::new();
    for theta in [0.0, FRAC_PI_8, FRAC_PI_4, 3.0 * FRAC_PI_8] {
        let p = ModelParams::symmetric(1.0, theta, 1.0 / MARKOV_RATIO, 1.0, 1.0, 1.0);
        let value = sstc(&p);
        let formula = limit_markovian_sstc(&p);
        let ok = rel(value, formula) <= MARKOV_TOL;
        pass &= ok;
        parts.push(format!("theta {theta:.4}: {value:.4e} vs {formula:.4e}{}", if ok { "" } else { " (off)" }));
    }
    let elapsed = start.elapsed();
    pass &= elapsed < MARKOV_BUDGET;
    outcome(pass, format!("{}; {:.1} s", parts.join("; "), elapsed.as_secs_f64()))
}

fn narrow_band() -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for theta in [0.0, FRAC_PI_4] {
        let p = ModelParams::symmetric(1.0, theta, 1.0, NARROW_RATIO, 1.0, 1.0);
        let value = sstc(&p);
        let formula = limit_narrowband_sstc(&p);
        let ok = rel(value, formula) <= NARROW_TOL;
        pass &= ok;
        parts.push(format!("theta {theta:.4}: {value:.4e} vs {formula:.4e}{}", if ok { "" } else { " (off)" }));
        let p0 = ModelParams { width: 0.0, ..p };
        let (zv, zf) = (sstc(&p0), limit_narrowband_sstc(&p0));
        let ok0 = zv == 0.0 && zf == 0.0;
        pass &= ok0;
        parts.push(format!("theta {theta:.4} at gamma 0: {zv:e}, {zf:e}"));
    }
    outcome(pass, parts.join("; "))
}

fn initial_state() -> Outcome {
    let opts = SpectralOptions::default();
    let vac = |theta: f64, kappa: f64| {
        steady_state_record(&fig1a(theta), &InitialMoments::from_kappa(kappa), &opts)
            .unwrap()
            .jx_vacuum
    };
    let (a, b) = (vac(0.0, -FRAC_PI_4), vac(0.0, FRAC_PI_4));
    let jx: Vec<f64> = [-FRAC_PI_4, 0.0, FRAC_PI_4]
        .iter()
        .map(|&k| steady_state_record(&fig1a(FRAC_PI_8), &InitialMoments::from_kappa(k), &opts).unwrap().jx)
        .collect();
    let spread = jx.iter().cloned().fold(f64::MIN, f64::max) - jx.iter().cloned().fold(f64::MAX, f64::min);
    outcome(
        (a + 1.0).abs() <= VACUUM_TOL && b.abs() <= VACUUM_TOL && spread < KAPPA_SPREAD_TOL,
        format!("theta 0 vacuum {a:.12} (kappa -pi/4), {b:.3e} (kappa pi/4); theta pi/8 spread {spread:.2e}"),
    )
}

/// Preset tables and the wall time of each preset.
struct Sweeps {
    tables: Vec<(&'static str, Vec<ResultTable>, Duration)>,
}

impl Sweeps {
    fn run() -> Self {
        let tables = PRESETS
            .iter()
            .map(|&name| {
                let start = Instant::now();
                let t = run_family(&figure_preset(name).unwrap()).unwrap();
                (name, t, start.elapsed())
            })
            .collect();
        Self { tables }
    }

    fn get(&self, name: &str) -> &[ResultTable] {
        &self.tables.iter().find(|(n, _, _)| *n == name).unwrap().1
    }
}

fn series(t: &ResultTable, f: impl Fn(&oscbath_core::observables::ObservableRecord) -> f64) -> Vec<(f64, f64)> {
    assert_eq!(t.failures(), 0, "theta {}: failed points", t.spec.base.theta);
    t.records().map(|(x, r)| (x, f(r))).collect()
}

fn sign_changes(v: &[f64]) -> usize {
    let signs: Vec<f64> = v.iter().filter(|x| x.abs() > ZERO_TOL).map(|x| x.signum()).collect();
    signs.windows(2).filter(|w| w[0] != w[1]).count()
}

fn fig1a_shape(t: &ResultTable) -> (bool, String) {
    let s = series(t, |r| r.jx_thermal);
    let v: Vec<f64> = s.iter().map(|p| p.1).collect();
    let n = v.len();
    let end = v[n - 1];
    // Interior minimum at (or through) zero followed by growth.
    let (k, &min) = v[..n - 1].iter().enumerate().min_by(|a, b| a.1.total_cmp(b.1)).unwrap();
    let interior_zero = k > 0 && min <= ZERO_TOL && k < n - 2;
    let rises_after = interior_zero && v[k + 1..n - 1].iter().any(|&x| x > min + ZERO_TOL);
    let zeros = v[1..n - 1].iter().filter(|x| x.abs() <= ZERO_TOL).count() + sign_changes(&v[1..n - 1]);
    let ok = end.abs() <= ZERO_TOL && interior_zero && rises_after && zeros == 1;
    (
        ok,
        format!(
            "fig1a: end {end:.2e}, interior minimum {min:.3e} at theta/(pi/2) {:.2}, interior zeros {zeros}",
            s[k].0 / FRAC_PI_2
        ),
    )
}

fn fig1b_shape(t: &ResultTable) -> (bool, String) {
    let v: Vec<f64> = series(t, |r| r.jx_thermal).iter().map(|p| p.1).collect();
    let n = v.len();
    let changes = sign_changes(&v[..n - 1]);
    let ends_negative = v[n - 2] < -ZERO_TOL;
    (
        changes == 1 && ends_negative,
        format!("fig1b: sign changes {changes}, value before theta = pi/2 {:.3e}", v[n - 2]),
    )
}

fn fig2_shape(tables: &[ResultTable]) -> (bool, String) {
    let mut ok = true;
    let mut parts = Vec::new();
    for t in tables {
        let s = series(t, |r| r.jx_thermal);
        let target = 1e-8 * t.spec.base.coupling;
        let &(x, v) = s.iter().min_by(|a, b| (a.0.ln() - target.ln()).abs().total_cmp(&(b.0.ln() - target.ln()).abs())).unwrap();
        let here = v.abs() <= FIG2_ZERO_TOL;
        ok &= here;
        parts.push(format!("theta {:.4} at gamma/Gamma {:.1e}: {v:.3e}", t.spec.base.theta, x / t.spec.base.coupling));
    }
    (ok, format!("fig2: {}", parts.join(", ")))
}

fn fig3_shape(name: &str, tables: &[ResultTable]) -> (bool, String) {
    let mut ok = true;
    let mut parts = Vec::new();
    for t in tables {
        let v: Vec<f64> = series(t, |r| r.jx_thermal).iter().map(|p| p.1.abs()).collect();
        let n = v.len();
        let peak = v.iter().cloned().fold(0.0, f64::max);
        // The last decade of a 101-point log axis over six decades.
        let tail = &v[n - 1 - (n - 1) / 6..];
        let decreasing = tail.windows(2).all(|w| w[1] <= w[0]);
        let here = v[n - 1] <= FIG3_TAIL_FRACTION * peak && decreasing;
        ok &= here;
        parts.push(format!("theta {:.4}: |SSTC| {:.3e} of peak {peak:.3e}{}", t.spec.base.theta, v[n - 1], if decreasing { "" } else { " (still growing)" }));
    }
    (ok, format!("{name}: {}", parts.join(", ")))
}

fn fig5_shape(tables: &[ResultTable]) -> (bool, String) {
    let mut ok = true;
    let mut parts = Vec::new();
    for t in tables {
        for (label, pick) in [("Jx", 0), ("Jz", 1)] {
            let v: Vec<f64> = series(t, |r| if pick == 0 { r.jx.abs() } else { r.jz.abs() }).iter().map(|p| p.1).collect();
            let n = v.len();
            let a = v[n - 1 - (n - 1) / 5];
            let b = v[n - 1];
            let change = (b - a).abs() / b.abs().max(f64::MIN_POSITIVE);
            ok &= change < PLATEAU_TOL;
            parts.push(format!("theta {:.4} {label} change {change:.2e}", t.spec.base.theta));
        }
    }
    (ok, format!("fig5: {}", parts.join(", ")))
}

fn figure_shapes(s: &Sweeps) -> Outcome {
    let checks = [
        fig1a_shape(&s.get("fig1a")[0]),
        fig1b_shape(&s.get("fig1b")[0]),
        fig2_shape(s.get("fig2")),
        fig3_shape("fig3a", s.get("fig3a")),
        fig3_shape("fig3b", s.get("fig3b")),
        fig5_shape(s.get("fig5")),
    ];
    let mut pass = checks.iter().all(|c| c.0);
    for c in &checks {
        println!("    {} {}", if c.0 { "ok  " } else { "FAIL" }, c.1);
    }
    let slowest = s.tables.iter().map(|t| t.2).max().unwrap();
    pass &= s.tables.iter().all(|t| t.2 < SWEEP_BUDGET);
    outcome(pass, format!("slowest preset {:.2} s", slowest.as_secs_f64()))
}

fn steady_jy(s: &Sweeps) -> Outcome {
    let mut worst: f64 = 0.0;
    let mut checked = 0;
    for (_, tables, _) in &s.tables {
        for t in tables {
            for row in &t.rows {
                let p = t.spec.point(row.axis, t.spec.base.theta);
                if p.omega1 != p.omega2 {
                    continue;
                }
                let r = row.record.as_ref().unwrap();
                worst = worst.max(r.jy.abs());
                checked += 1;
            }
        }
    }
    outcome(worst < JY_TOL, format!("max |Jy| {worst:.2e} over {checked} points"))
}

fn quadrature(s: &Sweeps) -> Outcome {
    let mut violations = 0;
    let mut worst_ratio: f64 = 0.0;
    let mut checked = 0;
    for (name, tables, _) in &s.tables {
        for t in tables {
            let base = t.spec.numerics.spectral_options();
            let m = InitialMoments::from_kappa(t.spec.kappa);
            for row in &t.rows {
                let r = row.record.as_ref().unwrap();
                let p = t.spec.point(row.axis, t.spec.base.theta);
                let refined = SpectralOptions {
                    omega_min: Some(0.5 * base.bounds(&p).0),
                    initial_panels: 2 * base.initial_panels,
                    ..base
                };
                let r2 = steady_state_record(&p, &m, &refined).unwrap();
                let change = (r2.jx_thermal - r.jx_thermal).abs();
                let allowed = r.quad_err + r.omega_min_sensitivity.abs();
                checked += 1;
                if allowed > 0.0 {
                    worst_ratio = worst_ratio.max(change / allowed);
                }
                if change > allowed {
                    violations += 1;
                    if violations <= 5 {
                        eprintln!("  quadrature {name} theta {:.4} axis {}: change {change:.2e} > {allowed:.2e}", t.spec.base.theta, row.axis);
                    }
                }
            }
        }
    }
    outcome(
        violations == 0,
        format!("{violations} of {checked} points exceed quad_err + omega_min sensitivity; worst change/allowance {worst_ratio:.2e}"),
    )
}

fn main() -> ExitCode {
    let mut failed = 0;
    let mut report = |n: usize, name: &str, o: Outcome| {
        println!("{} criterion {n} ({name}): {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
        failed += usize::from(!o.pass);
    };
    report(1, "oracle equivalence", oracle());
    report(2, "cross-solver triangle", triangle());
    report(3, "unitarity", unitarity());
    report(4, "Markovian limit", markovian());
    report(5, "narrow-band limit", narrow_band());
    report(6, "initial-state dependence", initial_state());
    let sweeps = Sweeps::run();
    assert!(sweeps.tables.iter().any(|t| t.1[0].spec.axis == Axis::Delta));
    report(7, "figure shapes", figure_shapes(&sweeps));
    report(8, "steady-state Jy", steady_jy(&sweeps));
    report(9, "quadrature robustness", quadrature(&sweeps));
    println!("{failed} of 9 criteria failed");
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
