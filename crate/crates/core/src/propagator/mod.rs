//! Time evolution of the expansion coefficients
//! c_j(t) = Σ_i C_i^j(t) c_i(0) + Σ_{k,α} B_{kα}^j(t) b_{kα}(0).
//!
//! The memory integrals ∫_0^t f(t−τ)x(τ)dτ of the exponential kernel obey
//! ż = −(γ+iω0)z + (Γγ/2)x, so the integro-differential equations become a
//! linear ODE system integrated with an adaptive Runge–Kutta pair. Bath
//! coefficients are stored per unit coupling, B̃_k^j(ω) = B_{kα}^j/g_{kα},
//! and channels whose coupling weight vanishes carry zero amplitude.

mod oracle;
mod volterra;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::grid::{Feature, FrequencyGrid};
use crate::laplace::LaplaceSystem;
use crate::model::{spectral_density, KernelWeights, ModelParams};
use crate::ode::{self, OdeOptions, OdeStats};

pub use oracle::{discrete_bath_oracle, DiscreteBath};
pub use volterra::volterra_reference;

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };
const ONE: Complex64 = Complex64 { re: 1.0, im: 0.0 };

/// B̃_k^j at one frequency, indexed `[k][j]` with k = 0 the common channel
/// and j = 0, 1 the two oscillators.
pub type ChannelAmplitudes = [[Complex64; 2]; 3];

/// Which oscillators each channel drives, per unit coupling.
pub(crate) const CHANNEL_TARGETS: [[f64; 2]; 3] = [[1.0, 1.0], [1.0, 0.0], [0.0, 1.0]];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoefficientSet {
    pub time: f64,
    /// `c[i][j]` = C_i^j(t).
    pub c: [[Complex64; 2]; 2],
    /// One entry per grid node.
    pub btilde: Vec<ChannelAmplitudes>,
}

impl CoefficientSet {
    /// C = identity, B̃ = 0.
    pub fn initial(nodes: usize) -> Self {
        Self {
            time: 0.0,
            c: [[ONE, ZERO], [ZERO, ONE]],
            btilde: vec![[[ZERO; 2]; 3]; nodes],
        }
    }
}

/// Memory accumulators z_x(t) = ∫_0^t f(t−τ)x(τ)dτ for a pair (x¹, x²).
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct AuxiliaryState {
    pub z: [Complex64; 2],
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SolverTag {
    Propagator,
    Volterra,
    ClosedForm,
    Laplace,
    DiscreteBath,
}

impl SolverTag {
    pub fn as_str(&self) -> &'static str {
        match self {
            SolverTag::Propagator => "propagator",
            SolverTag::Volterra => "volterra",
            SolverTag::ClosedForm => "closedform",
            SolverTag::Laplace => "laplace",
            SolverTag::DiscreteBath => "discrete-bath",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverControls {
    pub rel_tol: f64,
    pub abs_tol: f64,
}

impl Default for SolverControls {
    fn default() -> Self {
        Self {
            rel_tol: 1e-10,
            abs_tol: 1e-12,
        }
    }
}

impl SolverControls {
    fn ode_options(&self) -> OdeOptions {
        OdeOptions {
            rel_tol: self.rel_tol,
            abs_tol: self.abs_tol,
            ..OdeOptions::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub snapshots: Vec<CoefficientSet>,
    pub solver: SolverTag,
    /// Tolerances for adaptive solvers, or `None` for fixed-step ones.
    pub controls: Option<SolverControls>,
    /// Fixed step for the history-integral reference.
    pub step: Option<f64>,
    #[serde(skip)]
    pub stats: OdeStats,
}

impl Trajectory {
    pub fn times(&self) -> Vec<f64> {
        self.snapshots.iter().map(|s| s.time).collect()
    }
}

/// Right-hand side for one pair (x¹, x²) with memories (z¹, z²), laid out
/// as [x¹, x², z¹, z²], optionally driven by −i·targets·e^{−iωt}.
#[derive(Clone, Copy)]
struct PairSystem {
    omega: [f64; 2],
    weights: KernelWeights,
    amplitude: f64,
    rate: Complex64,
}

impl PairSystem {
    fn new(p: &ModelParams) -> Self {
        Self {
            omega: [p.omega1, p.omega2],
            weights: p.kernel_weights(),
            amplitude: p.kernel_amplitude(),
            rate: p.memory_rate(),
        }
    }

    #[inline]
    fn eval(&self, y: &[Complex64], dy: &mut [Complex64], drive: [Complex64; 2]) {
        let (x1, x2, z1, z2) = (y[0], y[1], y[2], y[3]);
        let common = self.weights.collective * (z1 + z2);
        dy[0] = Complex64::new(x1.im * self.omega[0], -x1.re * self.omega[0]) - self.weights.individual * z1 - common + drive[0];
        dy[1] = Complex64::new(x2.im * self.omega[1], -x2.re * self.omega[1]) - self.weights.individual * z2 - common + drive[1];
        dy[2] = self.amplitude * x1 - self.rate * z1;
        dy[3] = self.amplitude * x2 - self.rate * z2;
    }
}

fn check_times(times: &[f64]) -> Result<()> {
    if times.first() != Some(&0.0) {
        return Err(domain("output times must start at 0"));
    }
    if times.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(domain("output times must be strictly increasing"));
    }
    Ok(())
}

/// Evolves C only (no bath coefficients).
pub fn evolve_system(p: &ModelParams, times: &[f64], controls: &SolverControls) -> Result<Trajectory> {
    p.validate()?;
    check_times(times)?;
    let (c, stats) = evolve_c(p, times, controls)?;
    Ok(Trajectory {
        snapshots: times
            .iter()
            .zip(c)
            .map(|(&t, c)| CoefficientSet { time: t, c, btilde: vec![] })
            .collect(),
        solver: SolverTag::Propagator,
        controls: Some(*controls),
        step: None,
        stats,
    })
}

fn evolve_c(p: &ModelParams, times: &[f64], controls: &SolverControls) -> Result<(Vec<[[Complex64; 2]; 2]>, OdeStats)> {
    let sys = PairSystem::new(p);
    let mut y0 = vec![ZERO; 8];
    y0[0] = ONE;
    y0[5] = ONE;
    let mut out = Vec::with_capacity(times.len());
    let stats = ode::integrate(
        |_, y, dy| {
            sys.eval(&y[0..4], &mut dy[0..4], [ZERO; 2]);
            sys.eval(&y[4..8], &mut dy[4..8], [ZERO; 2]);
        },
        &y0,
        times,
        &controls.ode_options(),
        |_, y| out.push([[y[0], y[1]], [y[4], y[5]]]),
    )?;
    Ok((out, stats))
}

/// Evolves B̃ at one frequency for all coupled channels.
fn evolve_node(
    sys: &PairSystem,
    omega: f64,
    times: &[f64],
    opts: &OdeOptions,
) -> Result<(Vec<ChannelAmplitudes>, OdeStats)> {
    let active: Vec<usize> = (0..3).filter(|&k| sys.weights.channel(k) > 0.0).collect();
    let mut out = Vec::with_capacity(times.len());
    if active.is_empty() {
        return Ok((vec![[[ZERO; 2]; 3]; times.len()], OdeStats::default()));
    }
    let y0 = vec![ZERO; 4 * active.len()];
    let stats = ode::integrate(
        |t, y, dy| {
            let (s, c) = (omega * t).sin_cos();
            // −i·e^{−iωt} = −sin(ωt) − i·cos(ωt)
            let phase = Complex64::new(-s, -c);
            for (n, &k) in active.iter().enumerate() {
                let tg = CHANNEL_TARGETS[k];
                sys.eval(&y[4 * n..4 * n + 4], &mut dy[4 * n..4 * n + 4], [phase * tg[0], phase * tg[1]]);
            }
        },
        &y0,
        times,
        opts,
        |_, y| {
            let mut amp = [[ZERO; 2]; 3];
            for (n, &k) in active.iter().enumerate() {
                amp[k] = [y[4 * n], y[4 * n + 1]];
            }
            out.push(amp);
        },
    )?;
    Ok((out, stats))
}

/// C_i^j(t) and B̃_k^j(ω, t) on `grid` at each of `times` (starting at 0).
pub fn evolve_coefficients(
    p: &ModelParams,
    grid: &FrequencyGrid,
    times: &[f64],
    controls: &SolverControls,
) -> Result<Trajectory> {
    p.validate()?;
    check_times(times)?;
    if grid.is_empty() {
        return Err(domain("evolve_coefficients needs a non-empty frequency grid"));
    }
    let (c, mut stats) = evolve_c(p, times, controls)?;
    let sys = PairSystem::new(p);
    let opts = controls.ode_options();
    let per_node: Vec<(Vec<ChannelAmplitudes>, OdeStats)> = grid
        .nodes()
        .par_iter()
        .map(|&w| evolve_node(&sys, w, times, &opts))
        .collect::<Result<_>>()?;
    for (_, s) in &per_node {
        stats.merge(s);
    }
    let snapshots = times
        .iter()
        .enumerate()
        .map(|(n, &t)| CoefficientSet {
            time: t,
            c: c[n],
            btilde: per_node.iter().map(|(amps, _)| amps[n]).collect(),
        })
        .collect();
    Ok(Trajectory {
        snapshots,
        solver: SolverTag::Propagator,
        controls: Some(*controls),
        step: None,
        stats,
    })
}

/// |1 − Σ_i|C_i^j|² − Σ_k w_k ∫dω J(ω)|B̃_k^j(ω)|²| for j = 1, 2.
pub fn unitarity_defect(cs: &CoefficientSet, p: &ModelParams, grid: &FrequencyGrid) -> Result<[f64; 2]> {
    if cs.btilde.len() != grid.len() {
        return Err(domain(format!(
            "coefficient set has {} frequency samples but the grid has {} nodes",
            cs.btilde.len(),
            grid.len()
        )));
    }
    let w = p.kernel_weights();
    let mut out = [0.0; 2];
    for (j, o) in out.iter_mut().enumerate() {
        let system: f64 = (0..2).map(|i| cs.c[i][j].norm_sqr()).sum();
        let bath: f64 = grid
            .iter()
            .zip(&cs.btilde)
            .map(|((omega, wt), amp)| {
                wt * spectral_density(omega, p) * (0..3).map(|k| w.channel(k) * amp[k][j].norm_sqr()).sum::<f64>()
            })
            .sum();
        *o = (1.0 - system - bath).abs();
    }
    Ok(out)
}

/// Default propagation grid: composite Gauss–Legendre panels graded toward
/// the spectral center and the system's characteristic frequencies, over
/// a window of 25·max(γ, Γ, frequency spread) around them, and toward
/// `omega_min`, where a panel edge is forced so thermal sums start there.
pub fn default_grid(p: &ModelParams, omega_min: f64, points: usize) -> Result<FrequencyGrid> {
    p.validate()?;
    let sys = LaplaceSystem::new(p)?;
    let floor = 1e-4 * p.width.max(p.coupling);
    // The thermal integrand grows like T/ω above omega_min, so the grid is
    // log-graded from there as well.
    let mut features = vec![
        Feature {
            center: p.omega0,
            scale: p.width,
        },
        Feature {
            center: omega_min,
            scale: omega_min,
        },
    ];
    for s in sys.poles() {
        features.push(Feature {
            center: -s.im,
            scale: s.re.abs().max(floor),
        });
    }
    let centers = [p.omega0, p.omega1, p.omega2];
    let cmin = centers.iter().cloned().fold(f64::INFINITY, f64::min);
    let cmax = centers.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let half = 25.0 * p.width.max(p.coupling).max(cmax - cmin);
    let panels = (points / crate::grid::PANEL_POINTS).max(2);
    FrequencyGrid::graded(cmin - half, cmax + half, &features, &[omega_min], panels)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

    fn fig1a(theta: f64) -> ModelParams {
        ModelParams::symmetric(1.0, theta, 1.0, 0.1, 1.0, 1.0)
    }

    #[test]
    fn starts_from_identity() {
        let p = fig1a(FRAC_PI_4);
        let grid = FrequencyGrid::uniform(0.0, 2.0, 2).unwrap();
        let tr = evolve_coefficients(&p, &grid, &[0.0, 1.0], &SolverControls::default()).unwrap();
        assert_eq!(tr.snapshots[0], CoefficientSet::initial(grid.len()));
        assert_eq!(unitarity_defect(&tr.snapshots[0], &p, &grid).unwrap(), [0.0, 0.0]);
    }

    #[test]
    fn free_evolution_without_coupling() {
        let p = ModelParams { coupling: 0.0, ..fig1a(0.3) };
        let grid = FrequencyGrid::uniform(0.0, 2.0, 2).unwrap();
        let times = [0.0, 1.0, 7.5];
        let tr = evolve_coefficients(&p, &grid, &times, &SolverControls::default()).unwrap();
        for s in &tr.snapshots {
            let e = Complex64::new(0.0, -s.time).exp();
            assert!((s.c[0][0] - e).norm() < 1e-9);
            assert_eq!(s.c[0][1], ZERO);
            assert!(unitarity_defect(s, &p, &grid).unwrap().iter().all(|d| *d < 1e-9));
        }
        // B̃ responds to its drive, but with Γ = 0 it carries no weight.
        let b = &tr.snapshots[2].btilde;
        assert!(b.iter().any(|a| a[0][0].norm() > 0.0));
    }

    #[test]
    fn fully_individual_has_no_cross_coefficient() {
        let tr = evolve_system(&fig1a(FRAC_PI_2), &[0.0, 3.0, 9.0], &SolverControls::default()).unwrap();
        assert!(tr.snapshots.iter().all(|s| s.c[0][1] == ZERO && s.c[1][0] == ZERO));
    }

    #[test]
    fn rejects_empty_grid_and_bad_times() {
        let p = fig1a(0.3);
        let empty = FrequencyGrid::from_nodes(0.0, 1.0, vec![], vec![]).unwrap();
        assert!(evolve_coefficients(&p, &empty, &[0.0, 1.0], &SolverControls::default()).is_err());
        let grid = FrequencyGrid::uniform(0.0, 2.0, 1).unwrap();
        assert!(evolve_coefficients(&p, &grid, &[0.5, 1.0], &SolverControls::default()).is_err());
    }
}
