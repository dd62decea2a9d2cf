//! Direct discretization of the history integrals: trapezoidal memory
//! quadrature with explicit midpoint time stepping. Second order in dt and
//! O(N²) in the number of steps; used only as an independent reference.

use num_complex::Complex64;

use super::{ChannelAmplitudes, CoefficientSet, SolverTag, Trajectory, CHANNEL_TARGETS};
use crate::error::{domain, Error, Result};
use crate::grid::FrequencyGrid;
use crate::model::{KernelWeights, ModelParams};
use crate::ode::OdeStats;

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

type Pair = [Complex64; 2];

struct Stepper<'a> {
    omega: [f64; 2],
    weights: KernelWeights,
    dt: f64,
    /// f(m·dt), m = 0..=steps
    kernel: &'a [Complex64],
    /// f(m·dt + dt/2), m = 0..steps
    kernel_half: &'a [Complex64],
}

impl Stepper<'_> {
    fn rhs(&self, x: Pair, memory: Pair, drive: Pair) -> Pair {
        let common = self.weights.collective * (memory[0] + memory[1]);
        let mut out = [ZERO; 2];
        for j in 0..2 {
            out[j] = Complex64::new(0.0, -self.omega[j]) * x[j] - self.weights.individual * memory[j] - common + drive[j];
        }
        out
    }

    /// Trapezoidal ∫_0^{t_n} f(t_n − τ)x(τ)dτ over the stored history.
    fn memory_at_node(&self, history: &[Pair]) -> Pair {
        let n = history.len() - 1;
        let mut acc = [ZERO; 2];
        for (m, x) in history.iter().enumerate() {
            let wt = if m == 0 || m == n { 0.5 } else { 1.0 };
            let f = self.kernel[n - m];
            for j in 0..2 {
                acc[j] += wt * f * x[j];
            }
        }
        if n == 0 {
            return [ZERO; 2];
        }
        [acc[0] * self.dt, acc[1] * self.dt]
    }

    /// ∫_0^{t_n + dt/2} f(t − τ)x(τ)dτ: trapezoid on [0, t_n] plus a half
    /// cell ending at the midpoint value.
    fn memory_at_mid(&self, history: &[Pair], x_mid: Pair) -> Pair {
        let n = history.len() - 1;
        let mut acc = [ZERO; 2];
        if n > 0 {
            for (m, x) in history.iter().enumerate() {
                let wt = if m == 0 || m == n { 0.5 } else { 1.0 };
                let f = self.kernel_half[n - m];
                for j in 0..2 {
                    acc[j] += wt * f * x[j];
                }
            }
            for a in acc.iter_mut() {
                *a *= self.dt;
            }
        }
        let h = 0.5 * self.dt;
        for j in 0..2 {
            acc[j] += 0.5 * h * (self.kernel_half[0] * history[n][j] + self.kernel[0] * x_mid[j]);
        }
        acc
    }

    fn run(&self, x0: Pair, steps: usize, drive: impl Fn(f64) -> Pair) -> Vec<Pair> {
        let mut history = Vec::with_capacity(steps + 1);
        history.push(x0);
        for n in 0..steps {
            let t = n as f64 * self.dt;
            let xn = history[n];
            let k1 = self.rhs(xn, self.memory_at_node(&history), drive(t));
            let h = 0.5 * self.dt;
            let x_mid = [xn[0] + h * k1[0], xn[1] + h * k1[1]];
            let k2 = self.rhs(x_mid, self.memory_at_mid(&history, x_mid), drive(t + h));
            history.push([xn[0] + self.dt * k2[0], xn[1] + self.dt * k2[1]]);
        }
        history
    }
}

/// History-integral solution on the uniform time lattice 0, dt, …, ≥ t_end.
/// Snapshots are returned at every lattice point.
pub fn volterra_reference(p: &ModelParams, grid: &FrequencyGrid, t_end: f64, dt: f64) -> Result<Trajectory> {
    p.validate()?;
    if !(dt > 0.0) || !(t_end >= dt) {
        return Err(domain(format!("need dt > 0 and t_end >= dt (dt = {dt}, t_end = {t_end})")));
    }
    let stiffness = dt * (p.width + p.omega0.abs() + p.omega1.abs().max(p.omega2.abs()));
    if stiffness > 0.5 {
        return Err(Error::Refused(format!(
            "dt*(gamma + |omega0| + |omega1|) = {stiffness:.3} exceeds 0.5; reduce dt"
        )));
    }
    let steps = (t_end / dt - 1e-9).ceil() as usize;
    let kernel: Vec<Complex64> = (0..=steps)
        .map(|m| p.kernel_amplitude() * (-p.memory_rate() * (m as f64 * dt)).exp())
        .collect();
    let kernel_half: Vec<Complex64> = (0..=steps)
        .map(|m| p.kernel_amplitude() * (-p.memory_rate() * ((m as f64 + 0.5) * dt)).exp())
        .collect();
    let st = Stepper {
        omega: [p.omega1, p.omega2],
        weights: p.kernel_weights(),
        dt,
        kernel: &kernel,
        kernel_half: &kernel_half,
    };

    let one = Complex64::new(1.0, 0.0);
    let c_rows: Vec<Vec<Pair>> = [[one, ZERO], [ZERO, one]]
        .iter()
        .map(|x0| st.run(*x0, steps, |_| [ZERO; 2]))
        .collect();

    let weights = p.kernel_weights();
    let nodes: Vec<Vec<ChannelAmplitudes>> = grid
        .nodes()
        .iter()
        .map(|&omega| {
            let mut per_time = vec![[[ZERO; 2]; 3]; steps + 1];
            for k in 0..3 {
                if weights.channel(k) == 0.0 {
                    continue;
                }
                let tg = CHANNEL_TARGETS[k];
                let series = st.run([ZERO; 2], steps, |t| {
                    let ph = Complex64::new(0.0, -1.0) * Complex64::new(0.0, -omega * t).exp();
                    [ph * tg[0], ph * tg[1]]
                });
                for (n, x) in series.into_iter().enumerate() {
                    per_time[n][k] = x;
                }
            }
            per_time
        })
        .collect();

    let snapshots = (0..=steps)
        .map(|n| CoefficientSet {
            time: n as f64 * dt,
            c: [c_rows[0][n], c_rows[1][n]],
            btilde: nodes.iter().map(|v| v[n]).collect(),
        })
        .collect();
    Ok(Trajectory {
        snapshots,
        solver: SolverTag::Volterra,
        controls: None,
        step: Some(dt),
        stats: OdeStats::default(),
    })
}
