//! Frequency grids that discretize the reservoir continuum.
//!
//! Grids are composite 8-point Gauss–Legendre rules. Panel edges can be
//! graded toward spectral features so that narrow resonances and the Bose
//! growth near the infrared cutoff are resolved with a modest node budget.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};

pub(crate) const GL8_NODES: [f64; 4] = [
    0.183_434_642_495_649_8,
    0.525_532_409_916_329,
    0.796_666_477_413_626_7,
    0.960_289_856_497_536_3,
];
pub(crate) const GL8_WEIGHTS: [f64; 4] = [
    0.362_683_783_378_362,
    0.313_706_645_877_887_3,
    0.222_381_034_453_374_5,
    0.101_228_536_290_376_3,
];

/// Nodes per Gauss–Legendre panel.
pub const PANEL_POINTS: usize = 8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrequencyGrid {
    omega_min: f64,
    omega_max: f64,
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

/// A spectral feature the grid should resolve: nodes concentrate within a few
/// `scale` of `center`, with panel density falling off like 1/|ω − center|.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Feature {
    pub center: f64,
    pub scale: f64,
}

impl FrequencyGrid {
    /// Grid from explicit nodes and weights on [omega_min, omega_max].
    pub fn from_nodes(omega_min: f64, omega_max: f64, nodes: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        if !(omega_min < omega_max) || !omega_min.is_finite() || !omega_max.is_finite() {
            return Err(domain(format!("invalid grid bounds [{omega_min}, {omega_max}]")));
        }
        if nodes.len() != weights.len() {
            return Err(domain("grid nodes and weights differ in length"));
        }
        if nodes.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(domain("grid nodes must be strictly increasing"));
        }
        if weights.iter().any(|w| !(*w >= 0.0)) {
            return Err(domain("grid weights must be non-negative"));
        }
        if let (Some(first), Some(last)) = (nodes.first(), nodes.last()) {
            if *first < omega_min || *last > omega_max {
                return Err(domain("grid nodes fall outside the grid bounds"));
            }
        }
        Ok(Self {
            omega_min,
            omega_max,
            nodes,
            weights,
        })
    }

    /// Composite Gauss–Legendre rule on the panels delimited by `edges`.
    pub fn from_panel_edges(edges: &[f64]) -> Result<Self> {
        if edges.len() < 2 {
            return Err(domain("a grid needs at least one panel"));
        }
        if edges.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(domain("panel edges must be strictly increasing"));
        }
        let mut nodes = Vec::with_capacity(PANEL_POINTS * (edges.len() - 1));
        let mut weights = Vec::with_capacity(nodes.capacity());
        for w in edges.windows(2) {
            let (mid, half) = (0.5 * (w[0] + w[1]), 0.5 * (w[1] - w[0]));
            for (x, wt) in GL8_NODES.iter().rev().zip(GL8_WEIGHTS.iter().rev()) {
                nodes.push(mid - half * x);
                weights.push(half * wt);
            }
            for (x, wt) in GL8_NODES.iter().zip(GL8_WEIGHTS.iter()) {
                nodes.push(mid + half * x);
                weights.push(half * wt);
            }
        }
        Self::from_nodes(edges[0], edges[edges.len() - 1], nodes, weights)
    }

    /// Equal-width panels.
    pub fn uniform(lo: f64, hi: f64, panels: usize) -> Result<Self> {
        if panels == 0 || !(lo < hi) {
            return Err(domain(format!("invalid uniform grid [{lo}, {hi}] with {panels} panels")));
        }
        let edges: Vec<f64> = (0..=panels).map(|i| lo + (hi - lo) * i as f64 / panels as f64).collect();
        Self::from_panel_edges(&edges)
    }

    /// Midpoint rule with `n` equal cells (the discretization of a finite bath).
    pub fn midpoint(lo: f64, hi: f64, n: usize) -> Result<Self> {
        if n == 0 || !(lo < hi) {
            return Err(domain(format!("invalid midpoint grid [{lo}, {hi}] with {n} cells")));
        }
        let dw = (hi - lo) / n as f64;
        let nodes = (0..n).map(|i| lo + (i as f64 + 0.5) * dw).collect();
        Self::from_nodes(lo, hi, nodes, vec![dw; n])
    }

    /// Panels graded toward `features`, with panel edges forced at every
    /// point of `breaks` inside (lo, hi). Uses `panels` panels in total.
    pub fn graded(lo: f64, hi: f64, features: &[Feature], breaks: &[f64], panels: usize) -> Result<Self> {
        if !(lo < hi) {
            return Err(domain(format!("invalid grid bounds [{lo}, {hi}]")));
        }
        if features.iter().any(|f| !(f.scale > 0.0) || !f.center.is_finite()) {
            return Err(domain("grid features need finite centers and positive scales"));
        }
        let mut cuts: Vec<f64> = vec![lo];
        let mut inner: Vec<f64> = breaks.iter().copied().filter(|b| *b > lo && *b < hi).collect();
        inner.sort_by(f64::total_cmp);
        inner.dedup();
        cuts.extend(inner);
        cuts.push(hi);
        if panels < cuts.len() - 1 {
            return Err(domain(format!(
                "{panels} panels cannot cover {} forced sub-intervals",
                cuts.len() - 1
            )));
        }

        let phi = |w: f64| -> f64 {
            features
                .iter()
                .map(|f| {
                    let d = w - f.center;
                    d.signum() * (d.abs() / f.scale).ln_1p()
                })
                .sum::<f64>()
                // A weak uniform component keeps the map strictly increasing
                // even when no feature is supplied.
                + (w - lo) / (hi - lo)
        };

        let spans: Vec<f64> = cuts.windows(2).map(|w| phi(w[1]) - phi(w[0])).collect();
        let counts = apportion(&spans, panels);

        let mut edges = vec![lo];
        for (w, &n) in cuts.windows(2).zip(&counts) {
            let (a, b) = (w[0], w[1]);
            let (pa, pb) = (phi(a), phi(b));
            for i in 1..n {
                let target = pa + (pb - pa) * i as f64 / n as f64;
                edges.push(invert_monotone(&phi, target, a, b));
            }
            edges.push(b);
        }
        edges.dedup_by(|x, y| !(*x > *y));
        Self::from_panel_edges(&edges)
    }

    pub fn omega_min(&self) -> f64 {
        self.omega_min
    }

    pub fn omega_max(&self) -> f64 {
        self.omega_max
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.nodes.iter().copied().zip(self.weights.iter().copied())
    }

    /// Σ w_i f(ω_i).
    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.iter().map(|(w, wt)| wt * f(w)).sum()
    }
}

/// Split `total` items proportionally to `spans` (largest remainder), at least
/// one per span.
fn apportion(spans: &[f64], total: usize) -> Vec<usize> {
    let n = spans.len();
    let free = total - n;
    let sum: f64 = spans.iter().sum();
    let ideal: Vec<f64> = spans.iter().map(|s| free as f64 * s / sum).collect();
    let mut counts: Vec<usize> = ideal.iter().map(|x| x.floor() as usize).collect();
    let mut left = free - counts.iter().sum::<usize>();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| (ideal[b] - ideal[b].floor()).total_cmp(&(ideal[a] - ideal[a].floor())));
    for &i in order.iter().cycle() {
        if left == 0 {
            break;
        }
        counts[i] += 1;
        left -= 1;
    }
    counts.iter().map(|c| c + 1).collect()
}

fn invert_monotone(f: &impl Fn(f64) -> f64, target: f64, mut a: f64, mut b: f64) -> f64 {
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            break;
        }
        if f(m) < target {
            a = m;
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_constants_integrate_polynomials() {
        // An 8-point rule is exact through degree 15.
        for deg in 0..=15 {
            let g = FrequencyGrid::uniform(-1.0, 1.0, 1).unwrap();
            let got = g.integrate(|x| x.powi(deg));
            let want = if deg % 2 == 1 { 0.0 } else { 2.0 / (deg as f64 + 1.0) };
            assert!((got - want).abs() < 1e-15, "degree {deg}: {got} vs {want}");
        }
    }

    #[test]
    fn weights_sum_to_length() {
        let features = [Feature { center: 1.0, scale: 0.01 }, Feature { center: 1.3, scale: 0.05 }];
        let g = FrequencyGrid::graded(-20.0, 22.0, &features, &[1e-6, 1.0], 256).unwrap();
        assert_eq!(g.len(), 256 * PANEL_POINTS);
        let sum: f64 = g.weights().iter().sum();
        assert!((sum - 42.0).abs() < 1e-12 * 42.0);
        assert!(g.nodes().windows(2).all(|w| w[0] < w[1]));
        // Forced breakpoints are panel edges, so no node sits exactly on them
        // and nodes concentrate near the features.
        let near = g.nodes().iter().filter(|w| (**w - 1.0).abs() < 0.1).count();
        assert!(near > 200, "only {near} nodes near the feature");
    }

    #[test]
    fn graded_grid_integrates_lorentzian() {
        let s = 1e-3;
        let g = FrequencyGrid::graded(-50.0, 50.0, &[Feature { center: 0.3, scale: s }], &[], 120).unwrap();
        let got = g.integrate(|w| s / std::f64::consts::PI / ((w - 0.3).powi(2) + s * s));
        let want = ((50.0f64 - 0.3) / s).atan() / std::f64::consts::PI + ((50.0f64 + 0.3) / s).atan() / std::f64::consts::PI;
        assert!((got - want).abs() < 1e-10, "{got} vs {want}");
    }

    #[test]
    fn rejects_bad_input() {
        assert!(FrequencyGrid::from_nodes(0.0, 1.0, vec![0.5, 0.2], vec![0.5, 0.5]).is_err());
        assert!(FrequencyGrid::from_nodes(0.0, 1.0, vec![0.2, 0.5], vec![0.5, -0.5]).is_err());
        assert!(FrequencyGrid::uniform(1.0, 1.0, 3).is_err());
        assert!(FrequencyGrid::midpoint(0.0, 1.0, 0).is_err());
    }
}
