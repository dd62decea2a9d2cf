//! Brute-force reference: the three reservoirs replaced by N discrete modes
//! each, and the one-particle Hamiltonian exponentiated exactly.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use super::{ChannelAmplitudes, CoefficientSet};
use crate::error::{domain, Result};
use crate::grid::FrequencyGrid;
use crate::model::{coupling_weights, spectral_density, ModelParams};

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

/// Discretized bath with its diagonalized one-particle Hamiltonian.
///
/// Index layout: 0 and 1 are the oscillators, then N modes of the common
/// reservoir, N of reservoir 1 and N of reservoir 2.
#[derive(Debug, Clone)]
pub struct DiscreteBath {
    grid: FrequencyGrid,
    /// g_α = sqrt(J(ω_α)Δω)
    couplings: Vec<f64>,
    /// (cos²θ, sin²θ)
    channel_scale: [f64; 3],
    hamiltonian: DMatrix<f64>,
    eigenvalues: DVector<f64>,
    eigenvectors: DMatrix<f64>,
}

impl DiscreteBath {
    pub fn new(p: &ModelParams, modes_per_bath: usize, span: (f64, f64)) -> Result<Self> {
        p.validate()?;
        if modes_per_bath < 2 {
            return Err(domain("the discrete bath needs at least two modes per reservoir"));
        }
        let grid = FrequencyGrid::midpoint(span.0, span.1, modes_per_bath)?;
        let (wc, wi) = coupling_weights(p.theta)?;
        let n = modes_per_bath;
        let dim = 2 + 3 * n;
        let couplings: Vec<f64> = grid
            .iter()
            .map(|(w, dw)| (spectral_density(w, p) * dw).sqrt())
            .collect();
        let mut h = DMatrix::<f64>::zeros(dim, dim);
        h[(0, 0)] = p.omega1;
        h[(1, 1)] = p.omega2;
        for (a, (&w, &g)) in grid.nodes().iter().zip(&couplings).enumerate() {
            let (b0, b1, b2) = (2 + a, 2 + n + a, 2 + 2 * n + a);
            for b in [b0, b1, b2] {
                h[(b, b)] = w;
            }
            // Common reservoir couples to c1 + c2, private ones to c1 and c2.
            h[(0, b0)] = wc * g;
            h[(1, b0)] = wc * g;
            h[(0, b1)] = wi * g;
            h[(1, b2)] = wi * g;
            h[(b0, 0)] = wc * g;
            h[(b0, 1)] = wc * g;
            h[(b1, 0)] = wi * g;
            h[(b2, 1)] = wi * g;
        }
        assert!(
            (&h - h.transpose()).amax() == 0.0,
            "discrete-bath Hamiltonian must be symmetric"
        );
        let eig = SymmetricEigen::new(h.clone());
        Ok(Self {
            grid,
            couplings,
            channel_scale: [wc, wi, wi],
            hamiltonian: h,
            eigenvalues: eig.eigenvalues,
            eigenvectors: eig.eigenvectors,
        })
    }

    pub fn grid(&self) -> &FrequencyGrid {
        &self.grid
    }

    pub fn hamiltonian(&self) -> &DMatrix<f64> {
        &self.hamiltonian
    }

    pub fn dimension(&self) -> usize {
        self.hamiltonian.nrows()
    }

    /// Rows 0 and 1 of U(t) = exp(−iht).
    pub fn system_rows(&self, t: f64) -> [Vec<Complex64>; 2] {
        let dim = self.dimension();
        let v = &self.eigenvectors;
        let phases: Vec<Complex64> = self
            .eigenvalues
            .iter()
            .map(|l| Complex64::new(0.0, -l * t).exp())
            .collect();
        let mut rows = [vec![ZERO; dim], vec![ZERO; dim]];
        for (j, row) in rows.iter_mut().enumerate() {
            for m in 0..dim {
                let coeff = v[(j, m)] * phases[m];
                if coeff == ZERO {
                    continue;
                }
                for (col, r) in row.iter_mut().enumerate() {
                    *r += coeff * v[(col, m)];
                }
            }
        }
        rows
    }

    /// Full U(t) = V·diag(e^{−iλt})·Vᵀ.
    pub fn propagator(&self, t: f64) -> DMatrix<Complex64> {
        let dim = self.dimension();
        let v = self.eigenvectors.map(|x| Complex64::new(x, 0.0));
        let mut scaled = v.clone();
        for m in 0..dim {
            let ph = Complex64::new(0.0, -self.eigenvalues[m] * t).exp();
            for r in 0..dim {
                scaled[(r, m)] *= ph;
            }
        }
        scaled * v.transpose()
    }

    /// C_i^j = U_{j,i}; B̃_k^j(ω_α) = U_{j,(k,α)}/g_{kα} (zero for uncoupled
    /// channels), sampled on the oracle's own midpoint grid.
    pub fn coefficient_set(&self, t: f64) -> CoefficientSet {
        let n = self.grid.len();
        let rows = self.system_rows(t);
        let mut c = [[ZERO; 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                c[i][j] = rows[j][i];
            }
        }
        let btilde: Vec<ChannelAmplitudes> = (0..n)
            .map(|a| {
                let mut amp = [[ZERO; 2]; 3];
                for k in 0..3 {
                    let g = self.channel_scale[k] * self.couplings[a];
                    if g == 0.0 {
                        continue;
                    }
                    for j in 0..2 {
                        amp[k][j] = rows[j][2 + k * n + a] / g;
                    }
                }
                amp
            })
            .collect();
        CoefficientSet { time: t, c, btilde }
    }
}

/// U(t) = exp(−iht) for the discretized model with `modes_per_bath` modes per
/// reservoir spread uniformly over `span`.
pub fn discrete_bath_oracle(
    p: &ModelParams,
    modes_per_bath: usize,
    span: (f64, f64),
    t: f64,
) -> Result<DMatrix<Complex64>> {
    Ok(DiscreteBath::new(p, modes_per_bath, span)?.propagator(t))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn decoupled_bath_is_diagonal_phases() {
        let p = ModelParams::symmetric(1.0, 0.4, 0.0, 0.1, 1.0, 1.0);
        let u = discrete_bath_oracle(&p, 5, (0.5, 1.5), 2.0).unwrap();
        let bath = DiscreteBath::new(&p, 5, (0.5, 1.5)).unwrap();
        let h = bath.hamiltonian();
        for r in 0..u.nrows() {
            for c in 0..u.ncols() {
                let want = if r == c { Complex64::new(0.0, -2.0 * h[(r, r)]).exp() } else { ZERO };
                assert!((u[(r, c)] - want).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn propagator_is_unitary() {
        let p = ModelParams::symmetric(1.0, 0.6, 1.0, 0.1, 1.0, 1.0);
        let u = discrete_bath_oracle(&p, 20, (0.0, 2.0), 3.7).unwrap();
        let err = (u.adjoint() * &u - DMatrix::<Complex64>::identity(u.nrows(), u.ncols())).camax();
        assert!(err < 1e-12, "unitarity error {err}");
    }

    #[test]
    fn system_rows_match_full_propagator() {
        let p = ModelParams { omega2: 1.2, ..ModelParams::symmetric(1.0, 0.6, 1.0, 0.1, 1.0, 1.0) };
        let bath = DiscreteBath::new(&p, 10, (0.0, 2.0)).unwrap();
        let u = bath.propagator(1.3);
        let rows = bath.system_rows(1.3);
        for j in 0..2 {
            for c in 0..u.ncols() {
                assert!((rows[j][c] - u[(j, c)]).norm() < 1e-13);
            }
        }
    }
}
