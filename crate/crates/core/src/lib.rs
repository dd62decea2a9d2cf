//! Exact open-system dynamics of two harmonic oscillators coupled to one
//! common and two private Lorentzian bosonic reservoirs.
//!
//! The crate offers several independent routes to the same quantities:
//! direct integration of the coefficient equations ([`propagator`]), the
//! symmetric-case closed forms ([`closedform`]), Laplace-domain residues
//! ([`laplace`]) and a brute-force discretized bath. [`observables`] turns
//! coefficients into coherence values, split into vacuum and thermal parts.

pub mod closedform;
pub mod error;
pub mod grid;
pub mod laplace;
pub mod model;
pub mod observables;
pub mod ode;
pub mod poly;
pub mod propagator;
pub mod quadrature;

pub use error::{Error, Result};
pub use grid::{Feature, FrequencyGrid};
pub use model::{
    bose_occupation, correlation_kernel, coupling_weights, initial_moments_from_kappa, spectral_density, InitialMoments,
    KernelWeights, ModelParams,
};
