use num_complex::Complex64;
use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, Error)]
pub enum Error {
    /// An input outside its mathematical domain.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("unsupported parameter regime: {0}")]
    Unsupported(String),

    #[error("step size underflow at t = {t:.6e} (h = {h:.3e}); the system is too stiff for the explicit integrator at this tolerance")]
    Stiffness { t: f64, h: f64 },

    #[error("resonant drive: particular-solution denominator {0:.3e} is numerically zero")]
    Resonance(f64),

    #[error("near-singular steady state: {0}")]
    NearSingular(String),

    #[error("no decaying steady state: pole {0} does not lie in the open left half-plane")]
    NoSteadyState(Complex64),

    #[error("quadrature did not converge: error estimate {estimate:.3e} exceeds tolerance {tolerance:.3e} (partial value {partial:?})")]
    Accuracy {
        estimate: f64,
        tolerance: f64,
        partial: Vec<f64>,
    },

    #[error("refusing to run: {0}")]
    Refused(String),

    #[error("evaluation at a singular point: {0}")]
    Singular(String),
}

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}
