use thiserror::Error;

use crate::model::Manifold;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("complex erf overflows at z = {re} + {im}i")]
    ErfOverflow { re: f64, im: f64 },

    #[error("quadrature did not converge after {intervals} subintervals (error estimate {estimate:e})")]
    QuadratureNonConvergence { intervals: usize, estimate: f64 },

    #[error("vibrational level {level} exceeds the basis cap {cap}")]
    LevelCap { level: usize, cap: usize },

    #[error("pulse action expects the {expected} manifold but the state is in {found}")]
    ManifoldMismatch { expected: Manifold, found: Manifold },

    #[error("pathway is invalid: {0}")]
    InvalidPathway(String),

    #[error("bra and ket projections differ: {bra} vs {ket}")]
    ProjectionMismatch { bra: String, ket: String },

    #[error("free evolution of the one-exciton manifold needs a diagonalised exciton Hamiltonian")]
    MissingExcitonPropagator,

    #[error("degenerate anisotropy denominator {value:e} (floor {floor:e})")]
    DegenerateDenominator { value: f64, floor: f64 },

    #[error("at sigma_pump = {sigma_pump}, sigma_probe = {sigma_probe}: {source}")]
    AtSweepPoint { sigma_pump: f64, sigma_probe: f64, source: Box<Error> },
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter { name, reason: reason.into() }
    }
}
