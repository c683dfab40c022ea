use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("closed form requires an ohmic bath (s = 1), got s = {0}")]
    NonOhmic(f64),

    #[error("distance r = {r} is below the finite-distance threshold {threshold}")]
    BelowThreshold { r: f64, threshold: f64 },

    #[error("quadrature failed to converge: {0}")]
    Quadrature(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("register too large for exact summation: n = {n} exceeds {max}")]
    TooLarge { n: usize, max: usize },

    #[error("matrix is indefinite: smallest eigenvalue {min_eigenvalue} below tolerance {tolerance}")]
    Indefinite { min_eigenvalue: f64, tolerance: f64 },

    #[error("1 + K is singular: eigenvalue {0} of K is not above -1")]
    Singular(f64),

    #[error("no crossover found in [{lo}, {hi}]")]
    NoCrossing { lo: f64, hi: f64 },

    #[error("ODE integration failed at t = {t}: {reason}")]
    Integration { t: f64, reason: String },

    #[error("density matrix lost positivity at t = {t}: eigenvalue {eigenvalue}")]
    Positivity { t: f64, eigenvalue: f64 },

    #[error("fit window holds {got} samples, need at least {need}")]
    WindowTooShort { got: usize, need: usize },

    #[error("invalid parameter: {0}")]
    Invalid(String),
}
