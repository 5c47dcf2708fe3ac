use num_complex::Complex64;
use thiserror::Error;

/// Errors raised by model evaluation, root finding, quadrature and the
/// verification harnesses.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("characteristic function vanishes near s = {at} (|chi| = {modulus:e}); closed-loop pole estimate")]
    Singularity { at: Complex64, modulus: f64 },

    #[error("log-sensitivity branch point near s = {at}{}", nearest.map(|p| format!(" (nearest known zero of S: {p})")).unwrap_or_default())]
    BranchPoint {
        at: Complex64,
        nearest: Option<Complex64>,
    },

    #[error("root finder did not converge after {iterations} iterations; best iterates {best:?}")]
    NonConvergence {
        iterations: usize,
        best: Vec<Complex64>,
    },

    #[error("zero of the characteristic function on the search boundary (min |chi| = {min_modulus:e}); perturb the rectangle")]
    BoundaryZero { min_modulus: f64 },

    #[error("zero refinement failed: {0}")]
    Refinement(String),

    #[error("tail diverges: q = {q} must exceed 1")]
    TailDivergence { q: f64 },

    #[error("phase tracking failed on segment: step of {step} rad after maximal refinement")]
    BranchTracking { step: f64 },

    #[error("corridor collision: poles {a} and {b} have corridors closer than the corridor width")]
    CorridorCollision { a: Complex64, b: Complex64 },

    #[error("contour geometry: {0}")]
    Geometry(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("quadrature failed: {0}")]
    Quadrature(String),

    #[error("I/O error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
