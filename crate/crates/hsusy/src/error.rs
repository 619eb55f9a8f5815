//! Crate-wide error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("gamma pole: x = {x} is within 1e-12 of a non-positive integer")]
    GammaPole { x: f64 },

    #[error("gamma-ratio numerator argument {arg} hits a pole")]
    GammaNumeratorPole { arg: f64 },

    #[error("1F1({a}, {b}; {z}): b is a non-positive integer")]
    KummerBadB { a: f64, b: f64, z: f64 },

    #[error("1F1({a}, {b}; {z}) did not converge within {terms} terms")]
    SeriesNonConvergence { a: f64, b: f64, z: f64, terms: usize },

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("operands live on different grids")]
    GridMismatch,

    #[error("non-finite samples in {context} (first at x = {x})")]
    NonFiniteSamples { context: &'static str, x: f64 },

    #[error("operator is not symmetric tridiagonal: {0}")]
    NotTridiagonal(String),

    #[error("eigensolver did not converge for eigenvalue index {index} after {iterations} inverse iterations")]
    EigenConvergence { index: usize, iterations: usize },

    #[error("invalid factorization config: {0}")]
    InvalidConfig(String),

    #[error("singular superpotential at eps = {epsilon}, nu = {nu}: u changes sign near x = {x}")]
    SingularSuperpotential { epsilon: f64, nu: f64, x: f64 },

    #[error("singular chain at level {level}, target energy index {target}: {reason} near x = {x}")]
    SingularChain {
        level: usize,
        target: usize,
        x: f64,
        reason: &'static str,
    },

    #[error("degenerate factorization energies {e1} and {e2}")]
    DegenerateEnergies { e1: f64, e2: f64 },

    #[error("oscillator index {n} outside supported range 0..={max}")]
    OscillatorIndexRange { n: usize, max: usize },

    #[error("ladder projection of state {from} has overlap {overlap} with expected neighbor {to} (need >= 0.999)")]
    OverlapFailure { from: usize, to: usize, overlap: f64 },

    #[error("basis does not cover state index {index}")]
    BasisIndexRange { index: usize },

    #[error("duplicate root {value} in ladder-structure analysis")]
    DuplicateRoot { value: f64 },

    #[error("empty operator composition")]
    EmptyComposition,
}

impl Error {
    /// Process exit code the batch front end maps this error to:
    /// 2 for inadmissible configurations, 3 for numerical failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::SingularSuperpotential { .. }
            | Error::SingularChain { .. }
            | Error::DegenerateEnergies { .. }
            | Error::InvalidConfig(_)
            | Error::InvalidGrid(_) => 2,
            _ => 3,
        }
    }
}
