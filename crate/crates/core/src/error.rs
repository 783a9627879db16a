use thiserror::Error;

/// Errors raised by the fractional-calculus kernels, the FBM generator and the solver.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("fractional order {0} is outside (0, 1)")]
    InvalidOrder(f64),

    #[error("fractional order {alpha} is outside the admissible window ({lo}, {hi})")]
    OrderOutOfRange { alpha: f64, lo: f64, hi: f64 },

    #[error("Hurst parameter {0} is outside the admissible range")]
    InvalidHurst(f64),

    #[error("grid needs at least 2 cells, got {0}")]
    GridTooSmall(usize),

    #[error("invalid interval [{a}, {b}]")]
    InvalidInterval { a: f64, b: f64 },

    #[error("non-finite value at node {0}")]
    NonFiniteNode(usize),

    #[error("non-finite value at time node {t_index}, spatial node {xi_index}")]
    NonFiniteField { t_index: usize, xi_index: usize },

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("subinterval [{c}, {d}] is not aligned to grid nodes")]
    Misaligned { c: f64, d: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("matrix is not positive definite (pivot {0})")]
    NotPositiveDefinite(usize),

    #[error(
        "Picard iteration did not converge in window {window} after {iterations} iterations \
         (residual {residual:e})"
    )]
    NonConvergence {
        window: usize,
        iterations: usize,
        residual: f64,
        history: Vec<f64>,
    },
}

pub type Result<T> = std::result::Result<T, Error>;
