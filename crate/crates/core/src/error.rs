use thiserror::Error;

/// Errors produced by model assembly, steady-state solves, and spectral
/// decompositions.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("operator is not Hermitian: max |H - H†| = {deviation:.3e}")]
    NonHermitian { deviation: f64 },

    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("superoperator would hold {entries} dense entries, above the cap of {cap}")]
    DimensionCap { entries: usize, cap: usize },

    #[error(
        "null space of the Liouvillian is degenerate (σ_min = {sigma_min:.3e}, \
         σ_next = {sigma_next:.3e}); multiple steady states"
    )]
    NullSpaceDegenerate { sigma_min: f64, sigma_next: f64 },

    #[error("iterative steady-state solve did not converge (residual {residual:.3e})")]
    NoConvergence { residual: f64 },

    #[error("steady state violates positivity: min eigenvalue {min_eigenvalue:.3e}")]
    NotPositive { min_eigenvalue: f64 },

    #[error("eigenbasis defective near an exceptional point (condition estimate {condition:.3e})")]
    DefectiveNearEp { condition: f64 },

    #[error("spectral grid too narrow: {0}")]
    GridTooNarrow(String),

    #[error("time-domain integration failed: {0}")]
    Integration(String),

    #[error("linear algebra backend: {0}")]
    Backend(#[from] ndarray_linalg::error::LinalgError),
}

pub type Result<T> = std::result::Result<T, Error>;
