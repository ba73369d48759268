//! Error type shared by every solver in the crate.

use thiserror::Error;

/// Everything that can go wrong while setting up or running a solve.
///
/// Gate violations (positivity, flux compatibility, monotonicity) are kept
/// separate from non-convergence so callers can map them to distinct exit
/// codes.
#[derive(Debug, Error)]
pub enum SolverError {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("boundary data is not periodic: {0}")]
    NonPeriodicData(String),

    #[error("modal radial system for mode {mode} is numerically singular (pivot {pivot:e})")]
    SingularMode { mode: usize, pivot: f64 },

    #[error("boundary flux mismatch: int f0 - int f1 = {defect:e} exceeds tolerance {tol:e}")]
    FluxMismatch { defect: f64, tol: f64 },

    #[error("through-flow is not positive at theta = {theta}: value {value}")]
    NonPositiveThroughflow { theta: f64, value: f64 },

    #[error("diffeomorphism is not orientation preserving at theta = {theta}: T' = {slope}")]
    NonMonotoneDiffeo { theta: f64, slope: f64 },

    #[error("radial through-flow changed sign during characteristic integration at r = {r}")]
    ThroughflowSignChange { r: f64 },

    #[error("iteration did not converge after {iterations} steps (last update {last_update:e})")]
    NoConvergence { iterations: usize, last_update: f64 },

    #[error("acceleration field is not curl-free: |curl G| = {defect:e} exceeds {tol:e}")]
    CurlDefect { defect: f64, tol: f64 },

    #[error("periodic seam mismatch in path integral: {gap:e} exceeds {tol:e}")]
    SeamMismatch { gap: f64, tol: f64 },

    #[error("pressure compatibility mismatch: gap = {gap:e}")]
    CompatibilityMismatch { gap: f64 },

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, SolverError>;
