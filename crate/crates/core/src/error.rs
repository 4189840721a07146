use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    Grid(String),

    #[error("non-finite value {value} at grid index {index} ({i}, {j}, {k})")]
    NonFinite {
        index: usize,
        i: usize,
        j: usize,
        k: usize,
        value: f64,
    },

    #[error("grid mismatch: expected {expected} points per axis, found {found}")]
    GridMismatch { expected: usize, found: usize },

    #[error("parameter error: {0}")]
    Parameter(String),

    #[error("fluid potential is not timelike at grid index {index}: (d_t Phi)^2 - |grad Phi|^2 = {value} <= 0")]
    NotTimelike { index: usize, value: f64 },

    #[error("breakdown at t = {t}: min(u) = {u_min}, so 1 + u leaves the domain of the fractional power")]
    Breakdown { t: f64, u_min: f64 },

    #[error("non-finite state after step {step} (t = {t})")]
    NanDetected { step: usize, t: f64 },

    #[error("time series mismatch: {0}")]
    Series(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("constants file: {0}")]
    Constants(String),
}

pub type Result<T> = std::result::Result<T, Error>;
