use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("non-finite parameter `{name}` = {value}")]
    NonFinite { name: &'static str, value: f64 },

    #[error("negative argument `{name}` = {value}")]
    Negative { name: &'static str, value: f64 },

    #[error("no convergence after {iterations} iterations (last value {last}, residual {residual:e})")]
    NoConvergence {
        iterations: usize,
        last: f64,
        residual: f64,
    },

    #[error("matrix is not Hermitian (max deviation {0:e})")]
    NotHermitian(f64),

    #[error("too many spins: {0} (dense spin Hamiltonians support at most 12)")]
    TooManySpins(usize),

    #[error("Hilbert space dimension {0} exceeds the cap of {1}")]
    DimensionOverflow(usize, usize),

    #[error("pole of the resolvent at ε = {0}")]
    Pole(f64),

    #[error("exponential integral is singular at z = 0")]
    SingularArgument,

    #[error("wavepacket: {0}")]
    Wavepacket(String),
}

pub(crate) fn ensure_finite(name: &'static str, value: f64) -> Result<f64> {
    if value.is_finite() {
        Ok(value)
    } else {
        Err(Error::NonFinite { name, value })
    }
}
