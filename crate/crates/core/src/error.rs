use thiserror::Error;

/// Error type shared by every module in the crate.
#[derive(Debug, Error)]
pub enum Error {
    /// A constructor or operation received an argument outside its domain.
    #[error("invalid parameter `{name}`: {message}")]
    InvalidParameter { name: &'static str, message: String },

    /// The potential has no harmonic double well for these couplings
    /// (requires t > 0 and t_prime < 4t).
    #[error("no harmonic well for t = {t}, t_prime = {t_prime} (requires t > 0 and t_prime < 4t)")]
    NoHarmonicWell { t: f64, t_prime: f64 },

    /// A charge grid did not satisfy an operation's precondition.
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    /// An iterative numerical routine exhausted its budget.
    #[error("numerical failure at index {index}: {message}")]
    NumericalFailure { index: usize, message: String },

    /// Command-line or configuration error.
    #[error("usage: {0}")]
    Usage(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Stable machine-readable tag, used by the CLI error line.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidParameter { .. } => "invalid_parameter",
            Error::NoHarmonicWell { .. } => "no_harmonic_well",
            Error::InvalidGrid(_) => "invalid_grid",
            Error::NumericalFailure { .. } => "numerical_failure",
            Error::Usage(_) => "usage",
            Error::Io(_) => "io",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
