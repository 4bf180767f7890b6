use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Failure classes surfaced by the library.
///
/// The split mirrors how callers react: `Config` means the request itself is
/// malformed, `Domain` means the physics has no answer for the request
/// (no sign change, degenerate detuning, bracket too narrow) and `Numerical`
/// means an algorithm did not meet its own accuracy contract.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    Config(String),

    #[error("{0}")]
    Domain(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("operator is not Hermitian: max |M - M^H| = {asymmetry:e}")]
    NotHermitian { asymmetry: f64 },

    #[error("total Hilbert-space dimension {total} exceeds cap {cap}")]
    DimensionCap { total: usize, cap: usize },

    #[error("oscillation not detected: {0}")]
    OscillationNotDetected(String),

    #[error(
        "effective coupling below sensitivity floor: {detected} column(s) with detected oscillation, \
         need at least {required}; |g_eff| < {floor_mhz:.3} MHz"
    )]
    BelowSensitivityFloor {
        detected: usize,
        required: usize,
        floor_mhz: f64,
    },

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn numerical(msg: impl Into<String>) -> Self {
        Error::Numerical(msg.into())
    }
}
