use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("Fock cutoff {cutoff} too small for N = {n_photons}: need a cutoff of at least {}", .n_photons + 1)]
    CutoffTooSmall { cutoff: usize, n_photons: usize },

    #[error("state dimension {dim} exceeds the limit {max}; raise tail_tol or lower the gain range")]
    DimensionLimit { dim: usize, max: usize },

    #[error("matrix is not Hermitian: |rho[{row}][{col}] - conj(rho[{col}][{row}])| = {deviation:e}")]
    NotHermitian { row: usize, col: usize, deviation: f64 },

    #[error("invalid density matrix: {0}")]
    InvalidState(String),

    #[error("shape mismatch: expected {expected}, got {actual}")]
    ShapeMismatch { expected: String, actual: String },

    #[error("no closed form for eta = {0}; use the master-equation route")]
    NoClosedForm(f64),

    #[error("operation produced a zero-trace state: {0}")]
    ZeroTrace(String),

    #[error(
        "population {population:e} in the top two Fock levels of mode {mode} at G^2 = {g_squared} exceeds {threshold:e}; increase the cutoff"
    )]
    CutoffLeak { mode: char, population: f64, threshold: f64, g_squared: f64 },

    #[error("integration needs {needed} steps but max_steps is {max_steps}")]
    TooManySteps { needed: usize, max_steps: usize },

    #[error("amplitude |{which}|^2 = {value} exceeds the cutoff guard {limit}")]
    AmplitudeTooLarge { which: char, value: f64, limit: f64 },

    #[error("covariance matrix violates the uncertainty relation: {0}")]
    Unphysical(String),

    #[error("eigendecomposition failed: {0}")]
    Eigen(String),

    #[error("negativity methods disagree: dense {dense} vs block {block}")]
    MethodDisagreement { dense: f64, block: f64 },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True for errors caused by the caller's configuration rather than by a
    /// failed numerical check.
    pub fn is_config(&self) -> bool {
        matches!(
            self,
            Error::InvalidParameter(_)
                | Error::CutoffTooSmall { .. }
                | Error::DimensionLimit { .. }
                | Error::NoClosedForm(_)
                | Error::AmplitudeTooLarge { .. }
                | Error::TooManySteps { .. }
        )
    }
}
