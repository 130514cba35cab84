//! Numeric tolerances shared across modules.
//!
//! The constants are the defaults; [`Tolerances`] bundles them so a test or
//! the CLI can override individual values.

/// Elementwise Hermiticity, trace bookkeeping, structural identities.
pub const STRUCTURAL: f64 = 1e-12;

/// Eigenvalue-level comparisons (rank, spectra of known matrices).
pub const SPECTRAL: f64 = 1e-10;

/// Purity and other quadratic functionals.
pub const PURITY: f64 = 1e-9;

/// Partial-transpose eigenvalues in `[-EIGEN_CLAMP, 0)` count as zero.
pub const EIGEN_CLAMP: f64 = 1e-12;

/// Husimi values in `[-Q_CLAMP, 0)` are clamped to zero.
pub const Q_CLAMP: f64 = 1e-14;

/// Zero detection for the Q function, relative to the grid maximum.
pub const Q_ZERO_RELATIVE: f64 = 1e-12;

/// Upper bound on the top-two-level population during master-equation runs.
pub const LEAK_THRESHOLD: f64 = 1e-8;

/// Largest connected component the block negativity method will diagonalize.
pub const MAX_BLOCK: usize = 512;

/// Default truncation budget per mode for automatic cutoffs.
pub const TAIL_TOL: f64 = 1e-10;

/// Block and dense log-negativity must agree to this.
pub const METHOD_AGREEMENT: f64 = 1e-9;

/// Closed form versus master-equation oracle, in trace distance.
pub const ORACLE_TRACE_DISTANCE: f64 = 1e-6;

/// Largest truncation loss a constructed state may carry before it is
/// considered under-resolved.
pub const TRACE_DEFICIT_BUDGET: f64 = 1e-8;

/// Husimi amplifier scaling law, absolute on grid values.
pub const SCALING_LAW: f64 = 1e-8;

/// Bisected Gaussian separability gain versus the closed forms.
pub const THRESHOLD_AGREEMENT: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tolerances {
    pub structural: f64,
    pub spectral: f64,
    pub purity: f64,
    pub eigen_clamp: f64,
    pub q_clamp: f64,
    pub q_zero_relative: f64,
    pub leak_threshold: f64,
    pub max_block: usize,
    pub tail_tol: f64,
    pub method_agreement: f64,
    pub oracle_trace_distance: f64,
    pub trace_deficit_budget: f64,
    pub scaling_law: f64,
    pub threshold_agreement: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            structural: STRUCTURAL,
            spectral: SPECTRAL,
            purity: PURITY,
            eigen_clamp: EIGEN_CLAMP,
            q_clamp: Q_CLAMP,
            q_zero_relative: Q_ZERO_RELATIVE,
            leak_threshold: LEAK_THRESHOLD,
            max_block: MAX_BLOCK,
            tail_tol: TAIL_TOL,
            method_agreement: METHOD_AGREEMENT,
            oracle_trace_distance: ORACLE_TRACE_DISTANCE,
            trace_deficit_budget: TRACE_DEFICIT_BUDGET,
            scaling_law: SCALING_LAW,
            threshold_agreement: THRESHOLD_AGREEMENT,
        }
    }
}
