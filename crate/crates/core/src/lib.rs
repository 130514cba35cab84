//! Amplification of two-mode NOON states through phase-insensitive linear
//! amplifiers: truncated Fock-space states, closed-form and master-equation
//! channel outputs, logarithmic negativity, Husimi Q functions and a Gaussian
//! benchmark.

// `!(x > 0.0)` is used on purpose so NaN inputs are rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod channel;
pub mod error;
pub mod fock;
pub mod gaussian;
pub mod husimi;
pub mod linalg;
pub mod lindblad;
pub mod negativity;
pub mod sweep;
pub mod tolerances;
pub mod verify;

pub use channel::{amplify_noon, AmplifierParams, CutoffPolicy, ModeConfig};
pub use error::{Error, Result};
pub use fock::{ModeCutoffs, ModeSet, NoonSpec, ThermalSpec, TwoModeState};
pub use negativity::{Method, NegativityResult};
pub use tolerances::Tolerances;
