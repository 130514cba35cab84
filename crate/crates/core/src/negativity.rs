//! Logarithmic negativity `E_N = log₂(2𝒩 + 1)`, where 𝒩 is the magnitude of
//! the summed negative eigenvalues of the partial transpose on mode b.

use log::warn;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::fock::{pt_source, TwoModeState};
use crate::linalg;
use crate::tolerances::{EIGEN_CLAMP, MAX_BLOCK, STRUCTURAL};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Dense,
    Block,
}

#[derive(Clone, Debug, PartialEq)]
pub struct NegativityResult {
    /// Magnitude of the summed negative PT eigenvalues.
    pub neg_sum: f64,
    pub log_negativity: f64,
    pub min_eigenvalue: f64,
    pub method: Method,
    /// Number of independent components (block method only).
    pub block_count: Option<usize>,
}

impl NegativityResult {
    pub fn from_eigenvalues(eigenvalues: &[f64], method: Method, block_count: Option<usize>) -> Self {
        let neg_sum = -eigenvalues.iter().filter(|&&v| v < -EIGEN_CLAMP).sum::<f64>();
        let min_eigenvalue = eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
        Self { neg_sum, log_negativity: log_negativity_from_sum(neg_sum), min_eigenvalue, method, block_count }
    }
}

pub fn log_negativity_from_sum(neg_sum: f64) -> f64 {
    (2.0 * neg_sum + 1.0).log2()
}

/// Dense Hermitian eigendecomposition of the full partial transpose.
pub fn log_negativity_dense(state: &TwoModeState) -> Result<NegativityResult> {
    TwoModeState::check_hermitian(state.matrix(), STRUCTURAL)?;
    let c = state.cutoffs();
    let rho = state.matrix();
    let eigenvalues = linalg::hermitian_eigenvalues_fn(c.dim(), |i, j| rho[pt_source(c, i, j)])?;
    Ok(NegativityResult::from_eigenvalues(&eigenvalues, Method::Dense, None))
}

/// Diagonalizes the connected components of the partial transpose's nonzero
/// pattern independently. Falls back to the dense method when a component is
/// larger than [`MAX_BLOCK`].
pub fn log_negativity_block(state: &TwoModeState) -> Result<NegativityResult> {
    log_negativity_block_with(state, MAX_BLOCK)
}

pub fn log_negativity_block_with(state: &TwoModeState, max_block: usize) -> Result<NegativityResult> {
    TwoModeState::check_hermitian(state.matrix(), STRUCTURAL)?;
    let c = state.cutoffs();
    let rho = state.matrix();
    let entry = |i: usize, j: usize| -> C64 { rho[pt_source(c, i, j)] };
    let blocks = pt_blocks(state);
    match linalg::spectrum_of_blocks(c.dim(), &blocks, entry, max_block)? {
        Some(spectrum) => Ok(NegativityResult::from_eigenvalues(&spectrum.eigenvalues, Method::Block, Some(spectrum.block_count))),
        None => {
            warn!("partial transpose has a component larger than {max_block}; using the dense solver");
            log_negativity_dense(state)
        }
    }
}

// ρ[(n,m),(n',m')] lands at PT[(n,m'),(n',m)]; one pass over ρ's upper
// triangle gives every coupling.
fn pt_blocks(state: &TwoModeState) -> Vec<Vec<usize>> {
    let c = state.cutoffs();
    let zero = C64::new(0.0, 0.0);
    let edges = state.matrix().outer_iter().enumerate().flat_map(move |(i, row)| {
        let (n, m) = c.labels(i);
        row.into_iter()
            .enumerate()
            .skip(i + 1)
            .filter(move |&(_, z)| *z != zero)
            .map(move |(j, _)| {
                let (n2, m2) = c.labels(j);
                (c.index(n, m2), c.index(n2, m))
            })
            .collect::<Vec<_>>()
    });
    linalg::components_from_edges(c.dim(), edges)
}

/// Components of the partial transpose's coupling graph, as Fock labels.
pub fn pt_components(state: &TwoModeState) -> Vec<Vec<(usize, usize)>> {
    let c = state.cutoffs();
    pt_blocks(state).into_iter().map(|block| block.into_iter().map(|i| c.labels(i)).collect()).collect()
}
