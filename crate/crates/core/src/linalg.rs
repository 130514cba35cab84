//! Hermitian spectra: a dense path through faer and a component-wise path
//! that splits a sparse Hermitian matrix into independent blocks.

use faer::{Mat, Side};
use ndarray::Array2;
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

/// Eigenvalues of a Hermitian matrix given elementwise, ascending.
///
/// Only the lower triangle is read. Matrices whose imaginary parts are all
/// exactly zero take the real symmetric solver.
pub fn hermitian_eigenvalues_fn(n: usize, entry: impl Fn(usize, usize) -> C64) -> Result<Vec<f64>> {
    match n {
        0 => return Ok(Vec::new()),
        1 => return Ok(vec![entry(0, 0).re]),
        2 => {
            let (d1, d2, c) = (entry(0, 0).re, entry(1, 1).re, entry(1, 0));
            let mid = 0.5 * (d1 + d2);
            let rad = (0.25 * (d1 - d2) * (d1 - d2) + c.norm_sqr()).sqrt();
            return Ok(vec![mid - rad, mid + rad]);
        }
        _ => {}
    }
    let real = (0..n).all(|i| (0..=i).all(|j| entry(i, j).im == 0.0));
    let mut values = if real {
        let m = Mat::<f64>::from_fn(n, n, |i, j| if j <= i { entry(i, j).re } else { 0.0 });
        m.self_adjoint_eigenvalues(Side::Lower).map_err(|e| Error::Eigen(format!("{e:?}")))?
    } else {
        let m = Mat::<C64>::from_fn(n, n, |i, j| if j <= i { entry(i, j) } else { C64::new(0.0, 0.0) });
        m.self_adjoint_eigenvalues(Side::Lower).map_err(|e| Error::Eigen(format!("{e:?}")))?
    };
    values.sort_by(f64::total_cmp);
    Ok(values)
}

pub fn hermitian_eigenvalues(m: &Array2<C64>) -> Result<Vec<f64>> {
    let (rows, cols) = m.dim();
    if rows != cols {
        return Err(Error::ShapeMismatch { expected: "square matrix".into(), actual: format!("{rows}x{cols}") });
    }
    hermitian_eigenvalues_fn(rows, |i, j| m[[i, j]])
}

struct DisjointSets {
    parent: Vec<usize>,
}

impl DisjointSets {
    fn new(n: usize) -> Self {
        Self { parent: (0..n).collect() }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            // keep the smaller index as root so block order is deterministic
            let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
            self.parent[hi] = lo;
        }
    }
}

/// Connected components of the graph on `0..n` whose edges are the pairs
/// `i > j` with `coupled(i, j)`. Blocks are sorted internally and ordered by
/// their smallest member.
pub fn connected_components(n: usize, coupled: impl Fn(usize, usize) -> bool) -> Vec<Vec<usize>> {
    components_from_edges(n, (0..n).flat_map(|i| (0..i).map(move |j| (i, j))).filter(|&(i, j)| coupled(i, j)))
}

/// Components of the graph on `0..n` with the given (undirected) edges,
/// ordered by smallest member.
pub fn components_from_edges(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Vec<Vec<usize>> {
    let mut sets = DisjointSets::new(n);
    for (i, j) in edges {
        sets.union(i, j);
    }
    let mut slot = vec![usize::MAX; n];
    let mut blocks: Vec<Vec<usize>> = Vec::new();
    for i in 0..n {
        let root = sets.find(i);
        if slot[root] == usize::MAX {
            slot[root] = blocks.len();
            blocks.push(Vec::new());
        }
        blocks[slot[root]].push(i);
    }
    blocks
}

#[derive(Clone, Debug)]
pub struct BlockSpectrum {
    /// All eigenvalues, ascending.
    pub eigenvalues: Vec<f64>,
    pub block_count: usize,
    pub largest_block: usize,
}

/// Spectrum of a sparse Hermitian matrix obtained by diagonalizing each
/// connected component of its nonzero pattern separately. Returns `None` when
/// some component exceeds `max_block`.
pub fn spectrum_by_components(n: usize, entry: impl Fn(usize, usize) -> C64, max_block: usize) -> Result<Option<BlockSpectrum>> {
    let blocks = connected_components(n, |i, j| entry(i, j) != C64::new(0.0, 0.0));
    spectrum_of_blocks(n, &blocks, entry, max_block)
}

/// Spectrum of a matrix known to be block-diagonal over `blocks` (a partition
/// of `0..n`). `None` if a block exceeds `max_block`.
pub fn spectrum_of_blocks(
    n: usize,
    blocks: &[Vec<usize>],
    entry: impl Fn(usize, usize) -> C64,
    max_block: usize,
) -> Result<Option<BlockSpectrum>> {
    let largest_block = blocks.iter().map(Vec::len).max().unwrap_or(0);
    if largest_block > max_block {
        return Ok(None);
    }
    let mut eigenvalues = Vec::with_capacity(n);
    for block in blocks {
        let vals = hermitian_eigenvalues_fn(block.len(), |a, b| entry(block[a], block[b]))?;
        eigenvalues.extend(vals);
    }
    eigenvalues.sort_by(f64::total_cmp);
    Ok(Some(BlockSpectrum { eigenvalues, block_count: blocks.len(), largest_block }))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn two_by_two_closed_form_matches_solver() {
        let m = [[c(0.3, 0.0), c(0.1, -0.2)], [c(0.1, 0.2), c(-0.4, 0.0)]];
        let closed = hermitian_eigenvalues_fn(2, |i, j| m[i][j]).unwrap();
        // pad to 3x3 with a decoupled entry to force the faer path
        let padded = hermitian_eigenvalues_fn(3, |i, j| match (i, j) {
            (2, 2) => c(10.0, 0.0),
            (2, _) | (_, 2) => c(0.0, 0.0),
            _ => m[i][j],
        })
        .unwrap();
        assert!((closed[0] - padded[0]).abs() < 1e-14);
        assert!((closed[1] - padded[1]).abs() < 1e-14);
    }

    #[test]
    fn complex_path_matches_known_spectrum() {
        // Pauli-Y scaled: eigenvalues ±1
        let m =
            [[c(0.0, 0.0), c(0.0, -1.0), c(0.0, 0.0)], [c(0.0, 1.0), c(0.0, 0.0), c(0.0, 0.0)], [c(0.0, 0.0), c(0.0, 0.0), c(2.0, 0.0)]];
        let vals = hermitian_eigenvalues_fn(3, |i, j| m[i][j]).unwrap();
        for (got, want) in vals.iter().zip([-1.0, 1.0, 2.0]) {
            assert!((got - want).abs() < 1e-13);
        }
    }

    #[test]
    fn components_split_chain_and_isolated() {
        let blocks = connected_components(5, |i, j| (i, j) == (2, 0) || (i, j) == (4, 2));
        assert_eq!(blocks, vec![vec![0, 2, 4], vec![1], vec![3]]);
    }

    #[test]
    fn oversize_component_reports_none() {
        let got = spectrum_by_components(4, |_, _| c(1.0, 0.0), 3).unwrap();
        assert!(got.is_none());
    }
}
