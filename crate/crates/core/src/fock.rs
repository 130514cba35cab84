//! Truncated two-mode Fock space.
//!
//! Basis states `|n_a, n_b>` are flattened row-major: `index = n_a * cutoff_b + n_b`.
//! Every partial-transpose and ladder routine in the crate relies on this order.

use ndarray::Array2;
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::linalg;
use crate::tolerances::{MAX_BLOCK, STRUCTURAL};

pub const DEFAULT_MAX_DIM: usize = 250_000;

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };

/// `ln(n!)` by direct summation.
pub fn ln_factorial(n: usize) -> f64 {
    (2..=n).map(|k| (k as f64).ln()).sum()
}

/// `ln((n + k)! / n!)`.
pub fn ln_rising(n: usize, k: usize) -> f64 {
    (n + 1..=n + k).map(|j| (j as f64).ln()).sum()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct ModeCutoffs {
    a: usize,
    b: usize,
}

impl ModeCutoffs {
    pub fn new(cutoff_a: usize, cutoff_b: usize) -> Result<Self> {
        Self::with_max_dim(cutoff_a, cutoff_b, DEFAULT_MAX_DIM)
    }

    pub fn with_max_dim(cutoff_a: usize, cutoff_b: usize, max_dim: usize) -> Result<Self> {
        if cutoff_a == 0 || cutoff_b == 0 {
            return Err(Error::InvalidParameter(format!("cutoffs must be positive, got ({cutoff_a}, {cutoff_b})")));
        }
        let dim = cutoff_a.saturating_mul(cutoff_b);
        if dim > max_dim {
            return Err(Error::DimensionLimit { dim, max: max_dim });
        }
        Ok(Self { a: cutoff_a, b: cutoff_b })
    }

    pub fn a(&self) -> usize {
        self.a
    }

    pub fn b(&self) -> usize {
        self.b
    }

    pub fn dim(&self) -> usize {
        self.a * self.b
    }

    #[inline]
    pub fn index(&self, n_a: usize, n_b: usize) -> usize {
        n_a * self.b + n_b
    }

    #[inline]
    pub fn labels(&self, index: usize) -> (usize, usize) {
        (index / self.b, index % self.b)
    }
}

/// Which modes a channel acts on.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ModeSet {
    pub a: bool,
    pub b: bool,
}

impl ModeSet {
    pub const BOTH: ModeSet = ModeSet { a: true, b: true };
    pub const A_ONLY: ModeSet = ModeSet { a: true, b: false };
    pub const B_ONLY: ModeSet = ModeSet { a: false, b: true };
    pub const NONE: ModeSet = ModeSet { a: false, b: false };
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct NoonSpec {
    n_photons: usize,
}

impl NoonSpec {
    pub fn new(n_photons: usize) -> Result<Self> {
        if n_photons == 0 {
            return Err(Error::InvalidParameter("NOON photon number must be at least 1".into()));
        }
        Ok(Self { n_photons })
    }

    pub fn n(&self) -> usize {
        self.n_photons
    }
}

/// Single-mode thermal distribution `p_n ∝ exp(-beta_param * n)`.
///
/// The vacuum (`mean_photons = 0`) is represented with `beta_param = +inf`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ThermalSpec {
    mean_photons: f64,
    beta_param: f64,
}

impl ThermalSpec {
    pub fn from_mean(mean_photons: f64) -> Result<Self> {
        if !(mean_photons >= 0.0 && mean_photons.is_finite()) {
            return Err(Error::InvalidParameter(format!("thermal mean photon number must be finite and >= 0, got {mean_photons}")));
        }
        let beta_param = if mean_photons == 0.0 { f64::INFINITY } else { (1.0 + 1.0 / mean_photons).ln() };
        Ok(Self { mean_photons, beta_param })
    }

    /// The state an ideal amplifier of intensity gain `g_squared` makes from vacuum.
    pub fn from_gain(g_squared: f64) -> Result<Self> {
        if !(g_squared >= 1.0 && g_squared.is_finite()) {
            return Err(Error::InvalidParameter(format!("gain G^2 must be >= 1, got {g_squared}")));
        }
        let mut spec = Self::from_mean(g_squared - 1.0)?;
        if g_squared > 1.0 {
            spec.beta_param = (g_squared / (g_squared - 1.0)).ln();
        }
        Ok(spec)
    }

    pub fn mean_photons(&self) -> f64 {
        self.mean_photons
    }

    pub fn beta_param(&self) -> f64 {
        self.beta_param
    }

    /// Ratio `p_{n+1} / p_n`.
    pub fn ratio(&self) -> f64 {
        self.mean_photons / (1.0 + self.mean_photons)
    }

    pub fn populations(&self, cutoff: usize) -> Vec<f64> {
        let q = self.ratio();
        let p0 = 1.0 / (1.0 + self.mean_photons);
        (0..cutoff).map(|n| p0 * q.powi(n as i32)).collect()
    }
}

/// Truncated two-mode density matrix.
///
/// Immutable once built. `trace_deficit` is the probability lost to the
/// truncation (`1 - trace`); it is recorded, never renormalized away.
#[derive(Clone, Debug)]
pub struct TwoModeState {
    cutoffs: ModeCutoffs,
    matrix: Array2<C64>,
    trace_deficit: f64,
}

impl TwoModeState {
    /// Validates Hermiticity and the diagonal, and records `1 - trace` as the
    /// truncation deficit.
    pub fn from_matrix(cutoffs: ModeCutoffs, matrix: Array2<C64>) -> Result<Self> {
        Self::check_shape(&cutoffs, &matrix)?;
        Self::check_hermitian(&matrix, STRUCTURAL)?;
        let trace: f64 = matrix.diag().iter().map(|z| z.re).sum();
        if trace > 1.0 + STRUCTURAL {
            return Err(Error::InvalidState(format!("trace {trace} exceeds 1")));
        }
        Ok(Self { cutoffs, matrix, trace_deficit: (1.0 - trace).max(0.0) })
    }

    /// Like [`from_matrix`](Self::from_matrix) but checks the trace against a
    /// known deficit.
    pub fn with_deficit(cutoffs: ModeCutoffs, matrix: Array2<C64>, trace_deficit: f64) -> Result<Self> {
        if !(trace_deficit >= 0.0) {
            return Err(Error::InvalidParameter(format!("trace deficit {trace_deficit} < 0")));
        }
        let state = Self::from_matrix(cutoffs, matrix)?;
        let trace = state.trace();
        if (trace - (1.0 - trace_deficit)).abs() > STRUCTURAL {
            return Err(Error::InvalidState(format!("trace {trace} inconsistent with deficit {trace_deficit}")));
        }
        Ok(Self { trace_deficit, ..state })
    }

    /// Builds the matrix from a function of the row and column Fock labels.
    pub fn from_fn(cutoffs: ModeCutoffs, f: impl Fn((usize, usize), (usize, usize)) -> C64) -> Result<Self> {
        let dim = cutoffs.dim();
        let matrix = Array2::from_shape_fn((dim, dim), |(i, j)| f(cutoffs.labels(i), cutoffs.labels(j)));
        Self::from_matrix(cutoffs, matrix)
    }

    /// `rho_a ⊗ rho_b`.
    pub fn product(rho_a: &Array2<C64>, rho_b: &Array2<C64>) -> Result<Self> {
        let cutoffs = ModeCutoffs::new(rho_a.nrows(), rho_b.nrows())?;
        Self::from_fn(cutoffs, |(na, nb), (ma, mb)| rho_a[[na, ma]] * rho_b[[nb, mb]])
    }

    /// Pure product Fock state `|n_a, n_b><n_a, n_b|`.
    pub fn fock(cutoffs: ModeCutoffs, n_a: usize, n_b: usize) -> Result<Self> {
        if n_a >= cutoffs.a() || n_b >= cutoffs.b() {
            return Err(Error::InvalidParameter(format!("|{n_a},{n_b}> outside cutoffs ({}, {})", cutoffs.a(), cutoffs.b())));
        }
        let target = cutoffs.index(n_a, n_b);
        let dim = cutoffs.dim();
        let mut matrix = Array2::zeros((dim, dim));
        matrix[[target, target]] = C64::new(1.0, 0.0);
        Self::from_matrix(cutoffs, matrix)
    }

    fn check_shape(cutoffs: &ModeCutoffs, matrix: &Array2<C64>) -> Result<()> {
        let dim = cutoffs.dim();
        if matrix.dim() != (dim, dim) {
            return Err(Error::ShapeMismatch {
                expected: format!("{dim}x{dim}"),
                actual: format!("{}x{}", matrix.nrows(), matrix.ncols()),
            });
        }
        Ok(())
    }

    pub(crate) fn check_hermitian(matrix: &Array2<C64>, tol: f64) -> Result<()> {
        const TILE: usize = 64;
        let dim = matrix.nrows();
        for i in 0..dim {
            let d = matrix[[i, i]];
            if d.im.abs() > tol || d.re < -tol {
                return Err(Error::InvalidState(format!("diagonal entry {i} = {d}")));
            }
        }
        // tiled so the transposed reads stay in cache
        let tol_sq = tol * tol;
        let standard = matrix.as_standard_layout();
        let flat = standard.as_slice().expect("standard layout");
        for i0 in (0..dim).step_by(TILE) {
            for j0 in (0..=i0).step_by(TILE) {
                for i in i0..(i0 + TILE).min(dim) {
                    let row = &flat[i * dim..i * dim + i];
                    for j in j0..(j0 + TILE).min(i) {
                        let dev_sq = (row[j] - flat[j * dim + i].conj()).norm_sqr();
                        if !(dev_sq <= tol_sq) {
                            let deviation = dev_sq.sqrt();
                            return Err(Error::NotHermitian { row: i, col: j, deviation });
                        }
                    }
                }
            }
        }
        Ok(())
    }

    pub fn cutoffs(&self) -> ModeCutoffs {
        self.cutoffs
    }

    pub fn dim(&self) -> usize {
        self.cutoffs.dim()
    }

    pub fn matrix(&self) -> &Array2<C64> {
        &self.matrix
    }

    pub fn into_matrix(self) -> Array2<C64> {
        self.matrix
    }

    pub fn trace_deficit(&self) -> f64 {
        self.trace_deficit
    }

    /// Element `<row_a, row_b| rho |col_a, col_b>`.
    pub fn element(&self, row: (usize, usize), col: (usize, usize)) -> C64 {
        let c = self.cutoffs;
        self.matrix[[c.index(row.0, row.1), c.index(col.0, col.1)]]
    }

    pub fn trace(&self) -> f64 {
        self.matrix.diag().iter().map(|z| z.re).sum()
    }

    /// `Tr rho^2`, which for a Hermitian matrix is the squared Frobenius norm.
    pub fn purity(&self) -> f64 {
        self.matrix.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn trace_and_purity(&self) -> (f64, f64) {
        (self.trace(), self.purity())
    }

    /// Transpose on mode b: element `((n, m), (n', m'))` of the result is
    /// element `((n, m'), (n', m))` of `self`.
    pub fn partial_transpose_b(&self) -> TwoModeState {
        let c = self.cutoffs;
        let dim = c.dim();
        let matrix = Array2::from_shape_fn((dim, dim), |(i, j)| self.matrix[pt_source(c, i, j)]);
        TwoModeState { cutoffs: c, matrix, trace_deficit: self.trace_deficit }
    }

    /// Diagonal populations of mode a.
    pub fn marginal_a(&self) -> Vec<f64> {
        let c = self.cutoffs;
        let mut p = vec![0.0; c.a()];
        for i in 0..c.dim() {
            p[c.labels(i).0] += self.matrix[[i, i]].re;
        }
        p
    }

    pub fn marginal_b(&self) -> Vec<f64> {
        let c = self.cutoffs;
        let mut p = vec![0.0; c.b()];
        for i in 0..c.dim() {
            p[c.labels(i).1] += self.matrix[[i, i]].re;
        }
        p
    }

    /// `(<a†a>, <b†b>)` over the truncated support.
    pub fn mean_photons(&self) -> (f64, f64) {
        let mean = |p: Vec<f64>| p.iter().enumerate().map(|(n, w)| n as f64 * w).sum::<f64>();
        (mean(self.marginal_a()), mean(self.marginal_b()))
    }

    /// Zero-pads into larger cutoffs.
    pub fn embed(&self, cutoffs: ModeCutoffs) -> Result<TwoModeState> {
        let old = self.cutoffs;
        if cutoffs.a() < old.a() || cutoffs.b() < old.b() {
            return Err(Error::InvalidParameter(format!(
                "cannot embed cutoffs ({}, {}) into smaller ({}, {})",
                old.a(),
                old.b(),
                cutoffs.a(),
                cutoffs.b()
            )));
        }
        let dim = cutoffs.dim();
        let mut matrix = Array2::zeros((dim, dim));
        for i in 0..old.dim() {
            let (ia, ib) = old.labels(i);
            for j in 0..old.dim() {
                let (ja, jb) = old.labels(j);
                matrix[[cutoffs.index(ia, ib), cutoffs.index(ja, jb)]] = self.matrix[[i, j]];
            }
        }
        Ok(TwoModeState { cutoffs, matrix, trace_deficit: self.trace_deficit })
    }

    /// Half the trace norm of `self - other`.
    ///
    /// Uses the component decomposition of the difference when it splits into
    /// small blocks, the dense solver otherwise.
    pub fn trace_distance(&self, other: &TwoModeState) -> Result<f64> {
        if self.cutoffs != other.cutoffs {
            return Err(Error::ShapeMismatch {
                expected: format!("cutoffs {:?}", self.cutoffs),
                actual: format!("cutoffs {:?}", other.cutoffs),
            });
        }
        let diff = |i: usize, j: usize| self.matrix[[i, j]] - other.matrix[[i, j]];
        let dim = self.dim();
        let eigenvalues = match linalg::spectrum_by_components(dim, diff, MAX_BLOCK)? {
            Some(spectrum) => spectrum.eigenvalues,
            None => linalg::hermitian_eigenvalues_fn(dim, diff)?,
        };
        Ok(0.5 * eigenvalues.iter().map(|v| v.abs()).sum::<f64>())
    }

    pub(crate) fn from_parts_unchecked(cutoffs: ModeCutoffs, matrix: Array2<C64>, trace_deficit: f64) -> Self {
        Self { cutoffs, matrix, trace_deficit }
    }
}

/// Position in the original matrix of partial-transpose entry `(i, j)`.
#[inline]
pub(crate) fn pt_source(c: ModeCutoffs, i: usize, j: usize) -> [usize; 2] {
    let (ia, ib) = c.labels(i);
    let (ja, jb) = c.labels(j);
    [c.index(ia, jb), c.index(ja, ib)]
}

/// `(|N,0> + |0,N>)/√2` as a density matrix.
pub fn build_noon(spec: NoonSpec, cutoffs: ModeCutoffs) -> Result<TwoModeState> {
    let n = spec.n();
    let cutoff = cutoffs.a().min(cutoffs.b());
    if cutoff <= n {
        return Err(Error::CutoffTooSmall { cutoff, n_photons: n });
    }
    let dim = cutoffs.dim();
    let mut matrix = Array2::from_elem((dim, dim), ZERO);
    let support = [cutoffs.index(n, 0), cutoffs.index(0, n)];
    for &i in &support {
        for &j in &support {
            matrix[[i, j]] = C64::new(0.5, 0.0);
        }
    }
    Ok(TwoModeState::from_parts_unchecked(cutoffs, matrix, 0.0))
}

/// `thermal ⊗ |0><0|` with the given single-mode populations.
pub fn thermal_vacuum_product(populations: &[f64], cutoff_b: usize) -> Result<TwoModeState> {
    let cutoffs = ModeCutoffs::new(populations.len(), cutoff_b)?;
    TwoModeState::from_fn(cutoffs, |(na, nb), (ma, mb)| if na == ma && nb == 0 && mb == 0 { C64::new(populations[na], 0.0) } else { ZERO })
}
