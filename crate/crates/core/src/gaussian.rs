//! Gaussian benchmark: two-mode squeezed vacuum under the same amplifier,
//! treated with 4×4 covariance matrices, plus the photon-added TMSV pipeline
//! in Fock space.
//!
//! Covariance convention: quadratures ordered `(x_a, p_a, x_b, p_b)`, vacuum
//! covariance is the identity, so a thermal mode with mean `n̄` has `(2n̄+1)·I`.

use nalgebra::{Matrix2, Matrix4};
use ndarray::Array2;
use num_complex::Complex64 as C64;

use crate::channel::photon_add_both;
use crate::error::{Error, Result};
use crate::fock::{ModeCutoffs, ModeSet, TwoModeState};
use crate::linalg;
use crate::lindblad::{evolve, evolve_checkpoints, IntegratorConfig, LindbladParams};
use crate::negativity::{log_negativity_block, NegativityResult};

const UNCERTAINTY_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SqueezingSpec {
    r: f64,
}

impl SqueezingSpec {
    pub fn new(r: f64) -> Result<Self> {
        if !(r >= 0.0 && r.is_finite()) {
            return Err(Error::InvalidParameter(format!("squeezing r must be >= 0, got {r}")));
        }
        Ok(Self { r })
    }

    pub fn r(&self) -> f64 {
        self.r
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CovarianceState {
    cov: Matrix4<f64>,
}

fn omega() -> Matrix4<f64> {
    let mut w = Matrix4::zeros();
    w[(0, 1)] = 1.0;
    w[(1, 0)] = -1.0;
    w[(2, 3)] = 1.0;
    w[(3, 2)] = -1.0;
    w
}

impl CovarianceState {
    /// Rejects asymmetric matrices and those violating `σ + iΩ >= 0`.
    pub fn new(cov: Matrix4<f64>) -> Result<Self> {
        let asym = (cov - cov.transpose()).abs().max();
        if asym > UNCERTAINTY_TOL {
            return Err(Error::Unphysical(format!("covariance not symmetric (deviation {asym:e})")));
        }
        let w = omega();
        let ev = linalg::hermitian_eigenvalues_fn(4, |i, j| C64::new(cov[(i, j)], w[(i, j)]))?;
        if ev[0] < -UNCERTAINTY_TOL {
            return Err(Error::Unphysical(format!("sigma + i*Omega has eigenvalue {}", ev[0])));
        }
        Ok(Self { cov })
    }

    pub fn vacuum() -> Self {
        Self { cov: Matrix4::identity() }
    }

    pub fn cov(&self) -> &Matrix4<f64> {
        &self.cov
    }

    fn blocks(cov: &Matrix4<f64>) -> (Matrix2<f64>, Matrix2<f64>, Matrix2<f64>) {
        (cov.fixed_view::<2, 2>(0, 0).into_owned(), cov.fixed_view::<2, 2>(2, 2).into_owned(), cov.fixed_view::<2, 2>(0, 2).into_owned())
    }

    fn symplectic_pair(delta: f64, det: f64) -> (f64, f64) {
        let disc = (delta * delta - 4.0 * det).max(0.0).sqrt();
        ((0.5 * (delta - disc)).max(0.0).sqrt(), (0.5 * (delta + disc)).sqrt())
    }

    /// `(ν₋, ν₊)`.
    pub fn symplectic_eigenvalues(&self) -> (f64, f64) {
        let (a, b, c) = Self::blocks(&self.cov);
        Self::symplectic_pair(a.determinant() + b.determinant() + 2.0 * c.determinant(), self.cov.determinant())
    }

    /// `(ν̃₋, ν̃₊)` of the partial transpose (`p_b → -p_b`).
    pub fn pt_symplectic_eigenvalues(&self) -> (f64, f64) {
        let (a, b, c) = Self::blocks(&self.cov);
        Self::symplectic_pair(a.determinant() + b.determinant() - 2.0 * c.determinant(), self.cov.determinant())
    }
}

pub fn tmsv_covariance(spec: SqueezingSpec) -> CovarianceState {
    let (ch, sh) = ((2.0 * spec.r).cosh(), (2.0 * spec.r).sinh());
    #[rustfmt::skip]
    let cov = Matrix4::new(
        ch, 0.0, sh, 0.0,
        0.0, ch, 0.0, -sh,
        sh, 0.0, ch, 0.0,
        0.0, -sh, 0.0, ch,
    );
    CovarianceState { cov }
}

/// Phase-insensitive amplifier on the selected modes:
/// `σ → XσX + Y`, `X = G` and `Y = (G²-1)(2η+1)` on each amplified mode's quadratures.
pub fn amplify_covariance(state: &CovarianceState, g_squared: f64, eta: f64, modes: ModeSet) -> Result<CovarianceState> {
    if !(g_squared >= 1.0 && g_squared.is_finite()) {
        return Err(Error::InvalidParameter(format!("gain G^2 must be >= 1, got {g_squared}")));
    }
    if !(eta >= 0.0 && eta.is_finite()) {
        return Err(Error::InvalidParameter(format!("eta must be >= 0, got {eta}")));
    }
    let g = g_squared.sqrt();
    let noise = (g_squared - 1.0) * (2.0 * eta + 1.0);
    let mut x = Matrix4::identity();
    let mut y = Matrix4::zeros();
    for (flag, offset) in [(modes.a, 0), (modes.b, 2)] {
        if flag {
            for k in offset..offset + 2 {
                x[(k, k)] = g;
                y[(k, k)] = noise;
            }
        }
    }
    CovarianceState::new(x * state.cov * x + y)
}

/// `max(0, -log₂ ν̃₋)`.
pub fn gaussian_log_negativity(state: &CovarianceState) -> f64 {
    let (nu, _) = state.pt_symplectic_eigenvalues();
    (-nu.log2()).max(0.0)
}

/// Gaussian counterpart of the negative-eigenvalue sum, `max(0, (1/ν̃₋ - 1)/2)`.
pub fn gaussian_neg_sum(state: &CovarianceState) -> f64 {
    let (nu, _) = state.pt_symplectic_eigenvalues();
    (0.5 * (1.0 / nu - 1.0)).max(0.0)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Threshold {
    Finite(f64),
    /// Entanglement survives every finite gain.
    Unbounded,
}

impl Threshold {
    pub fn value(self) -> Option<f64> {
        match self {
            Threshold::Finite(v) => Some(v),
            Threshold::Unbounded => None,
        }
    }
}

/// Gain beyond which the symmetrically amplified TMSV is separable:
/// `(2 + 2η) / (1 + 2η + e^{-2r})`.
pub fn threshold_symmetric(spec: SqueezingSpec, eta: f64) -> Result<f64> {
    if !(eta >= 0.0) {
        return Err(Error::InvalidParameter(format!("eta must be >= 0, got {eta}")));
    }
    Ok((2.0 + 2.0 * eta) / (1.0 + 2.0 * eta + (-2.0 * spec.r).exp()))
}

/// Separability gain when only one mode is amplified: `1 + 1/η`, unbounded
/// for the ideal amplifier.
pub fn threshold_asymmetric(eta: f64) -> Result<Threshold> {
    if !(eta >= 0.0) {
        return Err(Error::InvalidParameter(format!("eta must be >= 0, got {eta}")));
    }
    Ok(if eta == 0.0 { Threshold::Unbounded } else { Threshold::Finite(1.0 + 1.0 / eta) })
}

/// Zero crossing of the Gaussian log-negativity along the gain axis, found by
/// bisection on `ν̃₋(G²) = 1`. `None` if no crossing below `max_gain`.
pub fn bisect_threshold(spec: SqueezingSpec, eta: f64, modes: ModeSet, max_gain: f64) -> Result<Option<f64>> {
    let tmsv = tmsv_covariance(spec);
    let excess = |g2: f64| -> Result<f64> { Ok(amplify_covariance(&tmsv, g2, eta, modes)?.pt_symplectic_eigenvalues().0 - 1.0) };
    if excess(1.0)? >= 0.0 {
        return Ok(Some(1.0));
    }
    let (mut lo, mut hi) = (1.0, 2.0);
    while excess(hi)? < 0.0 {
        lo = hi;
        hi *= 2.0;
        if hi > max_gain {
            return if excess(max_gain)? < 0.0 { Ok(None) } else { Ok(Some(bisect(excess, lo, max_gain)?)) };
        }
    }
    Ok(Some(bisect(excess, lo, hi)?))
}

fn bisect(f: impl Fn(f64) -> Result<f64>, mut lo: f64, mut hi: f64) -> Result<f64> {
    while hi - lo > 1e-13 * hi {
        let mid = 0.5 * (lo + hi);
        if f(mid)? < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Fock expansion `(1/cosh r) Σ tanhⁿ r |n, n>` truncated at `cutoff` per mode.
pub fn tmsv_fock_state(spec: SqueezingSpec, cutoff: usize) -> Result<TwoModeState> {
    let cutoffs = ModeCutoffs::new(cutoff, cutoff)?;
    let (t, c) = (spec.r.tanh(), spec.r.cosh());
    let amps: Vec<f64> = (0..cutoff).map(|n| t.powi(n as i32) / c).collect();
    let dim = cutoffs.dim();
    let mut matrix = Array2::<C64>::zeros((dim, dim));
    for (n, an) in amps.iter().enumerate() {
        for (m, am) in amps.iter().enumerate() {
            matrix[[cutoffs.index(n, n), cutoffs.index(m, m)]] = C64::new(an * am, 0.0);
        }
    }
    TwoModeState::from_matrix(cutoffs, matrix)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PhotonAddedConfig {
    /// Per-mode Fock cutoff; `None` picks one from the largest gain.
    pub cutoff: Option<usize>,
    pub step_size: f64,
}

impl Default for PhotonAddedConfig {
    fn default() -> Self {
        Self { cutoff: None, step_size: 2e-3 }
    }
}

/// Per-mode cutoff for the amplified photon-added TMSV: the photon-number
/// ratio of the amplified squeezed vacuum is `n̄/(n̄+1)`,
/// `n̄ = G²(sinh²r + 1) - 1`; photon addition adds a quadratic prefactor.
pub fn photon_added_cutoff(spec: SqueezingSpec, max_gain: f64) -> usize {
    let mean = max_gain * (spec.r.sinh().powi(2) + 1.0) - 1.0;
    let q = mean / (mean + 1.0);
    let mut m = 4usize;
    while q > 0.0 && ((m + 1) as f64).powi(2) * q.powi(m as i32) > 1e-10 {
        m += 1;
    }
    m + 2
}

/// Photon-added TMSV `∝ a†b† |TMSV><TMSV| a b` pushed through the ideal
/// symmetric amplifier, with the Fock-side log-negativity at every gain in
/// `g_grid` (ascending).
pub fn photon_added_tmsv_negativity_sweep(
    spec: SqueezingSpec,
    g_grid: &[f64],
    config: PhotonAddedConfig,
) -> Result<Vec<(f64, NegativityResult, TwoModeStateSummary)>> {
    let mut out = Vec::with_capacity(g_grid.len());
    photon_added_tmsv_visit(spec, g_grid, config, |g2, state| {
        out.push((g2, log_negativity_block(state)?, TwoModeStateSummary::of(state)));
        Ok(())
    })?;
    Ok(out)
}

/// Same pipeline, handing each amplified state to `visit` instead.
pub fn photon_added_tmsv_visit<F>(spec: SqueezingSpec, g_grid: &[f64], config: PhotonAddedConfig, visit: F) -> Result<()>
where
    F: FnMut(f64, &TwoModeState) -> Result<()>,
{
    if spec.r > 0.8 {
        return Err(Error::InvalidParameter(format!("photon-added pipeline supports r <= 0.8, got {}", spec.r)));
    }
    let Some(&max_gain) = g_grid.last() else {
        return Ok(());
    };
    let cutoff = config.cutoff.unwrap_or_else(|| photon_added_cutoff(spec, max_gain));
    let input = photon_add_both(&tmsv_fock_state(spec, cutoff)?)?;
    let params = LindbladParams::from_eta(0.0, ModeSet::BOTH)?;
    let integrator = IntegratorConfig::new(max_gain)?.with_step(config.step_size);
    evolve_checkpoints(&input, &params, &integrator, g_grid, visit)?;
    Ok(())
}

/// Cutoffs and truncation bookkeeping of a state that is not kept around.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TwoModeStateSummary {
    pub cutoffs: ModeCutoffs,
    pub trace_deficit: f64,
}

impl TwoModeStateSummary {
    pub fn of(state: &TwoModeState) -> Self {
        Self { cutoffs: state.cutoffs(), trace_deficit: state.trace_deficit() }
    }
}

/// Trace distance between `amplify(add(ρ))` and `add(amplify(ρ))` for the
/// TMSV, both photon additions normalized.
pub fn photon_addition_commutator_distance(spec: SqueezingSpec, g_squared: f64, cutoff: usize, step_size: f64) -> Result<f64> {
    let tmsv = tmsv_fock_state(spec, cutoff)?;
    let params = LindbladParams::from_eta(0.0, ModeSet::BOTH)?;
    let integrator = IntegratorConfig::new(g_squared)?.with_step(step_size);
    let add_then_amplify = evolve(&photon_add_both(&tmsv)?, &params, &integrator)?;
    let amplify_then_add = photon_add_both(&evolve(&tmsv, &params, &integrator)?)?;
    add_then_amplify.trace_distance(&amplify_then_add)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::negativity::log_negativity_dense;

    fn sq(r: f64) -> SqueezingSpec {
        SqueezingSpec::new(r).unwrap()
    }

    #[test]
    fn tmsv_covariance_entries() {
        assert_eq!(*tmsv_covariance(sq(0.0)).cov(), Matrix4::identity());
        let s = tmsv_covariance(sq(0.5));
        assert!((s.cov()[(0, 0)] - 1.0f64.cosh()).abs() < 1e-15);
        assert!((s.cov()[(0, 0)] - 1.5430806348152437).abs() < 1e-12);
        assert!((s.cov()[(0, 2)] - 1.1752011936438014).abs() < 1e-12);
        assert!((s.cov()[(1, 3)] + 1.1752011936438014).abs() < 1e-12);
        assert!((s.cov().determinant() - 1.0).abs() < 1e-12);
        // degenerate pair: the invariant formula loses half the digits
        for r in [0.0, 0.3, 1.2] {
            let (lo, hi) = tmsv_covariance(sq(r)).symplectic_eigenvalues();
            assert!((lo - 1.0).abs() < 1e-6 && (hi - 1.0).abs() < 1e-6);
        }
    }

    #[test]
    fn symplectic_eigenvalues_match_spectrum_of_i_omega_sigma() {
        let s = amplify_covariance(&tmsv_covariance(sq(0.7)), 1.3, 0.2, ModeSet::A_ONLY).unwrap();
        let m = omega() * s.cov();
        // (Ωσ)² has eigenvalues -ν², each twice
        let ev = (m * m).complex_eigenvalues();
        let mut nus: Vec<f64> = ev.iter().map(|z| (-z.re).sqrt()).collect();
        nus.sort_by(f64::total_cmp);
        let (lo, hi) = s.symplectic_eigenvalues();
        assert!((nus[0] - lo).abs() < 1e-9 && (nus[3] - hi).abs() < 1e-9, "{nus:?} {lo} {hi}");
    }

    #[test]
    fn amplified_vacuum_is_thermal() {
        for g2 in [1.0, 1.7, 3.0] {
            let s = amplify_covariance(&CovarianceState::vacuum(), g2, 0.0, ModeSet::BOTH).unwrap();
            assert!((s.cov() - Matrix4::identity() * (2.0 * g2 - 1.0)).abs().max() < 1e-14);
            assert!(((s.cov()[(0, 0)] - 1.0) / 2.0 - (g2 - 1.0)).abs() < 1e-14);
        }
        let t = tmsv_covariance(sq(0.4));
        assert_eq!(amplify_covariance(&t, 1.0, 0.0, ModeSet::BOTH).unwrap(), t);
    }

    #[test]
    fn rejects_unphysical_covariance() {
        let bad = Matrix4::identity() * 0.5;
        assert!(matches!(CovarianceState::new(bad), Err(Error::Unphysical(_))));
        let mut asym = Matrix4::identity();
        asym[(0, 1)] = 0.1;
        assert!(CovarianceState::new(asym).is_err());
    }

    #[test]
    fn log_negativity_of_tmsv() {
        assert_eq!(gaussian_log_negativity(&CovarianceState::vacuum()), 0.0);
        let en = gaussian_log_negativity(&tmsv_covariance(sq(0.5)));
        assert!((en - 1.0 / std::f64::consts::LN_2).abs() < 1e-12);
        assert!((en - std::f64::consts::LOG2_E).abs() < 1e-12);
    }

    #[test]
    fn entanglement_vanishes_at_symmetric_threshold() {
        let spec = sq(0.5);
        let g2 = threshold_symmetric(spec, 0.0).unwrap();
        assert!((g2 - 2.0 / (1.0 + (-1.0f64).exp())).abs() < 1e-15);
        assert!((g2 - 1.46211715726001).abs() < 1e-12);
        let out = amplify_covariance(&tmsv_covariance(spec), g2, 0.0, ModeSet::BOTH).unwrap();
        assert!(gaussian_log_negativity(&out) < 1e-6);
    }

    #[test]
    fn threshold_limits() {
        assert!((threshold_symmetric(sq(40.0), 0.0).unwrap() - 2.0).abs() < 1e-15);
        assert_eq!(threshold_symmetric(sq(0.0), 0.3).unwrap(), 1.0);
        assert_eq!(threshold_asymmetric(1.0).unwrap(), Threshold::Finite(2.0));
        assert_eq!(threshold_asymmetric(0.5).unwrap(), Threshold::Finite(3.0));
        assert_eq!(threshold_asymmetric(0.0).unwrap(), Threshold::Unbounded);
        assert!(threshold_asymmetric(-0.1).is_err());
    }

    #[test]
    fn bisection_agrees_with_closed_forms() {
        let g = bisect_threshold(sq(0.5), 0.0, ModeSet::BOTH, 1e3).unwrap().unwrap();
        assert!((g - threshold_symmetric(sq(0.5), 0.0).unwrap()).abs() < 1e-6);
        let g = bisect_threshold(sq(0.5), 0.5, ModeSet::A_ONLY, 1e3).unwrap().unwrap();
        assert!((g - 3.0).abs() < 1e-6);
        assert_eq!(bisect_threshold(sq(0.5), 0.0, ModeSet::A_ONLY, 1e3).unwrap(), None);
    }

    #[test]
    fn gaussian_en_decreases_then_vanishes() {
        let t = tmsv_covariance(sq(0.5));
        let th = threshold_symmetric(sq(0.5), 0.0).unwrap();
        let mut prev = f64::INFINITY;
        for k in 0..=40 {
            let g2 = 1.0 + 0.05 * k as f64;
            let en = gaussian_log_negativity(&amplify_covariance(&t, g2, 0.0, ModeSet::BOTH).unwrap());
            if g2 < th - 1e-9 {
                assert!(en < prev && en > 0.0);
            } else if g2 > th + 1e-9 {
                assert_eq!(en, 0.0);
            }
            prev = en;
        }
    }

    #[test]
    fn tmsv_fock_state_negativity_matches_covariance() {
        let s = tmsv_fock_state(sq(0.5), 40).unwrap();
        let r = log_negativity_dense(&s).unwrap();
        assert!((r.log_negativity - 1.0 / std::f64::consts::LN_2).abs() < 1e-9);
    }

    #[test]
    fn photon_added_tmsv_matches_schmidt_expansion() {
        let (r, cutoff) = (0.5f64, 30);
        let out = photon_add_both(&tmsv_fock_state(sq(r), cutoff).unwrap()).unwrap();
        // oracle: coefficients (n+1) tanhⁿ r on |n+1, n+1>, normalized in closed form
        let l2 = r.tanh().powi(2);
        let norm = (1.0 + l2) / (1.0 - l2).powi(3);
        let coef = |n: usize| (n as f64 + 1.0) * r.tanh().powi(n as i32) / norm.sqrt();
        let c = out.cutoffs();
        for n in 0..cutoff - 1 {
            for m in 0..cutoff - 1 {
                let got = out.matrix()[[c.index(n + 1, n + 1), c.index(m + 1, m + 1)]].re;
                assert!((got - coef(n) * coef(m)).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn photon_addition_to_vacuum_sweep_is_separable() {
        let rows = photon_added_tmsv_negativity_sweep(sq(0.0), &[1.0, 1.5, 2.0], PhotonAddedConfig::default()).unwrap();
        for (_, en, _) in rows {
            assert!(en.log_negativity < 1e-9);
        }
    }

    #[test]
    fn photon_addition_enhances_entanglement_at_unit_gain() {
        let r = 0.5f64;
        let s = photon_add_both(&tmsv_fock_state(sq(r), 60).unwrap()).unwrap();
        let en = log_negativity_dense(&s).unwrap().log_negativity;
        // oracle: pure state, E_N = 2 log₂ Σ √pₙ with pₙ ∝ (n+1)² tanh^{2n} r
        let l = r.tanh();
        let (sum_sqrt, sum) = (0..400).fold((0.0, 0.0), |(a, b), n| {
            let amp = (n as f64 + 1.0) * l.powi(n);
            (a + amp, b + amp * amp)
        });
        let oracle = 2.0 * (sum_sqrt / sum.sqrt()).log2();
        assert!((en - oracle).abs() < 1e-9, "{en} vs {oracle}");
        assert!(en > 2.0 * r / std::f64::consts::LN_2);
    }

    #[test]
    fn rejects_large_squeezing_in_fock_pipeline() {
        assert!(photon_added_tmsv_negativity_sweep(sq(1.0), &[1.0], PhotonAddedConfig::default()).is_err());
    }
}
