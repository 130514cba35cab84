//! Closed-form outputs of the ideal (η = 0) phase-insensitive amplifier.
//!
//! Every constructor returns the projection `P rho P` of the exact output onto
//! the truncated space, so the result stays positive semidefinite and the lost
//! probability shows up as `trace_deficit`.

use ndarray::Array2;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::{build_noon, ln_factorial, ln_rising, ModeCutoffs, ModeSet, NoonSpec, ThermalSpec, TwoModeState};
use crate::lindblad::{self, IntegratorConfig, LindbladParams};
use crate::tolerances::TAIL_TOL;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModeConfig {
    /// Both modes pass through identical amplifiers.
    Symmetric,
    /// Only mode a is amplified.
    AsymmetricAOnly,
}

impl ModeConfig {
    pub fn modes(self) -> ModeSet {
        match self {
            ModeConfig::Symmetric => ModeSet::BOTH,
            ModeConfig::AsymmetricAOnly => ModeSet::A_ONLY,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AmplifierParams {
    g_squared: f64,
    eta: f64,
    mode: ModeConfig,
}

impl AmplifierParams {
    pub fn new(g_squared: f64, eta: f64, mode: ModeConfig) -> Result<Self> {
        if !(g_squared >= 1.0 && g_squared.is_finite()) {
            return Err(Error::InvalidParameter(format!("gain G^2 must be >= 1, got {g_squared}")));
        }
        if !(eta >= 0.0 && eta.is_finite()) {
            return Err(Error::InvalidParameter(format!("eta must be >= 0, got {eta}")));
        }
        Ok(Self { g_squared, eta, mode })
    }

    pub fn ideal(g_squared: f64, mode: ModeConfig) -> Result<Self> {
        Self::new(g_squared, 0.0, mode)
    }

    pub fn g_squared(&self) -> f64 {
        self.g_squared
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn mode(&self) -> ModeConfig {
        self.mode
    }

    /// Ratio `(G² - 1) / G²` of the geometric weights.
    fn ratio(&self) -> f64 {
        (self.g_squared - 1.0) / self.g_squared
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum CutoffPolicy {
    /// Smallest cutoffs whose neglected weight per mode is below `tail_tol`.
    Auto {
        tail_tol: f64,
    },
    Fixed(ModeCutoffs),
}

impl Default for CutoffPolicy {
    fn default() -> Self {
        CutoffPolicy::Auto { tail_tol: TAIL_TOL }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct AmplifiedVacuum {
    /// `p_n = (1/G²)(1 - 1/G²)^n` for `n < cutoff`.
    pub populations: Vec<f64>,
    /// `1 - Σ p_n`.
    pub tail_mass: f64,
}

impl AmplifiedVacuum {
    pub fn mean(&self) -> f64 {
        self.populations.iter().enumerate().map(|(n, p)| n as f64 * p).sum()
    }
}

/// Photon-number distribution of the vacuum after an ideal amplifier.
pub fn amplified_vacuum(g_squared: f64, cutoff: usize) -> Result<AmplifiedVacuum> {
    if cutoff == 0 {
        return Err(Error::InvalidParameter("cutoff must be >= 1".into()));
    }
    let populations = ThermalSpec::from_gain(g_squared)?.populations(cutoff);
    let tail_mass = (1.0 - populations.iter().sum::<f64>()).max(0.0);
    Ok(AmplifiedVacuum { populations, tail_mass })
}

/// Marginal photon distribution of an amplified mode, `P(k)` for the ideal
/// amplifier: half a negative binomial shifted by N (the branch that carried
/// the photons) plus half the amplified vacuum.
fn amplified_marginal(n: usize, g_squared: f64, k: usize) -> f64 {
    let p = 1.0 / g_squared;
    let q = 1.0 - p;
    let geometric = if k == 0 { p } else { p * q.powi(k as i32) };
    let shifted = if k < n {
        0.0
    } else if q == 0.0 {
        if k == n {
            1.0
        } else {
            0.0
        }
    } else {
        let ln_binom = ln_factorial(k) - ln_factorial(n) - ln_factorial(k - n);
        (ln_binom + (n + 1) as f64 * p.ln() + (k - n) as f64 * q.ln()).exp()
    };
    0.5 * (geometric + shifted)
}

/// Smallest Fock index `M` such that the amplified marginal beyond `M` weighs
/// less than `tail_tol`.
fn exact_tail_index(n: usize, g_squared: f64, tail_tol: f64, limit: usize) -> Result<usize> {
    let mut cumulative = 0.0;
    for k in 0..limit {
        cumulative += amplified_marginal(n, g_squared, k);
        if k >= n && 1.0 - cumulative < tail_tol {
            return Ok(k);
        }
    }
    Err(Error::DimensionLimit { dim: limit * limit, max: crate::fock::DEFAULT_MAX_DIM })
}

/// Cutoff selection for an amplified NOON state.
///
/// For η = 0 the tail is computed from the exact marginal distribution. For
/// η > 0 (no closed form) the geometric bound with the noisier ratio
/// `n̄/(n̄+1)`, `n̄ = (G²-1)(1+η)`, is used and inflated by N.
pub fn select_cutoffs(spec: NoonSpec, params: AmplifierParams, policy: CutoffPolicy) -> Result<ModeCutoffs> {
    let n = spec.n();
    match policy {
        CutoffPolicy::Fixed(cutoffs) => {
            let cutoff = cutoffs.a().min(cutoffs.b());
            if cutoff <= n {
                return Err(Error::CutoffTooSmall { cutoff, n_photons: n });
            }
            Ok(cutoffs)
        }
        CutoffPolicy::Auto { tail_tol } => {
            if !(tail_tol > 0.0 && tail_tol < 1.0) {
                return Err(Error::InvalidParameter(format!("tail_tol must lie in (0, 1), got {tail_tol}")));
            }
            let limit = (crate::fock::DEFAULT_MAX_DIM as f64).sqrt() as usize;
            let top = if params.eta == 0.0 {
                exact_tail_index(n, params.g_squared, tail_tol, limit)?
            } else {
                let mean = (params.g_squared - 1.0) * (1.0 + params.eta);
                let q = mean / (mean + 1.0);
                let geometric = if q == 0.0 { 0.0 } else { ((tail_tol * (1.0 - q)).ln() / q.ln()).ceil().max(0.0) };
                2 * n + geometric as usize
            };
            let amplified = top + 1;
            match params.mode {
                ModeConfig::Symmetric => ModeCutoffs::new(amplified, amplified),
                ModeConfig::AsymmetricAOnly => ModeCutoffs::new(amplified, n + 1),
            }
        }
    }
}

fn ensure_closed_form(params: AmplifierParams, expected: ModeConfig) -> Result<()> {
    if params.eta != 0.0 {
        return Err(Error::NoClosedForm(params.eta));
    }
    if params.mode != expected {
        return Err(Error::InvalidParameter(format!("constructor expects {expected:?} amplification, params say {:?}", params.mode)));
    }
    Ok(())
}

fn finish(cutoffs: ModeCutoffs, matrix: Array2<C64>) -> TwoModeState {
    let trace: f64 = matrix.diag().iter().map(|z| z.re).sum();
    TwoModeState::from_parts_unchecked(cutoffs, matrix, (1.0 - trace).max(0.0))
}

/// NOON state after identical ideal amplifiers on both modes:
///
/// `ρ = 1/(2 N! G^{2N+4}) Σ_{n,m} q^{n+m} (a†ᴺ + b†ᴺ)|n,m><n,m|(aᴺ + bᴺ)`, `q = (G²-1)/G²`,
///
/// expanded into its two diagonal and two off-diagonal families.
pub fn amplify_noon_symmetric(spec: NoonSpec, params: AmplifierParams, cutoffs: ModeCutoffs) -> Result<TwoModeState> {
    ensure_closed_form(params, ModeConfig::Symmetric)?;
    let n = spec.n();
    let (ma, mb) = (cutoffs.a(), cutoffs.b());
    if ma.min(mb) <= n {
        return Err(Error::CutoffTooSmall { cutoff: ma.min(mb), n_photons: n });
    }
    let q = params.ratio();
    let ln_q = q.ln();
    let ln_pre = -(2.0f64.ln()) - ln_factorial(n) - (n + 2) as f64 * params.g_squared.ln();
    let rising: Vec<f64> = (0..ma.max(mb)).map(|k| ln_rising(k, n)).collect();

    let dim = cutoffs.dim();
    let mut matrix = Array2::<C64>::zeros((dim, dim));
    for i in 0..ma {
        for j in 0..mb {
            let a_fits = i + n < ma;
            let b_fits = j + n < mb;
            if !(a_fits || b_fits) {
                continue;
            }
            let ln_w = if i + j == 0 {
                ln_pre
            } else if q == 0.0 {
                continue;
            } else {
                ln_pre + (i + j) as f64 * ln_q
            };
            let shifted_a = cutoffs.index(i + n, j);
            let shifted_b = cutoffs.index(i, j + n);
            if a_fits {
                matrix[[shifted_a, shifted_a]].re += (ln_w + rising[i]).exp();
            }
            if b_fits {
                matrix[[shifted_b, shifted_b]].re += (ln_w + rising[j]).exp();
            }
            if a_fits && b_fits {
                let c = (ln_w + 0.5 * (rising[i] + rising[j])).exp();
                matrix[[shifted_a, shifted_b]].re += c;
                matrix[[shifted_b, shifted_a]].re += c;
            }
        }
    }
    Ok(finish(cutoffs, matrix))
}

/// NOON state after an ideal amplifier on mode a only:
///
/// `ρ = 1/(2 N! G^{2N+2}) Σ_n q^n [ (n+N)!/n! |n+N,0><n+N,0| + G^{2N} N! |n,N><n,N|
///      + G^N √((n+N)!/n! · N!) (|n+N,0><n,N| + h.c.) ]`.
pub fn amplify_noon_asymmetric(spec: NoonSpec, params: AmplifierParams, cutoffs: ModeCutoffs) -> Result<TwoModeState> {
    ensure_closed_form(params, ModeConfig::AsymmetricAOnly)?;
    let n = spec.n();
    let (ma, mb) = (cutoffs.a(), cutoffs.b());
    if ma.min(mb) <= n {
        return Err(Error::CutoffTooSmall { cutoff: ma.min(mb), n_photons: n });
    }
    let q = params.ratio();
    let ln_g2 = params.g_squared.ln();
    let ln_nfact = ln_factorial(n);
    let ln_pre = -(2.0f64.ln()) - ln_nfact - (n + 1) as f64 * ln_g2;

    let dim = cutoffs.dim();
    let mut matrix = Array2::<C64>::zeros((dim, dim));
    for i in 0..ma {
        let ln_w = if i == 0 {
            ln_pre
        } else if q == 0.0 {
            break;
        } else {
            ln_pre + i as f64 * q.ln()
        };
        let rising = ln_rising(i, n);
        let carried = cutoffs.index(i, n);
        matrix[[carried, carried]].re += (ln_w + n as f64 * ln_g2 + ln_nfact).exp();
        if i + n < ma {
            let shifted = cutoffs.index(i + n, 0);
            matrix[[shifted, shifted]].re += (ln_w + rising).exp();
            let c = (ln_w + 0.5 * n as f64 * ln_g2 + 0.5 * (rising + ln_nfact)).exp();
            matrix[[shifted, carried]].re += c;
            matrix[[carried, shifted]].re += c;
        }
    }
    Ok(finish(cutoffs, matrix))
}

/// Amplified NOON state for any η: the closed forms when η = 0, the
/// master-equation integrator otherwise.
pub fn amplify_noon(spec: NoonSpec, params: AmplifierParams, policy: CutoffPolicy) -> Result<TwoModeState> {
    let cutoffs = select_cutoffs(spec, params, policy)?;
    if params.eta == 0.0 {
        return match params.mode {
            ModeConfig::Symmetric => amplify_noon_symmetric(spec, params, cutoffs),
            ModeConfig::AsymmetricAOnly => amplify_noon_asymmetric(spec, params, cutoffs),
        };
    }
    let input = build_noon(spec, cutoffs)?;
    let lindblad_params = LindbladParams::from_eta(params.eta, params.mode.modes())?;
    let config = IntegratorConfig::new(params.g_squared)?;
    lindblad::evolve(&input, &lindblad_params, &config)
}

/// `a† b† ρ a b`, renormalized by the trace it would have without truncation.
///
/// Weight pushed past the top Fock level of either mode is dropped and shows
/// up in the output's `trace_deficit`.
pub fn photon_add_both(state: &TwoModeState) -> Result<TwoModeState> {
    let c = state.cutoffs();
    if c.a() < 2 || c.b() < 2 {
        return Err(Error::InvalidParameter(format!("photon addition needs cutoffs >= 2, got ({}, {})", c.a(), c.b())));
    }
    let rho = state.matrix();
    let dim = c.dim();
    let norm: f64 = (0..dim)
        .map(|i| {
            let (na, nb) = c.labels(i);
            rho[[i, i]].re * ((na + 1) * (nb + 1)) as f64
        })
        .sum();
    if !(norm > 0.0) {
        return Err(Error::ZeroTrace("photon addition to a zero state".into()));
    }
    let factor: Vec<f64> = (0..dim)
        .map(|i| {
            let (na, nb) = c.labels(i);
            ((na * nb) as f64).sqrt()
        })
        .collect();
    let source = |i: usize| -> Option<usize> {
        let (na, nb) = c.labels(i);
        (na >= 1 && nb >= 1).then(|| c.index(na - 1, nb - 1))
    };
    let mut out = Array2::<C64>::zeros((dim, dim));
    for i in 0..dim {
        let Some(si) = source(i) else { continue };
        for j in 0..dim {
            let Some(sj) = source(j) else { continue };
            out[[i, j]] = rho[[si, sj]] * (factor[i] * factor[j] / norm);
        }
    }
    let kept: f64 = out.diag().iter().map(|z| z.re).sum();
    if kept <= 0.0 {
        return Err(Error::ZeroTrace("all added weight fell beyond the cutoff".into()));
    }
    Ok(finish(c, out))
}
