//! Husimi Q function `Q(α, β) = <α,β|ρ|α,β> / π²` on grids of coherent amplitudes.

use std::f64::consts::PI;
use std::io::Write;

use ndarray::Array2;
use num_complex::Complex64 as C64;

use crate::channel::{amplify_noon_symmetric, select_cutoffs, AmplifierParams, CutoffPolicy, ModeConfig};
use crate::error::{Error, Result};
use crate::fock::{ln_factorial, ModeCutoffs, NoonSpec, TwoModeState};
use crate::sweep::format_sig;
use crate::tolerances::{Q_CLAMP, Q_ZERO_RELATIVE};

pub const DEFAULT_HALF_WIDTH: f64 = 3.0;
pub const DEFAULT_POINTS: usize = 41;

/// Q values on the product of two amplitude lists: `values[[i, j]] = Q(alpha[i], beta[j])`.
#[derive(Clone, Debug, PartialEq)]
pub struct QGrid {
    pub alpha: Vec<C64>,
    pub beta: Vec<C64>,
    pub values: Array2<f64>,
    /// Spacing of a uniform square lattice, when the samples form one.
    pub spacing: Option<f64>,
}

fn plane(half_width: f64, points: usize) -> (Vec<C64>, Option<f64>) {
    if points < 2 {
        return (vec![C64::new(0.0, 0.0)], None);
    }
    let h = 2.0 * half_width / (points - 1) as f64;
    let axis: Vec<f64> = (0..points).map(|k| -half_width + k as f64 * h).collect();
    let samples = axis.iter().flat_map(|&re| axis.iter().map(move |&im| C64::new(re, im))).collect();
    (samples, Some(h))
}

impl QGrid {
    pub fn new(alpha: Vec<C64>, beta: Vec<C64>) -> Self {
        let values = Array2::zeros((alpha.len(), beta.len()));
        Self { alpha, beta, values, spacing: None }
    }

    /// `points × points` samples over `[-half_width, half_width]²` in each plane.
    pub fn square(half_width: f64, points: usize) -> Self {
        let (alpha, spacing) = plane(half_width, points);
        let beta = alpha.clone();
        Self { spacing, ..Self::new(alpha, beta) }
    }

    /// The square lattice restricted to `|z| <= radius` in each plane.
    pub fn disk(radius: f64, points: usize) -> Self {
        let (samples, _) = plane(radius, points);
        let inside: Vec<C64> = samples.into_iter().filter(|z| z.norm() <= radius + 1e-12).collect();
        Self::new(inside.clone(), inside)
    }

    /// The default 41×41-per-plane lattice over `[-3, 3]²`, shrunk until the
    /// corners satisfy the cutoff guard.
    pub fn default_for(cutoffs: ModeCutoffs) -> Self {
        let limit = (cutoffs.a().min(cutoffs.b()) as f64 / 8.0).sqrt();
        Self::square(DEFAULT_HALF_WIDTH.min(limit), DEFAULT_POINTS)
    }

    pub fn max_value(&self) -> f64 {
        self.values.iter().copied().fold(0.0, f64::max)
    }

    /// `h⁴ Σ Q` for uniform square lattices.
    pub fn riemann_mass(&self) -> Option<f64> {
        self.spacing.map(|h| h.powi(4) * self.values.sum())
    }

    pub fn scaled(&self, alpha_factor: f64, beta_factor: f64) -> Self {
        Self::new(self.alpha.iter().map(|z| z * alpha_factor).collect(), self.beta.iter().map(|z| z * beta_factor).collect())
    }

    /// CSV with columns `re_alpha,im_alpha,re_beta,im_beta,q_value`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["re_alpha", "im_alpha", "re_beta", "im_beta", "q_value"])?;
        for (i, a) in self.alpha.iter().enumerate() {
            for (j, b) in self.beta.iter().enumerate() {
                w.write_record([format_sig(a.re), format_sig(a.im), format_sig(b.re), format_sig(b.im), format_sig(self.values[[i, j]])])?;
            }
        }
        w.flush()?;
        Ok(())
    }
}

/// Truncated coherent-state amplitudes `<n|z> = e^{-|z|²/2} zⁿ / √n!`.
fn coherent_coefficients(z: C64, cutoff: usize, ln_fact: &[f64]) -> Vec<C64> {
    let r2 = z.norm_sqr();
    if r2 == 0.0 {
        let mut v = vec![C64::new(0.0, 0.0); cutoff];
        v[0] = C64::new(1.0, 0.0);
        return v;
    }
    let (ln_r, theta) = (z.norm().ln(), z.arg());
    (0..cutoff)
        .map(|n| {
            let modulus = (-0.5 * r2 + n as f64 * ln_r - 0.5 * ln_fact[n]).exp();
            C64::from_polar(modulus, n as f64 * theta)
        })
        .collect()
}

fn guard(which: char, samples: &[C64], cutoff: usize) -> Result<()> {
    let limit = cutoff as f64 / 4.0;
    let value = samples.iter().map(|z| z.norm_sqr()).fold(0.0, f64::max);
    // lattice corners built to sit on the limit may overshoot it by rounding
    if value > limit * (1.0 + 1e-12) {
        return Err(Error::AmplitudeTooLarge { which, value, limit });
    }
    Ok(())
}

/// Fills `grid.values` with the Q function of `state`.
///
/// Amplitudes must satisfy `|α|² <= cutoff_a / 4` and `|β|² <= cutoff_b / 4`.
pub fn q_evaluate(state: &TwoModeState, grid: &QGrid) -> Result<QGrid> {
    let c = state.cutoffs();
    guard('a', &grid.alpha, c.a())?;
    guard('b', &grid.beta, c.b())?;
    let ln_fact: Vec<f64> = (0..c.a().max(c.b())).map(ln_factorial).collect();

    let rho = state.matrix();
    let nonzero: Vec<(usize, usize, usize, usize, C64)> = rho
        .indexed_iter()
        .filter(|(_, z)| **z != C64::new(0.0, 0.0))
        .map(|((i, j), z)| {
            let (ia, ib) = c.labels(i);
            let (ja, jb) = c.labels(j);
            (ia, ib, ja, jb, *z)
        })
        .collect();
    let beta_coeffs: Vec<Vec<C64>> = grid.beta.iter().map(|&b| coherent_coefficients(b, c.b(), &ln_fact)).collect();

    let mb = c.b();
    let mut values = Array2::zeros((grid.alpha.len(), grid.beta.len()));
    let mut reduced = vec![C64::new(0.0, 0.0); mb * mb];
    for (ai, &alpha) in grid.alpha.iter().enumerate() {
        let ca = coherent_coefficients(alpha, c.a(), &ln_fact);
        // contract mode a: W[m, m'] = Σ conj(c_n) ρ[(n,m),(n',m')] c_n'
        reduced.iter_mut().for_each(|z| *z = C64::new(0.0, 0.0));
        for &(ia, ib, ja, jb, z) in &nonzero {
            reduced[ib * mb + jb] += ca[ia].conj() * z * ca[ja];
        }
        for (bi, cb) in beta_coeffs.iter().enumerate() {
            let mut q = 0.0;
            for m in 0..mb {
                let mut row = C64::new(0.0, 0.0);
                for mp in 0..mb {
                    row += reduced[m * mb + mp] * cb[mp];
                }
                q += (cb[m].conj() * row).re;
            }
            q /= PI * PI;
            if q < 0.0 {
                if q < -Q_CLAMP {
                    return Err(Error::InvalidState(format!("negative Q value {q:e} at alpha = {alpha}, beta = {}", grid.beta[bi])));
                }
                q = 0.0;
            }
            values[[ai, bi]] = q;
        }
    }
    Ok(QGrid { values, ..grid.clone() })
}

/// Largest deviation from `Q_out(α, β) = Q_in(α/G, β/G) / G⁴` (symmetric) or
/// `Q_out(α, β) = Q_in(α/G, β) / G²` (mode a only) over `grid`.
pub fn check_scaling_law(state_in: &TwoModeState, state_out: &TwoModeState, g_squared: f64, mode: ModeConfig, grid: &QGrid) -> Result<f64> {
    let g = g_squared.sqrt();
    let (beta_factor, scale) = match mode {
        ModeConfig::Symmetric => (1.0 / g, 1.0 / (g_squared * g_squared)),
        ModeConfig::AsymmetricAOnly => (1.0, 1.0 / g_squared),
    };
    let out = q_evaluate(state_out, grid)?;
    let input = q_evaluate(state_in, &grid.scaled(1.0 / g, beta_factor))?;
    Ok(out.values.iter().zip(input.values.iter()).map(|(o, i)| (o - scale * i).abs()).fold(0.0, f64::max))
}

/// Zeros of `|α^N + β^N|²` on the circle `|β| = |α|`: `β = α e^{iπ(2k+1)/N}`.
pub fn noon_zero_candidates(n: usize, alpha: C64) -> Vec<(C64, C64)> {
    (0..n)
        .map(|k| {
            let phase = C64::from_polar(1.0, PI * (2 * k + 1) as f64 / n as f64);
            (alpha, alpha * phase)
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct ZeroLocusReport {
    pub grid_max: f64,
    /// Q_out at each candidate zero scaled by G.
    pub zero_values: Vec<f64>,
    /// Q_out at the scaled candidates with β stretched by 5 %.
    pub control_values: Vec<f64>,
    pub threshold: f64,
    pub preserved: bool,
}

/// Evaluates the symmetrically amplified NOON state's Q function at
/// `G·(α, β)` for each zero `(α, β)` of the input Q function, and at perturbed
/// controls `G·(α, 1.05 β)`.
pub fn zero_locus_report(spec: NoonSpec, g_squared: f64, candidates: &[(C64, C64)]) -> Result<ZeroLocusReport> {
    let params = AmplifierParams::ideal(g_squared, ModeConfig::Symmetric)?;
    let auto = select_cutoffs(spec, params, CutoffPolicy::default())?;
    let needed = (4.0 * zero_locus_reach(g_squared, candidates)).ceil() as usize + 1;
    let cutoffs = ModeCutoffs::new(auto.a().max(needed), auto.b().max(needed))?;
    zero_locus_report_for(&amplify_noon_symmetric(spec, params, cutoffs)?, g_squared, candidates)
}

/// Largest `|α|²` or `|β|²` the zero-locus check samples.
pub fn zero_locus_reach(g_squared: f64, candidates: &[(C64, C64)]) -> f64 {
    candidates.iter().map(|(a, b)| g_squared * a.norm_sqr().max(b.norm_sqr() * 1.05 * 1.05)).fold(0.0, f64::max)
}

/// Zero-locus check against an already amplified state.
pub fn zero_locus_report_for(state: &TwoModeState, g_squared: f64, candidates: &[(C64, C64)]) -> Result<ZeroLocusReport> {
    let g = g_squared.sqrt();
    let zeros: Vec<(C64, C64)> = candidates.iter().map(|&(a, b)| (a * g, b * g)).collect();
    let controls: Vec<(C64, C64)> = zeros.iter().map(|&(a, b)| (a, b * 1.05)).collect();
    let at = |points: &[(C64, C64)]| -> Result<Vec<f64>> {
        points.iter().map(|&(a, b)| Ok(q_evaluate(state, &QGrid::new(vec![a], vec![b]))?.values[[0, 0]])).collect()
    };
    let zero_values = at(&zeros)?;
    let control_values = at(&controls)?;
    let c = state.cutoffs();
    let survey_width = DEFAULT_HALF_WIDTH.min((c.a().min(c.b()) as f64 / 8.0).sqrt());
    let survey = q_evaluate(state, &QGrid::square(survey_width, 15))?;
    let grid_max = zero_values.iter().chain(&control_values).copied().fold(survey.max_value(), f64::max);
    let threshold = Q_ZERO_RELATIVE * grid_max;
    let preserved = zero_values.iter().all(|&q| q < threshold) && control_values.iter().all(|&q| q > threshold);
    Ok(ZeroLocusReport { grid_max, zero_values, control_values, threshold, preserved })
}

pub fn check_zero_locus(spec: NoonSpec, g_squared: f64, candidates: &[(C64, C64)]) -> Result<bool> {
    Ok(zero_locus_report(spec, g_squared, candidates)?.preserved)
}

/// Closed-form Q functions of the ideal and amplified NOON states.
pub mod analytic {
    use super::*;

    pub fn noon_input(n: usize, alpha: C64, beta: C64) -> f64 {
        let amp = alpha.powu(n as u32) + beta.powu(n as u32);
        let envelope = (-(alpha.norm_sqr() + beta.norm_sqr())).exp();
        amp.norm_sqr() * envelope / (2.0 * ln_factorial(n).exp() * PI * PI)
    }

    pub fn noon_symmetric(n: usize, g_squared: f64, alpha: C64, beta: C64) -> f64 {
        let g = g_squared.sqrt();
        noon_input(n, alpha / g, beta / g) / (g_squared * g_squared)
    }

    pub fn noon_asymmetric(n: usize, g_squared: f64, alpha: C64, beta: C64) -> f64 {
        let g = g_squared.sqrt();
        noon_input(n, alpha / g, beta) / g_squared
    }
}
