//! Invariant battery over a fixed small grid, with optional fault injection
//! for testing the battery itself.

use ndarray::Array2;
use num_complex::Complex64 as C64;
use serde::Serialize;

use crate::channel::{amplified_vacuum, amplify_noon, select_cutoffs, AmplifierParams, CutoffPolicy, ModeConfig};
use crate::error::Result;
use crate::fock::{build_noon, ModeSet, NoonSpec, TwoModeState};
use crate::gaussian::{bisect_threshold, threshold_asymmetric, threshold_symmetric, SqueezingSpec};
use crate::husimi::{check_scaling_law, noon_zero_candidates, zero_locus_report_for, QGrid};
use crate::lindblad::{evolve, IntegratorConfig, LindbladParams};
use crate::negativity::{log_negativity_block, log_negativity_dense};
use crate::tolerances::Tolerances;

/// Deliberate defects the battery must detect.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Fault {
    /// Negates the `|n+N, m><n, m+N|` coherences of the symmetric closed form.
    FlipSymmetricCoherenceSign,
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct VerifyConfig {
    pub cutoff: CutoffPolicy,
    pub fault: Option<Fault>,
    pub tolerances: Tolerances,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub passed: bool,
    /// Worst observed value of the checked quantity.
    pub value: Option<f64>,
    pub limit: Option<f64>,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VerifyReport {
    pub passed: bool,
    pub checks: Vec<CheckOutcome>,
}

impl VerifyReport {
    pub fn failed(&self) -> impl Iterator<Item = &CheckOutcome> {
        self.checks.iter().filter(|c| !c.passed)
    }

    pub fn check(&self, name: &str) -> Option<&CheckOutcome> {
        self.checks.iter().find(|c| c.name == name)
    }
}

const MODES: [ModeConfig; 2] = [ModeConfig::Symmetric, ModeConfig::AsymmetricAOnly];

type CheckFn<'a> = Box<dyn Fn() -> Result<(f64, String)> + 'a>;

pub fn verify(config: &VerifyConfig) -> VerifyReport {
    let tol = config.tolerances;
    let checks: Vec<(&'static str, Option<f64>, CheckFn<'_>)> = vec![
        ("unit_gain_log_negativity", Some(tol.method_agreement), Box::new(|| unit_gain(config))),
        ("vacuum_to_thermal", Some(1e-10), Box::new(vacuum_thermal)),
        ("trace_deficit", Some(tol.trace_deficit_budget), Box::new(|| trace_deficit(config))),
        ("oracle_symmetric", Some(tol.oracle_trace_distance), Box::new(|| oracle(config, ModeConfig::Symmetric))),
        ("oracle_asymmetric", Some(tol.oracle_trace_distance), Box::new(|| oracle(config, ModeConfig::AsymmetricAOnly))),
        ("method_agreement", Some(tol.method_agreement), Box::new(|| method_agreement(config))),
        ("monotone_and_ordered", None, Box::new(|| monotone_and_ordered(config))),
        ("scaling_law", Some(tol.scaling_law), Box::new(|| scaling_law(config))),
        ("zero_locus", None, Box::new(|| zero_locus(config))),
        ("gaussian_thresholds", Some(tol.threshold_agreement), Box::new(gaussian_thresholds)),
    ];
    let checks: Vec<CheckOutcome> = checks
        .into_iter()
        .map(|(name, limit, run)| match run() {
            Ok((value, detail)) => CheckOutcome {
                name,
                passed: value.is_finite() && limit.map_or(value == 0.0, |l| value <= l),
                value: Some(value),
                limit,
                detail,
            },
            Err(e) => CheckOutcome { name, passed: false, value: None, limit, detail: format!("error: {e}") },
        })
        .collect();
    VerifyReport { passed: checks.iter().all(|c| c.passed), checks }
}

fn build(config: &VerifyConfig, n: usize, g_squared: f64, mode: ModeConfig) -> Result<TwoModeState> {
    let state = amplify_noon(NoonSpec::new(n)?, AmplifierParams::ideal(g_squared, mode)?, config.cutoff)?;
    match (config.fault, mode) {
        (Some(Fault::FlipSymmetricCoherenceSign), ModeConfig::Symmetric) => flip_coherences(&state, n),
        _ => Ok(state),
    }
}

fn flip_coherences(state: &TwoModeState, n: usize) -> Result<TwoModeState> {
    let c = state.cutoffs();
    let mut m: Array2<C64> = state.matrix().clone();
    for ((i, j), z) in m.indexed_iter_mut() {
        let ((ra, rb), (ca, cb)) = (c.labels(i), c.labels(j));
        if ra == ca + n && cb == rb + n || ca == ra + n && rb == cb + n {
            *z = -*z;
        }
    }
    TwoModeState::from_matrix(c, m)
}

fn unit_gain(config: &VerifyConfig) -> Result<(f64, String)> {
    let mut worst: f64 = 0.0;
    for n in [1, 2, 4] {
        for mode in MODES {
            let s = build(config, n, 1.0, mode)?;
            for en in [log_negativity_dense(&s)?.log_negativity, log_negativity_block(&s)?.log_negativity] {
                worst = worst.max((en - 1.0).abs());
            }
        }
    }
    Ok((worst, "max |E_N - 1| over N in {1,2,4}, both modes, both methods".into()))
}

fn vacuum_thermal() -> Result<(f64, String)> {
    let v = amplified_vacuum(2.0, 80)?;
    let pop_err = v.populations.iter().enumerate().map(|(n, p)| (p - 0.5f64.powi(n as i32 + 1)).abs()).fold(0.0, f64::max);
    Ok(((v.mean() - 1.0).abs().max(pop_err), "G^2 = 2: |mean - 1| and populations 2^-(n+1)".into()))
}

fn trace_deficit(config: &VerifyConfig) -> Result<(f64, String)> {
    let mut worst: f64 = 0.0;
    for g2 in [1.5, 2.0] {
        for mode in MODES {
            worst = worst.max(build(config, 2, g2, mode)?.trace_deficit());
        }
    }
    Ok((worst, "N = 2, G^2 in {1.5, 2}, both modes".into()))
}

fn oracle(config: &VerifyConfig, mode: ModeConfig) -> Result<(f64, String)> {
    let (n, g2) = (2, 1.5);
    let closed = build(config, n, g2, mode)?;
    let cutoffs = select_cutoffs(NoonSpec::new(n)?, AmplifierParams::ideal(g2, mode)?, config.cutoff)?;
    let params = LindbladParams::from_eta(0.0, mode.modes())?;
    let evolved = evolve(&build_noon(NoonSpec::new(n)?, cutoffs)?, &params, &IntegratorConfig::new(g2)?)?;
    Ok((closed.trace_distance(&evolved)?, format!("N = {n}, G^2 = {g2}, cutoffs {:?}", cutoffs)))
}

fn method_agreement(config: &VerifyConfig) -> Result<(f64, String)> {
    let mut worst: f64 = 0.0;
    for n in [2, 4] {
        for g2 in [1.5, 2.0] {
            for mode in MODES {
                let s = build(config, n, g2, mode)?;
                let diff = log_negativity_dense(&s)?.log_negativity - log_negativity_block(&s)?.log_negativity;
                worst = worst.max(diff.abs());
            }
        }
    }
    Ok((worst, "N in {2,4}, G^2 in {1.5, 2}, both modes".into()))
}

/// Counts violations of monotone decrease and of asymmetric >= symmetric.
fn monotone_and_ordered(config: &VerifyConfig) -> Result<(f64, String)> {
    let gains = [1.0, 1.25, 1.5, 1.75, 2.0];
    let curve = |mode| -> Result<Vec<f64>> {
        gains.iter().map(|&g2| Ok(log_negativity_block(&build(config, 2, g2, mode)?)?.log_negativity)).collect()
    };
    let sym = curve(ModeConfig::Symmetric)?;
    let asym = curve(ModeConfig::AsymmetricAOnly)?;
    let increases = [&sym, &asym].iter().flat_map(|c| c.windows(2)).filter(|w| w[1] > w[0] + 1e-12).count();
    let misordered = sym.iter().zip(&asym).filter(|&(s, a)| *a < *s - 1e-12).count();
    Ok((
        (increases + misordered) as f64,
        format!("N = 2 on {gains:?}: {increases} increases, {misordered} rows with asymmetric < symmetric"),
    ))
}

fn scaling_law(config: &VerifyConfig) -> Result<(f64, String)> {
    let (n, g2) = (2, 1.5);
    let mut worst: f64 = 0.0;
    for mode in MODES {
        let out = build(config, n, g2, mode)?;
        let c = out.cutoffs();
        let input = build_noon(NoonSpec::new(n)?, c)?;
        let radius = 2.0f64.min(0.95 * (c.a().min(c.b()) as f64 / 4.0).sqrt());
        worst = worst.max(check_scaling_law(&input, &out, g2, mode, &QGrid::disk(radius, 9))?);
    }
    Ok((worst, format!("N = {n}, G^2 = {g2}, both modes")))
}

/// 0 when every candidate zero survives and every control stays positive.
fn zero_locus(config: &VerifyConfig) -> Result<(f64, String)> {
    let (n, g2) = (2, 1.5);
    let candidates = noon_zero_candidates(n, C64::new(0.8, 0.3));
    let report = zero_locus_report_for(&build(config, n, g2, ModeConfig::Symmetric)?, g2, &candidates)?;
    let misses = report.zero_values.iter().filter(|&&q| q >= report.threshold).count()
        + report.control_values.iter().filter(|&&q| q <= report.threshold).count();
    Ok((
        misses as f64,
        format!(
            "N = {n}, G^2 = {g2}: max zero value {:e}, min control {:e}, threshold {:e}",
            report.zero_values.iter().copied().fold(0.0, f64::max),
            report.control_values.iter().copied().fold(f64::INFINITY, f64::min),
            report.threshold
        ),
    ))
}

fn gaussian_thresholds() -> Result<(f64, String)> {
    let mut worst: f64 = 0.0;
    for r in [0.25, 0.5, 1.0] {
        let spec = SqueezingSpec::new(r)?;
        for eta in [0.0, 0.25] {
            let bisected = bisect_threshold(spec, eta, ModeSet::BOTH, 1e4)?.unwrap_or(f64::INFINITY);
            worst = worst.max((bisected - threshold_symmetric(spec, eta)?).abs());
        }
    }
    let spec = SqueezingSpec::new(0.5)?;
    for eta in [0.25, 0.5] {
        let closed = threshold_asymmetric(eta)?.value().unwrap_or(f64::INFINITY);
        let bisected = bisect_threshold(spec, eta, ModeSet::A_ONLY, 1e4)?.unwrap_or(f64::INFINITY);
        worst = worst.max((bisected - closed).abs());
    }
    Ok((worst, "bisection versus closed forms, symmetric and mode-a-only".into()))
}
