//! Acceptance criteria, one line each. Run with `cargo test --test acceptance`;
//! pass criterion numbers as arguments to run a subset.

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use num_complex::Complex64 as C64;

use noonamp_core::channel::{amplified_vacuum, amplify_noon, select_cutoffs, AmplifierParams, CutoffPolicy, ModeConfig};
use noonamp_core::fock::{build_noon, ModeCutoffs, ModeSet, NoonSpec, TwoModeState};
use noonamp_core::gaussian::{
    amplify_covariance, bisect_threshold, gaussian_log_negativity, photon_added_cutoff, photon_added_tmsv_negativity_sweep,
    photon_addition_commutator_distance, threshold_asymmetric, threshold_symmetric, tmsv_covariance, PhotonAddedConfig, SqueezingSpec,
};
use noonamp_core::husimi::{check_scaling_law, noon_zero_candidates, zero_locus_report, QGrid};
use noonamp_core::lindblad::{evolve, IntegratorConfig, LindbladParams};
use noonamp_core::negativity::{log_negativity_block, log_negativity_dense};
use noonamp_core::sweep::{read_csv, run_sweep, CsvRow, Family, G2Range, SweepConfig, SweepRow};
use noonamp_core::Result;

type Outcome = Result<(bool, String)>;

const MODES: [ModeConfig; 2] = [ModeConfig::Symmetric, ModeConfig::AsymmetricAOnly];

/// Dimension above which the dense path of criterion 4 runs on a copy of the
/// grid point truncated to [`DENSE_CUTOFF_CAP`] per mode; a full-size dense
/// solve at N = 6, G² = 3 (dimension 9409) takes several minutes on one core.
const DENSE_DIM_CAP: usize = 2500;
const DENSE_CUTOFF_CAP: usize = 50;

fn ideal(n: usize, g2: f64, mode: ModeConfig, cutoff: CutoffPolicy) -> Result<TwoModeState> {
    amplify_noon(NoonSpec::new(n)?, AmplifierParams::ideal(g2, mode)?, cutoff)
}

fn auto(n: usize, g2: f64, mode: ModeConfig) -> Result<TwoModeState> {
    ideal(n, g2, mode, CutoffPolicy::default())
}

fn grid(start: f64, stop: f64, step: f64) -> Vec<f64> {
    G2Range::new(start, stop, step).unwrap().points()
}

fn unit_gain() -> Outcome {
    let mut worst: f64 = 0.0;
    for n in [1, 2, 4, 6] {
        for mode in MODES {
            let s = auto(n, 1.0, mode)?;
            for en in [log_negativity_dense(&s)?.log_negativity, log_negativity_block(&s)?.log_negativity] {
                worst = worst.max((en - 1.0).abs());
            }
        }
    }
    Ok((worst <= 1e-9, format!("max |E_N - 1| = {worst:.2e} (N in 1,2,4,6; both modes; dense and block)")))
}

fn vacuum_thermal() -> Outcome {
    let v = amplified_vacuum(2.0, 80)?;
    let mean_err = (v.mean() - 1.0).abs();
    let pop_err = v.populations.iter().enumerate().map(|(n, p)| (p - 0.5f64.powi(n as i32 + 1)).abs()).fold(0.0, f64::max);
    // independent route: integrate the master equation from |0,0>
    let vac = TwoModeState::fock(ModeCutoffs::new(60, 1)?, 0, 0)?;
    let evolved = evolve(&vac, &LindbladParams::from_eta(0.0, ModeSet::A_ONLY)?, &IntegratorConfig::new(2.0)?.with_step(5e-4))?;
    let oracle_mean_err = (evolved.mean_photons().0 - 1.0).abs();
    let oracle_pop_err = evolved.marginal_a().iter().enumerate().map(|(n, p)| (p - 0.5f64.powi(n as i32 + 1)).abs()).fold(0.0, f64::max);
    Ok((
        mean_err <= 1e-10 && pop_err <= 1e-12 && oracle_mean_err <= 1e-10 && oracle_pop_err <= 1e-12,
        format!(
            "|mean - 1| = {mean_err:.1e}, max |p_n - 2^-(n+1)| = {pop_err:.1e}; master equation: {oracle_mean_err:.1e}, {oracle_pop_err:.1e}"
        ),
    ))
}

fn oracle_equivalence() -> Outcome {
    let (n, g2) = (2, 1.5);
    let mut parts = Vec::new();
    let mut worst: f64 = 0.0;
    for mode in MODES {
        let closed = auto(n, g2, mode)?;
        let params = LindbladParams::from_eta(0.0, mode.modes())?;
        let evolved = evolve(&build_noon(NoonSpec::new(n)?, closed.cutoffs())?, &params, &IntegratorConfig::new(g2)?)?;
        let d = closed.trace_distance(&evolved)?;
        worst = worst.max(d);
        parts.push(format!("{mode:?} {d:.2e}"));
    }
    Ok((worst <= 1e-6, format!("trace distance at N = 2, G^2 = 1.5: {}", parts.join(", "))))
}

fn method_agreement() -> Outcome {
    let (mut worst, mut points, mut capped): (f64, usize, usize) = (0.0, 0, 0);
    for mode in MODES {
        for n in [2, 4, 6] {
            for g2 in grid(1.0, 3.0, 0.1) {
                let full = auto(n, g2, mode)?;
                let block_full = log_negativity_block(&full)?.log_negativity;
                let c = full.cutoffs();
                let s = if c.dim() > DENSE_DIM_CAP {
                    capped += 1;
                    let cap = ModeCutoffs::new(c.a().min(DENSE_CUTOFF_CAP), c.b().min(DENSE_CUTOFF_CAP))?;
                    ideal(n, g2, mode, CutoffPolicy::Fixed(cap))?
                } else {
                    full
                };
                let diff = log_negativity_dense(&s)?.log_negativity - log_negativity_block(&s)?.log_negativity;
                worst = worst.max(diff.abs());
                // the block result at full cutoffs must be finite and within [0, 1]
                if !(0.0..=1.0 + 1e-12).contains(&block_full) {
                    return Ok((false, format!("block E_N {block_full} out of range at N = {n}, G^2 = {g2}")));
                }
                points += 1;
            }
        }
    }
    Ok((
        worst <= 1e-9,
        format!(
            "max |block - dense| = {worst:.2e} over {points} points; {capped} points compared at per-mode cutoff {DENSE_CUTOFF_CAP} (full-size dense exceeds the runtime budget)"
        ),
    ))
}

fn gaussian_thresholds() -> Outcome {
    let mut worst: f64 = 0.0;
    for r in [0.25, 0.5, 1.0] {
        let spec = SqueezingSpec::new(r)?;
        for eta in [0.0, 0.25, 1.0] {
            let b = bisect_threshold(spec, eta, ModeSet::BOTH, 1e4)?.unwrap_or(f64::INFINITY);
            worst = worst.max((b - threshold_symmetric(spec, eta)?).abs());
        }
    }
    let mut worst_asym: f64 = 0.0;
    for eta in [0.25, 0.5, 1.0] {
        let closed = threshold_asymmetric(eta)?.value().unwrap_or(f64::INFINITY);
        let b = bisect_threshold(SqueezingSpec::new(0.5)?, eta, ModeSet::A_ONLY, 1e4)?.unwrap_or(f64::INFINITY);
        worst_asym = worst_asym.max((b - closed).abs());
    }
    let mut min_ideal = f64::INFINITY;
    for r in [0.25, 0.5, 1.0] {
        let tmsv = tmsv_covariance(SqueezingSpec::new(r)?);
        for g2 in grid(1.0, 10.0, 0.1) {
            min_ideal = min_ideal.min(gaussian_log_negativity(&amplify_covariance(&tmsv, g2, 0.0, ModeSet::A_ONLY)?));
        }
    }
    Ok((
        worst <= 1e-6 && worst_asym <= 1e-6 && min_ideal > 0.0,
        format!("symmetric {worst:.1e}, mode-a-only {worst_asym:.1e}; ideal mode-a-only min E_N up to G^2 = 10: {min_ideal:.3e}"),
    ))
}

fn scaling_law() -> Outcome {
    let n = 2;
    let mut worst: f64 = 0.0;
    for g2 in [1.2, 2.0] {
        for mode in MODES {
            let auto_c = select_cutoffs(NoonSpec::new(n)?, AmplifierParams::ideal(g2, mode)?, CutoffPolicy::default())?;
            // the unamplified mode needs room for the phase-space grid
            let c = ModeCutoffs::new(auto_c.a(), auto_c.b().max(auto_c.a()))?;
            let out = ideal(n, g2, mode, CutoffPolicy::Fixed(c))?;
            let input = build_noon(NoonSpec::new(n)?, c)?;
            let radius = 2.0f64.min((c.a().min(c.b()) as f64 / 4.0).sqrt() * 0.95);
            worst = worst.max(check_scaling_law(&input, &out, g2, mode, &QGrid::disk(radius, 13))?);
        }
    }
    Ok((worst < 1e-8, format!("max grid error {worst:.2e} (N = 2, G^2 in 1.2, 2.0, both modes)")))
}

fn zero_locus() -> Outcome {
    let alphas = [C64::new(0.7, 0.0), C64::new(0.5, 0.4), C64::new(0.0, 1.0)];
    let (mut ok, mut worst_zero, mut min_control) = (true, 0.0f64, f64::INFINITY);
    for n in [2, 4] {
        for g2 in [1.5, 2.5] {
            let candidates: Vec<(C64, C64)> = alphas.iter().flat_map(|&a| noon_zero_candidates(n, a)).collect();
            let report = zero_locus_report(NoonSpec::new(n)?, g2, &candidates)?;
            ok &= report.preserved;
            worst_zero = worst_zero.max(report.zero_values.iter().fold(0.0, |m, &q| m.max(q / report.grid_max)));
            min_control = min_control.min(report.control_values.iter().fold(f64::INFINITY, |m, &q| m.min(q / report.grid_max)));
        }
    }
    Ok((ok, format!("largest Q at a zero {worst_zero:.1e} of grid max, smallest control {min_control:.1e} (N in 2,4; G^2 in 1.5, 2.5)")))
}

fn golden_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(name)
}

fn compare_golden(rows: &[SweepRow], golden: &[CsvRow]) -> std::result::Result<f64, String> {
    if rows.len() != golden.len() {
        return Err(format!("{} rows, golden has {}", rows.len(), golden.len()));
    }
    let mut worst: f64 = 0.0;
    for (r, g) in rows.iter().zip(golden) {
        if r.family.as_str() != g.family || r.n != g.n || r.cutoff_a != g.cutoff_a || r.cutoff_b != g.cutoff_b {
            return Err(format!("row mismatch at N = {:?}, G^2 = {}", r.n, r.g_squared));
        }
        let pairs = [
            (r.g_squared, g.g_squared),
            (r.log_negativity, g.log_negativity),
            (r.neg_sum, g.neg_sum),
            (r.min_eigenvalue.unwrap_or(0.0), g.min_eigenvalue.unwrap_or(0.0)),
            (r.trace_deficit.unwrap_or(0.0), g.trace_deficit.unwrap_or(0.0)),
        ];
        for (x, y) in pairs {
            worst = worst.max((x - y).abs());
        }
    }
    Ok(worst)
}

fn figure_properties() -> Outcome {
    let sym = run_sweep(&SweepConfig { family: Family::NoonSymmetric, ..SweepConfig::default() })?;
    let asym = run_sweep(&SweepConfig { family: Family::NoonAsymmetric, ..SweepConfig::default() })?;
    let increases = [&sym, &asym]
        .iter()
        .flat_map(|rows| rows.windows(2))
        .filter(|w| w[0].n == w[1].n && w[1].log_negativity > w[0].log_negativity + 1e-12)
        .count();
    let misordered = sym
        .iter()
        .zip(&asym)
        .filter(|(s, a)| s.n != a.n || s.g_squared != a.g_squared || a.log_negativity < s.log_negativity - 1e-12)
        .count();
    let mut golden_err: f64 = 0.0;
    for (rows, file) in [(&sym, "noon_symmetric.csv"), (&asym, "noon_asymmetric.csv")] {
        let golden = read_csv(std::fs::File::open(golden_path(file))?)?;
        match compare_golden(rows, &golden) {
            Ok(e) => golden_err = golden_err.max(e),
            Err(msg) => return Ok((false, format!("{file}: {msg}"))),
        }
    }
    Ok((
        increases == 0 && misordered == 0 && golden_err <= 1e-9,
        format!(
            "{} rows per mode; {increases} increases; {misordered} rows with asymmetric < symmetric; golden deviation {golden_err:.1e}",
            sym.len()
        ),
    ))
}

fn photon_added_comparison() -> Outcome {
    let r = 0.5;
    let spec = SqueezingSpec::new(r)?;
    let threshold = threshold_symmetric(spec, 0.0)?;
    let mut gains = vec![1.0, 1.2];
    gains.extend(grid(1.4, 1.5, 0.0025));
    let rows = photon_added_tmsv_negativity_sweep(spec, &gains, PhotonAddedConfig::default())?;
    let crossing = rows.iter().find(|(_, en, _)| en.log_negativity < 1e-3).map(|(g, _, _)| *g);
    let noon = log_negativity_block(&auto(2, threshold, ModeConfig::Symmetric)?)?.log_negativity;
    let Some(crossing) = crossing else {
        return Ok((false, "photon-added E_N never fell below 1e-3".into()));
    };
    let rel = (crossing - threshold).abs() / threshold;
    Ok((
        rel <= 0.02 && noon > 0.05,
        format!(
            "photon-added E_N < 1e-3 first at G^2 = {crossing:.4} ({:.2}% from {threshold:.5}); NOON N = 2 there: E_N = {noon:.4}",
            100.0 * rel
        ),
    ))
}

fn commutation() -> Outcome {
    let spec = SqueezingSpec::new(0.5)?;
    let d = photon_addition_commutator_distance(spec, 1.3, photon_added_cutoff(spec, 1.3), 2e-3)?;
    Ok((d <= 1e-6, format!("trace distance {d:.2e} at r = 0.5, G^2 = 1.3")))
}

type Criterion = (u32, &'static str, fn() -> Outcome);

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        (1, "unit-gain entanglement", unit_gain),
        (2, "vacuum to thermal", vacuum_thermal),
        (3, "closed form vs master equation", oracle_equivalence),
        (4, "method agreement", method_agreement),
        (5, "Gaussian thresholds", gaussian_thresholds),
        (6, "Husimi scaling law", scaling_law),
        (7, "zero-locus preservation", zero_locus),
        (8, "sweep properties and golden data", figure_properties),
        (9, "photon-added comparison", photon_added_comparison),
        (10, "commutation identity", commutation),
    ];
    let selected: Vec<u32> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let mut failures = 0;
    for (id, title, run) in criteria {
        if !selected.is_empty() && !selected.contains(&id) {
            continue;
        }
        let start = Instant::now();
        let (passed, detail) = run().unwrap_or_else(|e| (false, format!("error: {e}")));
        let verdict = if passed { "PASS" } else { "FAIL" };
        println!("criterion {id:>2} {verdict} {title}: {detail} [{:.1}s]", start.elapsed().as_secs_f64());
        failures += usize::from(!passed);
    }
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failures} acceptance criteria failed");
        ExitCode::FAILURE
    }
}
