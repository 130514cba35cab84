//! Fixed-step RK4 integration of the two-level-atom amplifier master equation
//!
//! `dρ/dt = -κN₁(aa†ρ - 2a†ρa + ρaa†) - κN₂(a†aρ - 2aρa† + ρa†a)`
//!
//! applied independently to each selected mode, in truncated Fock space.
//! The Liouvillian acts matrix-free and only on the entries reachable from the
//! initial support, which for the structured states here is a small fraction
//! of the full matrix.

use std::io::Write;

use ndarray::Array2;
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::fock::{ModeCutoffs, ModeSet, TwoModeState};
use crate::tolerances::LEAK_THRESHOLD;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LindbladParams {
    kappa_n1: f64,
    kappa_n2: f64,
    modes: ModeSet,
}

impl LindbladParams {
    pub fn new(kappa_n1: f64, kappa_n2: f64, modes: ModeSet) -> Result<Self> {
        if !(kappa_n2 >= 0.0 && kappa_n1 > kappa_n2 && kappa_n1.is_finite()) {
            return Err(Error::InvalidParameter(format!("amplification needs kappa_n1 > kappa_n2 >= 0, got {kappa_n1}, {kappa_n2}")));
        }
        Ok(Self { kappa_n1, kappa_n2, modes })
    }

    /// Rates with unit net gain rate `κ(N₁ - N₂) = 1` and bath parameter
    /// `η = N₂ / (N₁ - N₂)`.
    pub fn from_eta(eta: f64, modes: ModeSet) -> Result<Self> {
        if !(eta >= 0.0 && eta.is_finite()) {
            return Err(Error::InvalidParameter(format!("eta must be >= 0, got {eta}")));
        }
        Self::new(1.0 + eta, eta, modes)
    }

    pub fn kappa_n1(&self) -> f64 {
        self.kappa_n1
    }

    pub fn kappa_n2(&self) -> f64 {
        self.kappa_n2
    }

    pub fn modes(&self) -> ModeSet {
        self.modes
    }

    pub fn eta(&self) -> f64 {
        self.kappa_n2 / (self.kappa_n1 - self.kappa_n2)
    }

    pub fn time_for_gain(&self, g_squared: f64) -> f64 {
        g_squared.ln() / (2.0 * (self.kappa_n1 - self.kappa_n2))
    }
}

/// Intensity gain `G² = exp(2κ(N₁ - N₂)t)` reached after time `t >= 0`.
pub fn gain_from_time(params: &LindbladParams, t: f64) -> f64 {
    debug_assert!(t >= 0.0);
    (2.0 * (params.kappa_n1 - params.kappa_n2) * t).exp()
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IntegratorConfig {
    pub step_size: f64,
    pub target_g_squared: f64,
    pub max_steps: usize,
    /// Abort when the top two Fock levels of an amplified mode hold more.
    pub leak_threshold: f64,
    pub leak_check_interval: usize,
}

impl IntegratorConfig {
    pub fn new(target_g_squared: f64) -> Result<Self> {
        if !(target_g_squared >= 1.0 && target_g_squared.is_finite()) {
            return Err(Error::InvalidParameter(format!("target gain must be >= 1, got {target_g_squared}")));
        }
        Ok(Self { step_size: 1e-3, target_g_squared, max_steps: 2_000_000, leak_threshold: LEAK_THRESHOLD, leak_check_interval: 10 })
    }

    pub fn with_step(mut self, step_size: f64) -> Self {
        self.step_size = step_size;
        self
    }

    fn validate(&self) -> Result<()> {
        if !(self.step_size > 0.0 && self.step_size.is_finite()) {
            return Err(Error::InvalidParameter(format!("step size must be > 0, got {}", self.step_size)));
        }
        if !(self.target_g_squared >= 1.0) {
            return Err(Error::InvalidParameter(format!("target gain must be >= 1, got {}", self.target_g_squared)));
        }
        Ok(())
    }
}

struct ModeLadder {
    shift: usize,
    cutoff: usize,
    labels: Vec<usize>,
}

struct Liouvillian {
    dim: usize,
    k1: f64,
    k2: f64,
    /// Real part of the diagonal action on row / column index.
    rate: Vec<f64>,
    ladders: Vec<ModeLadder>,
    sqrt_n: Vec<f64>,
    /// Flat indices that can become nonzero; `None` means all of them.
    active: Option<Vec<usize>>,
}

impl Liouvillian {
    fn new(cutoffs: ModeCutoffs, params: &LindbladParams, initial: &[C64]) -> Self {
        let dim = cutoffs.dim();
        let (k1, k2) = (params.kappa_n1, params.kappa_n2);
        let mut ladders = Vec::new();
        if params.modes.a {
            ladders.push(ModeLadder { shift: cutoffs.b(), cutoff: cutoffs.a(), labels: (0..dim).map(|i| cutoffs.labels(i).0).collect() });
        }
        if params.modes.b {
            ladders.push(ModeLadder { shift: 1, cutoff: cutoffs.b(), labels: (0..dim).map(|i| cutoffs.labels(i).1).collect() });
        }
        let mut rate = vec![0.0; dim];
        for ladder in &ladders {
            for (i, r) in rate.iter_mut().enumerate() {
                let n = ladder.labels[i];
                // truncated a a† vanishes on the top level
                let aa_dag = if n + 1 < ladder.cutoff { (n + 1) as f64 } else { 0.0 };
                *r += k1 * aa_dag + k2 * n as f64;
            }
        }
        let max_cutoff = cutoffs.a().max(cutoffs.b()) + 1;
        let sqrt_n = (0..max_cutoff).map(|n| (n as f64).sqrt()).collect();
        let mut op = Self { dim, k1, k2, rate, ladders, sqrt_n, active: None };
        op.active = op.reachable(initial);
        op
    }

    /// Entries reachable from the initial support by the jump terms.
    fn reachable(&self, initial: &[C64]) -> Option<Vec<usize>> {
        let dim = self.dim;
        let mut seen = vec![false; dim * dim];
        let mut stack: Vec<usize> = Vec::new();
        for (k, z) in initial.iter().enumerate() {
            if *z != C64::new(0.0, 0.0) {
                seen[k] = true;
                stack.push(k);
            }
        }
        while let Some(k) = stack.pop() {
            let (i, j) = (k / dim, k % dim);
            for ladder in &self.ladders {
                let (ni, nj) = (ladder.labels[i], ladder.labels[j]);
                let s = ladder.shift;
                let mut visit = |ii: usize, jj: usize| {
                    let kk = ii * dim + jj;
                    if !seen[kk] {
                        seen[kk] = true;
                        stack.push(kk);
                    }
                };
                if ni + 1 < ladder.cutoff && nj + 1 < ladder.cutoff {
                    visit(i + s, j + s);
                }
                if self.k2 > 0.0 && ni >= 1 && nj >= 1 {
                    visit(i - s, j - s);
                }
            }
        }
        let active: Vec<usize> = (0..dim * dim).filter(|&k| seen[k]).collect();
        (active.len() < dim * dim / 2).then_some(active)
    }

    #[inline]
    fn entry(&self, rho: &[C64], i: usize, j: usize) -> C64 {
        let dim = self.dim;
        let mut v = rho[i * dim + j] * -(self.rate[i] + self.rate[j]);
        for ladder in &self.ladders {
            let (ni, nj) = (ladder.labels[i], ladder.labels[j]);
            let s = ladder.shift;
            if ni >= 1 && nj >= 1 {
                v += rho[(i - s) * dim + (j - s)] * (2.0 * self.k1 * self.sqrt_n[ni] * self.sqrt_n[nj]);
            }
            if self.k2 > 0.0 && ni + 1 < ladder.cutoff && nj + 1 < ladder.cutoff {
                v += rho[(i + s) * dim + (j + s)] * (2.0 * self.k2 * self.sqrt_n[ni + 1] * self.sqrt_n[nj + 1]);
            }
        }
        v
    }

    fn apply(&self, rho: &[C64], out: &mut [C64]) {
        let dim = self.dim;
        match &self.active {
            Some(active) => {
                for &k in active {
                    out[k] = self.entry(rho, k / dim, k % dim);
                }
            }
            None => {
                for i in 0..dim {
                    for j in 0..dim {
                        out[i * dim + j] = self.entry(rho, i, j);
                    }
                }
            }
        }
    }

    fn for_each_active(&self, mut f: impl FnMut(usize)) {
        match &self.active {
            Some(active) => active.iter().for_each(|&k| f(k)),
            None => (0..self.dim * self.dim).for_each(f),
        }
    }
}

struct Rk4 {
    op: Liouvillian,
    k: Vec<C64>,
    stage: Vec<C64>,
    acc: Vec<C64>,
}

impl Rk4 {
    fn step(&mut self, rho: &mut [C64], h: f64) {
        let Self { op, k, stage, acc } = self;
        let weights = [h / 6.0, h / 3.0, h / 3.0, h / 6.0];
        let offsets = [0.5 * h, 0.5 * h, h];

        op.apply(rho, k);
        op.for_each_active(|i| {
            acc[i] = rho[i] + k[i] * weights[0];
            stage[i] = rho[i] + k[i] * offsets[0];
        });
        for s in 1..4 {
            op.apply(stage, k);
            let w = weights[s];
            if s < 3 {
                let o = offsets[s];
                op.for_each_active(|i| {
                    acc[i] += k[i] * w;
                    stage[i] = rho[i] + k[i] * o;
                });
            } else {
                op.for_each_active(|i| acc[i] += k[i] * w);
            }
        }
        let dim = op.dim;
        op.for_each_active(|i| rho[i] = acc[i]);
        // restore exact Hermiticity
        op.for_each_active(|idx| {
            let (r, c) = (idx / dim, idx % dim);
            if r < c {
                let mirror = c * dim + r;
                let avg = 0.5 * (rho[idx] + rho[mirror].conj());
                rho[idx] = avg;
                rho[mirror] = avg.conj();
            } else if r == c {
                rho[idx].im = 0.0;
            }
        });
    }
}

fn top_levels_population(rho: &[C64], cutoffs: ModeCutoffs, modes: ModeSet) -> Option<(char, f64)> {
    let dim = cutoffs.dim();
    let mut worst: Option<(char, f64)> = None;
    for (flag, name) in [(modes.a, 'a'), (modes.b, 'b')] {
        if !flag {
            continue;
        }
        let cutoff = if name == 'a' { cutoffs.a() } else { cutoffs.b() };
        let population: f64 = (0..dim)
            .filter(|&i| {
                let (na, nb) = cutoffs.labels(i);
                let n = if name == 'a' { na } else { nb };
                n + 2 >= cutoff
            })
            .map(|i| rho[i * dim + i].re)
            .sum();
        if worst.is_none_or(|(_, p)| population > p) {
            worst = Some((name, population));
        }
    }
    worst
}

/// Evolves `state` until the gain reaches `config.target_g_squared`.
pub fn evolve(state: &TwoModeState, params: &LindbladParams, config: &IntegratorConfig) -> Result<TwoModeState> {
    evolve_checkpoints(state, params, config, &[], |_, _| Ok(()))
}

/// Like [`evolve`], calling `visit` with the state at each checkpoint gain on
/// the way. Checkpoints must be ascending and within `[1, target]`.
pub fn evolve_checkpoints(
    state: &TwoModeState,
    params: &LindbladParams,
    config: &IntegratorConfig,
    checkpoints: &[f64],
    mut visit: impl FnMut(f64, &TwoModeState) -> Result<()>,
) -> Result<TwoModeState> {
    config.validate()?;
    let mut prev = 1.0;
    for &g in checkpoints {
        if !(g >= prev && g <= config.target_g_squared) {
            return Err(Error::InvalidParameter(format!(
                "checkpoint gains must be ascending within [1, {}], got {g}",
                config.target_g_squared
            )));
        }
        prev = g;
    }
    let total_time = params.time_for_gain(config.target_g_squared);
    let needed = (total_time / config.step_size).ceil() as usize;
    if needed > config.max_steps {
        return Err(Error::TooManySteps { needed, max_steps: config.max_steps });
    }

    let cutoffs = state.cutoffs();
    let dim = cutoffs.dim();
    let mut rho: Vec<C64> = state.matrix().iter().copied().collect();
    let op = Liouvillian::new(cutoffs, params, &rho);
    let mut rk = Rk4 {
        op,
        k: vec![C64::new(0.0, 0.0); dim * dim],
        stage: vec![C64::new(0.0, 0.0); dim * dim],
        acc: vec![C64::new(0.0, 0.0); dim * dim],
    };

    let snapshot = |rho: &[C64]| -> Result<TwoModeState> {
        let matrix = Array2::from_shape_vec((dim, dim), rho.to_vec()).expect("square buffer");
        let trace: f64 = (0..dim).map(|i| rho[i * dim + i].re).sum();
        Ok(TwoModeState::from_parts_unchecked(cutoffs, matrix, (1.0 - trace).max(0.0)))
    };
    let check_leak = |rho: &[C64], g_squared: f64| -> Result<()> {
        if let Some((mode, population)) = top_levels_population(rho, cutoffs, params.modes) {
            if population > config.leak_threshold {
                return Err(Error::CutoffLeak { mode, population, threshold: config.leak_threshold, g_squared });
            }
        }
        Ok(())
    };

    let mut t = 0.0;
    let mut steps = 0usize;
    let targets = checkpoints.iter().map(|&g| (g, true)).chain(std::iter::once((config.target_g_squared, false)));
    for (g_squared, is_checkpoint) in targets {
        let t_end = params.time_for_gain(g_squared);
        while t_end - t > 1e-15 * t_end.max(1.0) {
            let h = config.step_size.min(t_end - t);
            rk.step(&mut rho, h);
            t += h;
            steps += 1;
            if steps.is_multiple_of(config.leak_check_interval) {
                check_leak(&rho, (2.0 * (params.kappa_n1 - params.kappa_n2) * t).exp())?;
            }
        }
        t = t.max(t_end);
        if is_checkpoint {
            if steps > 0 {
                check_leak(&rho, g_squared)?;
            }
            visit(g_squared, &snapshot(&rho)?)?;
        }
    }
    if steps > 0 {
        check_leak(&rho, config.target_g_squared)?;
    }
    snapshot(&rho)
}

/// Writes the nonzero entries of `state` as CSV rows
/// `g_squared,row_a,row_b,col_a,col_b,re,im`.
pub fn write_checkpoint_csv<W: Write>(out: W, g_squared: f64, state: &TwoModeState, header: bool) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    if header {
        w.write_record(["g_squared", "row_a", "row_b", "col_a", "col_b", "re", "im"])?;
    }
    let c = state.cutoffs();
    for ((i, j), z) in state.matrix().indexed_iter() {
        if *z == C64::new(0.0, 0.0) {
            continue;
        }
        let (ra, rb) = c.labels(i);
        let (ca, cb) = c.labels(j);
        w.write_record([
            format!("{g_squared:.17e}"),
            ra.to_string(),
            rb.to_string(),
            ca.to_string(),
            cb.to_string(),
            format!("{:.17e}", z.re),
            format!("{:.17e}", z.im),
        ])?;
    }
    w.flush()?;
    Ok(())
}
