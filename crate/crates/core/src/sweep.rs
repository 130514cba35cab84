//! Gain sweeps over state families, producing one row per (family, N or r, G²).

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::{amplify_noon, select_cutoffs, AmplifierParams, CutoffPolicy, ModeConfig};
use crate::error::{Error, Result};
use crate::fock::{build_noon, NoonSpec, TwoModeState};
use crate::gaussian::{
    amplify_covariance, gaussian_log_negativity, gaussian_neg_sum, photon_added_tmsv_visit, tmsv_covariance, PhotonAddedConfig,
    SqueezingSpec,
};
use crate::lindblad::{evolve_checkpoints, IntegratorConfig, LindbladParams};
use crate::negativity::{log_negativity_block, log_negativity_dense, NegativityResult};
use crate::tolerances::METHOD_AGREEMENT;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    NoonSymmetric,
    NoonAsymmetric,
    TmsvGaussian,
    PhotonAddedTmsv,
}

impl Family {
    pub const ALL: [Family; 4] = [Family::NoonSymmetric, Family::NoonAsymmetric, Family::TmsvGaussian, Family::PhotonAddedTmsv];

    pub fn as_str(self) -> &'static str {
        match self {
            Family::NoonSymmetric => "noon_symmetric",
            Family::NoonAsymmetric => "noon_asymmetric",
            Family::TmsvGaussian => "tmsv_gaussian",
            Family::PhotonAddedTmsv => "photon_added_tmsv",
        }
    }

    pub fn is_noon(self) -> bool {
        matches!(self, Family::NoonSymmetric | Family::NoonAsymmetric)
    }

    fn mode(self) -> ModeConfig {
        match self {
            Family::NoonAsymmetric => ModeConfig::AsymmetricAOnly,
            _ => ModeConfig::Symmetric,
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Family::ALL.into_iter().find(|f| f.as_str() == s).ok_or_else(|| Error::InvalidParameter(format!("unknown family {s:?}")))
    }
}

/// Inclusive gain grid `start, start+step, ..., <= stop`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct G2Range {
    start: f64,
    stop: f64,
    step: f64,
}

impl G2Range {
    pub fn new(start: f64, stop: f64, step: f64) -> Result<Self> {
        if !(start >= 1.0 && stop > start && step > 0.0 && stop.is_finite()) {
            return Err(Error::InvalidParameter(format!("gain range needs 1 <= start < stop and step > 0, got {start}:{stop}:{step}")));
        }
        Ok(Self { start, stop, step })
    }

    pub fn points(&self) -> Vec<f64> {
        let count = ((self.stop - self.start) / self.step + 1e-9).floor() as usize;
        (0..=count).map(|k| self.start + k as f64 * self.step).collect()
    }

    pub fn start(&self) -> f64 {
        self.start
    }

    pub fn stop(&self) -> f64 {
        self.stop
    }

    pub fn step(&self) -> f64 {
        self.step
    }
}

impl FromStr for G2Range {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        let bad = || Error::InvalidParameter(format!("expected start:stop:step, got {s:?}"));
        if parts.len() != 3 {
            return Err(bad());
        }
        let num = |p: &str| p.trim().parse::<f64>().map_err(|_| bad());
        G2Range::new(num(parts[0])?, num(parts[1])?, num(parts[2])?)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MethodChoice {
    Dense,
    Block,
    /// Run both and fail on disagreement; the row reports the dense value.
    Both,
}

impl FromStr for MethodChoice {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "dense" => Ok(MethodChoice::Dense),
            "block" => Ok(MethodChoice::Block),
            "both" => Ok(MethodChoice::Both),
            _ => Err(Error::InvalidParameter(format!("unknown method {s:?}"))),
        }
    }
}

impl MethodChoice {
    fn as_str(self) -> &'static str {
        match self {
            MethodChoice::Dense => "dense",
            MethodChoice::Block => "block",
            MethodChoice::Both => "both",
        }
    }

    fn evaluate(self, state: &TwoModeState) -> Result<NegativityResult> {
        match self {
            MethodChoice::Dense => log_negativity_dense(state),
            MethodChoice::Block => log_negativity_block(state),
            MethodChoice::Both => {
                let dense = log_negativity_dense(state)?;
                let block = log_negativity_block(state)?;
                if (dense.log_negativity - block.log_negativity).abs() > METHOD_AGREEMENT {
                    return Err(Error::MethodDisagreement { dense: dense.log_negativity, block: block.log_negativity });
                }
                Ok(dense)
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    Csv,
    Json,
}

impl FromStr for OutputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            _ => Err(Error::InvalidParameter(format!("unknown format {s:?}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepConfig {
    pub family: Family,
    pub n_values: Vec<usize>,
    pub r: f64,
    pub eta: f64,
    pub g2: G2Range,
    pub cutoff: CutoffPolicy,
    pub method: MethodChoice,
    pub oracle_check: bool,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            family: Family::NoonSymmetric,
            n_values: vec![2, 4, 6],
            r: 0.5,
            eta: 0.0,
            g2: G2Range { start: 1.0, stop: 3.0, step: 0.05 },
            cutoff: CutoffPolicy::default(),
            method: MethodChoice::Block,
            oracle_check: false,
        }
    }
}

impl SweepConfig {
    pub fn validate(&self) -> Result<()> {
        if self.family.is_noon() {
            if self.n_values.is_empty() {
                return Err(Error::InvalidParameter("NOON families need at least one N".into()));
            }
            for &n in &self.n_values {
                NoonSpec::new(n)?;
            }
        } else {
            SqueezingSpec::new(self.r)?;
        }
        if !(self.eta >= 0.0 && self.eta.is_finite()) {
            return Err(Error::InvalidParameter(format!("eta must be >= 0, got {}", self.eta)));
        }
        if self.family == Family::PhotonAddedTmsv && self.eta != 0.0 {
            return Err(Error::InvalidParameter("photon-added pipeline is ideal-amplifier only (eta = 0)".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepRow {
    pub family: Family,
    pub n: Option<usize>,
    pub r: Option<f64>,
    pub eta: f64,
    pub g_squared: f64,
    pub log_negativity: f64,
    pub neg_sum: f64,
    pub min_eigenvalue: Option<f64>,
    pub method: String,
    pub cutoff_a: Option<usize>,
    pub cutoff_b: Option<usize>,
    pub trace_deficit: Option<f64>,
    pub oracle_trace_distance: Option<f64>,
}

impl SweepRow {
    #[allow(clippy::too_many_arguments)]
    fn fock(
        family: Family,
        n: Option<usize>,
        r: Option<f64>,
        eta: f64,
        g2: f64,
        state: &TwoModeState,
        neg: NegativityResult,
        method: MethodChoice,
    ) -> Self {
        Self {
            family,
            n,
            r,
            eta,
            g_squared: g2,
            log_negativity: neg.log_negativity,
            neg_sum: neg.neg_sum,
            min_eigenvalue: Some(neg.min_eigenvalue),
            method: method.as_str().to_owned(),
            cutoff_a: Some(state.cutoffs().a()),
            cutoff_b: Some(state.cutoffs().b()),
            trace_deficit: Some(state.trace_deficit()),
            oracle_trace_distance: None,
        }
    }
}

pub fn run_sweep(config: &SweepConfig) -> Result<Vec<SweepRow>> {
    config.validate()?;
    let gains = config.g2.points();
    let mut rows = match config.family {
        Family::NoonSymmetric | Family::NoonAsymmetric => {
            let per_n: Vec<Vec<SweepRow>> = config.n_values.par_iter().map(|&n| noon_rows(config, n, &gains)).collect::<Result<_>>()?;
            per_n.into_iter().flatten().collect()
        }
        Family::TmsvGaussian => gaussian_rows(config, &gains)?,
        Family::PhotonAddedTmsv => photon_added_rows(config, &gains)?,
    };
    rows.sort_by(|x, y| (x.family, x.n).cmp(&(y.family, y.n)).then(x.g_squared.total_cmp(&y.g_squared)));
    Ok(rows)
}

fn noon_rows(config: &SweepConfig, n: usize, gains: &[f64]) -> Result<Vec<SweepRow>> {
    let spec = NoonSpec::new(n)?;
    let mode = config.family.mode();
    let row = |g2: f64, state: &TwoModeState| -> Result<SweepRow> {
        let neg = config.method.evaluate(state)?;
        Ok(SweepRow::fock(config.family, Some(n), None, config.eta, g2, state, neg, config.method))
    };

    if config.eta > 0.0 {
        // no closed form: one master-equation pass through every checkpoint
        let top = *gains.last().expect("non-empty grid");
        let cutoffs = select_cutoffs(spec, AmplifierParams::new(top, config.eta, mode)?, config.cutoff)?;
        let params = LindbladParams::from_eta(config.eta, mode.modes())?;
        let mut rows = Vec::with_capacity(gains.len());
        evolve_checkpoints(&build_noon(spec, cutoffs)?, &params, &IntegratorConfig::new(top)?, gains, |g2, s| {
            rows.push(row(g2, s)?);
            Ok(())
        })?;
        return Ok(rows);
    }

    let mut rows: Vec<SweepRow> = gains
        .par_iter()
        .map(|&g2| {
            let params = AmplifierParams::ideal(g2, mode)?;
            row(g2, &amplify_noon(spec, params, config.cutoff)?)
        })
        .collect::<Result<_>>()?;

    if config.oracle_check {
        let top = *gains.last().expect("non-empty grid");
        let cutoffs = select_cutoffs(spec, AmplifierParams::ideal(top, mode)?, config.cutoff)?;
        let params = LindbladParams::from_eta(0.0, mode.modes())?;
        let mut k = 0;
        evolve_checkpoints(&build_noon(spec, cutoffs)?, &params, &IntegratorConfig::new(top)?, gains, |g2, evolved| {
            let closed = amplify_noon(spec, AmplifierParams::ideal(g2, mode)?, CutoffPolicy::Fixed(cutoffs))?;
            rows[k].oracle_trace_distance = Some(closed.trace_distance(evolved)?);
            k += 1;
            Ok(())
        })?;
    }
    Ok(rows)
}

fn gaussian_rows(config: &SweepConfig, gains: &[f64]) -> Result<Vec<SweepRow>> {
    let tmsv = tmsv_covariance(SqueezingSpec::new(config.r)?);
    gains
        .iter()
        .map(|&g2| {
            let out = amplify_covariance(&tmsv, g2, config.eta, crate::fock::ModeSet::BOTH)?;
            Ok(SweepRow {
                family: Family::TmsvGaussian,
                n: None,
                r: Some(config.r),
                eta: config.eta,
                g_squared: g2,
                log_negativity: gaussian_log_negativity(&out),
                neg_sum: gaussian_neg_sum(&out),
                min_eigenvalue: None,
                method: "covariance".to_owned(),
                cutoff_a: None,
                cutoff_b: None,
                trace_deficit: None,
                oracle_trace_distance: None,
            })
        })
        .collect()
}

fn photon_added_rows(config: &SweepConfig, gains: &[f64]) -> Result<Vec<SweepRow>> {
    let spec = SqueezingSpec::new(config.r)?;
    let pa_config = PhotonAddedConfig {
        cutoff: match config.cutoff {
            CutoffPolicy::Fixed(c) => Some(c.a().min(c.b())),
            CutoffPolicy::Auto { .. } => None,
        },
        ..PhotonAddedConfig::default()
    };
    let mut rows = Vec::with_capacity(gains.len());
    photon_added_tmsv_visit(spec, gains, pa_config, |g2, state| {
        let neg = config.method.evaluate(state)?;
        rows.push(SweepRow::fock(Family::PhotonAddedTmsv, None, Some(config.r), 0.0, g2, state, neg, config.method));
        Ok(())
    })?;
    Ok(rows)
}

/// `%.12g`-style text: 12 significant digits, trailing zeros trimmed.
pub fn format_sig(x: f64) -> String {
    if x == 0.0 {
        return "0".to_owned();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let sci = format!("{:.11e}", x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-4..12).contains(&exp) {
        let decimals = (11 - exp).max(0) as usize;
        trim_zeros(format!("{:.*}", decimals, x))
    } else {
        format!("{}e{}", trim_zeros(mantissa.to_owned()), exp)
    }
}

fn trim_zeros(s: String) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_owned()
    } else {
        s
    }
}

pub const CSV_HEADER: [&str; 13] = [
    "family",
    "n",
    "r",
    "eta",
    "g_squared",
    "log_negativity",
    "neg_sum",
    "min_eigenvalue",
    "method",
    "cutoff_a",
    "cutoff_b",
    "trace_deficit",
    "oracle_trace_distance",
];

pub const COMPARISON_HEADER: [&str; 5] = ["state_family", "r", "eta", "g_squared", "log_negativity"];

fn opt<T>(v: Option<T>, f: impl Fn(T) -> String) -> String {
    v.map(f).unwrap_or_default()
}

impl SweepRow {
    fn csv_fields(&self) -> [String; 13] {
        [
            self.family.to_string(),
            opt(self.n, |n| n.to_string()),
            opt(self.r, format_sig),
            format_sig(self.eta),
            format_sig(self.g_squared),
            format_sig(self.log_negativity),
            format_sig(self.neg_sum),
            opt(self.min_eigenvalue, format_sig),
            self.method.clone(),
            opt(self.cutoff_a, |c| c.to_string()),
            opt(self.cutoff_b, |c| c.to_string()),
            opt(self.trace_deficit, format_sig),
            opt(self.oracle_trace_distance, format_sig),
        ]
    }

    fn json_value(&self) -> serde_json::Value {
        let num = |x: f64| -> serde_json::Value {
            format_sig(x).parse::<f64>().ok().and_then(serde_json::Number::from_f64).map_or(serde_json::Value::Null, Into::into)
        };
        let opt_num = |x: Option<f64>| x.map_or(serde_json::Value::Null, num);
        serde_json::json!({
            "family": self.family,
            "n": self.n,
            "r": opt_num(self.r),
            "eta": num(self.eta),
            "g_squared": num(self.g_squared),
            "log_negativity": num(self.log_negativity),
            "neg_sum": num(self.neg_sum),
            "min_eigenvalue": opt_num(self.min_eigenvalue),
            "method": self.method,
            "cutoff_a": self.cutoff_a,
            "cutoff_b": self.cutoff_b,
            "trace_deficit": opt_num(self.trace_deficit),
            "oracle_trace_distance": opt_num(self.oracle_trace_distance),
        })
    }
}

pub fn write_csv<W: Write>(out: W, rows: &[SweepRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER)?;
    for row in rows {
        w.write_record(row.csv_fields())?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_json<W: Write>(mut out: W, rows: &[SweepRow]) -> Result<()> {
    let values: Vec<serde_json::Value> = rows.iter().map(SweepRow::json_value).collect();
    serde_json::to_writer_pretty(&mut out, &values)?;
    writeln!(out)?;
    Ok(())
}

pub fn write_rows<W: Write>(out: W, rows: &[SweepRow], format: OutputFormat) -> Result<()> {
    match format {
        OutputFormat::Csv => write_csv(out, rows),
        OutputFormat::Json => write_json(out, rows),
    }
}

/// Reduced schema shared by every family for side-by-side plots.
pub fn write_comparison_csv<W: Write>(out: W, rows: &[SweepRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(COMPARISON_HEADER)?;
    for row in rows {
        w.write_record([
            row.family.to_string(),
            opt(row.r, format_sig),
            format_sig(row.eta),
            format_sig(row.g_squared),
            format_sig(row.log_negativity),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Parsed row of a sweep CSV, for regression comparisons.
#[derive(Clone, Debug, PartialEq, Deserialize)]
pub struct CsvRow {
    pub family: String,
    pub n: Option<usize>,
    pub r: Option<f64>,
    pub eta: f64,
    pub g_squared: f64,
    pub log_negativity: f64,
    pub neg_sum: f64,
    pub min_eigenvalue: Option<f64>,
    pub method: String,
    pub cutoff_a: Option<usize>,
    pub cutoff_b: Option<usize>,
    pub trace_deficit: Option<f64>,
    pub oracle_trace_distance: Option<f64>,
}

pub fn read_csv<R: std::io::Read>(input: R) -> Result<Vec<CsvRow>> {
    csv::Reader::from_reader(input).deserialize().map(|r| r.map_err(Error::from)).collect()
}
