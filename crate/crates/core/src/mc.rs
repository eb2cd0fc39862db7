//! Seeded Monte Carlo experiments on white Gaussian noise.
//!
//! Every trial draws its own ChaCha8 stream from a seed that is a pure
//! function of `(seed, K, q index, trial index)`. Trials are grouped into
//! fixed-size chunks that may run on any rayon worker; chunk statistics are
//! merged in chunk order, so tables are bit-identical for any thread count.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::specfun::trigamma;
use crate::spectrum::{quantile_select, Periodogrammer, QuantileRule, Signal};
use crate::taper::{edof, normalized_taper, EdofMode, SegmentPlan, TaperKind};
use crate::theory::{alternating_harmonic, bias_factor, variance_limit_with_bias, BiasMethod};

const CHUNK_TRIALS: usize = 64;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Stream seed for one trial of one (K, q) cell.
pub fn trial_seed(seed: u64, k: usize, q_index: usize, trial: usize) -> u64 {
    [k as u64, q_index as u64, trial as u64]
        .into_iter()
        .fold(splitmix64(seed), |acc, x| splitmix64(acc ^ splitmix64(x)))
}

fn fill_white_noise(buf: &mut [f64], sigma: f64, stream_seed: u64) {
    let mut rng = ChaCha8Rng::seed_from_u64(stream_seed);
    for x in buf.iter_mut() {
        let z: f64 = rng.sample(StandardNormal);
        *x = sigma * z;
    }
}

/// `n` i.i.d. N(0, σ²) samples at unit sampling rate.
pub fn gen_white_noise(n: usize, sigma: f64, stream_seed: u64) -> Result<Signal> {
    if n < 1 {
        return Err(domain("gen_white_noise", "need at least one sample"));
    }
    if !sigma.is_finite() || sigma <= 0.0 {
        return Err(domain("gen_white_noise", format!("sigma must be > 0, got {sigma}")));
    }
    let mut samples = vec![0.0; n];
    fill_white_noise(&mut samples, sigma, stream_seed);
    Signal::new(samples, 1.0)
}

/// Estimator evaluated by an experiment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub enum ExperimentMethod {
    /// Arithmetic mean of the periodograms.
    WosaMean,
    /// Sample quantile divided by a bias factor.
    Wp(BiasMethod),
}

impl ExperimentMethod {
    pub fn name(self) -> &'static str {
        match self {
            ExperimentMethod::WosaMean => "wosa_mean",
            ExperimentMethod::Wp(m) => m.name(),
        }
    }
}

impl fmt::Display for ExperimentMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl From<ExperimentMethod> for String {
    fn from(m: ExperimentMethod) -> String {
        m.name().to_string()
    }
}

impl TryFrom<String> for ExperimentMethod {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl FromStr for ExperimentMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "wosa_mean" | "mean" => Ok(ExperimentMethod::WosaMean),
            other => other.parse().map(ExperimentMethod::Wp),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub n_seg: usize,
    pub overlap_fraction: f64,
    pub taper_kind: TaperKind,
    pub k_list: Vec<usize>,
    pub q_list: Vec<f64>,
    pub trials: usize,
    pub seed: u64,
    /// Methods reported by the bias experiment. The variance experiment
    /// always uses the digamma correction.
    pub bias_methods: Vec<ExperimentMethod>,
    pub noise_sigma: f64,
    pub fs: f64,
    pub edof_mode: EdofMode,
    pub rule: QuantileRule,
}

impl Default for ExperimentConfig {
    /// Desk scale: N_s = 256, 10⁴ trials, Hann with 50% overlap.
    fn default() -> Self {
        Self {
            n_seg: 256,
            overlap_fraction: 0.5,
            taper_kind: TaperKind::Hann,
            k_list: (3..=40).collect(),
            q_list: vec![0.5],
            trials: 10_000,
            seed: 0,
            bias_methods: vec![ExperimentMethod::Wp(BiasMethod::Harmonic)],
            noise_sigma: 1.0,
            fs: 1.0,
            edof_mode: EdofMode::Squared,
            rule: QuantileRule::Linear,
        }
    }
}

impl ExperimentConfig {
    /// N_s = 1024 and 51100 trials per (K, q) cell.
    pub fn full_scale() -> Self {
        Self {
            n_seg: 1024,
            trials: 51_100,
            ..Self::default()
        }
    }

    /// True two-sided PSD σ²/fs of the simulated noise.
    pub fn true_psd(&self) -> f64 {
        self.noise_sigma * self.noise_sigma / self.fs
    }

    pub fn n_overlap(&self) -> usize {
        (self.overlap_fraction * self.n_seg as f64).round() as usize
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidInput(msg));
        if self.trials < 1 {
            return bad("trials must be >= 1".into());
        }
        if self.n_seg < 2 {
            return bad("segment length must be >= 2".into());
        }
        if !(0.0..1.0).contains(&self.overlap_fraction) || self.n_overlap() >= self.n_seg {
            return bad(format!("invalid overlap fraction {}", self.overlap_fraction));
        }
        if self.k_list.is_empty() || self.k_list.contains(&0) {
            return bad("K list must be non-empty with every K >= 1".into());
        }
        if self.q_list.is_empty() || self.q_list.iter().any(|q| !(*q > 0.0 && *q < 1.0)) {
            return bad("quantile list must be non-empty with every q in (0, 1)".into());
        }
        if !(self.noise_sigma.is_finite() && self.noise_sigma > 0.0) {
            return bad(format!("noise sigma must be > 0, got {}", self.noise_sigma));
        }
        if !(self.fs.is_finite() && self.fs > 0.0) {
            return bad(format!("fs must be > 0, got {}", self.fs));
        }
        if self.bias_methods.contains(&ExperimentMethod::Wp(BiasMethod::Allen)) && self.q_list.iter().any(|&q| q != 0.5)
        {
            return Err(domain("bias_allen", "the allen method is median-only (q = 0.5)"));
        }
        Ok(())
    }
}

/// One (K, q, method) cell of a simulated-vs-theory table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentRow {
    pub k: usize,
    pub edof_half: f64,
    pub q: f64,
    pub method: String,
    /// 10·log10(mean estimate / true PSD).
    pub bias_db: f64,
    pub var_sim: f64,
    pub var_theory: f64,
    pub var_limit: f64,
    pub trials: usize,
}

impl ExperimentRow {
    pub const CSV_HEADER: &'static str = "k,edof_half,q,method,bias_db,var_sim,var_theory,var_limit,trials";

    /// CSV record with reals at 17 significant digits.
    pub fn to_csv(&self) -> String {
        format!(
            "{},{:.16e},{:.16e},{},{:.16e},{:.16e},{:.16e},{:.16e},{}",
            self.k,
            self.edof_half,
            self.q,
            self.method,
            self.bias_db,
            self.var_sim,
            self.var_theory,
            self.var_limit,
            self.trials
        )
    }

    pub fn from_csv(line: &str) -> Result<Self> {
        let fields: Vec<&str> = line.trim_end().split(',').collect();
        if fields.len() != 9 {
            return Err(Error::InvalidInput(format!(
                "expected 9 fields, got {}: {line}",
                fields.len()
            )));
        }
        let real = |i: usize| {
            fields[i]
                .parse::<f64>()
                .map_err(|e| Error::InvalidInput(format!("field {i} '{}': {e}", fields[i])))
        };
        let int = |i: usize| {
            fields[i]
                .parse::<usize>()
                .map_err(|e| Error::InvalidInput(format!("field {i} '{}': {e}", fields[i])))
        };
        Ok(Self {
            k: int(0)?,
            edof_half: real(1)?,
            q: real(2)?,
            method: fields[3].to_string(),
            bias_db: real(4)?,
            var_sim: real(5)?,
            var_theory: real(6)?,
            var_limit: real(7)?,
            trials: int(8)?,
        })
    }
}

/// Mergeable running mean and variance.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
struct Moments {
    n: f64,
    mean: f64,
    m2: f64,
}

impl Moments {
    fn push(&mut self, x: f64) {
        self.n += 1.0;
        let d = x - self.mean;
        self.mean += d / self.n;
        self.m2 += d * (x - self.mean);
    }

    fn merge(&mut self, other: &Moments) {
        if other.n == 0.0 {
            return;
        }
        if self.n == 0.0 {
            *self = *other;
            return;
        }
        let n = self.n + other.n;
        let d = other.mean - self.mean;
        self.mean += d * other.n / n;
        self.m2 += other.m2 + d * d * self.n * other.n / n;
        self.n = n;
    }

    fn variance(&self) -> f64 {
        self.m2 / (self.n - 1.0)
    }
}

/// Per-bin statistics of the raw (uncorrected) quantile and mean estimates.
struct CellStats {
    quantile: Vec<Moments>,
    mean: Vec<Moments>,
}

impl CellStats {
    fn new(bins: usize) -> Self {
        Self {
            quantile: vec![Moments::default(); bins],
            mean: vec![Moments::default(); bins],
        }
    }

    fn merge(&mut self, other: &CellStats) {
        for (a, b) in self.quantile.iter_mut().zip(&other.quantile) {
            a.merge(b);
        }
        for (a, b) in self.mean.iter_mut().zip(&other.mean) {
            a.merge(b);
        }
    }
}

fn mean_of(xs: impl Iterator<Item = f64>) -> f64 {
    let (sum, n) = xs.fold((0.0, 0usize), |(s, n), x| (s + x, n + 1));
    sum / n as f64
}

struct CellResult {
    k: usize,
    edof_half: f64,
    q: f64,
    stats: CellStats,
}

/// Interior bins 1..=last exclude DC and, for even N_s, Nyquist.
fn interior_bins(n_seg: usize) -> std::ops::Range<usize> {
    let m = n_seg / 2 + 1;
    if n_seg.is_multiple_of(2) {
        1..m - 1
    } else {
        1..m
    }
}

fn simulate_cell(cfg: &ExperimentConfig, k: usize, q_index: usize, want_mean: bool) -> Result<CellResult> {
    let q = cfg.q_list[q_index];
    let plan = SegmentPlan::new(cfg.n_seg, cfg.n_overlap(), k)?;
    let taper = normalized_taper(cfg.taper_kind, cfg.n_seg)?;
    let edof_half = edof(&taper, k, plan.n_overlap, cfg.edof_mode)? / 2.0;
    let bins = interior_bins(cfg.n_seg);
    let n_bins = bins.len();
    let n_chunks = cfg.trials.div_ceil(CHUNK_TRIALS);

    let chunks: Vec<CellStats> = (0..n_chunks)
        .into_par_iter()
        .map(|chunk| -> Result<CellStats> {
            let mut engine = Periodogrammer::new(taper.clone())?;
            let m = engine.n_bins();
            let mut signal = vec![0.0; plan.span()];
            let mut rows = vec![0.0; k * m];
            let mut column = vec![0.0; k];
            let mut stats = CellStats::new(n_bins);
            let first = chunk * CHUNK_TRIALS;
            let last = (first + CHUNK_TRIALS).min(cfg.trials);
            for trial in first..last {
                fill_white_noise(&mut signal, cfg.noise_sigma, trial_seed(cfg.seed, k, q_index, trial));
                for (start, out) in plan.starts().zip(rows.chunks_exact_mut(m)) {
                    engine.compute_into(&signal[start..start + cfg.n_seg], cfg.fs, false, out);
                }
                for (slot, j) in bins.clone().enumerate() {
                    for (c, row) in column.iter_mut().zip(rows.chunks_exact(m)) {
                        *c = row[j];
                    }
                    if want_mean {
                        stats.mean[slot].push(column.iter().sum::<f64>() / k as f64);
                    }
                    stats.quantile[slot].push(quantile_select(&mut column, q, cfg.rule));
                }
            }
            Ok(stats)
        })
        .collect::<Result<_>>()?;

    let mut total = CellStats::new(n_bins);
    for c in &chunks {
        total.merge(c);
    }
    Ok(CellResult {
        k,
        edof_half,
        q,
        stats: total,
    })
}

/// Bias factor applied by `method` in a simulation. Unlike
/// [`bias_factor`], the allen sum is applied to even K as well.
fn simulation_factor(method: ExperimentMethod, k_eff: f64, q: f64) -> Result<f64> {
    match method {
        ExperimentMethod::WosaMean => Ok(1.0),
        ExperimentMethod::Wp(BiasMethod::Allen) => Ok(alternating_harmonic(k_eff.round() as u64)),
        ExperimentMethod::Wp(m) => bias_factor(m, k_eff, q),
    }
}

fn make_row(cfg: &ExperimentConfig, cell: &CellResult, method: ExperimentMethod) -> Result<ExperimentRow> {
    let p = cfg.true_psd();
    let k_eff = cell.edof_half;
    let b = simulation_factor(method, k_eff, cell.q)?;
    let moments = match method {
        ExperimentMethod::WosaMean => &cell.stats.mean,
        ExperimentMethod::Wp(_) => &cell.stats.quantile,
    };
    let mean_est = mean_of(moments.iter().map(|m| m.mean)) / b;
    let var_sim = mean_of(moments.iter().map(Moments::variance)) / (b * b);
    let (var_theory, var_limit) = match method {
        // chi-square with ν degrees of freedom: var = P² · 2/ν
        ExperimentMethod::WosaMean => (p * p / k_eff, p * p / k_eff),
        ExperimentMethod::Wp(_) => {
            let spread = trigamma(k_eff * (1.0 - cell.q) + 1.0)? - trigamma(k_eff + 2.0)?;
            (p * p * spread / (b * b), variance_limit_with_bias(k_eff, cell.q, p, b)?)
        }
    };
    Ok(ExperimentRow {
        k: cell.k,
        edof_half: k_eff,
        q: cell.q,
        method: method.name().to_string(),
        bias_db: 10.0 * (mean_est / p).log10(),
        var_sim,
        var_theory,
        var_limit,
        trials: cfg.trials,
    })
}

/// Progress callback argument: cells finished out of the total.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Progress {
    pub done: usize,
    pub total: usize,
    pub k: usize,
    pub q: f64,
}

fn run_cells<F>(cfg: &ExperimentConfig, methods: &[ExperimentMethod], progress: F) -> Result<Vec<ExperimentRow>>
where
    F: Fn(Progress),
{
    cfg.validate()?;
    let want_mean = methods.contains(&ExperimentMethod::WosaMean);
    let total = cfg.k_list.len() * cfg.q_list.len();
    let mut rows = Vec::with_capacity(total * methods.len());
    let mut done = 0;
    for &k in &cfg.k_list {
        for q_index in 0..cfg.q_list.len() {
            let cell = simulate_cell(cfg, k, q_index, want_mean)?;
            for &method in methods {
                rows.push(make_row(cfg, &cell, method)?);
            }
            done += 1;
            progress(Progress {
                done,
                total,
                k,
                q: cell.q,
            });
        }
    }
    Ok(rows)
}

/// Bias of each configured method per (K, q), averaged over trials and
/// interior bins, with EDOF-based K_eff.
pub fn run_bias_experiment(cfg: &ExperimentConfig) -> Result<Vec<ExperimentRow>> {
    run_bias_experiment_with_progress(cfg, |_| {})
}

pub fn run_bias_experiment_with_progress<F: Fn(Progress)>(
    cfg: &ExperimentConfig,
    progress: F,
) -> Result<Vec<ExperimentRow>> {
    if cfg.bias_methods.is_empty() {
        return Err(Error::InvalidInput("no bias methods requested".into()));
    }
    run_cells(cfg, &cfg.bias_methods, progress)
}

/// Sampling variance of the digamma-corrected estimate per (K, q), next to
/// the trigamma closed form and the limiting variance.
pub fn run_variance_experiment(cfg: &ExperimentConfig) -> Result<Vec<ExperimentRow>> {
    run_variance_experiment_with_progress(cfg, |_| {})
}

pub fn run_variance_experiment_with_progress<F: Fn(Progress)>(
    cfg: &ExperimentConfig,
    progress: F,
) -> Result<Vec<ExperimentRow>> {
    run_cells(cfg, &[ExperimentMethod::Wp(BiasMethod::Digamma)], progress)
}

/// One-sample Kolmogorov–Smirnov test against an exponential law.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KsResult {
    pub statistic: f64,
    /// Asymptotic 1% critical value 1.6276/√n.
    pub critical_1pct: f64,
    pub n: usize,
}

impl KsResult {
    pub fn passes(&self) -> bool {
        self.statistic < self.critical_1pct
    }
}

pub fn ks_exponential(samples: &[f64], mean: f64) -> Result<KsResult> {
    if samples.is_empty() {
        return Err(Error::InvalidInput("KS test on an empty sample".into()));
    }
    if mean.is_nan() || mean <= 0.0 {
        return Err(domain("ks_exponential", "mean must be > 0"));
    }
    let mut sorted = samples.to_vec();
    sorted.sort_unstable_by(f64::total_cmp);
    let n = sorted.len() as f64;
    let statistic = sorted
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let cdf = -(-x / mean).exp_m1();
            let above = (i + 1) as f64 / n - cdf;
            let below = cdf - i as f64 / n;
            above.max(below)
        })
        .fold(0.0, f64::max);
    Ok(KsResult {
        statistic,
        critical_1pct: 1.627_6 / n.sqrt(),
        n: sorted.len(),
    })
}
