//! Modified periodograms and the WOSA and Welch-percentile estimates built
//! from them.
//!
//! All PSD values use the two-sided convention: unit-variance white noise
//! sampled at `fs` has a flat PSD of `1 / fs`.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::taper::{edof, EdofMode, SegmentPlan, Taper};
use crate::theory::{bias_factor, BiasMethod};

/// A uniformly sampled real signal.
#[derive(Debug, Clone, PartialEq)]
pub struct Signal {
    samples: Vec<f64>,
    fs: f64,
}

impl Signal {
    pub fn new(samples: Vec<f64>, fs: f64) -> Result<Self> {
        if !fs.is_finite() || fs <= 0.0 {
            return Err(domain("signal", format!("sampling frequency must be > 0, got {fs}")));
        }
        if let Some(pos) = samples.iter().position(|x| !x.is_finite()) {
            return Err(Error::InvalidInput(format!("non-finite sample at index {pos}")));
        }
        Ok(Self { samples, fs })
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn fs(&self) -> f64 {
        self.fs
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }
}

/// Reusable FFT state for computing modified periodograms of one segment
/// length.
pub struct Periodogrammer {
    taper: Taper,
    fft: Arc<dyn Fft<f64>>,
    buffer: Vec<Complex64>,
    scratch: Vec<Complex64>,
}

impl fmt::Debug for Periodogrammer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Periodogrammer")
            .field("taper", &self.taper.kind())
            .field("len", &self.taper.len())
            .finish()
    }
}

impl Periodogrammer {
    pub fn new(taper: Taper) -> Result<Self> {
        if !taper.is_normalized() {
            return Err(domain("periodogram", "taper must be energy-normalized"));
        }
        let n = taper.len();
        let fft = FftPlanner::new().plan_fft_forward(n);
        let scratch = vec![Complex64::default(); fft.get_inplace_scratch_len()];
        Ok(Self {
            taper,
            fft,
            buffer: vec![Complex64::default(); n],
            scratch,
        })
    }

    pub fn taper(&self) -> &Taper {
        &self.taper
    }

    /// Number of one-sided bins, N/2 + 1.
    pub fn n_bins(&self) -> usize {
        self.taper.len() / 2 + 1
    }

    /// Writes (1/fs)|Σ h_t x_t e^{−i2πtj/N}|² for j = 0..=N/2 into `out`.
    pub fn compute_into(&mut self, segment: &[f64], fs: f64, detrend: bool, out: &mut [f64]) {
        let h = self.taper.coefficients();
        debug_assert_eq!(segment.len(), h.len());
        debug_assert_eq!(out.len(), self.n_bins());
        let mean = if detrend {
            segment.iter().sum::<f64>() / segment.len() as f64
        } else {
            0.0
        };
        for ((b, &x), &w) in self.buffer.iter_mut().zip(segment).zip(h) {
            *b = Complex64::new(w * (x - mean), 0.0);
        }
        self.fft.process_with_scratch(&mut self.buffer, &mut self.scratch);
        let scale = fs.recip();
        for (o, c) in out.iter_mut().zip(&self.buffer) {
            *o = c.norm_sqr() * scale;
        }
    }
}

/// K modified periodograms on a shared one-sided frequency grid.
#[derive(Debug, Clone, PartialEq)]
pub struct PeriodogramSet {
    values: Vec<f64>,
    freqs: Vec<f64>,
    k: usize,
    n_seg: usize,
    edof: f64,
}

impl PeriodogramSet {
    /// Wraps precomputed periodogram rows, e.g. from another estimator.
    pub fn from_rows(rows: Vec<Vec<f64>>, fs: f64, n_seg: usize, edof: f64) -> Result<Self> {
        let k = rows.len();
        let m = n_seg / 2 + 1;
        if k == 0 {
            return Err(Error::InvalidInput("no periodogram rows".into()));
        }
        if !fs.is_finite() || fs <= 0.0 {
            return Err(domain("periodogram_set", "sampling frequency must be > 0"));
        }
        if !(edof > 0.0 && edof <= 2.0 * k as f64) {
            return Err(domain("periodogram_set", format!("EDOF {edof} outside (0, 2K]")));
        }
        let mut values = Vec::with_capacity(k * m);
        for (i, row) in rows.into_iter().enumerate() {
            if row.len() != m {
                return Err(Error::InvalidInput(format!(
                    "row {i} has {} bins, expected {m}",
                    row.len()
                )));
            }
            if row.iter().any(|v| !v.is_finite() || *v < 0.0) {
                return Err(Error::InvalidInput(format!(
                    "row {i} has negative or non-finite values"
                )));
            }
            values.extend(row);
        }
        Ok(Self {
            values,
            freqs: fourier_frequencies(n_seg, fs),
            k,
            n_seg,
            edof,
        })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn n_bins(&self) -> usize {
        self.freqs.len()
    }

    pub fn n_seg(&self) -> usize {
        self.n_seg
    }

    pub fn freqs(&self) -> &[f64] {
        &self.freqs
    }

    /// Equivalent degrees of freedom ν.
    pub fn edof(&self) -> f64 {
        self.edof
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let m = self.n_bins();
        &self.values[i * m..(i + 1) * m]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.values.chunks_exact(self.n_bins())
    }

    /// Values of all K periodograms at bin `j`, in segment order.
    pub fn column(&self, j: usize) -> impl Iterator<Item = f64> + '_ {
        self.values.iter().skip(j).step_by(self.n_bins()).copied()
    }
}

fn fourier_frequencies(n_seg: usize, fs: f64) -> Vec<f64> {
    (0..=n_seg / 2).map(|j| j as f64 * fs / n_seg as f64).collect()
}

/// Pipeline switches for [`modified_periodograms_with`].
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct PeriodogramOptions {
    pub edof_mode: EdofMode,
    /// Subtract each segment's mean before tapering.
    pub detrend: bool,
}

/// Modified periodograms of every planned segment, with ν attached using
/// the squared EDOF mode and no detrending.
pub fn modified_periodograms(sig: &Signal, plan: &SegmentPlan, taper: &Taper) -> Result<PeriodogramSet> {
    modified_periodograms_with(sig, plan, taper, PeriodogramOptions::default())
}

pub fn modified_periodograms_with(
    sig: &Signal,
    plan: &SegmentPlan,
    taper: &Taper,
    opts: PeriodogramOptions,
) -> Result<PeriodogramSet> {
    if taper.len() != plan.n_seg {
        return Err(Error::InvalidInput(format!(
            "taper length {} does not match segment length {}",
            taper.len(),
            plan.n_seg
        )));
    }
    if sig.len() < plan.span() {
        return Err(Error::InvalidInput(format!(
            "signal of {} samples is shorter than the planned span {}",
            sig.len(),
            plan.span()
        )));
    }
    let nu = edof(taper, plan.k, plan.n_overlap, opts.edof_mode)?;
    let mut engine = Periodogrammer::new(taper.clone())?;
    let m = engine.n_bins();
    let mut values = vec![0.0; plan.k * m];
    for (start, out) in plan.starts().zip(values.chunks_exact_mut(m)) {
        let segment = &sig.samples()[start..start + plan.n_seg];
        engine.compute_into(segment, sig.fs(), opts.detrend, out);
    }
    Ok(PeriodogramSet {
        values,
        freqs: fourier_frequencies(plan.n_seg, sig.fs()),
        k: plan.k,
        n_seg: plan.n_seg,
        edof: nu,
    })
}

/// Interpolation rule between order statistics.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum QuantileRule {
    /// Knots at ((i − 1)/(K − 1), P_(i)); odd-K medians are a single sample.
    /// This is the rule the closed-form bias assumes.
    #[default]
    Linear,
    /// Knots at (i/K, P_(i)), clamped to P_(1) for q ≤ 1/K.
    Parzen,
}

impl QuantileRule {
    pub fn name(self) -> &'static str {
        match self {
            QuantileRule::Linear => "linear",
            QuantileRule::Parzen => "parzen",
        }
    }
}

impl fmt::Display for QuantileRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for QuantileRule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "linear" => Ok(QuantileRule::Linear),
            "parzen" => Ok(QuantileRule::Parzen),
            _ => Err(Error::InvalidInput(format!(
                "unknown quantile rule '{s}' (expected linear|parzen)"
            ))),
        }
    }
}

/// Lower order-statistic index (0-based) and interpolation weight toward
/// the next one. The quantile is `s[lo]` when the weight is zero and
/// `(1 − w)·s[lo] + w·s[lo + 1]` otherwise.
fn quantile_position(k: usize, q: f64, rule: QuantileRule) -> (usize, f64) {
    if k == 1 {
        return (0, 0.0);
    }
    match rule {
        QuantileRule::Linear => {
            let h = (k - 1) as f64 * q;
            let lo = (h.floor() as usize).min(k - 1);
            let frac = h - lo as f64;
            if lo + 1 == k {
                (lo, 0.0)
            } else {
                (lo, frac)
            }
        }
        QuantileRule::Parzen => {
            let pos = q * k as f64;
            if pos <= 1.0 {
                return (0, 0.0);
            }
            // 1-based i with (i − 1)/K ≤ q ≤ i/K
            let i = (pos.ceil() as usize).clamp(2, k);
            let w_hi = pos - (i - 1) as f64;
            if w_hi >= 1.0 {
                (i - 1, 0.0)
            } else {
                (i - 2, w_hi)
            }
        }
    }
}

fn interpolate(lo: f64, hi: f64, w: f64) -> f64 {
    if w == 0.0 {
        lo
    } else {
        (1.0 - w) * lo + w * hi
    }
}

/// Quantile of already-sorted, finite values. `q` must be in [0, 1].
pub fn quantile_sorted(sorted: &[f64], q: f64, rule: QuantileRule) -> f64 {
    debug_assert!(!sorted.is_empty() && (0.0..=1.0).contains(&q));
    let (lo, w) = quantile_position(sorted.len(), q, rule);
    let hi = if w == 0.0 { lo } else { lo + 1 };
    interpolate(sorted[lo], sorted[hi], w)
}

/// Quantile of finite values by partial selection; reorders `values`.
/// Returns the same value as [`quantile_sorted`] on the sorted data.
pub fn quantile_select(values: &mut [f64], q: f64, rule: QuantileRule) -> f64 {
    debug_assert!(!values.is_empty() && (0.0..=1.0).contains(&q));
    let (lo, w) = quantile_position(values.len(), q, rule);
    let (_, lo_value, right) = values.select_nth_unstable_by(lo, f64::total_cmp);
    let lo_value = *lo_value;
    if w == 0.0 {
        return lo_value;
    }
    let hi_value = right.iter().copied().fold(f64::INFINITY, f64::min);
    interpolate(lo_value, hi_value, w)
}

fn check_quantile_inputs(values: &[f64], q: f64) -> Result<()> {
    if values.is_empty() {
        return Err(Error::InvalidInput("sample quantile of an empty set".into()));
    }
    if !(0.0..=1.0).contains(&q) {
        return Err(domain("sample_quantile", format!("q must be in [0, 1], got {q}")));
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput("sample quantile of non-finite values".into()));
    }
    Ok(())
}

/// Sample quantile with the default [`QuantileRule::Linear`].
///
/// ```
/// use robust_psd::spectrum::sample_quantile;
/// assert_eq!(sample_quantile(&[3.0, 1.0, 2.0], 0.5).unwrap(), 2.0);
/// ```
pub fn sample_quantile(values: &[f64], q: f64) -> Result<f64> {
    sample_quantile_with(values, q, QuantileRule::Linear)
}

pub fn sample_quantile_with(values: &[f64], q: f64, rule: QuantileRule) -> Result<f64> {
    check_quantile_inputs(values, q)?;
    let mut sorted = values.to_vec();
    sorted.sort_unstable_by(f64::total_cmp);
    Ok(quantile_sorted(&sorted, q, rule))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EstimateMethod {
    WosaMean,
    Wp,
}

/// A PSD estimate on the one-sided frequency grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PsdEstimate {
    pub psd: Vec<f64>,
    pub freqs: Vec<f64>,
    pub method: EstimateMethod,
    pub q: Option<f64>,
    pub bias_factor: f64,
    pub bias_method: BiasMethod,
    pub effective_k: f64,
    pub n_seg: usize,
}

impl PsdEstimate {
    /// Folds negative frequencies in: interior bins doubled, DC and (for
    /// even segment length) Nyquist unchanged.
    pub fn to_one_sided(&self) -> PsdEstimate {
        let last = self.psd.len() - 1;
        let nyquist_exact = self.n_seg.is_multiple_of(2);
        let psd = self
            .psd
            .iter()
            .enumerate()
            .map(|(j, &v)| {
                if j == 0 || (j == last && nyquist_exact) {
                    v
                } else {
                    2.0 * v
                }
            })
            .collect();
        PsdEstimate { psd, ..self.clone() }
    }
}

/// Per-bin arithmetic mean of the periodograms (classic WOSA).
pub fn wosa_mean(ps: &PeriodogramSet) -> PsdEstimate {
    let m = ps.n_bins();
    let mut psd = vec![0.0; m];
    for row in ps.rows() {
        for (acc, v) in psd.iter_mut().zip(row) {
            *acc += v;
        }
    }
    let k = ps.k() as f64;
    psd.iter_mut().for_each(|v| *v /= k);
    PsdEstimate {
        psd,
        freqs: ps.freqs().to_vec(),
        method: EstimateMethod::WosaMean,
        q: None,
        bias_factor: 1.0,
        bias_method: BiasMethod::None,
        effective_k: k,
        n_seg: ps.n_seg(),
    }
}

/// Settings for [`wp_estimate_with`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WpConfig {
    pub q: f64,
    pub bias_method: BiasMethod,
    /// Use ν/2 instead of K in the bias formula.
    pub use_edof: bool,
    pub rule: QuantileRule,
}

impl WpConfig {
    pub fn new(q: f64, bias_method: BiasMethod) -> Self {
        Self {
            q,
            bias_method,
            use_edof: true,
            rule: QuantileRule::default(),
        }
    }
}

/// Welch-percentile estimate: per-bin sample quantile divided by b(q, K_eff).
pub fn wp_estimate(ps: &PeriodogramSet, q: f64, bias_method: BiasMethod, use_edof: bool) -> Result<PsdEstimate> {
    wp_estimate_with(
        ps,
        &WpConfig {
            use_edof,
            ..WpConfig::new(q, bias_method)
        },
    )
}

pub fn wp_estimate_with(ps: &PeriodogramSet, cfg: &WpConfig) -> Result<PsdEstimate> {
    if !(0.0..=1.0).contains(&cfg.q) {
        return Err(domain("wp_estimate", format!("q must be in [0, 1], got {}", cfg.q)));
    }
    let k_eff = if cfg.use_edof { ps.edof() / 2.0 } else { ps.k() as f64 };
    let b = bias_factor(cfg.bias_method, k_eff, cfg.q)?;
    if b.is_nan() || b <= 0.0 {
        return Err(domain(
            "wp_estimate",
            format!("bias factor {b} is not positive for q = {}", cfg.q),
        ));
    }
    let recorded_k = if cfg.bias_method.rounds_k() {
        k_eff.round()
    } else {
        k_eff
    };
    let mut column = Vec::with_capacity(ps.k());
    let psd = (0..ps.n_bins())
        .map(|j| {
            column.clear();
            column.extend(ps.column(j));
            column.sort_unstable_by(f64::total_cmp);
            quantile_sorted(&column, cfg.q, cfg.rule) / b
        })
        .collect();
    Ok(PsdEstimate {
        psd,
        freqs: ps.freqs().to_vec(),
        method: EstimateMethod::Wp,
        q: Some(cfg.q),
        bias_factor: b,
        bias_method: cfg.bias_method,
        effective_k: recorded_k,
        n_seg: ps.n_seg(),
    })
}
