//! Data tapers, segment plans, and equivalent degrees of freedom.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};

const NORM_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TaperKind {
    Rectangular,
    Hann,
    Triangular,
    Parzen,
}

impl TaperKind {
    pub const ALL: [TaperKind; 4] = [
        TaperKind::Rectangular,
        TaperKind::Hann,
        TaperKind::Triangular,
        TaperKind::Parzen,
    ];

    pub fn name(self) -> &'static str {
        match self {
            TaperKind::Rectangular => "rectangular",
            TaperKind::Hann => "hann",
            TaperKind::Triangular => "triangular",
            TaperKind::Parzen => "parzen",
        }
    }
}

impl fmt::Display for TaperKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for TaperKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        TaperKind::ALL.into_iter().find(|k| k.name() == s).ok_or_else(|| {
            Error::InvalidInput(format!(
                "unknown window '{s}' (expected rectangular|hann|triangular|parzen)"
            ))
        })
    }
}

/// Window coefficients h_t applied to each data segment.
#[derive(Debug, Clone, PartialEq)]
pub struct Taper {
    kind: TaperKind,
    coefficients: Vec<f64>,
    normalized: bool,
}

impl Taper {
    pub fn kind(&self) -> TaperKind {
        self.kind
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    pub fn len(&self) -> usize {
        self.coefficients.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coefficients.is_empty()
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    /// Σ h_t².
    pub fn energy(&self) -> f64 {
        self.coefficients.iter().map(|h| h * h).sum()
    }

    /// Lag inner product Σ_t h_t h_{t+lag}, over indices where both exist.
    pub fn lag_product(&self, lag: usize) -> f64 {
        let h = &self.coefficients;
        if lag >= h.len() {
            return 0.0;
        }
        h.iter().zip(&h[lag..]).map(|(a, b)| a * b).sum()
    }
}

/// Builds an unnormalized taper of length `n`.
///
/// Hann is the periodic form h_t = sin²(πt/n). Triangular and Parzen are the
/// usual symmetric windows centred on (n − 1)/2.
pub fn make_taper(kind: TaperKind, n: usize) -> Result<Taper> {
    if n < 2 {
        return Err(domain("make_taper", format!("length must be >= 2, got {n}")));
    }
    let nf = n as f64;
    let centre = (nf - 1.0) / 2.0;
    let coefficients = (0..n)
        .map(|t| {
            let tf = t as f64;
            match kind {
                TaperKind::Rectangular => 1.0,
                TaperKind::Hann => {
                    let s = (PI * tf / nf).sin();
                    s * s
                }
                TaperKind::Triangular => {
                    let denom = if n.is_multiple_of(2) { nf } else { nf + 1.0 };
                    1.0 - (2.0 * tf - (nf - 1.0)).abs() / denom
                }
                TaperKind::Parzen => {
                    let x = (tf - centre).abs();
                    let r = x / (nf / 2.0);
                    if x <= (nf - 1.0) / 4.0 {
                        1.0 - 6.0 * r * r + 6.0 * r * r * r
                    } else {
                        2.0 * (1.0 - r).powi(3)
                    }
                }
            }
        })
        .collect();
    Ok(Taper {
        kind,
        coefficients,
        normalized: false,
    })
}

/// Scales the taper to unit energy, Σ h_t² = 1.
pub fn normalize_energy(taper: Taper) -> Result<Taper> {
    let energy = taper.energy();
    if !energy.is_finite() || energy <= 0.0 {
        return Err(domain("normalize_energy", "taper has zero energy"));
    }
    if taper.normalized && (energy - 1.0).abs() < NORM_TOL {
        return Ok(taper);
    }
    let scale = energy.sqrt().recip();
    Ok(Taper {
        kind: taper.kind,
        coefficients: taper.coefficients.iter().map(|h| h * scale).collect(),
        normalized: true,
    })
}

/// Shorthand for `normalize_energy(make_taper(kind, n)?)`.
pub fn normalized_taper(kind: TaperKind, n: usize) -> Result<Taper> {
    normalize_energy(make_taper(kind, n)?)
}

/// How the lag correlation enters the EDOF sum.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EdofMode {
    /// |Σ h_t h_{t+m·hop}|², the usual WOSA form.
    #[default]
    Squared,
    /// |Σ h_t h_{t+m·hop}| without the square.
    #[serde(rename = "paper-literal", alias = "unsquared")]
    Unsquared,
}

impl EdofMode {
    pub fn name(self) -> &'static str {
        match self {
            EdofMode::Squared => "squared",
            EdofMode::Unsquared => "paper-literal",
        }
    }
}

impl fmt::Display for EdofMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for EdofMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "squared" => Ok(EdofMode::Squared),
            "paper-literal" | "paper_literal" | "unsquared" => Ok(EdofMode::Unsquared),
            _ => Err(Error::InvalidInput(format!(
                "unknown EDOF mode '{s}' (expected squared|paper-literal)"
            ))),
        }
    }
}

/// Equivalent degrees of freedom ν of K overlapped segments.
///
/// The segment shift is the hop N_s − N_o. Without overlap ν = 2K exactly.
pub fn edof(taper: &Taper, k: usize, n_overlap: usize, mode: EdofMode) -> Result<f64> {
    if !taper.normalized {
        return Err(domain("edof", "taper must be energy-normalized"));
    }
    if k < 1 {
        return Err(domain("edof", "segment count must be >= 1"));
    }
    if n_overlap >= taper.len() {
        return Err(domain(
            "edof",
            format!("overlap {n_overlap} must be < segment length {}", taper.len()),
        ));
    }
    let hop = taper.len() - n_overlap;
    let kf = k as f64;
    let mut sum = 0.0;
    for m in 1..k {
        let lag = m * hop;
        if lag >= taper.len() {
            break;
        }
        let c = taper.lag_product(lag).abs();
        let c = match mode {
            EdofMode::Squared => c * c,
            EdofMode::Unsquared => c,
        };
        sum += (1.0 - m as f64 / kf) * c;
    }
    Ok(2.0 * kf / (1.0 + 2.0 * sum))
}

/// Segmentation of a signal into K segments of N_s samples with N_o overlap.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SegmentPlan {
    pub n_seg: usize,
    pub n_overlap: usize,
    pub k: usize,
}

impl SegmentPlan {
    pub fn new(n_seg: usize, n_overlap: usize, k: usize) -> Result<Self> {
        if n_seg < 2 {
            return Err(domain("segment_plan", "segment length must be >= 2"));
        }
        if n_overlap >= n_seg {
            return Err(domain(
                "segment_plan",
                format!("overlap {n_overlap} must be < segment length {n_seg}"),
            ));
        }
        if k < 1 {
            return Err(domain("segment_plan", "segment count must be >= 1"));
        }
        Ok(Self { n_seg, n_overlap, k })
    }

    pub fn hop(&self) -> usize {
        self.n_seg - self.n_overlap
    }

    /// Samples covered by all K segments.
    pub fn span(&self) -> usize {
        (self.k - 1) * self.hop() + self.n_seg
    }

    pub fn starts(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.k).map(move |i| i * self.hop())
    }
}

/// Plans as many full segments as fit; trailing samples are dropped.
pub fn plan_segments(signal_len: usize, n_seg: usize, overlap_fraction: f64) -> Result<SegmentPlan> {
    if !(0.0..1.0).contains(&overlap_fraction) {
        return Err(domain(
            "plan_segments",
            format!("overlap fraction must be in [0, 1), got {overlap_fraction}"),
        ));
    }
    if n_seg < 2 {
        return Err(domain("plan_segments", "segment length must be >= 2"));
    }
    if signal_len < n_seg {
        return Err(Error::InvalidInput(format!(
            "signal of {signal_len} samples is shorter than one segment ({n_seg})"
        )));
    }
    let n_overlap = (overlap_fraction * n_seg as f64).round() as usize;
    if n_overlap >= n_seg {
        return Err(domain(
            "plan_segments",
            format!("overlap fraction {overlap_fraction} leaves no hop for {n_seg}-sample segments"),
        ));
    }
    let hop = n_seg - n_overlap;
    let k = (signal_len - n_seg) / hop + 1;
    SegmentPlan::new(n_seg, n_overlap, k)
}
