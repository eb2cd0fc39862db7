//! Closed-form bias and variance of the Welch percentile estimator.
//!
//! Under white noise each modified periodogram value at an interior bin is
//! exponential with mean P. The sample quantile is modelled as a single order
//! statistic with `alpha` samples above it and `beta` below it, which gives
//!
//! ```text
//! E{Q}/P   = ψ(α + β + 2) − ψ(α + 1)     = Σ_{k=α+1}^{α+β+1} 1/k
//! var{Q}/P² = ψ₁(α + 1) − ψ₁(α + β + 2)  = Σ_{k=α+1}^{α+β+1} 1/k²
//! ```
//!
//! The bias factor b is E{Q}/P and the corrected estimate is Q / b.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::quadrature;
use crate::specfun::{digamma, harmonic_partial, log_beta, trigamma};

const INTEGER_TOL: f64 = 1e-9;

/// Which of the two order-statistic configurations a (K, q) pair falls in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QuantileCase {
    /// The quantile coincides with one order statistic: α + β = K − 1.
    ExactMatch,
    /// The quantile falls between two order statistics: α + β = K.
    Between,
}

/// A (K, q) pair resolved to the integer counts above and below the quantile.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuantileSpec {
    pub q: f64,
    pub k_eff: f64,
    pub alpha: u64,
    pub beta: u64,
    pub case: QuantileCase,
}

impl QuantileSpec {
    /// Spec for the i-th smallest of k samples (1-based).
    pub fn order_statistic(i: u64, k: u64) -> Result<Self> {
        if i < 1 || i > k {
            return Err(domain("order_statistic", format!("need 1 <= i <= k, got i={i}, k={k}")));
        }
        Ok(Self {
            q: if k == 1 { 0.5 } else { (i - 1) as f64 / (k - 1) as f64 },
            k_eff: k as f64,
            alpha: k - i,
            beta: i - 1,
            case: QuantileCase::ExactMatch,
        })
    }

    /// Rounded sample count α + β + 1 (exact match) or α + β (between).
    pub fn k_rounded(&self) -> u64 {
        match self.case {
            QuantileCase::ExactMatch => self.alpha + self.beta + 1,
            QuantileCase::Between => self.alpha + self.beta,
        }
    }
}

fn check_q(op: &'static str, q: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&q) {
        return Err(domain(op, format!("quantile must be in [0, 1], got {q}")));
    }
    Ok(())
}

fn check_k(op: &'static str, k: f64) -> Result<()> {
    if !k.is_finite() || k < 1.0 {
        return Err(domain(op, format!("sample count must be >= 1, got {k}")));
    }
    Ok(())
}

/// Resolves (K, q) into α, β and the matching case.
///
/// K is rounded half away from zero. The exact-match case applies when
/// (K − 1)q is an integer; otherwise α = round(K(1 − q)) with the unrounded K.
pub fn resolve_case(k: f64, q: f64) -> Result<QuantileSpec> {
    check_k("resolve_case", k)?;
    check_q("resolve_case", q)?;
    let kr = k.round() as u64;
    let position = (kr - 1) as f64 * q;
    if (position - position.round()).abs() < INTEGER_TOL {
        let beta = position.round() as u64;
        Ok(QuantileSpec {
            q,
            k_eff: k,
            alpha: kr - 1 - beta,
            beta,
            case: QuantileCase::ExactMatch,
        })
    } else {
        let alpha = ((k * (1.0 - q)).round() as u64).min(kr);
        Ok(QuantileSpec {
            q,
            k_eff: k,
            alpha,
            beta: kr - alpha,
            case: QuantileCase::Between,
        })
    }
}

/// Alternating harmonic sum Σ_{j=1}^{k} (−1)^{j+1}/j with no parity check.
pub fn alternating_harmonic(k: u64) -> f64 {
    (1..=k).map(|j| if j % 2 == 1 { 1.0 } else { -1.0 } / j as f64).sum()
}

/// Median bias for an odd number of samples, Σ_{j=1}^{K} (−1)^{j+1}/j.
pub fn bias_allen(k: u64) -> Result<f64> {
    if k < 1 || k.is_multiple_of(2) {
        return Err(domain("bias_allen", format!("requires odd K >= 1, got {k}")));
    }
    Ok(alternating_harmonic(k))
}

/// Truncated harmonic series Σ_{k=α+1}^{α+β+1} 1/k.
pub fn bias_harmonic(spec: &QuantileSpec) -> Result<f64> {
    harmonic_partial(spec.alpha + 1, spec.alpha + spec.beta + 1)
}

/// ψ(K + 2) − ψ(K(1 − q) + 1), without rounding K or K(1 − q).
pub fn bias_digamma(k: f64, q: f64) -> Result<f64> {
    check_k("bias_digamma", k)?;
    if !(0.0..1.0).contains(&q) {
        return Err(domain("bias_digamma", format!("quantile must be in [0, 1), got {q}")));
    }
    Ok(digamma(k + 2.0)? - digamma(k * (1.0 - q) + 1.0)?)
}

/// Large-K bias −ln(1 − q).
pub fn bias_limit(q: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&q) {
        return Err(domain("bias_limit", format!("quantile must be in [0, 1), got {q}")));
    }
    Ok(-(-q).ln_1p())
}

/// How the sample-quantile bias is divided out.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BiasMethod {
    None,
    Allen,
    Harmonic,
    Digamma,
    Limit,
}

impl BiasMethod {
    pub const ALL: [BiasMethod; 5] = [
        BiasMethod::None,
        BiasMethod::Allen,
        BiasMethod::Harmonic,
        BiasMethod::Digamma,
        BiasMethod::Limit,
    ];

    pub fn name(self) -> &'static str {
        match self {
            BiasMethod::None => "none",
            BiasMethod::Allen => "allen",
            BiasMethod::Harmonic => "harmonic",
            BiasMethod::Digamma => "digamma",
            BiasMethod::Limit => "limit",
        }
    }

    /// Whether the method works on K rounded to an integer.
    pub fn rounds_k(self) -> bool {
        matches!(self, BiasMethod::Allen | BiasMethod::Harmonic)
    }
}

impl fmt::Display for BiasMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for BiasMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        BiasMethod::ALL.into_iter().find(|m| m.name() == s).ok_or_else(|| {
            Error::InvalidInput(format!(
                "unknown bias method '{s}' (expected none|allen|harmonic|digamma|limit)"
            ))
        })
    }
}

/// Bias factor b(q, K) for a method. `k_eff` may be fractional (ν/2);
/// the allen and harmonic methods round it half away from zero.
pub fn bias_factor(method: BiasMethod, k_eff: f64, q: f64) -> Result<f64> {
    check_k("bias_factor", k_eff)?;
    check_q("bias_factor", q)?;
    match method {
        BiasMethod::None => Ok(1.0),
        BiasMethod::Allen => {
            if q != 0.5 {
                return Err(domain("bias_allen", format!("median only (q = 0.5), got q = {q}")));
            }
            bias_allen(k_eff.round() as u64)
        }
        BiasMethod::Harmonic => bias_harmonic(&resolve_case(k_eff, q)?),
        BiasMethod::Digamma => bias_digamma(k_eff, q),
        BiasMethod::Limit => bias_limit(q),
    }
}

fn check_p(op: &'static str, p: f64) -> Result<()> {
    if !p.is_finite() || p <= 0.0 {
        return Err(domain(op, format!("PSD level must be > 0, got {p}")));
    }
    Ok(())
}

/// Variance of the harmonic-corrected estimate,
/// (P/b)² [ψ₁(α + 1) − ψ₁(α + β + 2)] with b from [`bias_harmonic`].
pub fn variance_theory(spec: &QuantileSpec, p: f64) -> Result<f64> {
    check_p("variance_theory", p)?;
    let b = bias_harmonic(spec)?;
    if b <= 0.0 {
        return Err(domain("variance_theory", "degenerate bias factor"));
    }
    let a = spec.alpha as f64;
    let spread = trigamma(a + 1.0)? - trigamma(a + spec.beta as f64 + 2.0)?;
    Ok(p * p / (b * b) * spread)
}

/// Variance of the digamma-corrected estimate for fractional K,
/// (P/b)² [ψ₁(K(1 − q) + 1) − ψ₁(K + 2)] with b from [`bias_digamma`].
pub fn variance_trigamma(k: f64, q: f64, p: f64) -> Result<f64> {
    check_p("variance_trigamma", p)?;
    let b = bias_digamma(k, q)?;
    if b <= 0.0 {
        return Err(domain("variance_trigamma", format!("zero bias factor at q = {q}")));
    }
    let spread = trigamma(k * (1.0 - q) + 1.0)? - trigamma(k + 2.0)?;
    Ok(p * p / (b * b) * spread)
}

/// Limiting variance (P/b)² q / (K(1 − q)) for an arbitrary applied bias
/// factor `b`.
pub fn variance_limit_with_bias(k: f64, q: f64, p: f64, b: f64) -> Result<f64> {
    check_k("variance_limit", k)?;
    check_p("variance_limit", p)?;
    if !(q > 0.0 && q < 1.0) {
        return Err(domain("variance_limit", format!("quantile must be in (0, 1), got {q}")));
    }
    if !b.is_finite() || b <= 0.0 {
        return Err(domain("variance_limit", format!("bias factor must be > 0, got {b}")));
    }
    Ok((p / b).powi(2) * q / (k * (1.0 - q)))
}

/// Limiting variance with the limiting bias b = −ln(1 − q).
pub fn variance_limit(k: f64, q: f64, p: f64) -> Result<f64> {
    if !(q > 0.0 && q < 1.0) {
        return Err(domain("variance_limit", format!("quantile must be in (0, 1), got {q}")));
    }
    variance_limit_with_bias(k, q, p, bias_limit(q)?)
}

/// Limiting variance at each q of `grid`, for K segments and P = 1.
pub fn scan_limiting_variance(k: f64, grid: &[f64]) -> Result<Vec<(f64, f64)>> {
    grid.iter()
        .map(|&q| variance_limit(k, q, 1.0).map(|v| (q, v)))
        .collect()
}

/// The q of `grid` with the lowest limiting variance.
pub fn optimal_quantile(k: f64, grid: &[f64]) -> Result<f64> {
    scan_limiting_variance(k, grid)?
        .into_iter()
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .map(|(q, _)| q)
        .ok_or_else(|| Error::InvalidInput("empty quantile grid".into()))
}

/// E{P_(i)}/P for the i-th smallest of k unit exponentials, by adaptive
/// quadrature of the order-statistic density:
///
/// −1/B(α+1, β+1) ∫₀¹ t^α (1 − t)^β ln t dt,  α = k − i, β = i − 1.
pub fn order_statistic_mean_numeric(i: u64, k: u64) -> Result<f64> {
    if i < 1 || i > k || k > 100 {
        return Err(domain(
            "order_statistic_mean_numeric",
            format!("need 1 <= i <= k <= 100, got i={i}, k={k}"),
        ));
    }
    let alpha = (k - i) as f64;
    let beta = (i - 1) as f64;
    let log_norm = log_beta(alpha + 1.0, beta + 1.0)?;
    let integrand = |t: f64| {
        let ln_t = t.ln();
        let mut log_w = -log_norm;
        if alpha > 0.0 {
            log_w += alpha * ln_t;
        }
        if beta > 0.0 {
            log_w += beta * (-t).ln_1p();
        }
        -log_w.exp() * ln_t
    };
    quadrature::integrate(integrand, 0.0, 1.0, 1e-10, 4000)
}
