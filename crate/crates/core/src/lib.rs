//! Robust power-spectral-density estimation with Welch percentile
//! estimators.
//!
//! A Welch percentile (WP) estimate replaces the per-frequency average of
//! the modified periodograms by a sample quantile, then divides out the
//! quantile's bias under the exponential periodogram model. The crate
//! provides
//!
//! - [`taper`]: windows, segment plans and equivalent degrees of freedom,
//! - [`spectrum`]: periodograms, WOSA mean and WP estimates,
//! - [`theory`]: closed-form bias factors and variances,
//! - [`specfun`]: digamma, trigamma and friends,
//! - [`mc`]: seeded Monte Carlo experiments on white noise.
//!
//! ```
//! use robust_psd::prelude::*;
//!
//! let signal = gen_white_noise(4096, 1.0, 7)?;
//! let plan = plan_segments(signal.len(), 256, 0.5)?;
//! let taper = normalized_taper(TaperKind::Hann, 256)?;
//! let ps = modified_periodograms(&signal, &plan, &taper)?;
//! let est = wp_estimate(&ps, 0.5, BiasMethod::Harmonic, true)?;
//! assert_eq!(est.psd.len(), 129);
//! # Ok::<(), robust_psd::Error>(())
//! ```

pub mod error;
pub mod mc;
mod quadrature;
pub mod specfun;
pub mod spectrum;
pub mod taper;
pub mod theory;

pub use error::{Error, Result};

pub mod prelude {
    pub use crate::error::{Error, Result};
    pub use crate::mc::{gen_white_noise, ExperimentConfig, ExperimentMethod, ExperimentRow};
    pub use crate::spectrum::{
        modified_periodograms, sample_quantile, wosa_mean, wp_estimate, PeriodogramSet, PsdEstimate, QuantileRule,
        Signal, WpConfig,
    };
    pub use crate::taper::{edof, normalized_taper, plan_segments, EdofMode, SegmentPlan, TaperKind};
    pub use crate::theory::{bias_factor, BiasMethod};
}
