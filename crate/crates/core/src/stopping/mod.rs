//! Stopping rules for sketched solves.
//!
//! [`StopMode::Traditional`] watches the sketched normal-equation ratio
//! `||(SA)ᵀ S r_k|| / (||SA|| ||S r_k||)`. The other modes watch metrics of the
//! unsketched residual `r_k = A x_k - b` and therefore need an
//! [`Unsketched`](crate::solvers::Unsketched) observer.

mod controller;
mod scan;

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::solvers::{IterateRecord, SolverKind};

pub use controller::{Fired, StopController};
pub use scan::scan_trace;

/// Default stabilization window.
pub const DEFAULT_WINDOW: usize = 5;
pub const DEFAULT_BAND: Band = Band { lo: 0.99, hi: 1.01 };

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum StopMode {
    /// Sketched normal ratio below `tol`.
    Traditional,
    /// Unsketched normal ratio below `tol`, where `tol` is the distortion.
    EpsilonThreshold,
    /// Windowed geometric rate of the unsketched normal ratio inside the band.
    StabilizeNormalRatio,
    /// Windowed geometric rate of `||r_k||` inside the band.
    StabilizeResidual,
    /// Run to `max_iter` or breakdown.
    Never,
}

impl StopMode {
    pub fn as_str(self) -> &'static str {
        match self {
            StopMode::Traditional => "traditional",
            StopMode::EpsilonThreshold => "eps",
            StopMode::StabilizeNormalRatio => "stab-ne",
            StopMode::StabilizeResidual => "stab-res",
            StopMode::Never => "never",
        }
    }
}

impl fmt::Display for StopMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for StopMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "traditional" => Ok(StopMode::Traditional),
            "eps" => Ok(StopMode::EpsilonThreshold),
            "stab-ne" => Ok(StopMode::StabilizeNormalRatio),
            "stab-res" => Ok(StopMode::StabilizeResidual),
            "never" => Ok(StopMode::Never),
            other => Err(Error::invalid(format!("unknown stopping rule `{other}`"))),
        }
    }
}

/// Accepted range `[lo, hi]` of the per-step geometric rate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Band {
    pub lo: f64,
    pub hi: f64,
}

impl Band {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        let b = Band { lo, hi };
        b.validate()?;
        Ok(b)
    }

    pub fn validate(&self) -> Result<()> {
        if self.lo > 0.0 && self.lo <= 1.0 && self.hi >= 1.0 && self.hi.is_finite() {
            Ok(())
        } else {
            Err(Error::invalid(format!(
                "band needs 0 < lo <= 1 <= hi, got [{}, {}]",
                self.lo, self.hi
            )))
        }
    }
}

impl Default for Band {
    fn default() -> Self {
        DEFAULT_BAND
    }
}

/// Which per-iterate value stands in for the normal ratio under
/// [`StopMode::StabilizeNormalRatio`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum NormalRatioReading {
    /// `||Aᵀ r_k|| / (||A|| ||r_k||)`
    #[default]
    Residual,
    /// `||A x_k|| / ||x_k||`, the iterate-based reading kept for comparison.
    Iterate,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StoppingPolicy {
    pub mode: StopMode,
    /// Tolerance of the traditional rule, or the distortion for the threshold rule.
    pub tol: f64,
    pub window: usize,
    pub band: Band,
    /// Defaults to `min(2n, d)`.
    pub max_iter: Option<usize>,
    pub reading: NormalRatioReading,
    /// Consecutive satisfied windows required before firing; 1 fires on entry.
    pub persistence: usize,
}

impl StoppingPolicy {
    pub fn new(mode: StopMode) -> Self {
        StoppingPolicy {
            mode,
            tol: f64::EPSILON.sqrt(),
            window: DEFAULT_WINDOW,
            band: DEFAULT_BAND,
            max_iter: None,
            reading: NormalRatioReading::Residual,
            persistence: 1,
        }
    }

    pub fn traditional(tol: f64) -> Self {
        StoppingPolicy {
            tol,
            ..Self::new(StopMode::Traditional)
        }
    }

    pub fn epsilon_threshold(eps: f64) -> Self {
        StoppingPolicy {
            tol: eps,
            ..Self::new(StopMode::EpsilonThreshold)
        }
    }

    /// `stopcrit1`: stabilization of the unsketched normal ratio.
    pub fn stabilize_normal_ratio() -> Self {
        Self::new(StopMode::StabilizeNormalRatio)
    }

    /// `stopcrit2`: stabilization of `||r_k||`.
    pub fn stabilize_residual() -> Self {
        Self::new(StopMode::StabilizeResidual)
    }

    pub fn never() -> Self {
        Self::new(StopMode::Never)
    }

    pub fn with_max_iter(mut self, max_iter: usize) -> Self {
        self.max_iter = Some(max_iter);
        self
    }

    pub fn with_window(mut self, window: usize) -> Self {
        self.window = window;
        self
    }

    pub fn with_band(mut self, band: Band) -> Self {
        self.band = band;
        self
    }

    pub fn validate(&self) -> Result<()> {
        self.band.validate()?;
        if self.window < 1 {
            return Err(Error::invalid("stabilization window must be at least 1"));
        }
        if self.persistence < 1 {
            return Err(Error::invalid("persistence must be at least 1"));
        }
        if !(self.tol >= 0.0) {
            return Err(Error::invalid(format!("tolerance must be nonnegative, got {}", self.tol)));
        }
        if self.max_iter == Some(0) {
            return Err(Error::invalid("max_iter must be positive"));
        }
        Ok(())
    }

    pub(crate) fn needs_op_norm(&self) -> bool {
        self.mode == StopMode::Traditional
    }

    /// The value fed to the stabilization window, `None` when unobserved.
    pub fn stabilized_metric(&self, rec: &IterateRecord) -> Option<f64> {
        let m = rec.unsketched?;
        match self.mode {
            StopMode::StabilizeResidual => Some(m.residual_norm),
            StopMode::StabilizeNormalRatio => Some(match self.reading {
                NormalRatioReading::Residual => m.normal_ratio,
                NormalRatioReading::Iterate => m.image_ratio,
            }),
            _ => None,
        }
    }
}

/// Sketched normal ratio at most `tol`. Records without `||Op||` never pass.
pub fn traditional_decision(rec: &IterateRecord, tol: f64) -> bool {
    rec.sketched_normal_ratio.is_some_and(|r| r <= tol)
}

/// Unsketched normal ratio at most `eps`; `None` (deferred) on stale or
/// missing metrics.
pub fn epsilon_threshold_decision(rec: &IterateRecord, eps: f64) -> Option<bool> {
    match rec.unsketched {
        Some(m) if !m.stale => Some(m.normal_ratio <= eps),
        _ => None,
    }
}

/// Whether `(v_last / v_first)^(1/l)` lies in the band, for a history of
/// exactly `l + 1` values. Shorter histories are undecided (`false`).
///
/// The comparison is made as `lo^l <= v_last / v_first <= hi^l`, so the
/// degenerate band `[1, 1]` accepts only an exactly constant endpoint pair.
pub fn stabilization_decision(history: &[f64], window: usize, band: Band) -> Result<bool> {
    if let Some(&v) = history.iter().find(|v| !(**v > 0.0)) {
        return Err(Error::NonPositiveMetric(v));
    }
    if window == 0 || history.len() < window + 1 {
        return Ok(false);
    }
    let tail = &history[history.len() - window - 1..];
    let q = tail[window] / tail[0];
    let l = window as i32;
    Ok(q >= band.lo.powi(l) && q <= band.hi.powi(l))
}

/// LSMR watches the normal ratio, LSQR the residual norm.
pub fn recommend_policy(solver: SolverKind) -> StopMode {
    match solver {
        SolverKind::Lsmr => StopMode::StabilizeNormalRatio,
        SolverKind::Lsqr => StopMode::StabilizeResidual,
    }
}

#[cfg(test)]
mod tests;
