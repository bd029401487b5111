//! LSQR and LSMR with per-iteration observation of the unsketched problem.
//!
//! Both solvers start from `x_0 = 0`, use no damping and no preconditioning,
//! and run plain two-term recurrences unless `reorthogonalize` is set.

mod bidiag;
mod lsmr;
mod lsqr;
mod observer;
mod operator;

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::stopping::{StopController, StoppingPolicy};

pub use lsmr::lsmr;
pub use lsqr::lsqr;
pub use observer::{observe_metrics, IterateObserver, SketchedOnly, Unsketched, UnsketchedMetrics};
pub use operator::{adjoint_defect, operator_norm, LinearOperator};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SolverKind {
    Lsqr,
    Lsmr,
}

impl SolverKind {
    pub const ALL: [SolverKind; 2] = [SolverKind::Lsqr, SolverKind::Lsmr];

    pub fn as_str(self) -> &'static str {
        match self {
            SolverKind::Lsqr => "lsqr",
            SolverKind::Lsmr => "lsmr",
        }
    }
}

impl fmt::Display for SolverKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SolverKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "lsqr" => Ok(SolverKind::Lsqr),
            "lsmr" => Ok(SolverKind::Lsmr),
            other => Err(Error::invalid(format!("unknown solver `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Termination {
    StabilizedNormalRatio,
    StabilizedResidual,
    /// The traditional tolerance or the `eps` threshold was met.
    ToleranceMet,
    MaxIterations,
    /// `alpha` or `beta` vanished: the Krylov space is exhausted and the last
    /// iterate is the minimizer up to rounding.
    Breakdown,
}

impl Termination {
    pub fn as_str(self) -> &'static str {
        match self {
            Termination::StabilizedNormalRatio => "stabilized_normal_ratio",
            Termination::StabilizedResidual => "stabilized_residual",
            Termination::ToleranceMet => "tolerance_met",
            Termination::MaxIterations => "max_iterations",
            Termination::Breakdown => "breakdown",
        }
    }
}

impl fmt::Display for Termination {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Metrics of iterate `x_k`.
#[derive(Debug, Clone, PartialEq)]
pub struct IterateRecord {
    /// Iteration index, from 1.
    pub k: usize,
    /// `||Op x_k - rhs||` from the solver recurrence.
    pub sketched_residual_norm: f64,
    /// `||Opᵀ(Op x_k - rhs)||` from the solver recurrence.
    pub sketched_normal_residual_norm: f64,
    /// `||Opᵀ r|| / (||Op|| ||r||)` on the recurrence values, when `||Op||` is known.
    pub sketched_normal_ratio: Option<f64>,
    pub unsketched: Option<UnsketchedMetrics>,
    pub x_snapshot: Option<Vec<f64>>,
}

impl IterateRecord {
    pub fn unsketched_residual_norm(&self) -> Option<f64> {
        self.unsketched.map(|m| m.residual_norm)
    }

    pub fn unsketched_normal_ratio(&self) -> Option<f64> {
        self.unsketched.map(|m| m.normal_ratio)
    }

    pub fn is_stale(&self) -> bool {
        self.unsketched.is_some_and(|m| m.stale)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveResult {
    pub solver: SolverKind,
    pub x: Vec<f64>,
    /// Iterations performed; `x` is the iterate after the last of them.
    pub iterations: usize,
    pub termination: Termination,
    /// First iteration of the window that satisfied a stabilization rule.
    pub stop_window_start: Option<usize>,
    /// `||Op||` used for the sketched ratio, if any.
    pub op_norm: Option<f64>,
    pub trace: Vec<IterateRecord>,
}

impl SolveResult {
    pub fn last(&self) -> Option<&IterateRecord> {
        self.trace.last()
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct SolveOptions {
    /// Full reorthogonalization of the Lanczos vectors (debug and oracle runs).
    pub reorthogonalize: bool,
    /// `||Op||`; estimated by power iteration when the policy needs it.
    pub op_norm: Option<f64>,
}

/// Dispatches on `kind`.
pub fn solve<O: LinearOperator + ?Sized>(
    kind: SolverKind,
    op: &O,
    rhs: &[f64],
    observer: &mut dyn IterateObserver,
    stop: &StoppingPolicy,
    opts: &SolveOptions,
) -> Result<SolveResult> {
    match kind {
        SolverKind::Lsqr => lsqr(op, rhs, observer, stop, opts),
        SolverKind::Lsmr => lsmr(op, rhs, observer, stop, opts),
    }
}

/// Bookkeeping shared by both solvers: observation, trace, stopping.
struct Driver<'o> {
    solver: SolverKind,
    observer: &'o mut dyn IterateObserver,
    controller: StopController,
    op_norm: Option<f64>,
    max_iter: usize,
    trace: Vec<IterateRecord>,
}

enum Step {
    Continue,
    Stop(Termination, Option<usize>),
}

impl<'o> Driver<'o> {
    fn new<O: LinearOperator + ?Sized>(
        solver: SolverKind,
        op: &O,
        rhs: &[f64],
        observer: &'o mut dyn IterateObserver,
        stop: &StoppingPolicy,
        opts: &SolveOptions,
    ) -> Result<Self> {
        let (m, n) = (op.nrows(), op.ncols());
        if rhs.len() != m {
            return Err(Error::Dimension {
                expected: m,
                got: rhs.len(),
            });
        }
        if n == 0 || m == 0 {
            return Err(Error::invalid("operator has an empty dimension"));
        }
        stop.validate()?;
        let op_norm = match opts.op_norm {
            Some(v) => Some(v),
            None if stop.needs_op_norm() => Some(operator_norm(op)),
            None => None,
        };
        let max_iter = stop.max_iter.unwrap_or_else(|| default_max_iter(m, n));
        Ok(Driver {
            solver,
            observer,
            controller: StopController::new(stop.clone()),
            op_norm,
            max_iter,
            trace: Vec::new(),
        })
    }

    fn record(
        &mut self,
        k: usize,
        x: &[f64],
        rnorm: f64,
        arnorm: f64,
        exhausted: bool,
    ) -> Result<Step> {
        let unsketched = self.observer.observe(k, x);
        let sketched_normal_ratio = self.op_norm.map(|a| {
            if rnorm == 0.0 {
                0.0
            } else {
                arnorm / (a * rnorm)
            }
        });
        let rec = IterateRecord {
            k,
            sketched_residual_norm: rnorm,
            sketched_normal_residual_norm: arnorm,
            sketched_normal_ratio,
            unsketched,
            x_snapshot: self.observer.wants_snapshots().then(|| x.to_vec()),
        };
        let fired = self.controller.update(&rec)?;
        self.trace.push(rec);
        Ok(match fired {
            Some(f) => Step::Stop(f.termination, f.window_start),
            None if exhausted => Step::Stop(Termination::Breakdown, None),
            None if k >= self.max_iter => Step::Stop(Termination::MaxIterations, None),
            None => Step::Continue,
        })
    }

    fn finish(self, x: Vec<f64>, termination: Termination, window: Option<usize>) -> SolveResult {
        SolveResult {
            solver: self.solver,
            x,
            iterations: self.trace.len(),
            termination,
            stop_window_start: window,
            op_norm: self.op_norm,
            trace: self.trace,
        }
    }
}

/// `min(2n, d)` for a `d x n` sketched operator.
pub fn default_max_iter(rows: usize, cols: usize) -> usize {
    (2 * cols).min(rows).max(1)
}

#[cfg(test)]
mod tests;
