use crate::error::{Error, Result};
use crate::solvers::{IterateRecord, Termination};
use crate::stopping::{Fired, StopMode, StoppingPolicy};

/// Offline pass over a complete trace: the iteration at which `policy` first
/// fires, with the rule that fired. Agrees with [`StopController`] run online.
///
/// [`StopController`]: crate::stopping::StopController
pub fn scan_trace(trace: &[IterateRecord], policy: &StoppingPolicy) -> Result<Option<(usize, Fired)>> {
    let plain = |t| Fired { termination: t, window_start: None };
    match policy.mode {
        StopMode::Never => Ok(None),
        StopMode::Traditional => Ok(trace
            .iter()
            .find(|r| r.sketched_normal_ratio.is_some_and(|v| v <= policy.tol))
            .map(|r| (r.k, plain(Termination::ToleranceMet)))),
        StopMode::EpsilonThreshold => Ok(trace
            .iter()
            .find(|r| r.unsketched.is_some_and(|m| !m.stale && m.normal_ratio <= policy.tol))
            .map(|r| (r.k, plain(Termination::ToleranceMet)))),
        StopMode::StabilizeNormalRatio | StopMode::StabilizeResidual => {
            let fresh: Vec<(usize, f64)> = trace
                .iter()
                .filter(|r| !r.is_stale())
                .filter_map(|r| policy.stabilized_metric(r).map(|v| (r.k, v)))
                .collect();
            let l = policy.window;
            let lo = policy.band.lo.powi(l as i32);
            let hi = policy.band.hi.powi(l as i32);
            let mut streak = 0;
            for j in 0..fresh.len() {
                if !(fresh[j].1 > 0.0) {
                    return Err(Error::NonPositiveMetric(fresh[j].1));
                }
                if j < l {
                    continue;
                }
                let q = fresh[j].1 / fresh[j - l].1;
                streak = if lo <= q && q <= hi { streak + 1 } else { 0 };
                if streak >= policy.persistence {
                    let termination = match policy.mode {
                        StopMode::StabilizeResidual => Termination::StabilizedResidual,
                        _ => Termination::StabilizedNormalRatio,
                    };
                    return Ok(Some((
                        fresh[j].0,
                        Fired {
                            termination,
                            window_start: Some(fresh[j - l].0),
                        },
                    )));
                }
            }
            Ok(None)
        }
    }
}
