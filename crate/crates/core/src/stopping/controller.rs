use std::collections::VecDeque;

use crate::error::{Error, Result};
use crate::solvers::{IterateRecord, Termination};
use crate::stopping::{
    epsilon_threshold_decision, stabilization_decision, traditional_decision, StopMode,
    StoppingPolicy,
};

/// A rule that fired at the record just passed in.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Fired {
    pub termination: Termination,
    /// First iteration of the satisfied stabilization window.
    pub window_start: Option<usize>,
}

/// Online evaluation of a [`StoppingPolicy`], one record at a time.
#[derive(Debug, Clone)]
pub struct StopController {
    policy: StoppingPolicy,
    window: VecDeque<(usize, f64)>,
    values: Vec<f64>,
    streak: usize,
}

impl StopController {
    pub fn new(policy: StoppingPolicy) -> Self {
        let cap = policy.window + 1;
        StopController {
            policy,
            window: VecDeque::with_capacity(cap),
            values: Vec::with_capacity(cap),
            streak: 0,
        }
    }

    pub fn policy(&self) -> &StoppingPolicy {
        &self.policy
    }

    pub fn update(&mut self, rec: &IterateRecord) -> Result<Option<Fired>> {
        let p = &self.policy;
        let hit = |t| Some(Fired { termination: t, window_start: None });
        match p.mode {
            StopMode::Never => Ok(None),
            StopMode::Traditional => Ok(if traditional_decision(rec, p.tol) {
                hit(Termination::ToleranceMet)
            } else {
                None
            }),
            StopMode::EpsilonThreshold => {
                if rec.unsketched.is_none() {
                    return Err(Error::invalid("the eps rule needs unsketched metrics"));
                }
                Ok(match epsilon_threshold_decision(rec, p.tol) {
                    Some(true) => hit(Termination::ToleranceMet),
                    _ => None,
                })
            }
            StopMode::StabilizeNormalRatio | StopMode::StabilizeResidual => {
                let Some(v) = p.stabilized_metric(rec) else {
                    return Err(Error::invalid("stabilization rules need unsketched metrics"));
                };
                if rec.is_stale() {
                    return Ok(None);
                }
                if self.window.len() == p.window + 1 {
                    self.window.pop_front();
                }
                self.window.push_back((rec.k, v));
                self.values.clear();
                self.values.extend(self.window.iter().map(|e| e.1));
                if stabilization_decision(&self.values, p.window, p.band)? {
                    self.streak += 1;
                } else {
                    self.streak = 0;
                }
                if self.streak >= p.persistence {
                    let termination = if p.mode == StopMode::StabilizeResidual {
                        Termination::StabilizedResidual
                    } else {
                        Termination::StabilizedNormalRatio
                    };
                    Ok(Some(Fired {
                        termination,
                        window_start: self.window.front().map(|e| e.0),
                    }))
                } else {
                    Ok(None)
                }
            }
        }
    }
}
