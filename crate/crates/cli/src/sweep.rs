//! Distortion and plateau statistics across sketch sizes.

use std::fs;

use log::{info, warn};

use crate::config::ExperimentConfig;
use crate::error::{CliError, Result};
use crate::experiment::{load_all, run_case, BatchOutcome};

pub const SWEEP_HEADER: [&str; 14] = [
    "matrix",
    "kind",
    "solver",
    "d",
    "d_rule",
    "seeds",
    "eps_q1",
    "eps_median",
    "eps_q3",
    "eps_median_ratio_prev",
    "plateau_q1",
    "plateau_median",
    "plateau_q3",
    "errors",
];

/// Linear-interpolation quantile of sorted data.
pub fn quantile(sorted: &[f64], q: f64) -> f64 {
    if sorted.is_empty() {
        return f64::NAN;
    }
    let pos = q * (sorted.len() - 1) as f64;
    let (lo, hi) = (pos.floor() as usize, pos.ceil() as usize);
    sorted[lo] + (pos - lo as f64) * (sorted[hi] - sorted[lo])
}

fn quartiles(mut v: Vec<f64>) -> [f64; 3] {
    v.sort_by(|a, b| a.total_cmp(b));
    [quantile(&v, 0.25), quantile(&v, 0.5), quantile(&v, 0.75)]
}

/// Runs every configured `d` and writes `sweep.csv` with quartiles over seeds
/// of the exact distortion and of the final unsketched normal ratio.
pub fn sweep_d(cfg: &ExperimentConfig) -> Result<BatchOutcome> {
    if cfg.d_rules.len() < 2 {
        return Err(CliError::config("sweep-d needs at least two values of d"));
    }
    let (loaded, failed) = load_all(cfg)?;
    fs::create_dir_all(&cfg.output_dir)?;
    let mut outcome = BatchOutcome {
        errors: failed.len(),
        ..BatchOutcome::default()
    };
    let mut w = csv::Writer::from_path(cfg.output_dir.join("sweep.csv"))?;
    w.write_record(SWEEP_HEADER)?;
    let solvers = cfg.solver.solvers();

    for l in &loaded {
        let m = l.a.nrows();
        for &kind in &cfg.kinds {
            let mut prev: Vec<Option<f64>> = vec![None; solvers.len()];
            for (rule, &d) in cfg.d_rules.iter().zip(&l.d_values) {
                if cfg.too_large(kind, d, m) {
                    warn!("skipping {} {kind} d={d}: Gaussian payload of {} entries", l.name, d * m);
                    outcome.skipped += 1;
                    continue;
                }
                let mut eps = Vec::new();
                let mut plateau = vec![Vec::new(); solvers.len()];
                let mut errors = 0;
                for &seed in &cfg.seeds {
                    outcome.cases += 1;
                    info!("{} {kind} d={d} seed={seed}", l.name);
                    match run_case(cfg, &l.a, kind, d, seed) {
                        Ok(c) => {
                            outcome.violations += c.violations();
                            eps.push(c.eps);
                            for (i, (_, _, res)) in c.solves.iter().enumerate() {
                                if let Some(r) = res.last().and_then(|r| r.unsketched_normal_ratio()) {
                                    plateau[i].push(r);
                                }
                            }
                        }
                        Err(e) => {
                            warn!("{} {kind} d={d} seed={seed}: {e}", l.name);
                            errors += 1;
                        }
                    }
                }
                outcome.errors += errors;
                let e = quartiles(eps.clone());
                for (i, solver) in solvers.iter().enumerate() {
                    let p = quartiles(plateau[i].clone());
                    let ratio = prev[i].map(|pe| e[1] / pe).map(|r| r.to_string()).unwrap_or_default();
                    prev[i] = Some(e[1]);
                    w.write_record([
                        l.name.clone(),
                        kind.as_str().into(),
                        solver.as_str().into(),
                        d.to_string(),
                        rule.to_string(),
                        eps.len().to_string(),
                        e[0].to_string(),
                        e[1].to_string(),
                        e[2].to_string(),
                        ratio,
                        p[0].to_string(),
                        p[1].to_string(),
                        p[2].to_string(),
                        errors.to_string(),
                    ])?;
                }
            }
        }
    }
    w.flush()?;
    Ok(outcome)
}
