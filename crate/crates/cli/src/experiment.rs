//! Batch runs over (matrix, kind, d, seed).

use std::fs;

use std::sync::Arc;

use log::{info, warn};
use sketchls_core::diagnostics::{evaluate, write_reports, ReportContext};
use sketchls_core::embed::{build_sketch, exact_distortion};
use sketchls_core::matio::synthesize_problem;
use sketchls_core::solvers::{solve, SolveOptions, Unsketched};
use sketchls_core::trace::save_trace;
use sketchls_core::{BoundReport, MatrixHandle, SketchKind, SolveResult, SolverKind};

use crate::config::ExperimentConfig;
use crate::error::Result;
use crate::figures::emit_figure_data;

pub const SUMMARY_HEADER: [&str; 20] = [
    "matrix",
    "kind",
    "d",
    "seed",
    "solver",
    "stop",
    "status",
    "termination",
    "iterations",
    "window_start",
    "final_rnorm",
    "final_ne_ratio",
    "r_ls_norm",
    "rnorm_over_rls",
    "epsilon",
    "cond",
    "bounds_total",
    "bounds_passed",
    "pass_rate",
    "error",
];

/// Exit codes of the batch commands.
pub mod exit {
    pub const OK: i32 = 0;
    pub const CONFIG: i32 = 1;
    pub const RUN_ERROR: i32 = 2;
    pub const BOUND_FAILED: i32 = 3;
}

/// A loaded matrix and its label.
pub struct Loaded {
    pub name: String,
    pub a: Arc<MatrixHandle>,
    pub d_values: Vec<usize>,
}

/// Everything computed for one `(matrix, kind, d, seed)` case.
pub struct CaseResult {
    pub eps: f64,
    pub cond: f64,
    pub r_ls_norm: f64,
    pub reports: Vec<BoundReport>,
    pub solves: Vec<(SolverKind, &'static str, SolveResult)>,
}

impl CaseResult {
    pub fn passed(&self) -> usize {
        self.reports.iter().filter(|r| r.passed).count()
    }

    pub fn violations(&self) -> usize {
        self.reports.iter().filter(|r| r.violated()).count()
    }
}

/// `(matrix name, error message)` for a matrix that failed to load.
pub type LoadFailure = (String, String);

/// Loads every matrix. Load failures are returned separately so the batch
/// can continue; an invalid `d` for a loaded matrix is a config error.
pub fn load_all(cfg: &ExperimentConfig) -> Result<(Vec<Loaded>, Vec<LoadFailure>)> {
    let mut ok = Vec::new();
    let mut failed = Vec::new();
    for src in &cfg.matrices {
        let name = src.name();
        match src.load() {
            Ok(a) => {
                let d_values = cfg.check_d(a.nrows(), a.ncols())?;
                ok.push(Loaded {
                    name,
                    a: Arc::new(a),
                    d_values,
                });
            }
            Err(e) => {
                warn!("cannot load {src}: {e}");
                failed.push((name, e.to_string()));
            }
        }
    }
    Ok((ok, failed))
}

pub fn run_case(
    cfg: &ExperimentConfig,
    a: &Arc<MatrixHandle>,
    kind: SketchKind,
    d: usize,
    seed: u64,
) -> Result<CaseResult> {
    let m = a.nrows();
    let p = synthesize_problem(a.clone(), seed, cfg.rho)?;
    let s = build_sketch(kind, d, m, seed)?;
    let dist = exact_distortion(&s, a, &p.b)?;
    let ev = evaluate(a, &p.b, &s, &dist, None)?;
    let sp = s.sketch_problem(a, &p.b)?;
    let mut solves = Vec::new();
    for solver in cfg.solver.solvers() {
        let policy = cfg.stop.policy(solver, dist.epsilon_exact);
        let mut obs = Unsketched::new(a, &p.b, ev.norms.norm, cfg.stride);
        let res = solve(solver, &sp.sa, &sp.sb, &mut obs, &policy, &SolveOptions::default())?;
        solves.push((solver, cfg.stop.label(solver), res));
    }
    Ok(CaseResult {
        eps: dist.epsilon_exact,
        cond: ev.norms.cond,
        r_ls_norm: ev.oracle.r_ls_norm,
        reports: ev.reports,
        solves,
    })
}

/// The `d` values a kind runs with.
pub fn d_for(kind: SketchKind, loaded: &Loaded) -> Vec<usize> {
    if kind == SketchKind::Identity {
        vec![loaded.a.nrows()]
    } else {
        loaded.d_values.clone()
    }
}

pub fn trace_file_name(matrix: &str, kind: SketchKind, d: usize, seed: u64, solver: SolverKind) -> String {
    format!("{matrix}__{kind}__d{d}__s{seed}__{solver}.csv")
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct BatchOutcome {
    pub cases: usize,
    pub errors: usize,
    pub violations: usize,
    pub skipped: usize,
}

impl BatchOutcome {
    pub fn exit_code(&self) -> i32 {
        if self.errors > 0 {
            exit::RUN_ERROR
        } else if self.violations > 0 {
            exit::BOUND_FAILED
        } else {
            exit::OK
        }
    }
}

fn f(x: f64) -> String {
    x.to_string()
}

fn opt(x: Option<f64>) -> String {
    x.map(f).unwrap_or_default()
}

struct Row<'a> {
    matrix: &'a str,
    kind: &'a str,
    d: String,
    seed: u64,
}

impl Row<'_> {
    fn error(&self, status: &str, msg: &str) -> Vec<String> {
        let mut v = vec![
            self.matrix.to_string(),
            self.kind.to_string(),
            self.d.clone(),
            self.seed.to_string(),
            String::new(),
            String::new(),
            status.to_string(),
        ];
        v.resize(SUMMARY_HEADER.len() - 1, String::new());
        v.push(msg.to_string());
        v
    }
}

/// Runs the whole batch and writes `traces/`, `bounds.csv`, `summary.csv`
/// and, when enabled, `figures/` under the output directory.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<BatchOutcome> {
    let (loaded, failed) = load_all(cfg)?;
    let out = &cfg.output_dir;
    let traces = out.join("traces");
    fs::create_dir_all(&traces)?;

    let mut outcome = BatchOutcome::default();
    let mut summary = csv::Writer::from_path(out.join("summary.csv"))?;
    summary.write_record(SUMMARY_HEADER)?;
    let mut batches: Vec<(ReportContext, Vec<BoundReport>)> = Vec::new();

    for (name, err) in &failed {
        outcome.errors += 1;
        summary.write_record(
            Row {
                matrix: name,
                kind: "",
                d: String::new(),
                seed: 0,
            }
            .error("error", err),
        )?;
    }

    for l in &loaded {
        let m = l.a.nrows();
        for &kind in &cfg.kinds {
            for d in d_for(kind, l) {
                for &seed in &cfg.seeds {
                    let row = Row {
                        matrix: &l.name,
                        kind: kind.as_str(),
                        d: d.to_string(),
                        seed,
                    };
                    if cfg.too_large(kind, d, m) {
                        warn!("skipping {} {kind} d={d}: Gaussian payload of {} entries", l.name, d * m);
                        outcome.skipped += 1;
                        summary.write_record(row.error("skipped", "gaussian payload above size limit"))?;
                        continue;
                    }
                    outcome.cases += 1;
                    info!("{} {kind} d={d} seed={seed}", l.name);
                    let case = match run_case(cfg, &l.a, kind, d, seed) {
                        Ok(c) => c,
                        Err(e) => {
                            warn!("{} {kind} d={d} seed={seed}: {e}", l.name);
                            outcome.errors += 1;
                            summary.write_record(row.error("error", &e.to_string()))?;
                            continue;
                        }
                    };
                    outcome.violations += case.violations();
                    let total = case.reports.len();
                    let passed = case.passed();
                    for (solver, stop, res) in &case.solves {
                        let path = traces.join(trace_file_name(&l.name, kind, d, seed, *solver));
                        save_trace(&path, &res.trace)?;
                        let last = res.last();
                        let rnorm = last.and_then(|r| r.unsketched_residual_norm());
                        summary.write_record([
                            l.name.clone(),
                            kind.as_str().into(),
                            d.to_string(),
                            seed.to_string(),
                            solver.as_str().into(),
                            stop.to_string(),
                            "ok".into(),
                            res.termination.as_str().into(),
                            res.iterations.to_string(),
                            res.stop_window_start.map(|k| k.to_string()).unwrap_or_default(),
                            opt(rnorm),
                            opt(last.and_then(|r| r.unsketched_normal_ratio())),
                            f(case.r_ls_norm),
                            opt(rnorm.filter(|_| case.r_ls_norm > 0.0).map(|r| r / case.r_ls_norm)),
                            f(case.eps),
                            f(case.cond),
                            total.to_string(),
                            passed.to_string(),
                            f(pass_rate(passed, total)),
                            String::new(),
                        ])?;
                    }
                    batches.push((
                        ReportContext {
                            seed,
                            kind: kind.as_str().into(),
                            matrix: l.name.clone(),
                            d,
                        },
                        case.reports,
                    ));
                }
            }
        }
    }
    summary.flush()?;
    write_reports(fs::File::create(out.join("bounds.csv"))?, &batches)?;
    if cfg.figures {
        emit_figure_data(&traces, &out.join("figures"))?;
    }
    Ok(outcome)
}

pub fn pass_rate(passed: usize, total: usize) -> f64 {
    if total == 0 {
        1.0
    } else {
        passed as f64 / total as f64
    }
}

