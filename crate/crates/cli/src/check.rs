//! Bound reports for a single `(matrix, kind, seed)`.

use std::io::Write;
use std::sync::Arc;

use sketchls_core::diagnostics::{compute_eta_f, evaluate, write_reports, ReportContext, ETA_ROWS_GUARD};
use sketchls_core::embed::{build_sketch, exact_distortion};
use sketchls_core::matio::synthesize_problem;
use sketchls_core::{BoundReport, SketchKind};

use crate::config::DRule;
use crate::error::Result;
use crate::source::MatrixSource;

pub struct CheckRequest {
    pub matrix: MatrixSource,
    pub kind: SketchKind,
    pub seed: u64,
    pub d: DRule,
    pub rho: f64,
}

/// Evaluates every bound for the sketched solution, plus the backward-error
/// bound at `x_s` when `m` is small enough, and writes them as CSV.
pub fn check<W: Write>(req: &CheckRequest, out: W) -> Result<Vec<BoundReport>> {
    let a = Arc::new(req.matrix.load()?);
    let (m, n) = (a.nrows(), a.ncols());
    let d = if req.kind == SketchKind::Identity {
        m
    } else {
        req.d.check(m, n)?
    };
    let p = synthesize_problem(a.clone(), req.seed, req.rho)?;
    let s = build_sketch(req.kind, d, m, req.seed)?;
    let dist = exact_distortion(&s, &a, &p.b)?;
    let ev = evaluate(&a, &p.b, &s, &dist, None)?;
    let mut reports = ev.reports;
    if m <= ETA_ROWS_GUARD {
        reports.push(compute_eta_f(&a, &p.b, &ev.x_s, 1.0)?.report());
    }
    let ctx = ReportContext {
        seed: req.seed,
        kind: req.kind.as_str().into(),
        matrix: req.matrix.name(),
        d,
    };
    let batch = [(ctx, reports)];
    write_reports(out, &batch)?;
    let [(_, reports)] = batch;
    Ok(reports)
}
