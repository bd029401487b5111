//! Residual, backward-error and solution-error inequalities for a sketched
//! least-squares solve, evaluated against exact references.

mod backward;
mod bounds;
mod pinv;
mod report;

pub use backward::{compute_eta_f, mu_of, BackwardErrorResult, ETA_ROWS_GUARD};
pub use bounds::{
    check_acute_criterion, check_explicit_perturbations, check_geometric_preservation,
    check_residual_bounds, check_solution_error, cross_factor, direction_factor, e1_matrix,
    e1_minimizer_defect, numerical_rank, pythagorean_defect, CombinedBound, SketchedSolution,
    ACUTE_COLS_GUARD, CONSISTENT_TOL,
};
pub use pinv::{check_pseudoinverse_perturbation, pseudo_inverse, PINV_SIZE_GUARD};
pub use report::{
    write_reports, BoundId, BoundReport, ReportContext, ORACLE_FLOOR, REPORT_HEADER, SLACK,
};

use nalgebra::DMatrix;

use crate::embed::{DistortionReport, SketchOperator};
use crate::error::Result;
use crate::matio::{solve_ls_oracle, LsOracle, MatrixHandle, SpectralNorms};

/// Everything computed for one `(A, b, S)` triple.
#[derive(Debug, Clone)]
pub struct Evaluation {
    pub oracle: LsOracle,
    pub x_s: Vec<f64>,
    pub sa: DMatrix<f64>,
    pub sa_norm: f64,
    pub norms: SpectralNorms,
    pub distortion: DistortionReport,
    /// `None` for a consistent system.
    pub pythagorean_defect: Option<f64>,
    pub reports: Vec<BoundReport>,
}

impl Evaluation {
    pub fn all_passed(&self) -> bool {
        self.reports.iter().all(|r| r.passed)
    }

    pub fn violations(&self) -> impl Iterator<Item = &BoundReport> {
        self.reports.iter().filter(|r| r.violated())
    }

    pub fn get(&self, id: BoundId) -> impl Iterator<Item = &BoundReport> {
        self.reports.iter().filter(move |r| r.id == id)
    }
}

/// Solves the sketched problem densely and evaluates every bound that
/// applies to `(A, b, S)`. `oracle` is computed when not supplied.
pub fn evaluate(
    a: &MatrixHandle,
    b: &[f64],
    s: &SketchOperator,
    distortion: &DistortionReport,
    oracle: Option<LsOracle>,
) -> Result<Evaluation> {
    let oracle = match oracle {
        Some(o) => o,
        None => solve_ls_oracle(a, b)?,
    };
    let norms = a.spectral_norms()?;
    let sp = s.sketch_problem(a, b)?;
    let x_s = sp.solve_dense()?;
    let sa_norm = sp.sa.singular_values().iter().cloned().fold(0.0, f64::max);
    let eps = distortion.epsilon_exact;

    let sol = SketchedSolution {
        a,
        b,
        oracle: &oracle,
        x_s: &x_s,
        eps,
        norm_a: norms.norm,
        cond: norms.cond,
    };
    let mut reports = Vec::new();
    for (y, tag) in [
        (vec![0.0; a.ncols()], "y = 0"),
        (oracle.x_ls.clone(), "y = x_ls"),
        (x_s.clone(), "y = x_s"),
    ] {
        reports.push(check_geometric_preservation(a, b, s, &y, eps, norms.norm)?.with_note(tag));
    }
    reports.extend(check_residual_bounds(&sol, s, sa_norm)?);
    reports.extend(check_explicit_perturbations(&sol));
    reports.extend(check_solution_error(&sol));
    if a.ncols() <= ACUTE_COLS_GUARD {
        reports.push(check_acute_criterion(norms.cond, eps, &sp.sa)?);
    }
    let pythagorean_defect =
        (!sol.is_consistent()).then(|| pythagorean_defect(&oracle.r_ls, &sol.r_s()));
    Ok(Evaluation {
        oracle,
        x_s,
        sa: sp.sa,
        sa_norm,
        norms,
        distortion: *distortion,
        pythagorean_defect,
        reports,
    })
}
