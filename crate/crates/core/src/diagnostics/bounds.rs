use nalgebra::{DMatrix, DVector};

use crate::diagnostics::{BoundId, BoundReport, ORACLE_FLOOR};
use crate::embed::{sandwich_factor, SketchOperator};
use crate::error::{Error, Result};
use crate::matio::{solve_dense_ls, LsOracle, MatrixHandle};
use crate::vecops::{dist, norm2, sub};

/// `||r_ls|| <= CONSISTENT_TOL ||b||` marks a consistent system.
pub const CONSISTENT_TOL: f64 = 1e-12;
/// Largest column count for the rank check of `SA`.
pub const ACUTE_COLS_GUARD: usize = 2000;

/// `sqrt(2 eps / (1 - eps))`, infinite for `eps >= 1`.
pub fn direction_factor(eps: f64) -> f64 {
    if eps >= 1.0 {
        f64::INFINITY
    } else {
        (2.0 * eps / (1.0 - eps)).sqrt()
    }
}

/// `eps / (1 - eps)`, infinite for `eps >= 1`.
pub fn cross_factor(eps: f64) -> f64 {
    if eps >= 1.0 {
        f64::INFINITY
    } else {
        eps / (1.0 - eps)
    }
}

/// The two terms of the combined residual bound and which is smaller.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CombinedBound {
    pub direction_term: f64,
    pub condition_term: f64,
    /// The condition-number term is the minimum.
    pub condition_branch: bool,
}

impl CombinedBound {
    pub fn new(eps: f64, cond: f64) -> Self {
        let direction_term = direction_factor(eps);
        let condition_term = cond * cond * eps * sandwich_factor(eps);
        CombinedBound {
            direction_term,
            condition_term,
            condition_branch: condition_term < direction_term,
        }
    }

    pub fn value(&self) -> f64 {
        self.direction_term.min(self.condition_term)
    }

    /// `kappa^4 < 2 / ((1 + eps) eps)`, the closed-form branch condition.
    pub fn threshold_predicate(eps: f64, cond: f64) -> bool {
        eps < 1.0 && cond.powi(4) < 2.0 / ((1.0 + eps) * eps)
    }
}

fn eps_note(eps: f64) -> Option<String> {
    (eps >= 1.0).then(|| format!("eps = {eps:.4} >= 1, bound vacuous"))
}

fn with_eps_note(r: BoundReport, eps: f64) -> BoundReport {
    match eps_note(eps) {
        Some(n) => r.with_note(n),
        None => r,
    }
}

/// `||Aᵀ(SᵀS - I)(Ay - b)|| <= eps ||A|| ||Ay - b||`.
pub fn check_geometric_preservation(
    a: &MatrixHandle,
    b: &[f64],
    s: &SketchOperator,
    y: &[f64],
    eps: f64,
    norm_a: f64,
) -> Result<BoundReport> {
    let r = a.residual(y, b);
    let rn = norm2(&r);
    if rn == 0.0 {
        return Ok(BoundReport::vacuous(BoundId::GeomPreserve, 0.0, "Ay - b = 0"));
    }
    let str_ = s.apply_adjoint_vec(&s.apply_vec(&r)?)?;
    let t = sub(&str_, &r);
    let lhs = norm2(&a.tr_mul_vec(&t));
    Ok(BoundReport::new(BoundId::GeomPreserve, lhs, eps * norm_a * rn).with_floor(ORACLE_FLOOR * norm_a * rn))
}

/// Inputs shared by the residual, perturbation and solution-error checks.
#[derive(Debug, Clone, Copy)]
pub struct SketchedSolution<'a> {
    pub a: &'a MatrixHandle,
    pub b: &'a [f64],
    pub oracle: &'a LsOracle,
    /// Exact minimizer of `||S(Ax - b)||`.
    pub x_s: &'a [f64],
    pub eps: f64,
    pub norm_a: f64,
    pub cond: f64,
}

impl SketchedSolution<'_> {
    pub fn r_s(&self) -> Vec<f64> {
        self.a.residual(self.x_s, self.b)
    }

    pub fn is_consistent(&self) -> bool {
        self.oracle.r_ls_norm <= CONSISTENT_TOL * norm2(self.b)
    }
}

/// `|‖r_ls - r_s‖² - (‖r_s‖² - ‖r_ls‖²)| / ‖r_ls‖²`.
pub fn pythagorean_defect(r_ls: &[f64], r_s: &[f64]) -> f64 {
    let d2 = dist(r_ls, r_s).powi(2);
    let rs2 = norm2(r_s).powi(2);
    let rl2 = norm2(r_ls).powi(2);
    (d2 - (rs2 - rl2)).abs() / rl2
}

/// ResidualSandwich, ResidualDirection, CombinedResidual, NormalRatioSketched
/// and NormalRatioCross.
pub fn check_residual_bounds(sol: &SketchedSolution<'_>, s: &SketchOperator, sa_norm: f64) -> Result<Vec<BoundReport>> {
    let eps = sol.eps;
    let r_s = sol.r_s();
    let rs = norm2(&r_s);
    let rl = sol.oracle.r_ls_norm;
    let diff = dist(&sol.oracle.r_ls, &r_s);
    let atrs = norm2(&sol.a.tr_mul_vec(&r_s));

    if sol.is_consistent() {
        let why = "consistent system";
        return Ok(vec![
            BoundReport::vacuous(BoundId::ResidualSandwich, rs, why),
            BoundReport::vacuous(BoundId::ResidualDirection, diff, why),
            BoundReport::vacuous(BoundId::CombinedResidual, diff, why),
            BoundReport::vacuous(BoundId::NormalRatioSketched, atrs, why),
            BoundReport::vacuous(BoundId::NormalRatioCross, 0.0, why),
        ]);
    }

    let mut out = Vec::with_capacity(5);

    let mut sandwich = with_eps_note(
        BoundReport::new(BoundId::ResidualSandwich, rs, sandwich_factor(eps) * rl),
        eps,
    );
    if rs < rl * (1.0 - crate::diagnostics::SLACK) {
        sandwich.passed = false;
        sandwich = sandwich.with_note("||r_s|| below ||r_ls||");
    }
    out.push(sandwich);

    let direction = diff / rl;
    out.push(with_eps_note(
        BoundReport::new(BoundId::ResidualDirection, direction, direction_factor(eps)).with_floor(ORACLE_FLOOR),
        eps,
    ));

    let comb = CombinedBound::new(eps, sol.cond);
    let branch = if comb.condition_branch { "condition branch" } else { "direction branch" };
    out.push(with_eps_note(
        BoundReport::new(BoundId::CombinedResidual, direction, comb.value())
            .with_floor(ORACLE_FLOOR)
            .with_note(branch),
        eps,
    ));

    out.push(if rs == 0.0 {
        BoundReport::vacuous(BoundId::NormalRatioSketched, 0.0, "r_s = 0")
    } else {
        BoundReport::new(BoundId::NormalRatioSketched, atrs / (sol.norm_a * rs), eps).with_floor(ORACLE_FLOOR)
    });

    let srl = s.apply_vec(&sol.oracle.r_ls)?;
    let srl_norm = norm2(&srl);
    let sa_t_srl = {
        // (SA)ᵀ S r_ls = Aᵀ Sᵀ S r_ls
        let sts = s.apply_adjoint_vec(&srl)?;
        norm2(&sol.a.tr_mul_vec(&sts))
    };
    out.push(if srl_norm == 0.0 || sa_norm == 0.0 {
        BoundReport::vacuous(BoundId::NormalRatioCross, 0.0, "S r_ls = 0")
    } else {
        with_eps_note(
            BoundReport::new(BoundId::NormalRatioCross, sa_t_srl / (sa_norm * srl_norm), cross_factor(eps))
                .with_floor(ORACLE_FLOOR),
            eps,
        )
    });
    Ok(out)
}

/// BackwardE1 and BackwardE2.
pub fn check_explicit_perturbations(sol: &SketchedSolution<'_>) -> Vec<BoundReport> {
    let r_s = sol.r_s();
    let rs = norm2(&r_s);
    let xs = norm2(sol.x_s);
    let mut out = Vec::with_capacity(2);
    out.push(if rs == 0.0 || sol.is_consistent() {
        BoundReport::vacuous(BoundId::BackwardE1, 0.0, "r_s = 0 or consistent system")
    } else {
        BoundReport::new(
            BoundId::BackwardE1,
            norm2(&sol.a.tr_mul_vec(&r_s)) / rs,
            sol.norm_a * sol.eps,
        )
        .with_floor(ORACLE_FLOOR * sol.norm_a)
    });
    let e2 = dist(&sol.oracle.r_ls, &r_s);
    out.push(if xs == 0.0 || sol.is_consistent() {
        BoundReport::vacuous(BoundId::BackwardE2, 0.0, "x_s = 0 or consistent system")
    } else {
        with_eps_note(
            BoundReport::new(
                BoundId::BackwardE2,
                e2 / xs,
                sol.oracle.r_ls_norm / xs * direction_factor(sol.eps),
            )
            .with_floor(ORACLE_FLOOR * sol.oracle.r_ls_norm / xs),
            sol.eps,
        )
    });
    out
}

/// `E1 = -r_s r_sᵀ A / ||r_s||²`, densely.
pub fn e1_matrix(a: &DMatrix<f64>, r_s: &[f64]) -> DMatrix<f64> {
    let r = DVector::from_column_slice(r_s);
    let rr = r.norm_squared();
    let atr = a.transpose() * &r;
    -(&r * atr.transpose()) / rr
}

/// Relative distance between `x_s` and the dense minimizer of
/// `||(A + E1) x - b||`.
pub fn e1_minimizer_defect(a: &DMatrix<f64>, b: &[f64], x_s: &[f64]) -> Result<f64> {
    let ax = a * DVector::from_column_slice(x_s);
    let r_s: Vec<f64> = ax.iter().zip(b).map(|(u, v)| u - v).collect();
    if norm2(&r_s) == 0.0 {
        return Ok(0.0);
    }
    let pert = a + e1_matrix(a, &r_s);
    let x = solve_dense_ls(&pert, b)?;
    Ok(dist(&x, x_s) / norm2(x_s))
}

/// SolutionErrRel and SolutionErrLs.
pub fn check_solution_error(sol: &SketchedSolution<'_>) -> Vec<BoundReport> {
    let r_s = sol.r_s();
    let rs = norm2(&r_s);
    let xs = norm2(sol.x_s);
    let xl = norm2(&sol.oracle.x_ls);
    let err = dist(&sol.oracle.x_ls, sol.x_s);
    let k2e = sol.cond * sol.cond * sol.eps;
    let mut out = Vec::with_capacity(2);
    if sol.is_consistent() {
        let why = "consistent system";
        out.push(BoundReport::vacuous(BoundId::SolutionErrRel, if xs > 0.0 { err / xs } else { 0.0 }, why));
        out.push(BoundReport::vacuous(BoundId::SolutionErrLs, if xl > 0.0 { err / xl } else { 0.0 }, why));
        return out;
    }
    out.push(if xs == 0.0 {
        BoundReport::vacuous(BoundId::SolutionErrRel, 0.0, "x_s = 0")
    } else {
        BoundReport::new(BoundId::SolutionErrRel, err / xs, k2e * rs / (sol.norm_a * xs))
            .with_floor(ORACLE_FLOOR * sol.cond)
    });
    out.push(if xl == 0.0 {
        BoundReport::vacuous(BoundId::SolutionErrLs, 0.0, "x_ls = 0")
    } else {
        with_eps_note(
            BoundReport::new(
                BoundId::SolutionErrLs,
                err / xl,
                k2e * sandwich_factor(sol.eps) * sol.oracle.r_ls_norm / (sol.norm_a * xl),
            )
            .with_floor(ORACLE_FLOOR * sol.cond),
            sol.eps,
        )
    });
    out
}

/// Numerical rank from singular values with the usual `max(m, n) u sigma_max` cut.
pub fn numerical_rank(m: &DMatrix<f64>) -> usize {
    let sv = m.singular_values();
    let smax = sv.iter().cloned().fold(0.0, f64::max);
    let tol = m.nrows().max(m.ncols()) as f64 * f64::EPSILON * smax;
    sv.iter().filter(|&&s| s > tol).count()
}

/// `kappa(A) eps < 1`, with the rank of `SA` checked independently.
pub fn check_acute_criterion(cond: f64, eps: f64, sa: &DMatrix<f64>) -> Result<BoundReport> {
    let n = sa.ncols();
    if n > ACUTE_COLS_GUARD {
        return Err(Error::SizeGuard {
            what: "columns of SA",
            size: n,
            limit: ACUTE_COLS_GUARD,
        });
    }
    let ke = cond * eps;
    let full = numerical_rank(sa) == n;
    let mut r = BoundReport::new(BoundId::AcuteCriterion, ke, 1.0);
    r.passed = ke < 1.0;
    if r.passed && !full {
        r = r.with_note("rank(SA) < n despite kappa eps < 1");
        r.passed = false;
    } else if !r.passed && full {
        r = r.with_note("sufficient-not-necessary: kappa eps >= 1 but rank(SA) = n");
        r.conclusive = false;
    } else if !r.passed {
        r = r.with_note("rank(SA) < n");
        r.conclusive = false;
    }
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn factors_at_zero_and_one() {
        assert_eq!(direction_factor(0.0), 0.0);
        assert_eq!(cross_factor(0.0), 0.0);
        assert_eq!(direction_factor(1.0), f64::INFINITY);
        assert_eq!(cross_factor(1.5), f64::INFINITY);
        assert!((direction_factor(1.0 / 3.0) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn combined_branch_matches_closed_form() {
        for &eps in &[1e-4, 1e-2, 0.1, 0.3] {
            for &k in &[1.0, 2.0, 5.0, 11.9, 12.1, 50.0] {
                let c = CombinedBound::new(eps, k);
                assert_eq!(c.condition_branch, CombinedBound::threshold_predicate(eps, k), "eps={eps} k={k}");
            }
        }
        // kappa < 12 for eps = 1e-4
        assert!(CombinedBound::threshold_predicate(1e-4, 11.8));
        assert!(!CombinedBound::threshold_predicate(1e-4, 12.0));
    }

    #[test]
    fn e1_norm_identity() {
        let a = crate::matio::synth::gaussian_matrix(12, 3, 5);
        let r: Vec<f64> = (0..12).map(|i| (i as f64 * 0.3).sin()).collect();
        let e1 = e1_matrix(&a, &r);
        let sv = e1.singular_values();
        let got = sv.iter().cloned().fold(0.0, f64::max);
        let atr = a.transpose() * DVector::from_column_slice(&r);
        let want = atr.norm() / norm2(&r);
        assert!((got - want).abs() <= 1e-13 * want);
    }
}
