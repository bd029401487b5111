//! Dense reference computations: least-squares solutions and extreme
//! singular values at desk scale.

use nalgebra::{ColPivQR, DMatrix, DVector};

use crate::error::{Error, Result};
use crate::matio::MatrixHandle;
use crate::rng::{self, Purpose};
use crate::vecops::{dot, norm2, scale};

/// Largest column count accepted by the dense reference solvers.
pub const DENSE_COLS_GUARD: usize = 10_000;
/// Above this column count the power-iteration norm is not cross-checked.
pub const SVD_CROSSCHECK_COLS: usize = 5_000;

const POWER_TOL: f64 = 1e-10;
const POWER_MAX_ITER: usize = 500;

/// The exact least-squares solution of `min ||A x - b||`.
#[derive(Debug, Clone, PartialEq)]
pub struct LsOracle {
    pub x_ls: Vec<f64>,
    /// `A x_ls - b`
    pub r_ls: Vec<f64>,
    pub r_ls_norm: f64,
    /// `||Aᵀ r_ls||`
    pub normal_eq_residual: f64,
}

impl LsOracle {
    /// `||Aᵀ r_ls|| / (||A|| ||r_ls||)`, zero for a consistent system.
    pub fn normal_ratio(&self, norm_a: f64) -> f64 {
        if self.r_ls_norm == 0.0 {
            0.0
        } else {
            self.normal_eq_residual / (norm_a * self.r_ls_norm)
        }
    }
}

/// Extreme singular values of a matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralNorms {
    /// `||A||`, the largest singular value.
    pub norm: f64,
    pub sigma_min: f64,
    /// `||A|| / sigma_min`, infinite when `sigma_min` is zero.
    pub cond: f64,
    /// Power-iteration estimate of `||A||` kept as a cross-check.
    pub power_estimate: f64,
    pub power_converged: bool,
    /// `sigma_min < 1e-14 ||A||`
    pub rank_deficient: bool,
}

/// Column-pivoted Householder QR of a tall dense matrix, reusable for
/// several right-hand sides.
pub(crate) struct DenseLs {
    qr: ColPivQR<f64, nalgebra::Dyn, nalgebra::Dyn>,
    r: DMatrix<f64>,
    n: usize,
}

impl DenseLs {
    pub(crate) fn new(a: &DMatrix<f64>) -> Result<Self> {
        let (m, n) = a.shape();
        if m < n {
            return Err(Error::invalid(format!("least squares needs m >= n, got {m}x{n}")));
        }
        if n > DENSE_COLS_GUARD {
            return Err(Error::SizeGuard {
                what: "columns",
                size: n,
                limit: DENSE_COLS_GUARD,
            });
        }
        let qr = ColPivQR::new(a.clone());
        let r = qr.r();
        let diag: Vec<f64> = (0..n).map(|i| r[(i, i)].abs()).collect();
        let dmax = diag.iter().cloned().fold(0.0, f64::max);
        let dmin = diag.iter().cloned().fold(f64::INFINITY, f64::min);
        if dmax == 0.0 || dmin <= 1e-12 * dmax {
            return Err(Error::RankDeficient(format!(
                "smallest pivoted R diagonal {dmin:e} is below 1e-12 x {dmax:e}"
            )));
        }
        Ok(DenseLs { qr, r, n })
    }

    pub(crate) fn solve_once(&self, rhs: &[f64]) -> Vec<f64> {
        let mut c = DVector::from_column_slice(rhs);
        self.qr.q_tr_mul(&mut c);
        let mut z = c.rows(0, self.n).into_owned();
        let ok = self.r.solve_upper_triangular_mut(&mut z);
        debug_assert!(ok);
        self.qr.p().inv_permute_rows(&mut z);
        z.as_slice().to_vec()
    }

    /// Solution followed by one step of fixed-precision refinement.
    pub(crate) fn solve(&self, a: &DMatrix<f64>, b: &[f64]) -> Vec<f64> {
        let mut x = self.solve_once(b);
        let ax = a * DVector::from_column_slice(&x);
        let res: Vec<f64> = b.iter().zip(ax.iter()).map(|(bi, ai)| bi - ai).collect();
        let dx = self.solve_once(&res);
        for (xi, di) in x.iter_mut().zip(dx) {
            *xi += di;
        }
        x
    }
}

/// Dense least-squares solve via column-pivoted QR with one refinement step.
pub fn solve_dense_ls(a: &DMatrix<f64>, b: &[f64]) -> Result<Vec<f64>> {
    if b.len() != a.nrows() {
        return Err(Error::Dimension {
            expected: a.nrows(),
            got: b.len(),
        });
    }
    Ok(DenseLs::new(a)?.solve(a, b))
}

/// Exact least-squares solution of `(A, b)` from a dense factorization.
pub fn solve_ls_oracle(a: &MatrixHandle, b: &[f64]) -> Result<LsOracle> {
    if b.len() != a.nrows() {
        return Err(Error::Dimension {
            expected: a.nrows(),
            got: b.len(),
        });
    }
    if a.ncols() > DENSE_COLS_GUARD {
        return Err(Error::SizeGuard {
            what: "columns",
            size: a.ncols(),
            limit: DENSE_COLS_GUARD,
        });
    }
    let dense = a.to_dense();
    let x_ls = solve_dense_ls(&dense, b)?;
    let r_ls = a.residual(&x_ls, b);
    let r_ls_norm = norm2(&r_ls);
    let normal_eq_residual = norm2(&a.tr_mul_vec(&r_ls));
    Ok(LsOracle {
        x_ls,
        r_ls,
        r_ls_norm,
        normal_eq_residual,
    })
}

/// Power iteration on `AᵀA`. Returns the estimate of `||A||` and whether the
/// relative change of the Rayleigh quotient dropped below the tolerance.
pub fn power_norm(a: &MatrixHandle) -> (f64, bool) {
    let n = a.ncols();
    let mut v = rng::standard_normal_vec(&mut rng::stream(0, Purpose::Probe), n);
    let nv = norm2(&v);
    scale(1.0 / nv, &mut v);
    let mut lambda = 0.0f64;
    for _ in 0..POWER_MAX_ITER {
        let w = a.tr_mul_vec(&a.mul_vec(&v));
        let next = dot(&v, &w);
        let nw = norm2(&w);
        if nw == 0.0 {
            return (0.0, true);
        }
        v = w;
        scale(1.0 / nw, &mut v);
        if (next - lambda).abs() <= POWER_TOL * next.abs() {
            return (next.max(0.0).sqrt(), true);
        }
        lambda = next;
    }
    (lambda.max(0.0).sqrt(), false)
}

impl MatrixHandle {
    /// `||A||`, `sigma_min(A)` and `kappa(A)`, computed once and cached.
    ///
    /// The singular values come from an SVD of the triangular factor of a
    /// pivoted QR of `A`; a power iteration on `AᵀA` is run alongside as a
    /// cross-check (and is the reported norm for very wide problems).
    pub fn spectral_norms(&self) -> Result<SpectralNorms> {
        if let Some(s) = self.norms.get() {
            return Ok(*s);
        }
        let n = self.ncols();
        if n > DENSE_COLS_GUARD {
            return Err(Error::SizeGuard {
                what: "columns",
                size: n,
                limit: DENSE_COLS_GUARD,
            });
        }
        let dense = self.to_dense();
        let qr = ColPivQR::new(dense);
        let r = qr.r();
        let sv = r.singular_values();
        let svd_max = sv.iter().cloned().fold(0.0, f64::max);
        let sigma_min = sv.iter().cloned().fold(f64::INFINITY, f64::min);
        let (power_estimate, power_converged) = power_norm(self);
        let norm = if n <= SVD_CROSSCHECK_COLS { svd_max } else { power_estimate };
        let cond = if sigma_min > 0.0 { norm / sigma_min } else { f64::INFINITY };
        let s = SpectralNorms {
            norm,
            sigma_min,
            cond,
            power_estimate,
            power_converged,
            rank_deficient: sigma_min < 1e-14 * norm,
        };
        let _ = self.norms.set(s);
        Ok(*self.norms.get().unwrap())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matio::synth;

    #[test]
    fn two_by_one_closed_form() {
        // (AᵀA) x = Aᵀb gives 2x = 1
        let a = MatrixHandle::dense(DMatrix::from_column_slice(2, 1, &[1.0, 1.0]));
        let o = solve_ls_oracle(&a, &[1.0, 0.0]).unwrap();
        assert!((o.x_ls[0] - 0.5).abs() < 1e-15);
        assert!((o.r_ls_norm - 0.5f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn consistent_system_recovers_solution() {
        let a = MatrixHandle::dense(synth::gaussian_matrix(30, 5, 3));
        let x: Vec<f64> = (0..5).map(|i| i as f64 - 2.0).collect();
        let b = a.mul_vec(&x);
        let o = solve_ls_oracle(&a, &b).unwrap();
        for (u, v) in o.x_ls.iter().zip(&x) {
            assert!((u - v).abs() < 1e-12);
        }
        assert!(o.r_ls_norm <= 1e-12 * norm2(&b));
    }

    #[test]
    fn pivoting_permutation_is_undone() {
        // columns of wildly different scale force pivoting
        let mut a = synth::gaussian_matrix(20, 4, 11);
        a.column_mut(0).scale_mut(1e-3);
        a.column_mut(3).scale_mut(1e3);
        let b: Vec<f64> = (0..20).map(|i| (i as f64).sin()).collect();
        let x = solve_dense_ls(&a, &b).unwrap();
        let h = MatrixHandle::dense(a);
        let r = h.residual(&x, &b);
        let g = h.tr_mul_vec(&r);
        let na = h.spectral_norms().unwrap().norm;
        assert!(norm2(&g) <= 1e-12 * na * norm2(&r));
    }

    #[test]
    fn rank_deficiency_is_reported() {
        let mut a = synth::gaussian_matrix(10, 3, 1);
        let c0 = a.column(0).into_owned();
        a.set_column(2, &(c0 * 2.0));
        let err = solve_dense_ls(&a, &[1.0; 10]).unwrap_err();
        assert!(matches!(err, Error::RankDeficient(_)));
    }

    #[test]
    fn identity_norms() {
        let s = MatrixHandle::identity(5).spectral_norms().unwrap();
        assert!((s.norm - 1.0).abs() < 1e-14);
        assert!((s.sigma_min - 1.0).abs() < 1e-14);
        assert!((s.cond - 1.0).abs() < 1e-14);
    }

    #[test]
    fn prescribed_condition_number_is_recovered() {
        let a = MatrixHandle::dense(synth::conditioned_matrix(60, 8, 1e3, 5));
        let s = a.spectral_norms().unwrap();
        assert!((s.norm - 1.0).abs() < 1e-12);
        assert!((s.cond / 1e3 - 1.0).abs() < 1e-10);
        assert!((s.power_estimate / s.norm - 1.0).abs() < 1e-8);
        // cached
        assert_eq!(a.cached_norms().copied(), Some(s));
    }
}
