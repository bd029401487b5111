use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::diagnostics::{BoundId, BoundReport};
use crate::error::{Error, Result};
use crate::matio::MatrixHandle;
use crate::vecops::norm2;

/// Largest row count for the dense `m x m` eigensolve.
pub const ETA_ROWS_GUARD: usize = 2000;

/// Normwise backward error of an approximate least-squares solution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BackwardErrorResult {
    pub eta_f: f64,
    /// Smallest eigenvalue of `AAᵀ - mu r rᵀ / ||x||²`.
    pub lambda_star: f64,
    pub mu: f64,
    /// `||r|| / ||x||`
    pub gamma: f64,
    /// `||Aᵀ r|| / ||r||`
    pub upper_bound: f64,
}

impl BackwardErrorResult {
    /// `eta_F <= ||Aᵀ r|| / ||r||`, asserted when `lambda_star < 0`.
    pub fn report(&self) -> BoundReport {
        if self.lambda_star < 0.0 {
            BoundReport::new(BoundId::EtaFUpper, self.eta_f, self.upper_bound)
        } else {
            BoundReport::vacuous(BoundId::EtaFUpper, self.eta_f, "lambda* >= 0")
        }
    }

    /// `upper_bound / eta_F`.
    pub fn sharpness(&self) -> f64 {
        self.upper_bound / self.eta_f
    }
}

/// `mu = theta² ||x||² / (1 + theta² ||x||²)`; 1 for infinite `theta`.
pub fn mu_of(theta: f64, x_norm: f64) -> f64 {
    if theta.is_infinite() {
        1.0
    } else {
        let t = theta * theta * x_norm * x_norm;
        t / (1.0 + t)
    }
}

/// Backward error `eta_F(x)` for `min ||Ax - b||`, perturbing `A` and `theta b`.
///
/// `eta_F = gamma sqrt(mu)` when `lambda* >= 0` and
/// `sqrt(gamma² mu + lambda*)` otherwise.
pub fn compute_eta_f(a: &MatrixHandle, b: &[f64], x: &[f64], theta: f64) -> Result<BackwardErrorResult> {
    let m = a.nrows();
    if m > ETA_ROWS_GUARD {
        return Err(Error::SizeGuard {
            what: "rows",
            size: m,
            limit: ETA_ROWS_GUARD,
        });
    }
    if x.len() != a.ncols() {
        return Err(Error::Dimension {
            expected: a.ncols(),
            got: x.len(),
        });
    }
    if !(theta > 0.0) {
        return Err(Error::invalid(format!("theta must be positive, got {theta}")));
    }
    let xn = norm2(x);
    if xn == 0.0 {
        return Err(Error::invalid("backward error needs a nonzero x"));
    }
    let r = a.residual(x, b);
    let rn = norm2(&r);
    let mu = mu_of(theta, xn);
    let ad = a.to_dense();
    let mut mat = &ad * ad.transpose();
    let rv = DVector::from_column_slice(&r);
    mat -= (mu / (xn * xn)) * (&rv * rv.transpose());
    let (mut lambda_star, spread) = smallest_eigenvalue(mat);
    // eigenvalues at rounding level are zero
    if lambda_star.abs() <= m as f64 * f64::EPSILON * spread {
        lambda_star = 0.0;
    }
    let gamma = rn / xn;
    if rn == 0.0 {
        return Ok(BackwardErrorResult {
            eta_f: 0.0,
            lambda_star,
            mu,
            gamma: 0.0,
            upper_bound: 0.0,
        });
    }
    let eta_f = if lambda_star >= 0.0 {
        gamma * mu.sqrt()
    } else {
        (gamma * gamma * mu + lambda_star).max(0.0).sqrt()
    };
    Ok(BackwardErrorResult {
        eta_f,
        lambda_star,
        mu,
        gamma,
        upper_bound: norm2(&a.tr_mul_vec(&r)) / rn,
    })
}

/// Smallest eigenvalue and largest eigenvalue magnitude.
fn smallest_eigenvalue(mut m: DMatrix<f64>) -> (f64, f64) {
    // symmetrize against rounding in the products
    let mt = m.transpose();
    m += mt;
    m *= 0.5;
    let ev = SymmetricEigen::new(m).eigenvalues;
    let lo = ev.iter().cloned().fold(f64::INFINITY, f64::min);
    let spread = ev.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
    (lo, spread)
}
