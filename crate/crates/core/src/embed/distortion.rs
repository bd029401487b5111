use nalgebra::DMatrix;

use crate::embed::SketchOperator;
use crate::error::{Error, Result};
use crate::matio::MatrixHandle;
use crate::vecops::norm2;

/// `b` counts as lying in `range(A)` when its component orthogonal to the
/// range is below this fraction of `||b||`.
const DEPENDENT_TOL: f64 = 1e-12;

/// Exact distortion of an embedding over `span(A, b)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DistortionReport {
    /// `max(sigma_max² - 1, 1 - sigma_min²)`; at least 1 when rank is lost.
    pub epsilon_exact: f64,
    pub sigma_max_sq: f64,
    pub sigma_min_sq: f64,
    pub subspace_dim: usize,
    /// `S Q` lost rank on the subspace.
    pub rank_loss: bool,
}

impl DistortionReport {
    /// `sigma_max / sigma_min` of `S Q`: the exact worst-case stretch ratio,
    /// never larger than `sqrt((1+eps)/(1-eps))`.
    pub fn stretch_ratio(&self) -> f64 {
        if self.sigma_min_sq <= 0.0 {
            f64::INFINITY
        } else {
            (self.sigma_max_sq / self.sigma_min_sq).sqrt()
        }
    }

    /// `sqrt((1+eps)/(1-eps))`, infinite for `eps >= 1`.
    pub fn sandwich_factor(&self) -> f64 {
        sandwich_factor(self.epsilon_exact)
    }
}

pub fn sandwich_factor(eps: f64) -> f64 {
    if eps >= 1.0 {
        f64::INFINITY
    } else {
        ((1.0 + eps) / (1.0 - eps)).sqrt()
    }
}

/// Orthonormal basis of `span([A b])` as an `m x k` matrix, `k` in `{n, n+1}`.
/// The `b` column is dropped when `b` lies in `range(A)`.
pub fn subspace_basis(a: &MatrixHandle, b: &[f64]) -> Result<DMatrix<f64>> {
    let (m, n) = (a.nrows(), a.ncols());
    if b.len() != m {
        return Err(Error::Dimension {
            expected: m,
            got: b.len(),
        });
    }
    if n + 1 > m {
        return Err(Error::invalid(format!("span(A, b) needs m > n, got {m}x{n}")));
    }
    let mut ab = a.to_dense().resize_horizontally(n + 1, 0.0);
    ab.column_mut(n).copy_from_slice(b);
    let qr = ab.qr();
    let r = qr.r();
    let rmax = (0..n).map(|i| r[(i, i)].abs()).fold(0.0, f64::max);
    let rmin = (0..n).map(|i| r[(i, i)].abs()).fold(f64::INFINITY, f64::min);
    if rmin <= 1e-12 * rmax {
        return Err(Error::RankDeficient(format!(
            "A has R diagonal {rmin:e} below 1e-12 x {rmax:e}"
        )));
    }
    let q = qr.q();
    let bn = norm2(b);
    let keep = if bn > 0.0 && r[(n, n)].abs() > DEPENDENT_TOL * bn {
        n + 1
    } else {
        n
    };
    Ok(q.columns(0, keep).into_owned())
}

/// Smallest `eps` with `(1-eps)||y||² <= ||S y||² <= (1+eps)||y||²` for all
/// `y` in `span(A, b)`, from the singular values of `S Q`.
pub fn exact_distortion(s: &SketchOperator, a: &MatrixHandle, b: &[f64]) -> Result<DistortionReport> {
    if s.m() != a.nrows() {
        return Err(Error::Dimension {
            expected: s.m(),
            got: a.nrows(),
        });
    }
    let q = subspace_basis(a, b)?;
    if s.kind() == crate::embed::SketchKind::Identity {
        // SᵀS = I exactly
        return Ok(DistortionReport {
            epsilon_exact: 0.0,
            sigma_max_sq: 1.0,
            sigma_min_sq: 1.0,
            subspace_dim: q.ncols(),
            rank_loss: false,
        });
    }
    distortion_of_basis(s, &q)
}

/// Distortion over the span of the orthonormal columns of `q`.
pub fn distortion_of_basis(s: &SketchOperator, q: &DMatrix<f64>) -> Result<DistortionReport> {
    let k = q.ncols();
    let sq = s.apply_dense(q)?;
    let sv = sq.singular_values();
    let smax = sv.iter().cloned().fold(0.0, f64::max);
    // fewer rows than the subspace dimension leaves a null direction
    let smin = if sq.nrows() < k {
        0.0
    } else {
        sv.iter().cloned().fold(f64::INFINITY, f64::min)
    };
    let sigma_max_sq = smax * smax;
    let sigma_min_sq = smin * smin;
    let rank_loss = smin <= 1e-14 * smax.max(1.0);
    let mut epsilon_exact = (sigma_max_sq - 1.0).max(1.0 - sigma_min_sq).max(0.0);
    if rank_loss {
        epsilon_exact = epsilon_exact.max(1.0);
    }
    Ok(DistortionReport {
        epsilon_exact,
        sigma_max_sq,
        sigma_min_sq,
        subspace_dim: k,
        rank_loss,
    })
}
