use nalgebra::DMatrix;

use crate::diagnostics::{numerical_rank, BoundId, BoundReport};
use crate::error::{Error, Result};

/// Largest `m n` for the dense pseudoinverse checks.
pub const PINV_SIZE_GUARD: usize = 10_000;

fn spectral_norm(m: &DMatrix<f64>) -> f64 {
    m.singular_values().iter().cloned().fold(0.0, f64::max)
}

/// Pseudoinverse keeping only singular values above the rank cut.
pub fn pseudo_inverse(m: &DMatrix<f64>) -> DMatrix<f64> {
    let svd = m.clone().svd(true, true);
    let smax = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    let tol = m.nrows().max(m.ncols()) as f64 * f64::EPSILON * smax;
    svd.pseudo_inverse(tol).expect("u and v were computed")
}

/// Pseudoinverse perturbation for `Ã = A + E`.
///
/// With equal full column rank: `||Ã† - A†|| <= sqrt(2) ||Ã†|| ||A†|| ||E||`
/// ([`BoundId::PinvWedin`]). Otherwise the pair is not acute and
/// `||A† - Ã†|| >= 1 / ||E||`, reported as `1/||E|| <= ||A† - Ã†||`
/// ([`BoundId::PinvNonAcute`]).
pub fn check_pseudoinverse_perturbation(a: &DMatrix<f64>, at: &DMatrix<f64>) -> Result<BoundReport> {
    if a.shape() != at.shape() {
        return Err(Error::Dimension {
            expected: a.ncols(),
            got: at.ncols(),
        });
    }
    let size = a.nrows() * a.ncols();
    if size > PINV_SIZE_GUARD {
        return Err(Error::SizeGuard {
            what: "m*n",
            size,
            limit: PINV_SIZE_GUARD,
        });
    }
    let n = a.ncols();
    let e = at - a;
    let en = spectral_norm(&e);
    let ap = pseudo_inverse(a);
    let atp = pseudo_inverse(at);
    let diff = spectral_norm(&(&atp - &ap));
    let (ra, rt) = (numerical_rank(a), numerical_rank(at));
    if ra == n && rt == n {
        let rhs = 2f64.sqrt() * spectral_norm(&atp) * spectral_norm(&ap) * en;
        Ok(BoundReport::new(BoundId::PinvWedin, diff, rhs))
    } else if en == 0.0 {
        Ok(BoundReport::vacuous(BoundId::PinvNonAcute, 0.0, "E = 0"))
    } else {
        Ok(BoundReport::new(BoundId::PinvNonAcute, 1.0 / en, diff)
            .with_note(format!("rank(A) = {ra}, rank(A + E) = {rt}")))
    }
}
