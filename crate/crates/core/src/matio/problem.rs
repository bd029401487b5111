use std::sync::Arc;

use crate::error::{Error, Result};
use crate::matio::MatrixHandle;
use crate::rng::{self, Purpose};
use crate::vecops::{norm2, scale};

/// Default scale of the synthetic residual.
pub const DEFAULT_RESIDUAL_SCALE: f64 = 1e-3;

/// The vectors a synthetic right-hand side was built from.
///
/// `r_ls` is a random direction and is not orthogonal to `range(A)`, so
/// `x_ls` here is the construction input rather than the least-squares
/// minimizer of `(A, b)`; bound checks use [`crate::matio::LsOracle`].
#[derive(Debug, Clone, PartialEq)]
pub struct Truth {
    pub x_ls: Vec<f64>,
    pub r_ls: Vec<f64>,
    pub r_ls_norm: f64,
}

#[derive(Debug, Clone)]
pub struct ProblemInstance {
    pub a: Arc<MatrixHandle>,
    pub b: Vec<f64>,
    pub truth: Option<Truth>,
    pub seed: u64,
}

impl ProblemInstance {
    pub fn new(a: Arc<MatrixHandle>, b: Vec<f64>) -> Result<Self> {
        if b.len() != a.nrows() {
            return Err(Error::Dimension {
                expected: a.nrows(),
                got: b.len(),
            });
        }
        Ok(ProblemInstance {
            a,
            b,
            truth: None,
            seed: 0,
        })
    }

    pub fn m(&self) -> usize {
        self.a.nrows()
    }

    pub fn n(&self) -> usize {
        self.a.ncols()
    }
}

/// Builds `b = A x - r` with `x ~ N(0, I)` and `r = rho t / ||t||`,
/// `t ~ N(0, I)`, all drawn from streams keyed by `seed`.
pub fn synthesize_problem(a: Arc<MatrixHandle>, seed: u64, rho: f64) -> Result<ProblemInstance> {
    if !(rho > 0.0 && rho.is_finite()) {
        return Err(Error::invalid(format!("residual scale must be positive, got {rho}")));
    }
    let (m, n) = (a.nrows(), a.ncols());
    let x = rng::standard_normal_vec(&mut rng::stream(seed, Purpose::ProblemSolution), n);
    let mut res_rng = rng::stream(seed, Purpose::ProblemResidual);
    let mut t = rng::standard_normal_vec(&mut res_rng, m);
    let mut tn = norm2(&t);
    if tn == 0.0 {
        t = rng::standard_normal_vec(&mut res_rng, m);
        tn = norm2(&t);
        if tn == 0.0 {
            return Err(Error::Degenerate("residual direction drawn as zero twice".into()));
        }
    }
    scale(rho / tn, &mut t);
    let r = t;
    let mut b = a.mul_vec(&x);
    for (bi, ri) in b.iter_mut().zip(&r) {
        *bi -= ri;
    }
    let r_norm = norm2(&r);
    Ok(ProblemInstance {
        a,
        b,
        truth: Some(Truth {
            x_ls: x,
            r_ls: r,
            r_ls_norm: r_norm,
        }),
        seed,
    })
}

/// Consistent instance `b = A x` for a given `x`.
pub fn consistent_problem(a: Arc<MatrixHandle>, x: Vec<f64>) -> Result<ProblemInstance> {
    if x.len() != a.ncols() {
        return Err(Error::Dimension {
            expected: a.ncols(),
            got: x.len(),
        });
    }
    let b = a.mul_vec(&x);
    let m = a.nrows();
    Ok(ProblemInstance {
        a,
        b,
        truth: Some(Truth {
            x_ls: x,
            r_ls: vec![0.0; m],
            r_ls_norm: 0.0,
        }),
        seed: 0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matio::synth;

    fn mat() -> Arc<MatrixHandle> {
        Arc::new(MatrixHandle::dense(synth::gaussian_matrix(50, 6, 2)))
    }

    #[test]
    fn residual_has_requested_norm() {
        let p = synthesize_problem(mat(), 1, 1e-3).unwrap();
        let t = p.truth.unwrap();
        assert!((t.r_ls_norm - 1e-3).abs() <= 1e-15);
    }

    #[test]
    fn rejects_nonpositive_scale() {
        assert!(synthesize_problem(mat(), 1, 0.0).is_err());
        assert!(synthesize_problem(mat(), 1, -1.0).is_err());
    }

    #[test]
    fn same_seed_same_bits() {
        let a = mat();
        let p = synthesize_problem(a.clone(), 9, 1e-3).unwrap();
        let q = synthesize_problem(a, 9, 1e-3).unwrap();
        assert_eq!(p.b, q.b);
    }

    #[test]
    fn construction_identity_holds() {
        let p = synthesize_problem(mat(), 4, 1e-3).unwrap();
        let t = p.truth.as_ref().unwrap();
        let r = p.a.residual(&t.x_ls, &p.b);
        let scale = p.a.spectral_norms().unwrap().norm * norm2(&t.x_ls) + norm2(&p.b);
        let d = crate::vecops::dist(&r, &t.r_ls);
        assert!(d <= 1e-12 * scale);
    }
}
