use crate::solvers::LinearOperator;
use crate::vecops::{axpy, dot, norm2, scale};

/// Golub-Kahan bidiagonalization of `(Op, rhs)` with optional full
/// reorthogonalization of both Lanczos bases.
pub(crate) struct GolubKahan {
    pub u: Vec<f64>,
    pub v: Vec<f64>,
    pub alpha: f64,
    pub beta: f64,
    basis_u: Option<Vec<Vec<f64>>>,
    basis_v: Option<Vec<Vec<f64>>>,
    tmp_u: Vec<f64>,
    tmp_v: Vec<f64>,
    /// `sqrt(sum alpha² + beta²)`, a lower estimate of `||Op||_F`.
    fro: f64,
}

fn orthogonalize(w: &mut [f64], basis: &[Vec<f64>]) {
    // twice is enough
    for _ in 0..2 {
        for q in basis {
            let c = dot(q, w);
            axpy(-c, q, w);
        }
    }
}

impl GolubKahan {
    /// `beta_1 u_1 = rhs`, `alpha_1 v_1 = Opᵀ u_1`.
    pub(crate) fn start<O: LinearOperator + ?Sized>(op: &O, rhs: &[f64], reorth: bool) -> Self {
        let (m, n) = (op.nrows(), op.ncols());
        let mut u = rhs.to_vec();
        let beta = norm2(&u);
        let mut v = vec![0.0; n];
        let mut alpha = 0.0;
        if beta > 0.0 {
            scale(1.0 / beta, &mut u);
            op.apply_adjoint(&u, &mut v);
            alpha = norm2(&v);
            if alpha > 0.0 {
                scale(1.0 / alpha, &mut v);
            }
        }
        let mut gk = GolubKahan {
            u,
            v,
            alpha,
            beta,
            basis_u: reorth.then(Vec::new),
            basis_v: reorth.then(Vec::new),
            tmp_u: vec![0.0; m],
            tmp_v: vec![0.0; n],
            fro: (alpha * alpha + beta * beta).sqrt(),
        };
        if let Some(bu) = gk.basis_u.as_mut() {
            bu.push(gk.u.clone());
        }
        if let Some(bv) = gk.basis_v.as_mut() {
            bv.push(gk.v.clone());
        }
        gk
    }

    /// Advances to `beta_{k+1}`, `u_{k+1}`, `alpha_{k+1}`, `v_{k+1}`.
    /// A coefficient at rounding level relative to the running norm is set to
    /// exactly zero, which the callers treat as an exhausted Krylov space.
    pub(crate) fn step<O: LinearOperator + ?Sized>(&mut self, op: &O) {
        let tiny = f64::EPSILON * self.fro;
        op.apply(&self.v, &mut self.tmp_u);
        for (t, ui) in self.tmp_u.iter_mut().zip(&self.u) {
            *t -= self.alpha * ui;
        }
        if let Some(bu) = &self.basis_u {
            orthogonalize(&mut self.tmp_u, bu);
        }
        let beta = norm2(&self.tmp_u);
        if beta <= tiny {
            self.beta = 0.0;
            return;
        }
        self.beta = beta;
        std::mem::swap(&mut self.u, &mut self.tmp_u);
        scale(1.0 / beta, &mut self.u);
        if let Some(bu) = self.basis_u.as_mut() {
            bu.push(self.u.clone());
        }
        op.apply_adjoint(&self.u, &mut self.tmp_v);
        for (t, vi) in self.tmp_v.iter_mut().zip(&self.v) {
            *t -= beta * vi;
        }
        if let Some(bv) = &self.basis_v {
            orthogonalize(&mut self.tmp_v, bv);
        }
        let alpha = norm2(&self.tmp_v);
        self.fro = (self.fro * self.fro + beta * beta + alpha * alpha).sqrt();
        if alpha <= tiny {
            self.alpha = 0.0;
            return;
        }
        self.alpha = alpha;
        std::mem::swap(&mut self.v, &mut self.tmp_v);
        scale(1.0 / alpha, &mut self.v);
        if let Some(bv) = self.basis_v.as_mut() {
            bv.push(self.v.clone());
        }
    }
}

fn sign(a: f64) -> f64 {
    if a > 0.0 {
        1.0
    } else if a < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// Stable Givens rotation: `(c, s, r)` with `[c s; -s c] [a; b] = [r; 0]`.
pub(crate) fn sym_ortho(a: f64, b: f64) -> (f64, f64, f64) {
    if b == 0.0 {
        (sign(a), 0.0, a.abs())
    } else if a == 0.0 {
        (0.0, sign(b), b.abs())
    } else if b.abs() > a.abs() {
        let tau = a / b;
        let s = sign(b) / (1.0 + tau * tau).sqrt();
        let c = s * tau;
        (c, s, b / s)
    } else {
        let tau = b / a;
        let c = sign(a) / (1.0 + tau * tau).sqrt();
        let s = c * tau;
        (c, s, a / c)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #[test]
        fn sym_ortho_annihilates(a in -1e3f64..1e3, b in -1e3f64..1e3) {
            let (c, s, r) = sym_ortho(a, b);
            let scale = a.abs().max(b.abs()).max(1e-300);
            prop_assert!((c * a + s * b - r).abs() <= 1e-14 * scale);
            prop_assert!((-s * a + c * b).abs() <= 1e-14 * scale);
            prop_assert!(r >= 0.0);
            if a != 0.0 || b != 0.0 {
                prop_assert!((c * c + s * s - 1.0).abs() <= 1e-15);
            }
        }
    }
}
