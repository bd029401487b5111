use nalgebra::{DMatrix, DVectorView, DVectorViewMut};

use crate::matio::MatrixHandle;
use crate::rng::{self, Purpose};
use crate::vecops::{dot, norm2, scale};

/// A real matrix seen only through products with it and its transpose.
pub trait LinearOperator {
    fn nrows(&self) -> usize;
    fn ncols(&self) -> usize;
    /// `y = Op x`
    fn apply(&self, x: &[f64], y: &mut [f64]);
    /// `x = Opᵀ y`
    fn apply_adjoint(&self, y: &[f64], x: &mut [f64]);
}

impl LinearOperator for DMatrix<f64> {
    fn nrows(&self) -> usize {
        self.nrows()
    }

    fn ncols(&self) -> usize {
        self.ncols()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        let xv = DVectorView::from_slice(x, x.len());
        let mut yv = DVectorViewMut::from_slice(y, self.nrows());
        yv.gemv(1.0, self, &xv, 0.0);
    }

    fn apply_adjoint(&self, y: &[f64], x: &mut [f64]) {
        let yv = DVectorView::from_slice(y, y.len());
        let mut xv = DVectorViewMut::from_slice(x, self.ncols());
        xv.gemv_tr(1.0, self, &yv, 0.0);
    }
}

impl LinearOperator for MatrixHandle {
    fn nrows(&self) -> usize {
        MatrixHandle::nrows(self)
    }

    fn ncols(&self) -> usize {
        MatrixHandle::ncols(self)
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        self.mul_vec_into(x, y);
    }

    fn apply_adjoint(&self, y: &[f64], x: &mut [f64]) {
        self.tr_mul_vec_into(y, x);
    }
}

impl<T: LinearOperator + ?Sized> LinearOperator for &T {
    fn nrows(&self) -> usize {
        (**self).nrows()
    }

    fn ncols(&self) -> usize {
        (**self).ncols()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        (**self).apply(x, y)
    }

    fn apply_adjoint(&self, y: &[f64], x: &mut [f64]) {
        (**self).apply_adjoint(y, x)
    }
}

/// Largest `|uᵀ(Op v) - (Opᵀu)ᵀv| / (||u|| ||v||)` over `probes` random pairs.
/// Divide by `||Op||` for the relative adjoint defect.
pub fn adjoint_defect<O: LinearOperator + ?Sized>(op: &O, probes: usize, seed: u64) -> f64 {
    let mut g = rng::stream(seed, Purpose::Probe);
    let (m, n) = (op.nrows(), op.ncols());
    let mut worst = 0.0f64;
    let mut av = vec![0.0; m];
    let mut atu = vec![0.0; n];
    for _ in 0..probes {
        let u = rng::standard_normal_vec(&mut g, m);
        let v = rng::standard_normal_vec(&mut g, n);
        op.apply(&v, &mut av);
        op.apply_adjoint(&u, &mut atu);
        let d = (dot(&u, &av) - dot(&atu, &v)).abs() / (norm2(&u) * norm2(&v));
        worst = worst.max(d);
    }
    worst
}

/// Power-iteration estimate of `||Op||` (tolerance 1e-10, at most 500 steps).
pub fn operator_norm<O: LinearOperator + ?Sized>(op: &O) -> f64 {
    let (m, n) = (op.nrows(), op.ncols());
    let mut v = rng::standard_normal_vec(&mut rng::stream(0, Purpose::Probe), n);
    let nv = norm2(&v);
    scale(1.0 / nv, &mut v);
    let mut av = vec![0.0; m];
    let mut w = vec![0.0; n];
    let mut lambda = 0.0f64;
    for _ in 0..500 {
        op.apply(&v, &mut av);
        op.apply_adjoint(&av, &mut w);
        let next = dot(&v, &w);
        let nw = norm2(&w);
        if nw == 0.0 {
            return 0.0;
        }
        v.copy_from_slice(&w);
        scale(1.0 / nw, &mut v);
        if (next - lambda).abs() <= 1e-10 * next.abs() {
            return next.max(0.0).sqrt();
        }
        lambda = next;
    }
    lambda.max(0.0).sqrt()
}
