//! Synthetic test matrices.

use nalgebra::DMatrix;
use rand::Rng;

use crate::matio::CsrMatrix;
use crate::rng::{self, Purpose};

/// `m x n` matrix with i.i.d. standard normal entries.
pub fn gaussian_matrix(m: usize, n: usize, seed: u64) -> DMatrix<f64> {
    let v = rng::standard_normal_vec(&mut rng::stream(seed, Purpose::SyntheticMatrix), m * n);
    DMatrix::from_vec(m, n, v)
}

fn orthonormal_columns(m: usize, n: usize, seed: u64) -> DMatrix<f64> {
    gaussian_matrix(m, n, seed).qr().q()
}

/// `U diag(sigma) Vᵀ` with random orthonormal `U`, `V` and singular values
/// spaced geometrically from 1 down to `1 / cond`.
pub fn conditioned_matrix(m: usize, n: usize, cond: f64, seed: u64) -> DMatrix<f64> {
    assert!(m >= n && n >= 1 && cond >= 1.0);
    let u = orthonormal_columns(m, n, seed);
    let v = orthonormal_columns(n, n, seed ^ 0x9e37_79b9_7f4a_7c15);
    let sigma: Vec<f64> = (0..n)
        .map(|i| {
            if n == 1 {
                1.0
            } else {
                cond.powf(-(i as f64) / (n - 1) as f64)
            }
        })
        .collect();
    let mut us = u;
    for (j, s) in sigma.iter().enumerate() {
        us.column_mut(j).scale_mut(*s);
    }
    us * v.transpose()
}

/// Sparse `m x n` matrix with a unit-dominant entry at `(j, j)` of every
/// column plus `extra_per_col` normal entries at random rows. Full column
/// rank with overwhelming probability for `m >= n`.
pub fn sparse_random(m: usize, n: usize, extra_per_col: usize, seed: u64) -> CsrMatrix {
    use rand_distr::StandardNormal;
    assert!(m >= n);
    let mut g = rng::stream(seed, Purpose::SyntheticMatrix);
    let mut t = Vec::with_capacity(n * (extra_per_col + 1));
    for j in 0..n {
        let z: f64 = g.sample(StandardNormal);
        t.push((j, j, 1.0 + z.abs()));
        for _ in 0..extra_per_col {
            let i = g.random_range(0..m);
            t.push((i, j, g.sample::<f64, _>(StandardNormal)));
        }
    }
    CsrMatrix::from_triplets(m, n, t).expect("synthetic triplets are in range")
}
