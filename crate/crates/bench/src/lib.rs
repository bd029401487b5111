//! Shared fixtures for the benchmarks.

use std::sync::Arc;

use sketchls_core::matio::{synth, synthesize_problem, ProblemInstance};
use sketchls_core::MatrixHandle;

/// Gaussian `m x n` test problem with the default residual scale.
pub fn gaussian_problem(m: usize, n: usize, seed: u64) -> ProblemInstance {
    let a = Arc::new(MatrixHandle::dense(synth::gaussian_matrix(m, n, seed)));
    synthesize_problem(a, seed, sketchls_core::matio::DEFAULT_RESIDUAL_SCALE)
        .expect("synthetic problem")
}

/// Sparse `m x n` test problem with `extra` off-diagonal entries per column.
pub fn sparse_problem(m: usize, n: usize, extra: usize, seed: u64) -> ProblemInstance {
    let a = Arc::new(MatrixHandle::sparse(synth::sparse_random(m, n, extra, seed)));
    synthesize_problem(a, seed, sketchls_core::matio::DEFAULT_RESIDUAL_SCALE)
        .expect("synthetic problem")
}
