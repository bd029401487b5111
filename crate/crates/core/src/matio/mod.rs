//! Matrix storage, Matrix Market input, test-problem synthesis and dense
//! reference solutions.

mod market;
mod matrix;
mod oracle;
mod problem;
pub mod synth;

pub use market::{
    load_matrix_market, load_vector, read_matrix_market, save_matrix_market, save_vector,
    write_matrix_market, write_vector,
};
pub use matrix::{CsrMatrix, MatrixHandle, Storage};
pub use oracle::{
    power_norm, solve_dense_ls, solve_ls_oracle, LsOracle, SpectralNorms, DENSE_COLS_GUARD,
};
pub use problem::{
    consistent_problem, synthesize_problem, ProblemInstance, Truth, DEFAULT_RESIDUAL_SCALE,
};
