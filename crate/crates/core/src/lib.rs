//! Sketch-and-solve least squares.
//!
//! The crate is organised around the pipeline of a sketched least-squares
//! experiment:
//!
//! * [`matio`] stores matrices, reads Matrix Market files, synthesizes test
//!   problems and computes dense reference solutions.
//! * [`embed`] builds Gaussian, SRHT and sparse (CountSketch) embeddings and
//!   measures their exact distortion over `span(A, b)`.
//! * [`solvers`] runs LSQR and LSMR on the sketched pair `(SA, Sb)` while
//!   observing the iterates on the original problem.
//! * [`stopping`] holds the traditional tolerance rule and the stabilization
//!   rules that monitor the unsketched metrics.
//! * [`diagnostics`] evaluates the residual, backward-error and solution-error
//!   inequalities for a solved instance.

pub mod diagnostics;
pub mod embed;
pub mod error;
pub mod matio;
pub mod rng;
pub mod solvers;
pub mod stopping;
pub mod trace;
pub mod vecops;

pub use diagnostics::{BackwardErrorResult, BoundId, BoundReport};
pub use embed::{DistortionReport, SketchKind, SketchOperator, SketchedProblem};
pub use error::{Error, Result};
pub use matio::{LsOracle, MatrixHandle, ProblemInstance, SpectralNorms};
pub use solvers::{IterateRecord, LinearOperator, SolveResult, SolverKind, Termination};
pub use stopping::{Band, StopMode, StoppingPolicy};
