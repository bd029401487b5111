//! Random embeddings `S: R^m -> R^d` and their exact distortion.

mod distortion;
mod fwht;
mod sketch;

pub use distortion::{
    distortion_of_basis, exact_distortion, sandwich_factor, subspace_basis, DistortionReport,
};
pub use fwht::{fwht, hadamard_entry};
pub use sketch::{build_sketch, Payload, SketchKind, SketchOperator, SketchedProblem, MATERIALIZE_GUARD};
