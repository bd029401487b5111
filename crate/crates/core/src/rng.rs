//! Seeded random streams.
//!
//! Every random draw in the crate comes from a ChaCha20 generator keyed by the
//! user seed, with the 64-bit stream id selecting the purpose of the draw.
//! Draws for different purposes (Gaussian payload, Rademacher signs, sampled
//! rows, synthetic solutions, ...) are therefore independent and each is
//! reproducible on its own.

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

/// What a random stream is used for. The discriminant is the ChaCha stream id.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[repr(u64)]
pub enum Purpose {
    GaussianEntries = 0x10,
    SrhtSigns = 0x20,
    SrhtRows = 0x21,
    SparseRows = 0x30,
    SparseSigns = 0x31,
    ProblemSolution = 0x40,
    ProblemResidual = 0x41,
    SyntheticMatrix = 0x50,
    Probe = 0x60,
}

pub fn stream(seed: u64, purpose: Purpose) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(purpose as u64);
    rng
}

/// Fill a vector with i.i.d. standard normal draws.
pub fn standard_normal_vec(rng: &mut ChaCha20Rng, len: usize) -> Vec<f64> {
    use rand::Rng;
    use rand_distr::StandardNormal;
    (0..len).map(|_| rng.sample::<f64, _>(StandardNormal)).collect()
}
