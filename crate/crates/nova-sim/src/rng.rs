//! Seeded, splittable random streams.
//!
//! Every replicate draws from its own ChaCha stream derived from the master
//! seed and the replicate index, so results do not depend on how replicates
//! are scheduled across threads.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// The generator used throughout the crate.
pub type SimRng = ChaCha8Rng;

/// Independent stream for replicate `replicate` of master seed `seed`.
pub fn replicate_rng(seed: u64, replicate: u64) -> SimRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(replicate);
    rng
}

/// Stream for a sub-experiment, kept separate from replicate streams by
/// mixing a label into the stream id.
pub fn labeled_rng(seed: u64, label: u64, replicate: u64) -> SimRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ label.wrapping_mul(0x9e37_79b9_7f4a_7c15));
    rng.set_stream(replicate);
    rng
}
