//! Seeded random streams.
//!
//! Every stochastic procedure draws from [`stream`], which derives an
//! independent ChaCha8 stream from `(seed, purpose)`. Two procedures that use
//! the same seed but different purposes never share random numbers, and a
//! given purpose always consumes its numbers in run order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type LabRng = ChaCha8Rng;

/// Stream identifiers used by the experiment simulator.
pub mod purpose {
    pub const SOURCE: u64 = 1;
    pub const PREPARATION: u64 = 2;
    pub const FINAL_OUTCOME: u64 = 3;
    pub const HIDDEN_LABEL: u64 = 4;
    pub const SCENARIO: u64 = 5;
}

pub fn seeded(seed: u64) -> LabRng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn stream(seed: u64, purpose: u64) -> LabRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(purpose);
    rng
}

/// Derives a child seed, e.g. for repetition `k` of an experiment.
pub fn child_seed(seed: u64, k: u64) -> u64 {
    // splitmix64 finalizer
    let mut z = seed ^ k.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
