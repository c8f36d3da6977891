//! Seeded random streams.
//!
//! Every stochastic routine takes an explicit `u64` seed. Parallel work is
//! split into fixed blocks and each block draws from its own ChaCha stream,
//! so results never depend on the number of worker threads.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// The generator used throughout the crate.
pub type Rng = ChaCha8Rng;

/// Stream `0` of `seed`.
pub fn from_seed(seed: u64) -> Rng {
    stream(seed, 0)
}

/// An independent child stream of `seed`, indexed by `index`.
pub fn stream(seed: u64, index: u64) -> Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Derive a child seed for a nested job (for example one certificate in a batch).
pub fn child_seed(seed: u64, index: u64) -> u64 {
    // splitmix64 finalizer over the pair
    let mut z = seed ^ index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
