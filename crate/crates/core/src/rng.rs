//! Seeded random streams that do not depend on scheduling.
//!
//! Every independent work item (a restart, a sampled triple, a distance
//! matrix) draws from its own generator whose seed is a SplitMix64 hash of the
//! master seed and the item's index path.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

#[inline]
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Hash of `(seed, path[0], path[1], ...)`.
pub fn mix(seed: u64, path: &[u64]) -> u64 {
    path.iter().fold(splitmix64(seed), |acc, &p| splitmix64(acc ^ splitmix64(p.wrapping_add(0x632B_E59B_D9B4_E019))))
}

pub fn substream(seed: u64, path: &[u64]) -> StreamRng {
    StreamRng::seed_from_u64(mix(seed, path))
}

pub fn from_seed(seed: u64) -> StreamRng {
    StreamRng::seed_from_u64(seed)
}

/// Draws a master seed for substreams from a caller-supplied generator.
pub fn fork<R: Rng + ?Sized>(rng: &mut R) -> u64 {
    rng.random()
}
