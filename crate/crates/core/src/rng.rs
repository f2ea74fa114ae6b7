//! Pinned random source for every sampling routine.
//!
//! Streams are ChaCha8 generators (`rand_chacha` 0.3) seeded through
//! `SeedableRng::seed_from_u64`. ChaCha output is specified bit-for-bit, so a
//! given `(seed, stream)` pair reproduces on every platform.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Name reported by `node-sense --version`.
pub const RNG_NAME: &str =
    "ChaCha8Rng (rand_chacha 0.3, seed_from_u64; stream seed = seed ^ splitmix64(stream))";

pub type StreamRng = ChaCha8Rng;

/// SplitMix64 output for input `index`.
pub fn splitmix64(index: u64) -> u64 {
    let mut z = index.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn stream_seed(seed: u64, stream: u64) -> u64 {
    seed ^ splitmix64(stream)
}

pub fn stream_rng(seed: u64, stream: u64) -> StreamRng {
    ChaCha8Rng::seed_from_u64(stream_seed(seed, stream))
}
