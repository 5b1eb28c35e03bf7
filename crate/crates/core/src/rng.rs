//! Replicate random streams.
//!
//! Every replicate draws from its own ChaCha8 stream whose seed is a pure
//! function of `(base_seed, stream_index)`, so scheduling replicates on any
//! number of threads cannot change what a replicate sees.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type SimRng = ChaCha8Rng;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of stream `index` derived from `base_seed`.
pub fn derive_seed(base_seed: u64, index: u64) -> u64 {
    splitmix64(splitmix64(base_seed) ^ splitmix64(index.wrapping_add(0xA5A5_A5A5)))
}

/// Independent generator for stream `index`.
pub fn stream_rng(base_seed: u64, index: u64) -> SimRng {
    SimRng::seed_from_u64(derive_seed(base_seed, index))
}
