//! Seed derivation shared by every seeded component.
//!
//! Child seeds are derived from a parent seed and a stream of integers so that
//! work split across threads draws the same numbers as a serial run.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Seeded generator used throughout the crate.
pub type SeededRng = ChaCha8Rng;

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Mix a parent seed with a path of stream indices.
pub fn derive_seed(seed: u64, stream: &[u64]) -> u64 {
    stream
        .iter()
        .fold(splitmix(seed), |acc, &s| splitmix(acc ^ splitmix(s)))
}

pub fn rng_from(seed: u64) -> SeededRng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn child_rng(seed: u64, stream: &[u64]) -> SeededRng {
    rng_from(derive_seed(seed, stream))
}
