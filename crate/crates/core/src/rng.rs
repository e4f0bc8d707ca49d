//! Seeded stream derivation.
//!
//! Every sampling routine derives an independent ChaCha stream from the user
//! seed and the sample coordinates (for example `(stratum, sample_index)`),
//! so results depend only on the seed and never on thread scheduling.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e3779b97f4a7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d049bb133111eb);
    x ^ (x >> 31)
}

/// Mixes a seed with stream coordinates into a new 64-bit seed.
pub fn mix(seed: u64, ids: &[u64]) -> u64 {
    let mut acc = splitmix64(seed ^ 0x5bf0_3635_dcb8_39b7);
    for &id in ids {
        acc = splitmix64(acc ^ splitmix64(id));
    }
    acc
}

/// A ChaCha generator for the stream identified by `ids` under `seed`.
pub fn stream(seed: u64, ids: &[u64]) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(mix(seed, ids))
}
