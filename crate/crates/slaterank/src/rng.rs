//! Seeded random-number streams.
//!
//! All randomness in the crate flows from a single master seed. Independent
//! sub-streams are derived by hashing a stream name into the seed, so adding
//! a consumer never perturbs the draws of existing ones.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// FNV-1a over the stream name, folded into the master seed.
fn mix(seed: u64, name: &str) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in name.as_bytes() {
        h ^= u64::from(*b);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    // splitmix finalizer so nearby seeds diverge
    let mut z = seed ^ h;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// A named substream of the master seed.
pub fn stream(seed: u64, name: &str) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(mix(seed, name))
}

/// A substream indexed by an integer (epoch, day, request, ...).
pub fn indexed_stream(seed: u64, name: &str, index: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(mix(seed, name).wrapping_add(index.wrapping_mul(0x9e37_79b9_7f4a_7c15)))
}
