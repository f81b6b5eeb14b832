//! Seeded randomness and content hashing.
//!
//! Every random draw in the crate goes through a [`ChaCha8Rng`] created
//! here, so identical seeds give identical outputs on every platform.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Deterministic RNG from a 64-bit seed.
pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Derive a sub-seed from a base seed and a salt (SplitMix64 step).
///
/// Used when one logical seed must drive several independent streams,
/// e.g. one measurement matrix per measurement count.
pub fn derive_seed(base: u64, salt: u64) -> u64 {
    let mut z = base ^ salt.wrapping_mul(0x9e37_79b9_7f4a_7c15);
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// FNV-1a over the raw bit patterns of a float slice.
///
/// Cheap content fingerprint for provenance records and for recognizing
/// that a measurement matrix was derived from a given sparsifier.
pub fn content_hash(data: &[f64]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for &x in data {
        for b in x.to_bits().to_le_bytes() {
            h ^= b as u64;
            h = h.wrapping_mul(0x0000_0100_0000_01b3);
        }
    }
    h
}
