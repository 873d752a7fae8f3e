//! Seed lineage.
//!
//! Every simulated stream is driven by a ChaCha8 generator whose 64-bit seed
//! is derived from `(master_seed, experiment_id, stream_index)`:
//!
//! ```text
//! seed = splitmix64(splitmix64(splitmix64(master) ^ experiment_id) ^ index)
//! ```
//!
//! `splitmix64` is the finalizer from Steele, Lea & Flood (2014). String
//! experiment names are reduced to `experiment_id` with 64-bit FNV-1a. Any
//! replication can therefore be regenerated alone, on any thread.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

#[inline]
pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// 64-bit FNV-1a.
pub fn fnv1a(name: &str) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in name.bytes() {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

pub fn stream_seed(master_seed: u64, experiment_id: u64, index: u64) -> u64 {
    splitmix64(splitmix64(splitmix64(master_seed) ^ experiment_id) ^ index)
}

pub fn stream_rng(seed: u64) -> StreamRng {
    ChaCha8Rng::seed_from_u64(seed)
}
