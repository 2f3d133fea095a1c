//! Named random sub-streams derived from one 64-bit experiment seed.
//!
//! Every consumer of randomness asks for its own stream, so adding draws
//! in one place (say, robot decisions) never shifts another (target motion).

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

/// Well-known stream tags.
pub mod stream {
    pub const INSTANCE: u64 = 0x1157_a9ce;
    pub const ORDERING: u64 = 0x0bde_0001;
    pub const TARGET_MOTION: u64 = 0x7a26_e701;
    pub const PRIMITIVES: u64 = 0x9e1d_0002;
    pub const PLACEMENT: u64 = 0x91ac_0003;
    pub const BASELINE: u64 = 0xba5e_0004;
}

/// SplitMix64 finalizer.
fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Derives a child seed from a parent seed and a sequence of labels.
pub fn derive_seed(seed: u64, labels: &[u64]) -> u64 {
    labels.iter().fold(mix64(seed), |acc, &l| mix64(acc ^ mix64(l)))
}

pub fn stream_rng(seed: u64, labels: &[u64]) -> StreamRng {
    ChaCha8Rng::seed_from_u64(derive_seed(seed, labels))
}
