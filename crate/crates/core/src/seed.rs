//! Seed derivation for reproducible, parallel sweeps.
//!
//! Every random stream in the crate is a `ChaCha8Rng` keyed by a 64-bit seed.
//! Child streams (per sample, per restart) are derived by mixing the parent
//! seed with a stream tag and an index, so the result never depends on
//! scheduling order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// SplitMix64 finalizer.
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn derive(seed: u64, tag: u64, index: u64) -> u64 {
    mix(mix(seed ^ mix(tag)) ^ index)
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn child_rng(seed: u64, tag: u64, index: u64) -> ChaCha8Rng {
    rng(derive(seed, tag, index))
}

// Stream tags. Distinct constants keep unrelated streams decorrelated.
pub const TAG_SAMPLE: u64 = 0x5341_4d50;
pub const TAG_RESTART: u64 = 0x5253_5452;
pub const TAG_CONJUGATOR: u64 = 0x434f_4e4a;
pub const TAG_PROBE: u64 = 0x5052_4f42;
pub const TAG_SPECTRUM: u64 = 0x5350_4543;
