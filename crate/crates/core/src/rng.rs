//! Seeded random streams.
//!
//! Every randomized routine in the crate takes an explicit RNG handle. Runs derive
//! their streams from a 64-bit seed so that `(seed, stream)` pairs reproduce exactly.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type StdStream = ChaCha8Rng;

/// SplitMix64 finalizer; used to derive independent child seeds.
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed for the `index`-th child of `seed`.
pub fn derive_seed(seed: u64, index: u64) -> u64 {
    mix64(seed ^ mix64(index.wrapping_add(0x5851_F42D_4C95_7F2D)))
}

pub fn stream(seed: u64) -> StdStream {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Named stream: the same `(seed, name)` always yields the same sequence.
pub fn named_stream(seed: u64, name: &str) -> StdStream {
    let h = name.bytes().fold(0xCBF2_9CE4_8422_2325u64, |h, b| (h ^ b as u64).wrapping_mul(0x100_0000_01B3));
    stream(derive_seed(seed, h))
}
