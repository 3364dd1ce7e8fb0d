//! The single random source used across the toolkit.
//!
//! Datasets must be reproducible across machines and implementations, so the
//! generator is pinned: ChaCha with 8 rounds, seeded from a `u64` through the
//! PCG32 expansion of `rand_core`'s `seed_from_u64`. Uniform doubles take the
//! top 53 bits of a `u64` draw.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Identifier written into file headers next to every seed.
pub const RNG_NAME: &str = "chacha8";

pub type MesoRng = ChaCha8Rng;

pub fn seeded(seed: u64) -> MesoRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Uniform draw in `[lo, hi)`.
pub fn uniform<R: Rng + ?Sized>(rng: &mut R, lo: f64, hi: f64) -> f64 {
    lo + (hi - lo) * rng.gen::<f64>()
}

/// Per-sample seed for the `index`-th item of a batch seeded with `base`
/// (SplitMix64 finalizer over the combined value).
pub fn derive_seed(base: u64, index: u64) -> u64 {
    let mut z = base ^ index.wrapping_mul(0x9e37_79b9_7f4a_7c15).wrapping_add(0x6a09_e667_f3bc_c909);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}
