//! Seed derivation. Every stochastic stage draws from its own stream so that
//! changing one stage never shifts the random numbers of another.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Stream domains for a single dataset sample.
pub(crate) const DOMAIN_PHANTOM: u64 = 0x5048_414e_544f_4d00;
pub(crate) const DOMAIN_DIRECTION: u64 = 0x4449_5245_4354_0000;
pub(crate) const DOMAIN_TRANSPORT: u64 = 0x5452_414e_5350_0000;

/// SplitMix64 finalizer applied to `seed` combined with `domain`.
pub fn derive(seed: u64, domain: u64) -> u64 {
    let mut z = seed ^ domain.wrapping_mul(0x9e37_79b9_7f4a_7c15);
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
