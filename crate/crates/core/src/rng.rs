//! Seeded randomness shared by every sampler in the crate.
//!
//! All streams are ChaCha8 keyed from a 64-bit seed expanded with
//! SplitMix64. Derived seeds (per replication, per trial) go through
//! [`mix_seed`], so results never depend on execution order.

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

/// Identifier recorded in every report and metadata file.
pub const RNG_ID: &str = "chacha8-splitmix64-v1";

pub type Rng = ChaCha8Rng;

const GOLDEN_GAMMA: u64 = 0x9e37_79b9_7f4a_7c15;

/// SplitMix64 output function.
#[inline]
pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(GOLDEN_GAMMA);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Derive a child seed from a master seed and a sequence of integer keys.
///
/// `mix_seed(m, &[a, b])` and `mix_seed(m, &[b, a])` differ; so do keys of
/// different lengths.
pub fn mix_seed(master: u64, keys: &[u64]) -> u64 {
    let mut h = splitmix64(master);
    for (pos, &k) in keys.iter().enumerate() {
        h = splitmix64(h ^ splitmix64(k.wrapping_add((pos as u64 + 1).wrapping_mul(GOLDEN_GAMMA))));
    }
    splitmix64(h ^ keys.len() as u64)
}

pub fn rng_from_seed(seed: u64) -> Rng {
    let mut key = [0u8; 32];
    let mut state = seed;
    for chunk in key.chunks_exact_mut(8) {
        state = splitmix64(state);
        chunk.copy_from_slice(&state.to_le_bytes());
    }
    ChaCha8Rng::from_seed(key)
}

/// Uniform double in `[0, 1)` built from the top 53 bits of one draw.
#[inline]
pub fn uniform_f64(rng: &mut impl RngCore) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// One Bernoulli(p) draw. Always consumes exactly one `u64`.
#[inline]
pub fn bernoulli(rng: &mut impl RngCore, p: f64) -> bool {
    uniform_f64(rng) < p
}

/// Unbiased uniform index in `0..bound` (Lemire's multiply-and-reject).
#[inline]
pub fn uniform_index(rng: &mut impl RngCore, bound: usize) -> usize {
    debug_assert!(bound > 0);
    let bound = bound as u64;
    let mut m = (rng.next_u64() as u128) * (bound as u128);
    let mut low = m as u64;
    if low < bound {
        let threshold = bound.wrapping_neg() % bound;
        while low < threshold {
            m = (rng.next_u64() as u128) * (bound as u128);
            low = m as u64;
        }
    }
    (m >> 64) as usize
}
