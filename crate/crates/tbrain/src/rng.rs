//! Seed derivation and platform-stable sampling primitives.
//!
//! Every stochastic entry point takes a 64-bit seed. Sub-seeds for modules,
//! scenes and training epochs are derived with a splitmix-style mixer so that
//! stream `k` under root seed `s` is the same on every platform and in every
//! release. All categorical draws go through inverse-CDF walks over a
//! canonically ordered support, consuming exactly one uniform per draw.

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

/// The splitmix64 output mixer.
pub fn splitmix64(state: u64) -> u64 {
    let mut z = state.wrapping_add(GOLDEN);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Sub-seed for stream `stream` under `root`: `splitmix64(root + (stream + 1) * GOLDEN)`.
pub fn derive_seed(root: u64, stream: u64) -> u64 {
    splitmix64(root.wrapping_add(stream.wrapping_add(1).wrapping_mul(GOLDEN)))
}

/// Deterministic generator for a seed.
pub fn rng_from(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Uniform draw in `[0, 1)` with 53 bits of precision.
pub fn uniform_f64(rng: &mut ChaCha8Rng) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Uniform integer in `[0, n)`. `n` must be nonzero.
pub fn uniform_index(rng: &mut ChaCha8Rng, n: usize) -> usize {
    debug_assert!(n > 0);
    (rng.next_u64() % n as u64) as usize
}

/// Bernoulli draw with success probability `p`.
pub fn bernoulli(rng: &mut ChaCha8Rng, p: f64) -> bool {
    uniform_f64(rng) < p
}

/// Inverse-CDF draw from probabilities listed in canonical order.
///
/// The walk accumulates in index order; if rounding leaves the cumulative sum
/// short of the uniform, the last positive-probability index is returned.
pub fn categorical(rng: &mut ChaCha8Rng, probs: &[f64]) -> usize {
    debug_assert!(!probs.is_empty());
    let u = uniform_f64(rng);
    let mut cum = 0.0;
    let mut last_positive = 0;
    for (i, p) in probs.iter().enumerate() {
        if *p > 0.0 {
            last_positive = i;
        }
        cum += p;
        if u < cum {
            return i;
        }
    }
    last_positive
}

/// Standard normal draw via Box-Muller, consuming exactly two uniforms.
pub fn standard_normal(rng: &mut ChaCha8Rng) -> f64 {
    // u1 is shifted away from zero so the log stays finite.
    let u1 = (rng.next_u64() >> 11).wrapping_add(1) as f64 * (1.0 / (1u64 << 53) as f64);
    let u2 = uniform_f64(rng);
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

/// In-place Fisher-Yates shuffle driven by `rng`.
pub fn shuffle<T>(rng: &mut ChaCha8Rng, items: &mut [T]) {
    for i in (1..items.len()).rev() {
        let j = uniform_index(rng, i + 1);
        items.swap(i, j);
    }
}
