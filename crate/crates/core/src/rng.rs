//! Seed derivation and named random streams.
//!
//! Every stochastic routine takes a single `u64` seed. Independent streams
//! are carved out of it with ChaCha's native stream parameter, and nested
//! sub-flows get child seeds via [`derive_seed`]. Nothing reads OS entropy
//! or the clock.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Stream used for initial positions / weights.
pub const STREAM_INIT: u64 = 0;
/// Stream feeding the Beta perturbation of the chaotic map.
pub const STREAM_CHAOS: u64 = 1;
/// Synthetic data noise.
pub const STREAM_NOISE: u64 = 2;
/// Particle `i` draws its step noise from `STREAM_PARTICLE_BASE + i`.
pub const STREAM_PARTICLE_BASE: u64 = 1 << 32;

/// Generator for `(seed, stream)`. Distinct streams never overlap.
pub fn stream(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Child seed for a labelled sub-flow (splitmix64 over seed and an FNV-1a
/// hash of the label).
pub fn derive_seed(seed: u64, label: &str) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in label.bytes() {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0100_0000_01b3);
    }
    splitmix64(seed ^ h)
}

fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}
