//! Counter-based random streams.
//!
//! Every stochastic operation takes a `u64` seed and derives independent
//! ChaCha streams from it, keyed by a small tag. Two calls with the same
//! `(seed, key)` produce identical sequences regardless of what else ran
//! before them, which keeps sweeps reproducible when one dimension changes.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

/// SplitMix64 finalizer, used to fold several keys into one stream id.
pub fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Combine an ordered list of keys into a single 64-bit stream identifier.
pub fn combine(keys: &[u64]) -> u64 {
    keys.iter()
        .fold(0x6A09_E667_F3BC_C908, |acc, &k| mix(acc ^ mix(k)))
}

/// Stream `key` of the generator family rooted at `seed`.
pub fn stream(seed: u64, key: u64) -> StreamRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(key);
    rng
}

/// Stream keyed by a tuple of integers.
pub fn stream_for(seed: u64, keys: &[u64]) -> StreamRng {
    stream(seed, combine(keys))
}

/// Draw a fresh child seed from an existing stream.
pub fn child_seed(rng: &mut StreamRng) -> u64 {
    use rand::Rng;
    rng.random()
}
