//! Seeded random streams.
//!
//! Every random choice in the crate is drawn from a [`SplitMix64`] generator
//! (Steele, Lea & Flood; the reference 64-bit state transition
//! `x += 0x9E3779B97F4A7C15` followed by the murmur-style output mix). Streams
//! are never shared between independent units of work: a unit identified by
//! `(seed, stream)` gets its own generator seeded with [`substream_seed`],
//! so results do not depend on evaluation order or thread count.
//!
//! Stream layout used by the pipeline, for a user seed `s`:
//!
//! | purpose                                | generator                                         |
//! |----------------------------------------|---------------------------------------------------|
//! | sketch row `q` of leverage call `c`    | `substream(substream_seed(L, c), q)`, `L = substream_seed(s, LEVERAGE)` |
//! | retry `t` of the overestimates         | as above with `L = substream_seed(substream_seed(s, RETRY), t)` |
//! | keep/drop of group `i`                 | `substream(substream_seed(s, SAMPLING), i)`       |
//! | quality direction `d`                  | `substream(substream_seed(s, QUALITY), d)`        |

use rand::RngCore;
use rand_xoshiro::rand_core::SeedableRng;
pub use rand_xoshiro::SplitMix64;

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

/// Stream tag for leverage sketches.
pub const LEVERAGE: u64 = 0x4c45_5645;
/// Stream tag for group sampling.
pub const SAMPLING: u64 = 0x5341_4d50;
/// Stream tag for random test directions.
pub const QUALITY: u64 = 0x5155_414c;
/// Stream tag for overestimate retries.
pub const RETRY: u64 = 0x5245_5452;

/// SplitMix64 output function applied to `seed ^ (stream + 1) * gamma`.
pub fn substream_seed(seed: u64, stream: u64) -> u64 {
    let mut z = seed ^ stream.wrapping_add(1).wrapping_mul(GOLDEN_GAMMA);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

pub fn substream(seed: u64, stream: u64) -> SplitMix64 {
    SplitMix64::seed_from_u64(substream_seed(seed, stream))
}

/// Uniform double in `[0, 1)` from the top 53 bits of one output word.
#[inline]
pub fn unit_f64(rng: &mut SplitMix64) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Uniform integer in `[0, bound)` by rejection (no modulo bias).
pub fn below(rng: &mut SplitMix64, bound: u64) -> u64 {
    assert!(bound > 0);
    let zone = u64::MAX - (u64::MAX % bound);
    loop {
        let v = rng.next_u64();
        if v < zone {
            return v % bound;
        }
    }
}

/// Standard normal vector of length `len`.
pub fn gaussian_vec(rng: &mut SplitMix64, len: usize) -> Vec<f64> {
    use rand::Rng;
    use rand_distr::StandardNormal;
    (0..len).map(|_| rng.sample::<f64, _>(StandardNormal)).collect()
}
