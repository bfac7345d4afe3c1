//! Keyed random streams.
//!
//! Each stream is identified by `(seed, domain, index)` and is independent of
//! how many other streams exist or in which order they are consumed, so an
//! ensemble is reproducible regardless of the worker count.

use rand::{Rng, RngCore, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;

pub type StreamRng = Xoshiro256PlusPlus;

/// Stream domain for walk steps.
pub const DOMAIN_STEPS: u64 = 0x5354_4550;
/// Stream domain for multiplier draws.
pub const DOMAIN_MULTIPLIER: u64 = 0x4d55_4c54;
/// Stream domain for auxiliary sampling (test laws, calibration).
pub const DOMAIN_AUX: u64 = 0x4155_5849;

#[inline]
fn fmix64(mut x: u64) -> u64 {
    x ^= x >> 33;
    x = x.wrapping_mul(0xff51_afd7_ed55_8ccd);
    x ^= x >> 33;
    x = x.wrapping_mul(0xc4ce_b9fe_1a85_ec53);
    x ^ (x >> 33)
}

/// 64-bit key of the stream `(seed, domain, index)`.
pub fn stream_key(seed: u64, domain: u64, index: u64) -> u64 {
    let a = fmix64(domain ^ 0x9e37_79b9_7f4a_7c15);
    let b = fmix64(index.wrapping_add(a));
    fmix64(seed ^ b.rotate_left(17))
}

pub fn stream(seed: u64, domain: u64, index: u64) -> StreamRng {
    StreamRng::seed_from_u64(stream_key(seed, domain, index))
}

/// Uniform draw in `[0, 1)` with 53 bits of resolution.
#[inline]
pub fn uniform(rng: &mut StreamRng) -> f64 {
    rng.random::<f64>()
}

/// The 53 bits behind [`uniform`]: `uniform_bits(r) < threshold(q)` holds
/// exactly when `uniform(r) < q`.
#[inline]
pub fn uniform_bits(rng: &mut StreamRng) -> u64 {
    rng.next_u64() >> 11
}

pub fn threshold(q: f64) -> u64 {
    (q.clamp(0.0, 1.0) * (1u64 << 53) as f64).ceil() as u64
}
