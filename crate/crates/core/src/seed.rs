//! Deterministic derivation of sub-seeds.
//!
//! `derive(master, a, b)` folds each word through the SplitMix64 finalizer:
//!
//! ```text
//! h0 = mix(master ^ 0x6a09e667f3bcc909)
//! h1 = mix(h0 ^ a * 0x9e3779b97f4a7c15)
//! h2 = mix(h1 ^ b * 0xbf58476d1ce4e5b9)
//! ```
//!
//! where `mix` is the SplitMix64 output function. The result depends only on
//! the three inputs, never on scheduling.

const GOLDEN: u64 = 0x9e37_79b9_7f4a_7c15;

/// SplitMix64 output function.
pub fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(GOLDEN);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

pub fn derive(master: u64, a: u64, b: u64) -> u64 {
    let h0 = mix(master ^ 0x6a09_e667_f3bc_c909);
    let h1 = mix(h0 ^ a.wrapping_mul(GOLDEN));
    mix(h1 ^ b.wrapping_mul(0xbf58_476d_1ce4_e5b9))
}
