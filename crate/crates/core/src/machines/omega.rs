//! Time-bounded halting probability of a random program.

use rand::RngCore;

use super::{check_k_max, decode, encoded_len, exec::run, next_state_bits, sample_machine};
use crate::error::{Error, Result};

/// Largest encoding length `omega_enumerate` accepts.
pub const DEFAULT_ENUMERATION_LIMIT: usize = 26;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OmegaMethod {
    Enumeration { max_len: usize },
    MonteCarlo { samples: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OmegaEstimate {
    pub method: OmegaMethod,
    pub value: f64,
    /// Zero for enumeration.
    pub stderr: f64,
    /// Enumeration only: `value = numerator / 2^max_len` exactly.
    pub numerator: Option<u128>,
    /// Monte Carlo only: number of sampled programs that halted.
    pub halted: Option<u64>,
}

impl OmegaEstimate {
    /// Monte Carlo estimate from `halted` of `samples` runs.
    pub fn from_counts(halted: u64, samples: u64) -> Result<OmegaEstimate> {
        if samples == 0 {
            return Err(Error::Param("Monte Carlo needs at least one sample"));
        }
        if halted > samples {
            return Err(Error::Param("more halting runs than samples"));
        }
        let n = samples as f64;
        let value = halted as f64 / n;
        Ok(OmegaEstimate {
            method: OmegaMethod::MonteCarlo { samples },
            value,
            stderr: libm::sqrt(value * (1.0 - value) / n),
            numerator: None,
            halted: Some(halted),
        })
    }
}

/// Exact `Σ 2^-|p|` over every encoding of length at most `max_len` whose
/// machine halts on `input` within `t_max` steps.
pub fn omega_enumerate(max_len: usize, input: &[bool], t_max: u64, k_max: usize) -> Result<OmegaEstimate> {
    omega_enumerate_with_limit(max_len, input, t_max, k_max, DEFAULT_ENUMERATION_LIMIT)
}

pub fn omega_enumerate_with_limit(
    max_len: usize,
    input: &[bool],
    t_max: u64,
    k_max: usize,
    limit: usize,
) -> Result<OmegaEstimate> {
    check_k_max(k_max)?;
    if t_max == 0 {
        return Err(Error::Param("step budget must be at least 1"));
    }
    if max_len > limit || max_len > 120 {
        return Err(Error::EnumerationTooLarge {
            len: max_len,
            limit: limit.min(120),
        });
    }
    let mut numerator: u128 = 0;
    for k in 1..=k_max {
        let len = encoded_len(k);
        if len > max_len {
            break;
        }
        // At the cap both header endings (…0 and …1) select k = K_max.
        let headers: u128 = if k == k_max { 2 } else { 1 };
        let halting = halting_count(k, input, t_max);
        numerator += headers * halting as u128 * (1u128 << (max_len - len));
    }
    Ok(OmegaEstimate {
        method: OmegaMethod::Enumeration { max_len },
        value: numerator as f64 / libm::ldexp(1.0, max_len as i32),
        stderr: 0.0,
        numerator: Some(numerator),
        halted: None,
    })
}

/// Number of `k`-state transition tables (out of `2^(2k(2+b))`) that halt
/// on `input` within `t_max` steps. Tables are produced by decoding every
/// table bit pattern behind a `k`-state header.
pub fn halting_count(k: usize, input: &[bool], t_max: u64) -> u64 {
    let table_bits = 2 * k * (2 + next_state_bits(k));
    assert!(table_bits < 64, "table enumeration for k={k} is out of reach");
    let mut count = 0;
    for pattern in 0u64..(1u64 << table_bits) {
        let header = core::iter::repeat_n(true, k - 1).chain(core::iter::once(false));
        let table = (0..table_bits).rev().map(|i| (pattern >> i) & 1 == 1);
        // k_max = k + 1 keeps the header "1^(k-1) 0" meaning k states.
        let m = decode(&mut header.chain(table), k + 1).expect("complete encoding");
        debug_assert_eq!(m.states(), k);
        if run(&m, input, t_max).halted {
            count += 1;
        }
    }
    count
}

/// Fraction of `samples` fair-coin programs that halt on `input` within
/// `t_max` steps.
pub fn omega_monte_carlo<R: RngCore + ?Sized>(
    samples: u64,
    input: &[bool],
    t_max: u64,
    k_max: usize,
    rng: &mut R,
) -> Result<OmegaEstimate> {
    check_k_max(k_max)?;
    if samples == 0 {
        return Err(Error::Param("Monte Carlo needs at least one sample"));
    }
    let mut halted = 0;
    for _ in 0..samples {
        let m = sample_machine(rng, k_max)?;
        if run(&m, input, t_max).halted {
            halted += 1;
        }
    }
    OmegaEstimate::from_counts(halted, samples)
}
