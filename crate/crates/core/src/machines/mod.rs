//! Small two-symbol Turing machines under a complete prefix-free code.
//!
//! An encoding is a unary state-count header followed by the transition
//! table. The header is `k-1` ones then a zero, except that after
//! `K_max - 1` ones the next bit (whatever it is) closes the header with
//! `k = K_max`. Each of the `2k` table entries, ordered by `(state, read)`,
//! is one write bit, one move bit (0 = left, 1 = right) and
//! `b = ceil(log2(k + 1))` next-state bits read most significant first as
//! `v`, with `v mod (k + 1) == k` meaning halt.
//!
//! Every infinite bit sequence starts with exactly one codeword, so fair
//! coin flips induce probability `2^-|p|` on each program `p` and the
//! masses sum to one.

mod exec;
mod omega;

use alloc::vec::Vec;

use rand::RngCore;

use crate::error::{Error, Result};

pub use exec::{fitness, run, MachineOutcome};
pub use omega::{
    halting_count, omega_enumerate, omega_enumerate_with_limit, omega_monte_carlo, OmegaEstimate, OmegaMethod,
    DEFAULT_ENUMERATION_LIMIT,
};

pub const DEFAULT_K_MAX: usize = 6;
/// Largest accepted state-count cap; state ids must fit in a `u8`.
pub const MAX_K_MAX: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Move {
    Left,
    Right,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Next {
    State(u8),
    Halt,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Entry {
    pub write: bool,
    pub movement: Move,
    pub next: Next,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Machine {
    k: usize,
    table: Vec<Entry>,
}

impl Machine {
    /// `table[2 * state + read]` holds the transition for `(state, read)`.
    pub fn new(table: Vec<Entry>) -> Result<Machine> {
        if table.is_empty() || !table.len().is_multiple_of(2) {
            return Err(Error::Param("transition table needs 2k entries, k >= 1"));
        }
        let k = table.len() / 2;
        if k > MAX_K_MAX {
            return Err(Error::Param("too many states"));
        }
        if table
            .iter()
            .any(|e| matches!(e.next, Next::State(s) if s as usize >= k))
        {
            return Err(Error::Param("next state out of range"));
        }
        Ok(Machine { k, table })
    }

    pub fn states(&self) -> usize {
        self.k
    }

    pub fn table(&self) -> &[Entry] {
        &self.table
    }

    pub fn entry(&self, state: usize, read: bool) -> Entry {
        self.table[2 * state + read as usize]
    }
}

/// Next-state field width for a `k`-state machine: `ceil(log2(k + 1))`.
pub fn next_state_bits(k: usize) -> usize {
    (usize::BITS - k.leading_zeros()) as usize
}

/// Length of every encoding of a `k`-state machine: `k + 2k(2 + b)`.
pub fn encoded_len(k: usize) -> usize {
    k + 2 * k * (2 + next_state_bits(k))
}

fn check_k_max(k_max: usize) -> Result<()> {
    if k_max == 0 || k_max > MAX_K_MAX {
        return Err(Error::Param("K_max must be in 1..=64"));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ProgramEncoding {
    bits: Vec<bool>,
}

impl ProgramEncoding {
    pub fn from_bits(bits: Vec<bool>) -> Self {
        ProgramEncoding { bits }
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn is_prefix_of(&self, other: &ProgramEncoding) -> bool {
        other.bits.starts_with(&self.bits)
    }

    /// Canonical encoding of `machine`; a `K_max`-state machine gets the
    /// all-ones header.
    pub fn encode(machine: &Machine, k_max: usize) -> Result<ProgramEncoding> {
        check_k_max(k_max)?;
        let k = machine.states();
        if k > k_max {
            return Err(Error::Param("machine has more states than K_max"));
        }
        let mut bits = Vec::with_capacity(encoded_len(k));
        if k == k_max {
            bits.extend(core::iter::repeat_n(true, k));
        } else {
            bits.extend(core::iter::repeat_n(true, k - 1));
            bits.push(false);
        }
        let width = next_state_bits(k);
        for e in machine.table() {
            bits.push(e.write);
            bits.push(e.movement == Move::Right);
            let v = match e.next {
                Next::State(s) => s as usize,
                Next::Halt => k,
            };
            bits.extend((0..width).rev().map(|i| (v >> i) & 1 == 1));
        }
        Ok(ProgramEncoding { bits })
    }
}

/// Reads one program from `bits`, consuming exactly its encoding.
pub fn decode<I: Iterator<Item = bool>>(bits: &mut I, k_max: usize) -> Result<Machine> {
    decode_recording(bits, k_max, |_| ())
}

/// Decodes a complete encoding, rejecting trailing bits.
pub fn decode_exact(bits: &[bool], k_max: usize) -> Result<Machine> {
    let mut it = bits.iter().copied();
    let m = decode(&mut it, k_max)?;
    if it.next().is_some() {
        return Err(Error::Param("bits left over after a complete program"));
    }
    Ok(m)
}

fn decode_recording<I, F>(bits: &mut I, k_max: usize, mut record: F) -> Result<Machine>
where
    I: Iterator<Item = bool>,
    F: FnMut(bool),
{
    check_k_max(k_max)?;
    let mut read = 0usize;
    let mut next_bit = || -> Result<bool> {
        let b = bits.next().ok_or(Error::IncompleteProgram { read })?;
        read += 1;
        record(b);
        Ok(b)
    };
    let mut k = 1;
    for _ in 0..k_max {
        if !next_bit()? {
            break;
        }
        k += 1;
    }
    let k = k.min(k_max);
    let width = next_state_bits(k);
    let mut table = Vec::with_capacity(2 * k);
    for _ in 0..2 * k {
        let write = next_bit()?;
        let movement = if next_bit()? { Move::Right } else { Move::Left };
        let mut v = 0usize;
        for _ in 0..width {
            v = (v << 1) | next_bit()? as usize;
        }
        let v = v % (k + 1);
        let next = if v == k { Next::Halt } else { Next::State(v as u8) };
        table.push(Entry { write, movement, next });
    }
    Ok(Machine { k, table })
}

/// Infinite stream of fair bits drawn 64 at a time, least significant
/// first.
pub struct CoinBits<'a, R: ?Sized> {
    rng: &'a mut R,
    word: u64,
    left: u32,
}

impl<'a, R: RngCore + ?Sized> CoinBits<'a, R> {
    pub fn new(rng: &'a mut R) -> Self {
        CoinBits { rng, word: 0, left: 0 }
    }
}

impl<R: RngCore + ?Sized> Iterator for CoinBits<'_, R> {
    type Item = bool;

    fn next(&mut self) -> Option<bool> {
        if self.left == 0 {
            self.word = self.rng.next_u64();
            self.left = 64;
        }
        let b = self.word & 1 == 1;
        self.word >>= 1;
        self.left -= 1;
        Some(b)
    }
}

/// Feeds fair coin flips to the decoder until a program is complete.
pub fn sample_program<R: RngCore + ?Sized>(rng: &mut R, k_max: usize) -> Result<(ProgramEncoding, Machine)> {
    let mut bits = Vec::new();
    let machine = decode_recording(&mut CoinBits::new(rng), k_max, |b| bits.push(b))?;
    Ok((ProgramEncoding { bits }, machine))
}

/// Same draw as [`sample_program`] without keeping the bits.
pub fn sample_machine<R: RngCore + ?Sized>(rng: &mut R, k_max: usize) -> Result<Machine> {
    decode(&mut CoinBits::new(rng), k_max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn bits(s: &str) -> Vec<bool> {
        s.chars().filter(|c| !c.is_whitespace()).map(|c| c == '1').collect()
    }

    #[test]
    fn decodes_one_state_halter() {
        let m = decode_exact(&bits("0 111 111"), DEFAULT_K_MAX).unwrap();
        assert_eq!(m.states(), 1);
        let halt = Entry {
            write: true,
            movement: Move::Right,
            next: Next::Halt,
        };
        assert_eq!(m.table(), &[halt, halt]);
    }

    #[test]
    fn all_ones_header_caps_at_k_max() {
        let mut src = bits("111111").into_iter().chain(core::iter::repeat(false));
        let m = decode(&mut src, 6).unwrap();
        assert_eq!(m.states(), 6);
        assert!(m.table().iter().all(|e| !e.write && e.next == Next::State(0)));
    }

    #[test]
    fn both_capped_headers_decode_to_k_max() {
        for header in ["111110", "111111"] {
            let mut b = bits(header);
            b.extend(core::iter::repeat_n(false, 12 * 5));
            assert_eq!(decode_exact(&b, 6).unwrap().states(), 6);
        }
    }

    #[test]
    fn encoding_lengths() {
        let expected = [(1, 7), (2, 18), (3, 27), (4, 44), (5, 55), (6, 66)];
        for (k, len) in expected {
            assert_eq!(encoded_len(k), len, "k={k}");
        }
    }

    #[test]
    fn truncated_stream_is_incomplete() {
        let b = bits("0 111 11");
        assert_eq!(decode(&mut b.into_iter(), 6), Err(Error::IncompleteProgram { read: 6 }));
        assert_eq!(
            decode(&mut core::iter::empty(), 6),
            Err(Error::IncompleteProgram { read: 0 })
        );
    }

    #[test]
    fn next_state_wraps_mod_k_plus_one() {
        // k=2, b=2: v=3 -> 3 mod 3 = state 0.
        let mut b = bits("10");
        for _ in 0..4 {
            b.extend(bits("1111"));
        }
        let m = decode_exact(&b, 6).unwrap();
        assert!(m.table().iter().all(|e| e.next == Next::State(0)));
    }

    #[test]
    fn rejects_bad_k_max() {
        assert!(decode(&mut core::iter::repeat(false), 0).is_err());
        assert!(decode(&mut core::iter::repeat(false), 65).is_err());
    }

    #[test]
    fn sampling_records_exactly_the_consumed_bits() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..200 {
            let (enc, m) = sample_program(&mut rng, 6).unwrap();
            assert_eq!(enc.len(), encoded_len(m.states()));
            assert_eq!(decode_exact(enc.bits(), 6).unwrap(), m);
        }
    }

    #[test]
    fn one_state_frequency_is_one_half() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let n = 1_000_000;
        let ones = (0..n)
            .filter(|_| sample_machine(&mut rng, 6).unwrap().states() == 1)
            .count();
        let f = ones as f64 / n as f64;
        assert!((f - 0.5).abs() <= 0.002, "{f}");
    }

    #[test]
    fn canonical_encode_rejects_too_many_states() {
        let m = decode_exact(&bits("10 0000 0000 0000 0000"), 6).unwrap();
        assert!(ProgramEncoding::encode(&m, 1).is_err());
        assert_eq!(
            ProgramEncoding::encode(&m, 6).unwrap().bits(),
            &bits("10 0000 0000 0000 0000")[..]
        );
    }

    #[test]
    fn machine_new_validates() {
        let e = Entry {
            write: false,
            movement: Move::Left,
            next: Next::State(1),
        };
        assert!(Machine::new(vec![e, e]).is_err());
        assert!(Machine::new(vec![e]).is_err());
        assert!(Machine::new(vec![e, e, e, e]).is_ok());
    }

    proptest! {
        #[test]
        fn encode_decode_roundtrip(seed: u64, k_max in 1usize..=8) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let m = sample_machine(&mut rng, k_max).unwrap();
            let enc = ProgramEncoding::encode(&m, k_max).unwrap();
            prop_assert_eq!(enc.len(), encoded_len(m.states()));
            prop_assert_eq!(decode_exact(enc.bits(), k_max).unwrap(), m);
        }
    }
}
