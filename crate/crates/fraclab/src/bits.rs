//! Finite binary strings and the Elias gamma code.
//!
//! [`BitString`] is the universal currency of the machine layer: programs,
//! machine outputs, and point encodings are all bit strings. The gamma code
//! is the self-delimiting integer code used both inside machine programs
//! (block lengths, copy offsets) and in point encodings.

use num::bigint::BigUint;
use num::traits::{One, Zero};
use std::fmt;
use thiserror::Error;

/// Hard cap on bit-string length.
pub const MAX_BITS: usize = 1 << 20;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum BitsError {
    #[error("bit string longer than the {MAX_BITS}-bit cap ({0} bits)")]
    TooLong(usize),
    #[error("invalid character {0:?} in bit-string literal")]
    BadChar(char),
    #[error("invalid hex digit {0:?}")]
    BadHex(char),
    #[error("hex payload too short for declared bit length")]
    HexTooShort,
    #[error("gamma code is undefined for zero")]
    GammaZero,
    #[error("truncated gamma code")]
    GammaTruncated,
}

/// A finite sequence of bits. Equality is exact bitwise equality; the
/// ordering is by (length, lexicographic), which keeps shorter strings first.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct BitString {
    bits: Vec<bool>,
}

impl BitString {
    pub fn new() -> Self {
        BitString { bits: Vec::new() }
    }

    pub fn from_bits<I: IntoIterator<Item = bool>>(iter: I) -> Result<Self, BitsError> {
        let bits: Vec<bool> = iter.into_iter().collect();
        if bits.len() > MAX_BITS {
            return Err(BitsError::TooLong(bits.len()));
        }
        Ok(BitString { bits })
    }

    /// Parse a `"0101"`-style literal.
    pub fn from_str01(s: &str) -> Result<Self, BitsError> {
        let mut bits = Vec::with_capacity(s.len());
        for c in s.chars() {
            match c {
                '0' => bits.push(false),
                '1' => bits.push(true),
                c if c.is_whitespace() => {}
                c => return Err(BitsError::BadChar(c)),
            }
        }
        Self::from_bits(bits)
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn bit(&self, i: usize) -> bool {
        self.bits[i]
    }

    pub fn push(&mut self, b: bool) {
        self.bits.push(b);
    }

    pub fn extend_from(&mut self, other: &BitString) {
        self.bits.extend_from_slice(&other.bits);
    }

    pub fn iter(&self) -> impl Iterator<Item = bool> + '_ {
        self.bits.iter().copied()
    }

    pub fn as_slice(&self) -> &[bool] {
        &self.bits
    }

    pub fn is_prefix_of(&self, other: &BitString) -> bool {
        self.len() <= other.len() && other.bits[..self.len()] == self.bits[..]
    }

    /// Pack into hex, first bit in the high position of the first byte.
    /// The bit length must be carried alongside (trailing pad bits are zero).
    pub fn to_hex(&self) -> String {
        let mut out = String::new();
        for chunk in self.bits.chunks(8) {
            let mut byte = 0u8;
            for (i, &b) in chunk.iter().enumerate() {
                if b {
                    byte |= 0x80 >> i;
                }
            }
            out.push_str(&format!("{byte:02x}"));
        }
        out
    }

    pub fn from_hex(hex: &str, bit_len: usize) -> Result<Self, BitsError> {
        let mut bytes = Vec::new();
        let mut digits = hex.chars().filter(|c| !c.is_whitespace());
        loop {
            let Some(hi) = digits.next() else { break };
            let lo = digits.next().unwrap_or('0');
            let parse = |c: char| c.to_digit(16).ok_or(BitsError::BadHex(c));
            bytes.push(((parse(hi)? as u8) << 4) | parse(lo)? as u8);
        }
        if bytes.len() * 8 < bit_len {
            return Err(BitsError::HexTooShort);
        }
        let bits = (0..bit_len)
            .map(|i| bytes[i / 8] & (0x80 >> (i % 8)) != 0)
            .collect::<Vec<_>>();
        Self::from_bits(bits)
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut bytes = vec![0u8; self.bits.len().div_ceil(8)];
        for (i, &b) in self.bits.iter().enumerate() {
            if b {
                bytes[i / 8] |= 0x80 >> (i % 8);
            }
        }
        bytes
    }

    pub fn from_bytes(bytes: &[u8], bit_len: usize) -> Result<Self, BitsError> {
        if bytes.len() * 8 < bit_len {
            return Err(BitsError::HexTooShort);
        }
        Self::from_bits((0..bit_len).map(|i| bytes[i / 8] & (0x80 >> (i % 8)) != 0))
    }
}

impl fmt::Display for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.bits {
            write!(f, "{}", if b { '1' } else { '0' })?;
        }
        Ok(())
    }
}

impl fmt::Debug for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "b\"{self}\"")
    }
}

impl PartialOrd for BitString {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for BitString {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.len()
            .cmp(&other.len())
            .then_with(|| self.bits.cmp(&other.bits))
    }
}

/// Elias gamma code of a positive integer: `floor(log2 m)` zeros followed by
/// the binary expansion of `m`. Prefix-free over all positive integers.
pub fn gamma_encode(m: u64) -> Result<BitString, BitsError> {
    if m == 0 {
        return Err(BitsError::GammaZero);
    }
    gamma_encode_big(&BigUint::from(m))
}

/// Gamma code for arbitrary-precision positive integers.
pub fn gamma_encode_big(m: &BigUint) -> Result<BitString, BitsError> {
    if m.is_zero() {
        return Err(BitsError::GammaZero);
    }
    let nbits = m.bits() as usize;
    let mut bits = Vec::with_capacity(2 * nbits - 1);
    bits.extend(std::iter::repeat_n(false, nbits - 1));
    for i in (0..nbits).rev() {
        bits.push(m.bit(i as u64));
    }
    BitString::from_bits(bits)
}

/// Number of bits of the gamma code of `m >= 1`: `2*floor(log2 m) + 1`.
pub fn gamma_len(m: u64) -> usize {
    debug_assert!(m >= 1);
    2 * (63 - m.leading_zeros() as usize) + 1
}

pub fn gamma_len_big(m: &BigUint) -> usize {
    debug_assert!(!m.is_zero());
    2 * (m.bits() as usize - 1) + 1
}

/// Decode one gamma code starting at `pos`; returns (value, next position).
pub fn gamma_decode(bits: &BitString, pos: usize) -> Result<(BigUint, usize), BitsError> {
    let mut i = pos;
    let mut zeros = 0usize;
    loop {
        if i >= bits.len() {
            return Err(BitsError::GammaTruncated);
        }
        if bits.bit(i) {
            break;
        }
        zeros += 1;
        i += 1;
    }
    // Leading one, then `zeros` payload bits.
    let mut value = BigUint::one();
    i += 1;
    for _ in 0..zeros {
        if i >= bits.len() {
            return Err(BitsError::GammaTruncated);
        }
        value <<= 1;
        if bits.bit(i) {
            value += 1u32;
        }
        i += 1;
    }
    Ok((value, i))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn g(m: u64) -> String {
        gamma_encode(m).unwrap().to_string()
    }

    #[test]
    fn gamma_base_case() {
        assert_eq!(g(1), "1");
    }

    #[test]
    fn gamma_two() {
        assert_eq!(g(2), "010");
    }

    #[test]
    fn gamma_five() {
        // floor(log2 5) = 2 zeros, then "101".
        assert_eq!(g(5), "00101");
    }

    #[test]
    fn gamma_rejects_zero() {
        assert_eq!(gamma_encode(0), Err(BitsError::GammaZero));
    }

    #[test]
    fn gamma_len_matches_encoding() {
        for m in 1..2000u64 {
            assert_eq!(gamma_len(m), gamma_encode(m).unwrap().len());
        }
    }

    #[test]
    fn gamma_truncated_detected() {
        let code = BitString::from_str01("00101").unwrap();
        let cut = BitString::from_bits(code.iter().take(4)).unwrap();
        assert_eq!(gamma_decode(&cut, 0), Err(BitsError::GammaTruncated));
    }

    #[test]
    fn bitstring_order_is_length_then_lex() {
        let a = BitString::from_str01("11").unwrap();
        let b = BitString::from_str01("000").unwrap();
        assert!(a < b);
    }

    proptest! {
        #[test]
        fn gamma_round_trip(m in 1u64..1_000_000) {
            let code = gamma_encode(m).unwrap();
            let (value, next) = gamma_decode(&code, 0).unwrap();
            prop_assert_eq!(value, BigUint::from(m));
            prop_assert_eq!(next, code.len());
        }

        #[test]
        fn gamma_prefix_free(a in 1u64..5000, b in 1u64..5000) {
            prop_assume!(a != b);
            let ca = gamma_encode(a).unwrap();
            let cb = gamma_encode(b).unwrap();
            prop_assert!(!ca.is_prefix_of(&cb));
        }

        #[test]
        fn hex_round_trip(bits in proptest::collection::vec(any::<bool>(), 0..200)) {
            let s = BitString::from_bits(bits).unwrap();
            let back = BitString::from_hex(&s.to_hex(), s.len()).unwrap();
            prop_assert_eq!(s, back);
        }
    }
}
