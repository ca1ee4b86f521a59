//! Small helpers for bit vectors represented as `&[u8]` slices of 0/1 values.

use crate::error::{Error, Result};

/// Parse a CRC polynomial from a hex literal such as `0x43`.
///
/// The literal encodes the full polynomial including the leading term,
/// most-significant bit first: `0x43` = x^6 + x + 1, `0x89` = x^7 + x^3 + 1,
/// `0x1D5` = x^8 + x^7 + x^6 + x^4 + x^2 + 1. Leading zero bits of the hex
/// digits are stripped so the first bit of the result is always 1.
pub fn parse_hex_poly(s: &str) -> Result<Vec<u8>> {
    let body = s
        .trim()
        .strip_prefix("0x")
        .or_else(|| s.trim().strip_prefix("0X"))
        .unwrap_or_else(|| s.trim());
    if body.is_empty() {
        return Err(Error::Parse(format!("empty polynomial literal {s:?}")));
    }
    let value = u128::from_str_radix(body, 16)
        .map_err(|e| Error::Parse(format!("bad polynomial literal {s:?}: {e}")))?;
    if value == 0 {
        return Err(Error::Parse("polynomial must be nonzero".into()));
    }
    let top = 127 - value.leading_zeros() as usize;
    Ok((0..=top).rev().map(|i| ((value >> i) & 1) as u8).collect())
}

/// Format a bit slice as a compact 0/1 string (debugging, fixtures).
pub fn bits_to_string(bits: &[u8]) -> String {
    bits.iter().map(|&b| if b == 0 { '0' } else { '1' }).collect()
}

/// Elementwise XOR, `a.len() == b.len()`.
pub fn xor(a: &[u8], b: &[u8]) -> Vec<u8> {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x ^ y).collect()
}

/// GF(2) inner product of two equal-length bit slices.
pub fn dot(a: &[u8], b: &[u8]) -> u8 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).fold(0u8, |acc, (x, y)| acc ^ (x & y))
}

/// Draw `len` uniformly random bits.
pub fn random_bits(len: usize, rng: &mut impl rand::Rng) -> Vec<u8> {
    (0..len).map(|_| rng.random_range(0..2u8)).collect()
}
