//! Fixed-length bit strings used for challenges, raw secrets, secrets and
//! responses.
//!
//! Bits are kept most-significant-first: bit 0 is the leftmost character of
//! the textual form and the high bit of the first packed byte.

use std::fmt;
use std::ops::BitXor;
use std::str::FromStr;

use rand::Rng as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::rng::Rng;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BitsError {
    #[error("bit strings must contain at least one bit")]
    Empty,
    #[error("invalid bit character {0:?}")]
    InvalidChar(char),
    #[error("length mismatch: {left} vs {right} bits")]
    LengthMismatch { left: usize, right: usize },
    #[error("{bytes} bytes cannot hold {bits} bits")]
    ByteLength { bits: usize, bytes: usize },
    #[error("invalid hex: {0}")]
    Hex(String),
}

/// A non-empty ordered sequence of bits. Equality is bitwise and
/// length-sensitive.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BitString {
    bits: Vec<bool>,
}

/// Outcome of a popcount vote over a challenge.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Majority {
    MoreOnes,
    MoreZerosOrEqual,
}

/// `MoreOnes` iff ones strictly outnumber zeros.
pub fn popcount_majority(c: &BitString) -> Majority {
    let ones = c.count_ones();
    if ones > c.len() - ones {
        Majority::MoreOnes
    } else {
        Majority::MoreZerosOrEqual
    }
}

impl BitString {
    pub fn from_bits(bits: Vec<bool>) -> Result<Self, BitsError> {
        if bits.is_empty() {
            return Err(BitsError::Empty);
        }
        Ok(Self { bits })
    }

    pub fn zeros(len: usize) -> Result<Self, BitsError> {
        Self::from_bits(vec![false; len])
    }

    pub fn ones(len: usize) -> Result<Self, BitsError> {
        Self::from_bits(vec![true; len])
    }

    /// Uniformly random string of `len` bits.
    pub fn random(len: usize, rng: &mut Rng) -> Result<Self, BitsError> {
        Self::from_bits((0..len).map(|_| rng.random::<bool>()).collect())
    }

    /// Low `len` bits of `value`, most significant first.
    pub fn from_u64(value: u64, len: usize) -> Result<Self, BitsError> {
        Self::from_bits((0..len).rev().map(|i| i < 64 && (value >> i) & 1 == 1).collect())
    }

    /// Interpret the string as an unsigned big-endian integer. Strings longer
    /// than 64 bits keep only the low 64 bits.
    pub fn to_u64(&self) -> u64 {
        self.bits.iter().fold(0u64, |acc, &b| (acc << 1) | b as u64)
    }

    /// Unpack the first `len` bits of `bytes`, most significant bit first.
    pub fn from_bytes(bytes: &[u8], len: usize) -> Result<Self, BitsError> {
        if bytes.len() != len.div_ceil(8) {
            return Err(BitsError::ByteLength { bits: len, bytes: bytes.len() });
        }
        Self::from_bits((0..len).map(|i| bytes[i / 8] >> (7 - i % 8) & 1 == 1).collect())
    }

    /// Pack into bytes, most significant bit first, zero-padded at the end.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = vec![0u8; self.bits.len().div_ceil(8)];
        for (i, &b) in self.bits.iter().enumerate() {
            if b {
                out[i / 8] |= 0x80 >> (i % 8);
            }
        }
        out
    }

    pub fn to_hex(&self) -> String {
        hex::encode(self.to_bytes())
    }

    pub fn from_hex(s: &str, len: usize) -> Result<Self, BitsError> {
        let bytes = hex::decode(s).map_err(|e| BitsError::Hex(e.to_string()))?;
        Self::from_bytes(&bytes, len)
    }

    #[allow(clippy::len_without_is_empty)]
    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn bit(&self, i: usize) -> bool {
        self.bits[i]
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn iter(&self) -> impl Iterator<Item = bool> + '_ {
        self.bits.iter().copied()
    }

    pub fn count_ones(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    pub fn flip(&mut self, i: usize) {
        self.bits[i] = !self.bits[i];
    }

    pub fn hamming_distance(&self, other: &BitString) -> Result<usize, BitsError> {
        self.check_len(other)?;
        Ok(self.bits.iter().zip(&other.bits).filter(|(a, b)| a != b).count())
    }

    pub fn xor(&self, other: &BitString) -> Result<BitString, BitsError> {
        self.check_len(other)?;
        Ok(BitString { bits: self.bits.iter().zip(&other.bits).map(|(a, b)| a ^ b).collect() })
    }

    /// Concatenation `self ∥ other`.
    pub fn concat(&self, other: &BitString) -> BitString {
        let mut bits = self.bits.clone();
        bits.extend_from_slice(&other.bits);
        BitString { bits }
    }

    /// Bits `start..end`; `None` for an empty or out-of-range slice.
    pub fn slice(&self, start: usize, end: usize) -> Option<BitString> {
        if start >= end || end > self.bits.len() {
            return None;
        }
        Some(BitString { bits: self.bits[start..end].to_vec() })
    }

    /// First `len` bits.
    pub fn truncate(&self, len: usize) -> Option<BitString> {
        self.slice(0, len)
    }

    fn check_len(&self, other: &BitString) -> Result<(), BitsError> {
        if self.len() != other.len() {
            return Err(BitsError::LengthMismatch { left: self.len(), right: other.len() });
        }
        Ok(())
    }
}

impl BitXor for &BitString {
    type Output = BitString;

    /// Panics on a length mismatch; use [`BitString::xor`] for a fallible form.
    fn bitxor(self, rhs: &BitString) -> BitString {
        self.xor(rhs).expect("xor of bit strings with different lengths")
    }
}

impl FromStr for BitString {
    type Err = BitsError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bits = s
            .chars()
            .map(|ch| match ch {
                '0' => Ok(false),
                '1' => Ok(true),
                other => Err(BitsError::InvalidChar(other)),
            })
            .collect::<Result<Vec<_>, _>>()?;
        Self::from_bits(bits)
    }
}

impl fmt::Display for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.bits {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitString({self})")
    }
}

impl Serialize for BitString {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for BitString {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}
