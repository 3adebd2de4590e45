//! PF₂ (error correction and privacy amplification) and PF₃ (keyed
//! response).
//!
//! Wire-compatible constants:
//! * error correction is a repetition code: bit `i` of the corrected string
//!   is the majority of raw bits `i·r .. i·r + r`;
//! * amplification is `SHA-256(salt ∥ bytes(s))` truncated to `out_len`
//!   bits, where `bytes` packs most-significant-bit first with zero padding;
//! * the response is `HMAC-SHA-256(key = bytes(S), message = nonce)`.

use hmac::{Hmac, Mac};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::bits::BitString;

pub const DIGEST_BITS: usize = 256;
pub const RESPONSE_BITS: usize = 256;

pub type Salt = [u8; 16];
pub type Nonce = [u8; 16];

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ExtractorError {
    #[error("repetition {0} must be odd and ≥ 1")]
    EvenRepetition(usize),
    #[error("{len} raw bits are not divisible into groups of {r}")]
    LengthNotDivisible { len: usize, r: usize },
    #[error("output length must be ≥ 1")]
    EmptyOutput,
    #[error("output length {0} exceeds the {DIGEST_BITS}-bit digest")]
    OutLenTooLarge(usize),
}

/// Majority decode of a repetition code with odd group size `r`.
pub fn pf2_correct(raw: &BitString, r: usize) -> Result<BitString, ExtractorError> {
    if r == 0 || r.is_multiple_of(2) {
        return Err(ExtractorError::EvenRepetition(r));
    }
    if !raw.len().is_multiple_of(r) {
        return Err(ExtractorError::LengthNotDivisible { len: raw.len(), r });
    }
    let bits = raw.bits().chunks(r).map(|group| group.iter().filter(|&&b| b).count() * 2 > r).collect();
    Ok(BitString::from_bits(bits).expect("raw is non-empty"))
}

/// `SHA-256(salt ∥ s)` truncated to `out_len` bits.
pub fn pf2_amplify(s: &BitString, salt: &Salt, out_len: usize) -> Result<BitString, ExtractorError> {
    if out_len == 0 {
        return Err(ExtractorError::EmptyOutput);
    }
    if out_len > DIGEST_BITS {
        return Err(ExtractorError::OutLenTooLarge(out_len));
    }
    let digest = Sha256::new().chain_update(salt).chain_update(s.to_bytes()).finalize();
    let full = BitString::from_bytes(&digest, DIGEST_BITS).expect("32-byte digest");
    Ok(full.truncate(out_len).expect("out_len ≤ 256"))
}

/// `HMAC-SHA-256(key = s, message = nonce)` as 256 bits.
pub fn pf3_respond(s: &BitString, nonce: &Nonce) -> BitString {
    let mut mac = Hmac::<Sha256>::new_from_slice(&s.to_bytes()).expect("any key length");
    mac.update(nonce);
    BitString::from_bytes(&mac.finalize().into_bytes(), RESPONSE_BITS).expect("32-byte tag")
}

/// PF₂ configuration: repetition `r`, amplified length and public salt.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExtractorParams {
    pub repetition: usize,
    pub out_len: usize,
    pub salt: Salt,
}

impl ExtractorParams {
    pub fn new(repetition: usize, out_len: usize, salt: Salt) -> Result<Self, ExtractorError> {
        if repetition == 0 || repetition.is_multiple_of(2) {
            return Err(ExtractorError::EvenRepetition(repetition));
        }
        if out_len == 0 {
            return Err(ExtractorError::EmptyOutput);
        }
        if out_len > DIGEST_BITS {
            return Err(ExtractorError::OutLenTooLarge(out_len));
        }
        Ok(Self { repetition, out_len, salt })
    }

    /// Parameters for a device with `raw_len`-bit read-outs: the amplified
    /// length equals the corrected length, capped at the digest size.
    pub fn for_raw_len(raw_len: usize, repetition: usize, salt: Salt) -> Result<Self, ExtractorError> {
        if repetition == 0 || !raw_len.is_multiple_of(repetition) {
            return Err(ExtractorError::LengthNotDivisible { len: raw_len, r: repetition });
        }
        Self::new(repetition, (raw_len / repetition).min(DIGEST_BITS), salt)
    }

    /// S = PF₂(S_r).
    pub fn derive(&self, raw: &BitString) -> Result<BitString, ExtractorError> {
        pf2_amplify(&pf2_correct(raw, self.repetition)?, &self.salt, self.out_len)
    }
}
