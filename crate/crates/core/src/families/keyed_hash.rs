//! Algorithmic stand-in for a PUF: `truncate(HMAC-SHA-256(key, C), ℓ_S)`.
//!
//! Anyone holding the 128-bit key reproduces the device exactly, which makes
//! this the clonable-by-manufacturer fixture.

use hmac::{Hmac, Mac};
use sha2::Sha256;

use crate::bits::BitString;
use crate::device::{check_challenge_len, ChallengeSet, FamilyId, Foreseen, GodMode, PufDevice, PufError};
use crate::rng::Rng;

pub const MAX_KEYED_HASH_OUTPUT: usize = 256;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KeyedHashPuf {
    key: [u8; 16],
    challenge_len: usize,
    secret_len: usize,
}

impl KeyedHashPuf {
    pub fn new(key: [u8; 16], challenge_len: usize, secret_len: usize) -> Result<Self, PufError> {
        if challenge_len == 0 || secret_len == 0 || secret_len > MAX_KEYED_HASH_OUTPUT {
            return Err(PufError::InvalidParams(format!(
                "keyed-hash needs l ≥ 1 and 1 ≤ l_S ≤ {MAX_KEYED_HASH_OUTPUT}"
            )));
        }
        Ok(Self { key, challenge_len, secret_len })
    }

    pub fn generate(seed: u64, challenge_len: usize, secret_len: usize) -> Result<Self, PufError> {
        let key = Rng::new(seed).fork("keyed-hash").bytes::<16>();
        Self::new(key, challenge_len, secret_len)
    }

    /// The hidden key (god-mode).
    pub fn key(&self) -> [u8; 16] {
        self.key
    }

    fn compute(&self, c: &BitString) -> Result<BitString, PufError> {
        check_challenge_len(self.challenge_len, c)?;
        let mut mac = Hmac::<Sha256>::new_from_slice(&self.key).expect("any key length");
        mac.update(&c.to_bytes());
        let digest = mac.finalize().into_bytes();
        let full = BitString::from_bytes(&digest, 256)?;
        Ok(full.truncate(self.secret_len).expect("secret_len ≤ 256"))
    }
}

impl PufDevice for KeyedHashPuf {
    fn family(&self) -> FamilyId {
        FamilyId::KeyedHash
    }

    fn challenge_len(&self) -> usize {
        self.challenge_len
    }

    fn raw_secret_len(&self) -> usize {
        self.secret_len
    }

    fn challenge_space(&self) -> ChallengeSet {
        ChallengeSet::All { len: self.challenge_len }
    }

    fn evaluate(&mut self, challenge: &BitString, _rng: &mut Rng) -> Result<BitString, PufError> {
        self.compute(challenge)
    }
}

impl Foreseen for KeyedHashPuf {
    fn foreseen(&self) -> ChallengeSet {
        self.challenge_space()
    }
}

impl GodMode for KeyedHashPuf {
    fn true_raw_secret(&self, challenge: &BitString) -> Result<BitString, PufError> {
        self.compute(challenge)
    }
}
