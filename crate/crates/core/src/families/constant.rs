//! Conventional unclonable function fixture: one stored secret returned for
//! every challenge. It fails the PUF definition by construction.

use crate::bits::BitString;
use crate::device::{check_challenge_len, ChallengeSet, FamilyId, Foreseen, GodMode, PufDevice, PufError};
use crate::rng::Rng;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConstantCuf {
    challenge_len: usize,
    secret: BitString,
}

impl ConstantCuf {
    pub fn new(challenge_len: usize, secret: BitString) -> Result<Self, PufError> {
        if challenge_len == 0 {
            return Err(PufError::InvalidParams("challenge length must be ≥ 1".into()));
        }
        Ok(Self { challenge_len, secret })
    }

    pub fn generate(challenge_len: usize, secret_len: usize, seed: u64) -> Result<Self, PufError> {
        let mut rng = Rng::new(seed).fork("constant");
        Self::new(challenge_len, BitString::random(secret_len, &mut rng)?)
    }
}

impl PufDevice for ConstantCuf {
    fn family(&self) -> FamilyId {
        FamilyId::Constant
    }

    fn challenge_len(&self) -> usize {
        self.challenge_len
    }

    fn raw_secret_len(&self) -> usize {
        self.secret.len()
    }

    fn challenge_space(&self) -> ChallengeSet {
        ChallengeSet::All { len: self.challenge_len }
    }

    fn evaluate(&mut self, challenge: &BitString, _rng: &mut Rng) -> Result<BitString, PufError> {
        check_challenge_len(self.challenge_len, challenge)?;
        Ok(self.secret.clone())
    }
}

impl Foreseen for ConstantCuf {
    fn foreseen(&self) -> ChallengeSet {
        self.challenge_space()
    }
}

impl GodMode for ConstantCuf {
    fn true_raw_secret(&self, challenge: &BitString) -> Result<BitString, PufError> {
        check_challenge_len(self.challenge_len, challenge)?;
        Ok(self.secret.clone())
    }
}
