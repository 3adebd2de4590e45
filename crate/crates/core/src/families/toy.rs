//! The two-valued majority function: it satisfies the PUF definition, yet
//! two reads are enough to copy it.

use crate::bits::{popcount_majority, BitString, Majority};
use crate::device::{check_challenge_len, ChallengeSet, FamilyId, Foreseen, GodMode, PufDevice, PufError};
use crate::rng::Rng;

pub const TOY_MORE_ONES: &str = "1001101101";
pub const TOY_OTHERWISE: &str = "0001101000";

/// Read-out of the toy function for a challenge of any length.
pub fn toy_eval(c: &BitString) -> BitString {
    let out = match popcount_majority(c) {
        Majority::MoreOnes => TOY_MORE_ONES,
        Majority::MoreZerosOrEqual => TOY_OTHERWISE,
    };
    out.parse().expect("constant bit string")
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ToyMajorityPuf {
    challenge_len: usize,
}

impl ToyMajorityPuf {
    pub fn new(challenge_len: usize) -> Result<Self, PufError> {
        if challenge_len == 0 {
            return Err(PufError::InvalidParams("toy challenge length must be ≥ 1".into()));
        }
        Ok(Self { challenge_len })
    }
}

impl PufDevice for ToyMajorityPuf {
    fn family(&self) -> FamilyId {
        FamilyId::Toy
    }

    fn challenge_len(&self) -> usize {
        self.challenge_len
    }

    fn raw_secret_len(&self) -> usize {
        TOY_MORE_ONES.len()
    }

    fn challenge_space(&self) -> ChallengeSet {
        ChallengeSet::All { len: self.challenge_len }
    }

    fn evaluate(&mut self, challenge: &BitString, _rng: &mut Rng) -> Result<BitString, PufError> {
        check_challenge_len(self.challenge_len, challenge)?;
        Ok(toy_eval(challenge))
    }
}

impl Foreseen for ToyMajorityPuf {
    fn foreseen(&self) -> ChallengeSet {
        self.challenge_space()
    }
}

impl GodMode for ToyMajorityPuf {
    fn true_raw_secret(&self, challenge: &BitString) -> Result<BitString, PufError> {
        check_challenge_len(self.challenge_len, challenge)?;
        Ok(toy_eval(challenge))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    fn bs(s: &str) -> BitString {
        s.parse().unwrap()
    }

    #[test]
    fn read_out_examples() {
        assert_eq!(toy_eval(&bs("11101")), bs("1001101101"));
        assert_eq!(toy_eval(&bs("00010")), bs("0001101000"));
        assert_eq!(toy_eval(&bs("10")), bs("0001101000"));
    }

    #[test]
    fn range_has_exactly_two_values() {
        let mut range = HashSet::new();
        for len in 1..=12 {
            for v in 0..(1u64 << len) {
                range.insert(toy_eval(&BitString::from_u64(v, len).unwrap()));
            }
        }
        assert_eq!(range.len(), 2);
    }

    #[test]
    fn rejects_wrong_length() {
        let mut puf = ToyMajorityPuf::new(4).unwrap();
        let err = puf.evaluate(&bs("101"), &mut Rng::new(0)).unwrap_err();
        assert_eq!(err, PufError::ChallengeLength { expected: 4, actual: 3 });
    }
}
