//! Minimum-read-out-time table: N stored challenge/secret pairs with
//! independent uniform values.

use std::collections::{HashMap, HashSet};

use crate::bits::BitString;
use crate::device::{apply_noise, ChallengeSet, FamilyId, Foreseen, GodMode, PufDevice, PufError};
use crate::families::repeat_bits;
use crate::rng::Rng;

#[derive(Debug, Clone)]
pub struct TableMrtPuf {
    seed: u64,
    challenge_len: usize,
    secret_len: usize,
    repetition: usize,
    noise_p: f64,
    challenges: Vec<BitString>,
    table: HashMap<BitString, BitString>,
}

impl TableMrtPuf {
    /// Draw `n` distinct `challenge_len`-bit challenges (rejection on
    /// collision) and an independent `secret_len`-bit secret for each.
    pub fn generate(seed: u64, n: usize, challenge_len: usize, secret_len: usize) -> Result<Self, PufError> {
        if n == 0 || challenge_len == 0 || secret_len == 0 {
            return Err(PufError::InvalidParams("table needs N, l, l_S ≥ 1".into()));
        }
        if challenge_len < 128 && (n as u128) > 1u128 << challenge_len {
            return Err(PufError::InvalidParams(format!("{n} distinct challenges do not fit in {challenge_len} bits")));
        }
        let mut rng = Rng::new(seed).fork("table");
        let mut seen = HashSet::with_capacity(n);
        let mut challenges = Vec::with_capacity(n);
        while challenges.len() < n {
            let c = BitString::random(challenge_len, &mut rng)?;
            if seen.insert(c.clone()) {
                challenges.push(c);
            }
        }
        let table = challenges
            .iter()
            .map(|c| Ok((c.clone(), BitString::random(secret_len, &mut rng)?)))
            .collect::<Result<HashMap<_, _>, PufError>>()?;
        Ok(Self { seed, challenge_len, secret_len, repetition: 1, noise_p: 0.0, challenges, table })
    }

    /// Read-out noise: each raw bit flips independently with probability `p`.
    pub fn with_noise(mut self, p: f64) -> Result<Self, PufError> {
        if !(0.0..=0.5).contains(&p) {
            return Err(PufError::InvalidParams(format!("noise_p {p} outside [0, 0.5]")));
        }
        self.noise_p = p;
        Ok(self)
    }

    /// Store every secret bit in `r` redundant cells; the raw read-out is
    /// then `r·ℓ_S` bits with independent noise per cell.
    pub fn with_repetition(mut self, r: usize) -> Result<Self, PufError> {
        if r == 0 || r.is_multiple_of(2) {
            return Err(PufError::InvalidParams(format!("repetition {r} must be odd")));
        }
        self.repetition = r;
        Ok(self)
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn len(&self) -> usize {
        self.challenges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.challenges.is_empty()
    }

    pub fn secret_len(&self) -> usize {
        self.secret_len
    }

    pub fn repetition(&self) -> usize {
        self.repetition
    }

    pub fn noise_p(&self) -> f64 {
        self.noise_p
    }

    /// Hidden table contents (god-mode).
    pub fn table(&self) -> &HashMap<BitString, BitString> {
        &self.table
    }

    fn lookup(&self, c: &BitString) -> Result<&BitString, PufError> {
        self.table.get(c).ok_or_else(|| PufError::ChallengeNotForeseen(c.clone()))
    }
}

impl PufDevice for TableMrtPuf {
    fn family(&self) -> FamilyId {
        FamilyId::Table
    }

    fn challenge_len(&self) -> usize {
        self.challenge_len
    }

    fn raw_secret_len(&self) -> usize {
        self.secret_len * self.repetition
    }

    fn challenge_space(&self) -> ChallengeSet {
        ChallengeSet::Explicit(self.challenges.clone())
    }

    fn evaluate(&mut self, challenge: &BitString, rng: &mut Rng) -> Result<BitString, PufError> {
        let mut raw = repeat_bits(self.lookup(challenge)?, self.repetition);
        apply_noise(&mut raw, self.noise_p, rng);
        Ok(raw)
    }
}

impl Foreseen for TableMrtPuf {
    fn foreseen(&self) -> ChallengeSet {
        ChallengeSet::Explicit(self.challenges.clone())
    }
}

impl GodMode for TableMrtPuf {
    fn true_raw_secret(&self, challenge: &BitString) -> Result<BitString, PufError> {
        Ok(repeat_bits(self.lookup(challenge)?, self.repetition))
    }
}
