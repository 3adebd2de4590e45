//! The physical-function device model.
//!
//! A device is split across three traits so that attack code can be handed
//! exactly the access an attacker has:
//!
//! * [`PufDevice`] is the physical read-out interface (PF₁) plus the public
//!   description of what may be submitted. Attack strategies only ever see
//!   `&mut dyn PufDevice`.
//! * [`Foreseen`] exposes the set 𝔐 of challenges foreseen by the system
//!   architecture. This is designer knowledge, used for enrollment and by
//!   the environment that draws verification challenges.
//! * [`GodMode`] reaches the hidden state: noise-free raw secrets and
//!   non-consuming snapshots. Only tests, scorers and the evaluator use it.

use std::collections::HashSet;
use std::fmt;

use rand::Rng as _;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bits::{BitString, BitsError};
use crate::rng::Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FamilyId {
    Toy,
    Table,
    Arbiter,
    KeyedHash,
    Quantum,
    /// Conventional unclonable function fixture: constant read-out.
    Constant,
}

impl FamilyId {
    pub fn name(self) -> &'static str {
        match self {
            FamilyId::Toy => "toy",
            FamilyId::Table => "table",
            FamilyId::Arbiter => "arbiter",
            FamilyId::KeyedHash => "keyed-hash",
            FamilyId::Quantum => "quantum",
            FamilyId::Constant => "constant",
        }
    }
}

impl fmt::Display for FamilyId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PufError {
    #[error("challenge {0} is not foreseen by this device")]
    ChallengeNotForeseen(BitString),
    #[error("challenge has {actual} bits, device expects {expected}")]
    ChallengeLength { expected: usize, actual: usize },
    #[error("register index {index} out of range (device has {count})")]
    IndexOutOfRange { index: u64, count: usize },
    #[error("length mismatch: {0} vs {1} bits")]
    LengthMismatch(usize, usize),
    #[error("read budget of {0} exhausted")]
    BudgetExhausted(u64),
    #[error("invalid device parameters: {0}")]
    InvalidParams(String),
    #[error(transparent)]
    Bits(#[from] BitsError),
}

/// A description of a set of challenges.
#[derive(Debug, Clone, PartialEq)]
pub enum ChallengeSet {
    /// Every string of `len` bits.
    All { len: usize },
    /// An explicit list of distinct challenges.
    Explicit(Vec<BitString>),
    /// `index ∥ bases` strings with `index < count`, `index` written in
    /// `index_bits` bits and `bases` arbitrary `base_bits` bits.
    Indexed { count: usize, index_bits: usize, base_bits: usize },
}

impl ChallengeSet {
    pub fn challenge_len(&self) -> Option<usize> {
        match self {
            ChallengeSet::All { len } => Some(*len),
            ChallengeSet::Explicit(list) => list.first().map(BitString::len),
            ChallengeSet::Indexed { index_bits, base_bits, .. } => Some(index_bits + base_bits),
        }
    }

    /// Number of members, saturating at `u128::MAX`.
    pub fn size(&self) -> u128 {
        let pow2 = |bits: usize| if bits >= 128 { u128::MAX } else { 1u128 << bits };
        match self {
            ChallengeSet::All { len } => pow2(*len),
            ChallengeSet::Explicit(list) => list.len() as u128,
            ChallengeSet::Indexed { count, base_bits, .. } => (*count as u128).saturating_mul(pow2(*base_bits)),
        }
    }

    pub fn contains(&self, c: &BitString) -> bool {
        match self {
            ChallengeSet::All { len } => c.len() == *len,
            ChallengeSet::Explicit(list) => list.contains(c),
            ChallengeSet::Indexed { count, index_bits, base_bits } => {
                if c.len() != index_bits + base_bits {
                    return false;
                }
                *index_bits == 0 || c.slice(0, *index_bits).is_some_and(|i| i.to_u64() < *count as u64)
            }
        }
    }

    /// A uniformly random member.
    pub fn sample(&self, rng: &mut Rng) -> BitString {
        match self {
            ChallengeSet::All { len } => BitString::random(*len, rng).expect("non-empty set"),
            ChallengeSet::Explicit(list) => list[rng.random_range(0..list.len())].clone(),
            ChallengeSet::Indexed { count, index_bits, base_bits } => {
                let bases = BitString::random(*base_bits, rng).expect("non-empty set");
                if *index_bits == 0 {
                    return bases;
                }
                let index = rng.random_range(0..*count as u64);
                BitString::from_u64(index, *index_bits).expect("index bits").concat(&bases)
            }
        }
    }

    /// Up to `n` distinct members, uniformly without replacement. Returns
    /// fewer only when the set itself is smaller than `n`.
    pub fn sample_distinct(&self, n: usize, rng: &mut Rng) -> Vec<BitString> {
        let n = (n as u128).min(self.size()) as usize;
        if let ChallengeSet::Explicit(list) = self {
            return rand::seq::index::sample(rng, list.len(), n).into_iter().map(|i| list[i].clone()).collect();
        }
        let mut seen = HashSet::with_capacity(n);
        let mut out = Vec::with_capacity(n);
        while out.len() < n {
            let c = self.sample(rng);
            if seen.insert(c.clone()) {
                out.push(c);
            }
        }
        out
    }
}

/// PF₁: the physical read-out interface an attacker with physical access
/// has.
pub trait PufDevice {
    fn family(&self) -> FamilyId;

    fn challenge_len(&self) -> usize;

    /// Length ℓ_r of a raw read-out.
    fn raw_secret_len(&self) -> usize;

    /// The publicly known challenge format. For the table family this is the
    /// list of addressable entries; for the quantum family it is the index
    /// format with unknown bases.
    fn challenge_space(&self) -> ChallengeSet;

    /// One physical read-out. Stateful families may change internal state.
    fn evaluate(&mut self, challenge: &BitString, rng: &mut Rng) -> Result<BitString, PufError>;
}

/// Designer knowledge: the foreseen challenge set 𝔐.
pub trait Foreseen {
    fn foreseen(&self) -> ChallengeSet;
}

/// Privileged access to hidden state. Never handed to attack strategies.
pub trait GodMode: PufDevice + Clone {
    /// An independent copy of the device's current state. Evaluating the
    /// copy never affects `self`.
    fn snapshot(&self) -> Self {
        self.clone()
    }

    /// The noise-free raw secret for a foreseen challenge, read without
    /// disturbing any state.
    fn true_raw_secret(&self, challenge: &BitString) -> Result<BitString, PufError>;
}

impl<T: PufDevice + ?Sized> PufDevice for &mut T {
    fn family(&self) -> FamilyId {
        (**self).family()
    }
    fn challenge_len(&self) -> usize {
        (**self).challenge_len()
    }
    fn raw_secret_len(&self) -> usize {
        (**self).raw_secret_len()
    }
    fn challenge_space(&self) -> ChallengeSet {
        (**self).challenge_space()
    }
    fn evaluate(&mut self, challenge: &BitString, rng: &mut Rng) -> Result<BitString, PufError> {
        (**self).evaluate(challenge, rng)
    }
}

pub(crate) fn check_challenge_len(expected: usize, c: &BitString) -> Result<(), PufError> {
    if c.len() != expected {
        return Err(PufError::ChallengeLength { expected, actual: c.len() });
    }
    Ok(())
}

/// Flip each bit independently with probability `p`.
pub(crate) fn apply_noise(s: &mut BitString, p: f64, rng: &mut Rng) {
    if p <= 0.0 {
        return;
    }
    for i in 0..s.len() {
        if rng.random_bool(p) {
            s.flip(i);
        }
    }
}

pub const DEFAULT_DEFINITION1_SAMPLE: usize = 64;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Definition1Verdict {
    pub deterministic_on_m: bool,
    pub non_constant: bool,
    pub is_puf: bool,
    /// Two sampled challenges with different secrets, when non-constant.
    pub witness_pair: Option<(BitString, BitString)>,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Definition1Error {
    #[error("need at least 2 sample challenges, got {0}")]
    SampleTooSmall(usize),
    #[error("need at least 2 repeats, got {0}")]
    TooFewRepeats(usize),
    #[error("challenge {0} is not foreseen")]
    ChallengeNotForeseen(BitString),
    #[error(transparent)]
    Device(#[from] PufError),
}

/// Sampled check of the PUF definition: the secret must be repeatable for
/// every foreseen challenge and must not be a constant function.
///
/// Each challenge is read `repeats` times from its own snapshot of the
/// device, so consuming read-outs of one challenge do not influence another
/// and the original device is untouched. `pf2` maps the raw read-out to the
/// secret S; pass `|s| Ok(s.clone())` to check PF₁ directly.
pub fn check_definition1_with<D, F>(
    device: &D,
    sample: &[BitString],
    repeats: usize,
    mut pf2: F,
    rng: &mut Rng,
) -> Result<Definition1Verdict, Definition1Error>
where
    D: GodMode + Foreseen,
    F: FnMut(&BitString) -> Result<BitString, PufError>,
{
    if sample.len() < 2 {
        return Err(Definition1Error::SampleTooSmall(sample.len()));
    }
    if repeats < 2 {
        return Err(Definition1Error::TooFewRepeats(repeats));
    }
    let foreseen = device.foreseen();
    if let Some(c) = sample.iter().find(|c| !foreseen.contains(c)) {
        return Err(Definition1Error::ChallengeNotForeseen(c.clone()));
    }

    let mut deterministic = true;
    let mut secrets = Vec::with_capacity(sample.len());
    for c in sample {
        let mut copy = device.snapshot();
        let first = pf2(&copy.evaluate(c, rng)?)?;
        for _ in 1..repeats {
            if pf2(&copy.evaluate(c, rng)?)? != first {
                deterministic = false;
            }
        }
        secrets.push(first);
    }

    let witness_pair = secrets.iter().position(|s| *s != secrets[0]).map(|j| (sample[0].clone(), sample[j].clone()));
    let non_constant = witness_pair.is_some();
    Ok(Definition1Verdict {
        deterministic_on_m: deterministic,
        non_constant,
        is_puf: deterministic && non_constant,
        witness_pair,
    })
}

/// [`check_definition1_with`] on raw read-outs.
pub fn check_definition1<D: GodMode + Foreseen>(
    device: &D,
    sample: &[BitString],
    repeats: usize,
    rng: &mut Rng,
) -> Result<Definition1Verdict, Definition1Error> {
    check_definition1_with(device, sample, repeats, |s| Ok(s.clone()), rng)
}

/// Draw up to `n` distinct foreseen challenges for the PUF definition check.
pub fn sample_foreseen<D: Foreseen>(device: &D, n: usize, rng: &mut Rng) -> Vec<BitString> {
    device.foreseen().sample_distinct(n, rng)
}
