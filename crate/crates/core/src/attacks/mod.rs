//! Attacks within a bounded physical-access window.
//!
//! An attack runs in two phases. During access the strategy talks to the
//! device only through a [`BudgetedDevice`], which exposes nothing but
//! [`PufDevice`] and refuses reads past the budget. The strategy then hands
//! back a [`CloneModel`] that must predict secrets without the device.
//! Scoring draws verification challenges from 𝔐 and compares predictions
//! against the god-mode raw secret; strategies never see that oracle.

mod brute;
mod insider;
mod ml;
mod quantum;

pub use brute::{brute_force_attack, DictionaryModel};
pub use insider::{insider_attack, InsiderKnowledge, MajorityModel};
pub use ml::{arbiter_ml_experiment, ml_attack_arbiter, LinearModel, MlConfig, MlOutcome};
pub use quantum::{
    erasure_experiment, guess_challenge_attack, guess_challenge_attack_with, quantum_guess_experiment, ErasureStats,
    GuessStats,
};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bits::BitString;
use crate::device::{ChallengeSet, FamilyId, Foreseen, GodMode, PufDevice, PufError};
use crate::rng::Rng;
use crate::stats::{wilson_ci95, Interval};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AttackError {
    #[error("invalid budget: access {dt_access} s, read {dt_read} s (both must be > 0)")]
    InvalidBudget { dt_access: f64, dt_read: f64 },
    #[error("need at least {need} training pairs, got {have}")]
    InsufficientData { have: usize, need: usize },
    #[error("training pair has {actual} challenge bits, expected {expected}")]
    FeatureLength { expected: usize, actual: usize },
    #[error("attack requires {0}")]
    Unsupported(String),
    #[error(transparent)]
    Device(#[from] PufError),
}

/// Access window Δt_a and per-read time Δt_r, both in seconds. Read-out
/// time is pure accounting: each evaluation spends one read.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AttackBudget {
    pub dt_access: f64,
    pub dt_read: f64,
}

impl AttackBudget {
    pub fn new(dt_access: f64, dt_read: f64) -> Result<Self, AttackError> {
        if !(dt_access > 0.0 && dt_read > 0.0) || !dt_access.is_finite() || !dt_read.is_finite() {
            return Err(AttackError::InvalidBudget { dt_access, dt_read });
        }
        Ok(Self { dt_access, dt_read })
    }

    /// A budget allowing exactly `n` reads at one second each. `n = 0` is
    /// represented as a sub-second window.
    pub fn reads(n: u64) -> Self {
        if n == 0 {
            return Self { dt_access: 0.5, dt_read: 1.0 };
        }
        Self { dt_access: n as f64, dt_read: 1.0 }
    }

    /// ⌊Δt_a / Δt_r⌋, saturating.
    pub fn max_reads(&self) -> u64 {
        let ratio = (self.dt_access / self.dt_read).floor();
        if ratio >= u64::MAX as f64 {
            u64::MAX
        } else {
            ratio as u64
        }
    }
}

/// The attacker's view of a device during the access window.
pub struct BudgetedDevice<'a> {
    inner: &'a mut dyn PufDevice,
    max_reads: u64,
    used: u64,
}

impl<'a> BudgetedDevice<'a> {
    pub fn new(inner: &'a mut dyn PufDevice, budget: &AttackBudget) -> Self {
        Self { inner, max_reads: budget.max_reads(), used: 0 }
    }

    pub fn reads_used(&self) -> u64 {
        self.used
    }

    pub fn remaining(&self) -> u64 {
        self.max_reads - self.used
    }
}

impl PufDevice for BudgetedDevice<'_> {
    fn family(&self) -> FamilyId {
        self.inner.family()
    }

    fn challenge_len(&self) -> usize {
        self.inner.challenge_len()
    }

    fn raw_secret_len(&self) -> usize {
        self.inner.raw_secret_len()
    }

    fn challenge_space(&self) -> ChallengeSet {
        self.inner.challenge_space()
    }

    fn evaluate(&mut self, challenge: &BitString, rng: &mut Rng) -> Result<BitString, PufError> {
        if self.used >= self.max_reads {
            return Err(PufError::BudgetExhausted(self.max_reads));
        }
        self.used += 1;
        self.inner.evaluate(challenge, rng)
    }
}

/// What an attacker walks away with: a way to predict raw secrets without
/// the device.
pub trait CloneModel {
    fn predict(&self, challenge: &BitString, rng: &mut Rng) -> BitString;
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Prediction {
    pub challenge: BitString,
    pub predicted: BitString,
    pub actual: BitString,
    pub hit: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AttackTranscript {
    pub strategy: String,
    pub reads_used: u64,
    pub predictions: Vec<Prediction>,
    /// Fraction of trials where the full raw secret was predicted.
    pub success_rate: f64,
    /// Fraction of individual raw-secret bits predicted correctly.
    pub bit_accuracy: f64,
}

impl AttackTranscript {
    pub fn hits(&self) -> u64 {
        self.predictions.iter().filter(|p| p.hit).count() as u64
    }

    pub fn n_trials(&self) -> u64 {
        self.predictions.len() as u64
    }

    pub fn ci95(&self) -> Interval {
        wilson_ci95(self.hits(), self.n_trials())
    }

    pub fn report(&self, family: FamilyId, params: serde_json::Value, budget: AttackBudget) -> AttackReport {
        AttackReport {
            family,
            params,
            budget,
            strategy: self.strategy.clone(),
            reads_used: self.reads_used,
            n_trials: self.n_trials(),
            success_rate: self.success_rate,
            bit_accuracy: self.bit_accuracy,
            ci95: self.ci95(),
        }
    }
}

/// JSON form of an attack outcome.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttackReport {
    pub family: FamilyId,
    pub params: serde_json::Value,
    pub budget: AttackBudget,
    pub strategy: String,
    pub reads_used: u64,
    pub n_trials: u64,
    pub success_rate: f64,
    pub bit_accuracy: f64,
    pub ci95: Interval,
}

/// Score a clone model on `n_trials` challenges drawn uniformly from the
/// device's foreseen set.
pub fn score<D, M>(
    strategy: &str,
    model: &M,
    device: &D,
    reads_used: u64,
    n_trials: usize,
    rng: &mut Rng,
) -> Result<AttackTranscript, AttackError>
where
    D: GodMode + Foreseen,
    M: CloneModel + ?Sized,
{
    let foreseen = device.foreseen();
    let mut predictions = Vec::with_capacity(n_trials);
    let (mut bits_right, mut bits_total) = (0usize, 0usize);
    for _ in 0..n_trials {
        let challenge = foreseen.sample(rng);
        let predicted = model.predict(&challenge, rng);
        let actual = device.true_raw_secret(&challenge)?;
        bits_total += actual.len();
        bits_right += actual.len() - predicted.hamming_distance(&actual).unwrap_or(actual.len());
        let hit = predicted == actual;
        predictions.push(Prediction { challenge, predicted, actual, hit });
    }
    let hits = predictions.iter().filter(|p| p.hit).count();
    let ratio = |a: usize, b: usize| if b == 0 { 0.0 } else { a as f64 / b as f64 };
    Ok(AttackTranscript {
        strategy: strategy.to_string(),
        reads_used,
        success_rate: ratio(hits, n_trials),
        bit_accuracy: ratio(bits_right, bits_total),
        predictions,
    })
}
