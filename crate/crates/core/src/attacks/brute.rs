use std::collections::HashMap;

use crate::attacks::{score, AttackBudget, AttackError, AttackTranscript, BudgetedDevice, CloneModel};
use crate::bits::BitString;
use crate::device::{Foreseen, GodMode, PufDevice};
use crate::rng::Rng;

/// Read-out dictionary: stored secrets for read challenges, a uniform guess
/// for everything else.
#[derive(Debug, Clone, Default)]
pub struct DictionaryModel {
    entries: HashMap<BitString, BitString>,
    secret_len: usize,
}

impl DictionaryModel {
    /// Spend the whole budget reading distinct challenges drawn from the
    /// public challenge space.
    pub fn acquire(access: &mut BudgetedDevice<'_>, rng: &mut Rng) -> Self {
        let secret_len = access.raw_secret_len();
        let wanted = usize::try_from(access.remaining()).unwrap_or(usize::MAX);
        let challenges = access.challenge_space().sample_distinct(wanted, rng);
        let mut entries = HashMap::with_capacity(challenges.len());
        for c in challenges {
            // A read the device refuses teaches the attacker nothing.
            if let Ok(s) = access.evaluate(&c, rng) {
                entries.insert(c, s);
            }
        }
        Self { entries, secret_len }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

impl CloneModel for DictionaryModel {
    fn predict(&self, challenge: &BitString, rng: &mut Rng) -> BitString {
        match self.entries.get(challenge) {
            Some(s) => s.clone(),
            None => BitString::random(self.secret_len.max(1), rng).expect("non-empty"),
        }
    }
}

/// Outsider attack: read as many pairs as the budget allows, then predict
/// verification challenges from the dictionary.
pub fn brute_force_attack<D: GodMode + Foreseen>(
    device: &mut D,
    budget: &AttackBudget,
    n_trials: usize,
    rng: &mut Rng,
) -> Result<AttackTranscript, AttackError> {
    let (model, reads_used) = {
        let mut access = BudgetedDevice::new(device as &mut dyn PufDevice, budget);
        let model = DictionaryModel::acquire(&mut access, rng);
        (model, access.reads_used())
    };
    score("brute-force", &model, device, reads_used, n_trials, rng)
}
