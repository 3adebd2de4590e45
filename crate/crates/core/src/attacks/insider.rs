//! Insider attack: the attacker knows everything the manufacturer knows
//! about the device's structure but none of its instance secrets.

use serde::{Deserialize, Serialize};

use crate::attacks::{
    ml_attack_arbiter, score, AttackBudget, AttackError, AttackTranscript, BudgetedDevice, CloneModel, DictionaryModel,
    LinearModel, MlConfig,
};
use crate::bits::BitString;
use crate::device::{FamilyId, Foreseen, GodMode, PufDevice};
use crate::families::{toy_eval, FamilyParams, KeyedHashPuf};
use crate::rng::Rng;

/// Structural knowledge about a device. Built from the parameter file with
/// the seed removed, so it carries no function of the instance seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InsiderKnowledge {
    pub family: FamilyId,
    pub n: Option<usize>,
    pub l: Option<usize>,
    pub l_s: Option<usize>,
    pub k: Option<usize>,
    pub noise_p: f64,
    pub repetition: usize,
    pub weight_distribution: Option<String>,
    /// Misconfiguration fixture: a keyed-hash key that should never have
    /// left the factory.
    pub leaked_key: Option<[u8; 16]>,
}

impl InsiderKnowledge {
    pub fn from_params(params: &FamilyParams) -> Self {
        Self {
            family: params.family,
            n: params.n,
            l: params.l.or(params.k),
            l_s: params.l_s,
            k: params.k,
            noise_p: params.noise_p.unwrap_or(0.0),
            repetition: params.repetition(),
            weight_distribution: (params.family == FamilyId::Arbiter).then(|| "standard normal".to_string()),
            leaked_key: None,
        }
    }

    pub fn with_leaked_key(mut self, key: [u8; 16]) -> Self {
        self.leaked_key = Some(key);
        self
    }
}

/// Clone of the two-valued majority function from one read per class.
#[derive(Debug, Clone, PartialEq)]
pub struct MajorityModel {
    pub more_ones: BitString,
    pub otherwise: BitString,
}

impl MajorityModel {
    /// Reads the all-ones and all-zeros challenges; needs two reads.
    pub fn acquire(access: &mut BudgetedDevice<'_>, rng: &mut Rng) -> Result<Self, AttackError> {
        let len = access.challenge_len();
        let more_ones = access.evaluate(&BitString::ones(len).expect("len ≥ 1"), rng)?;
        let otherwise = access.evaluate(&BitString::zeros(len).expect("len ≥ 1"), rng)?;
        Ok(Self { more_ones, otherwise })
    }
}

impl CloneModel for MajorityModel {
    fn predict(&self, challenge: &BitString, _rng: &mut Rng) -> BitString {
        // The structure is public; only the two output values were unknown.
        if toy_eval(challenge) == toy_eval(&BitString::ones(challenge.len()).expect("len ≥ 1")) {
            self.more_ones.clone()
        } else {
            self.otherwise.clone()
        }
    }
}

struct ExactClone(KeyedHashPuf);

impl CloneModel for ExactClone {
    fn predict(&self, challenge: &BitString, _rng: &mut Rng) -> BitString {
        self.0.true_raw_secret(challenge).expect("challenge length checked by scorer")
    }
}

/// Learn one linear model per arbiter output from reads of random
/// challenges. Label for output `j` is the first of its `r` repeated bits.
fn acquire_linear(
    access: &mut BudgetedDevice<'_>,
    knowledge: &InsiderKnowledge,
    rng: &mut Rng,
) -> Result<LinearModel, AttackError> {
    let k = access.challenge_len();
    let r = knowledge.repetition.max(1);
    let outputs = access.raw_secret_len() / r;
    let reads = usize::try_from(access.remaining()).unwrap_or(usize::MAX);
    if reads < k + 1 {
        return Err(AttackError::InsufficientData { have: reads, need: k + 1 });
    }
    let mut crps = Vec::with_capacity(reads);
    for c in access.challenge_space().sample_distinct(reads, rng) {
        let s = access.evaluate(&c, rng)?;
        crps.push((c, s));
    }
    let weights = (0..outputs)
        .map(|j| {
            let pairs: Vec<_> = crps.iter().map(|(c, s)| (c.clone(), s.bit(j * r))).collect();
            ml_attack_arbiter(&pairs, &[], k, &MlConfig::default(), rng).map(|o| o.weights)
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(LinearModel { weights, repetition: r })
}

/// Insider attack: pick the best strategy the structural knowledge allows.
///
/// * keyed-hash with a leaked key: exact software clone, no reads needed;
/// * arbiter: logistic-regression modeling attack on the parity features;
/// * toy majority: two reads, one per output class;
/// * anything else, or too small a budget for the above: brute force.
pub fn insider_attack<D: GodMode + Foreseen>(
    device: &mut D,
    knowledge: &InsiderKnowledge,
    budget: &AttackBudget,
    n_trials: usize,
    rng: &mut Rng,
) -> Result<AttackTranscript, AttackError> {
    if device.family() != knowledge.family {
        return Err(AttackError::Unsupported(format!(
            "knowledge about a {} device, got {}",
            knowledge.family,
            device.family()
        )));
    }

    if let (FamilyId::KeyedHash, Some(key)) = (knowledge.family, knowledge.leaked_key) {
        let clone = KeyedHashPuf::new(key, device.challenge_len(), device.raw_secret_len())?;
        return score("leaked-key-clone", &ExactClone(clone), device, 0, n_trials, rng);
    }

    let mut access = BudgetedDevice::new(device as &mut dyn PufDevice, budget);
    let structured: Option<(&str, Box<dyn CloneModel>)> = match knowledge.family {
        FamilyId::Arbiter => match acquire_linear(&mut access, knowledge, rng) {
            Ok(model) => Some(("modeling", Box::new(model))),
            Err(AttackError::InsufficientData { .. }) => None,
            Err(e) => return Err(e),
        },
        FamilyId::Toy if access.remaining() >= 2 => {
            Some(("majority-clone", Box::new(MajorityModel::acquire(&mut access, rng)?)))
        }
        _ => None,
    };
    let (strategy, model): (&str, Box<dyn CloneModel>) = match structured {
        Some(found) => found,
        None => ("brute-force", Box::new(DictionaryModel::acquire(&mut access, rng))),
    };
    let reads_used = access.reads_used();
    score(strategy, model.as_ref(), device, reads_used, n_trials, rng)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn knowledge_excludes_seed() {
        let a = FamilyParams::from_json(r#"{"family":"table","seed":1,"N":10,"l":8,"l_S":8}"#).unwrap();
        let mut b = a.clone();
        b.seed = Some(2);
        assert_eq!(InsiderKnowledge::from_params(&a), InsiderKnowledge::from_params(&b));
    }

    #[test]
    fn toy_cloned_with_two_reads() {
        let params = FamilyParams::from_json(r#"{"family":"toy","l":8}"#).unwrap();
        let mut device = params.build().unwrap();
        let knowledge = InsiderKnowledge::from_params(&params);
        let tr = insider_attack(&mut device, &knowledge, &AttackBudget::reads(2), 1000, &mut Rng::new(0)).unwrap();
        assert_eq!(tr.strategy, "majority-clone");
        assert_eq!(tr.reads_used, 2);
        assert_eq!(tr.success_rate, 1.0);
    }

    #[test]
    fn family_mismatch_rejected() {
        let params = FamilyParams::from_json(r#"{"family":"toy","l":8}"#).unwrap();
        let mut device = params.build().unwrap();
        let mut knowledge = InsiderKnowledge::from_params(&params);
        knowledge.family = FamilyId::Table;
        assert!(insider_attack(&mut device, &knowledge, &AttackBudget::reads(2), 10, &mut Rng::new(0)).is_err());
    }
}
