//! Simulated PUF families and the parameter file that selects one.

mod arbiter;
mod constant;
mod keyed_hash;
mod quantum;
mod table;
mod toy;

pub(crate) use arbiter::dot;
pub use arbiter::{arbiter_feature, ArbiterPuf};
pub use constant::ConstantCuf;
pub use keyed_hash::{KeyedHashPuf, MAX_KEYED_HASH_OUTPUT};
pub use quantum::{index_bits_for, QuantumEurPuf, Qubit, QubitRegister};
pub use table::TableMrtPuf;
pub use toy::{toy_eval, ToyMajorityPuf, TOY_MORE_ONES, TOY_OTHERWISE};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::bits::BitString;
use crate::device::{ChallengeSet, FamilyId, Foreseen, GodMode, PufDevice, PufError};
use crate::rng::Rng;

/// Each bit of `s` repeated `r` times in place: `ab` with r = 3 is `aaabbb`.
pub fn repeat_bits(s: &BitString, r: usize) -> BitString {
    if r == 1 {
        return s.clone();
    }
    BitString::from_bits(s.iter().flat_map(|b| std::iter::repeat_n(b, r)).collect()).expect("non-empty")
}

/// Family parameter file. Which fields are required depends on `family`:
///
/// | family       | fields                          |
/// |--------------|---------------------------------|
/// | `toy`        | `l`                             |
/// | `table`      | `seed N l l_S [noise_p r]`      |
/// | `arbiter`    | `seed k l_S [noise_p r]`        |
/// | `keyed-hash` | `seed l l_S`                    |
/// | `quantum`    | `seed N l [index_bits]`         |
/// | `constant`   | `seed l l_S`                    |
///
/// `r` is the read-out repetition (odd, default 1).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FamilyParams {
    pub family: FamilyId,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(rename = "N", default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub l: Option<usize>,
    #[serde(rename = "l_S", default, skip_serializing_if = "Option::is_none")]
    pub l_s: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub noise_p: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub index_bits: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r: Option<usize>,
}

impl FamilyParams {
    pub fn new(family: FamilyId) -> Self {
        Self { family, seed: None, n: None, l: None, l_s: None, k: None, noise_p: None, index_bits: None, r: None }
    }

    pub fn from_json(text: &str) -> Result<Self, PufError> {
        serde_json::from_str(text).map_err(|e| PufError::InvalidParams(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("plain struct")
    }

    /// Stable 128-bit identifier derived from the full parameter set.
    pub fn device_id(&self) -> [u8; 16] {
        let canonical = serde_json::to_vec(self).expect("plain struct");
        let digest = Sha256::new().chain_update(b"pufsim/device-id").chain_update(canonical).finalize();
        let mut id = [0u8; 16];
        id.copy_from_slice(&digest[..16]);
        id
    }

    pub fn repetition(&self) -> usize {
        self.r.unwrap_or(1)
    }

    pub fn build(&self) -> Result<AnyPuf, PufError> {
        let need = |v: Option<usize>, name: &str| {
            v.ok_or_else(|| PufError::InvalidParams(format!("family {} requires `{name}`", self.family)))
        };
        let seed =
            || self.seed.ok_or_else(|| PufError::InvalidParams(format!("family {} requires `seed`", self.family)));
        let reject = |present: bool, name: &str| {
            if present {
                Err(PufError::InvalidParams(format!("`{name}` does not apply to family {}", self.family)))
            } else {
                Ok(())
            }
        };
        let noisy = matches!(self.family, FamilyId::Table | FamilyId::Arbiter);
        reject(!noisy && self.noise_p.is_some_and(|p| p != 0.0), "noise_p")?;
        reject(!noisy && self.repetition() != 1, "r")?;
        reject(self.family != FamilyId::Quantum && self.index_bits.is_some(), "index_bits")?;

        let device = match self.family {
            FamilyId::Toy => AnyPuf::Toy(ToyMajorityPuf::new(need(self.l, "l")?)?),
            FamilyId::Table => AnyPuf::Table(
                TableMrtPuf::generate(seed()?, need(self.n, "N")?, need(self.l, "l")?, need(self.l_s, "l_S")?)?
                    .with_noise(self.noise_p.unwrap_or(0.0))?
                    .with_repetition(self.repetition())?,
            ),
            FamilyId::Arbiter => {
                let k = need(self.k, "k")?;
                reject(self.l.is_some_and(|l| l != k), "l (must equal k)")?;
                AnyPuf::Arbiter(
                    ArbiterPuf::generate(seed()?, k, need(self.l_s, "l_S")?)?
                        .with_noise(self.noise_p.unwrap_or(0.0))?
                        .with_repetition(self.repetition())?,
                )
            }
            FamilyId::KeyedHash => {
                AnyPuf::KeyedHash(KeyedHashPuf::generate(seed()?, need(self.l, "l")?, need(self.l_s, "l_S")?)?)
            }
            FamilyId::Quantum => {
                let l = need(self.l, "l")?;
                reject(self.l_s.is_some_and(|s| s != l), "l_S (must equal l)")?;
                AnyPuf::Quantum(QuantumEurPuf::generate(seed()?, need(self.n, "N")?, l, self.index_bits)?)
            }
            FamilyId::Constant => {
                AnyPuf::Constant(ConstantCuf::generate(need(self.l, "l")?, need(self.l_s, "l_S")?, seed()?)?)
            }
        };
        Ok(device)
    }
}

/// Any family behind one type, for parameter-file driven tools.
#[derive(Debug, Clone)]
pub enum AnyPuf {
    Toy(ToyMajorityPuf),
    Table(TableMrtPuf),
    Arbiter(ArbiterPuf),
    KeyedHash(KeyedHashPuf),
    Quantum(QuantumEurPuf),
    Constant(ConstantCuf),
}

macro_rules! each_family {
    ($value:expr, $dev:ident => $body:expr) => {
        match $value {
            AnyPuf::Toy($dev) => $body,
            AnyPuf::Table($dev) => $body,
            AnyPuf::Arbiter($dev) => $body,
            AnyPuf::KeyedHash($dev) => $body,
            AnyPuf::Quantum($dev) => $body,
            AnyPuf::Constant($dev) => $body,
        }
    };
}

impl PufDevice for AnyPuf {
    fn family(&self) -> FamilyId {
        each_family!(self, d => d.family())
    }

    fn challenge_len(&self) -> usize {
        each_family!(self, d => d.challenge_len())
    }

    fn raw_secret_len(&self) -> usize {
        each_family!(self, d => d.raw_secret_len())
    }

    fn challenge_space(&self) -> ChallengeSet {
        each_family!(self, d => d.challenge_space())
    }

    fn evaluate(&mut self, challenge: &BitString, rng: &mut Rng) -> Result<BitString, PufError> {
        each_family!(self, d => d.evaluate(challenge, rng))
    }
}

impl Foreseen for AnyPuf {
    fn foreseen(&self) -> ChallengeSet {
        each_family!(self, d => d.foreseen())
    }
}

impl GodMode for AnyPuf {
    fn true_raw_secret(&self, challenge: &BitString) -> Result<BitString, PufError> {
        each_family!(self, d => d.true_raw_secret(challenge))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::device::{check_definition1, sample_foreseen, DEFAULT_DEFINITION1_SAMPLE};

    fn params(json: &str) -> FamilyParams {
        FamilyParams::from_json(json).unwrap()
    }

    #[test]
    fn repetition_layout() {
        let s: BitString = "10".parse().unwrap();
        assert_eq!(repeat_bits(&s, 3).to_string(), "111000");
        assert_eq!(repeat_bits(&s, 1), s);
    }

    #[test]
    fn unknown_fields_rejected() {
        assert!(FamilyParams::from_json(r#"{"family":"table","seed":1,"colour":3}"#).is_err());
        assert!(FamilyParams::from_json(r#"{"family":"optical"}"#).is_err());
    }

    #[test]
    fn missing_fields_reported() {
        let err = params(r#"{"family":"table","seed":1,"N":4,"l":8}"#).build().unwrap_err();
        assert!(err.to_string().contains("l_S"), "{err}");
        let err = params(r#"{"family":"keyed-hash","seed":1,"l":8,"l_S":8,"noise_p":0.1}"#).build().unwrap_err();
        assert!(err.to_string().contains("noise_p"), "{err}");
    }

    #[test]
    fn json_round_trip_and_stable_id() {
        let p = params(r#"{"family":"table","seed":7,"N":256,"l":16,"l_S":32}"#);
        let again = FamilyParams::from_json(&p.to_json()).unwrap();
        assert_eq!(p, again);
        assert_eq!(p.device_id(), again.device_id());
        let mut other = p.clone();
        other.seed = Some(8);
        assert_ne!(p.device_id(), other.device_id());
    }

    /// Every family with noise disabled satisfies the definition on its
    /// foreseen set; the constant fixture does not.
    #[test]
    fn definition1_across_families() {
        let cases = [
            (r#"{"family":"toy","l":8}"#, true),
            (r#"{"family":"table","seed":1,"N":100,"l":16,"l_S":32}"#, true),
            (r#"{"family":"arbiter","seed":1,"k":32,"l_S":4}"#, true),
            (r#"{"family":"keyed-hash","seed":1,"l":32,"l_S":64}"#, true),
            (r#"{"family":"quantum","seed":1,"N":16,"l":16}"#, true),
            (r#"{"family":"constant","seed":1,"l":16,"l_S":32}"#, false),
        ];
        let mut rng = Rng::new(99);
        for (json, expected) in cases {
            let device = params(json).build().unwrap();
            let sample = sample_foreseen(&device, DEFAULT_DEFINITION1_SAMPLE, &mut rng);
            let verdict = check_definition1(&device, &sample, 3, &mut rng).unwrap();
            assert_eq!(verdict.is_puf, expected, "{json}: {verdict:?}");
            assert!(verdict.deterministic_on_m, "{json}");
        }
    }
}
