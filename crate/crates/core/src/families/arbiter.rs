//! Arbiter PUF under the additive delay model.
//!
//! A challenge `c` of `k` bits selects straight or crossed paths through `k`
//! switch stages. The final delay difference is linear in the parity
//! features `Φ_i = Π_{j=i}^{k-1} (1 − 2·c_j)` for `i < k` and `Φ_k = 1`, so
//! each output bit is the sign of `w · Φ(c)`. Ties map to 0.
//!
//! Multi-bit secrets use independent weight vectors, one per output bit.

use rand::Rng as _;
use rand_distr::StandardNormal;

use crate::bits::BitString;
use crate::device::{apply_noise, check_challenge_len, ChallengeSet, FamilyId, Foreseen, GodMode, PufDevice, PufError};
use crate::families::repeat_bits;
use crate::rng::Rng;

/// Parity feature vector of length `k + 1` with entries in {−1, +1}.
pub fn arbiter_feature(c: &BitString) -> Vec<f64> {
    let k = c.len();
    let mut phi = vec![1.0; k + 1];
    for i in (0..k).rev() {
        let sign = if c.bit(i) { -1.0 } else { 1.0 };
        phi[i] = phi[i + 1] * sign;
    }
    phi
}

pub(crate) fn dot(w: &[f64], x: &[f64]) -> f64 {
    w.iter().zip(x).map(|(a, b)| a * b).sum()
}

#[derive(Debug, Clone)]
pub struct ArbiterPuf {
    stages: usize,
    weights: Vec<Vec<f64>>,
    repetition: usize,
    noise_p: f64,
}

impl ArbiterPuf {
    /// `output_bits` parallel arbiters with `stages + 1` standard normal
    /// weights each, drawn from the device seed.
    pub fn generate(seed: u64, stages: usize, output_bits: usize) -> Result<Self, PufError> {
        if stages == 0 || output_bits == 0 {
            return Err(PufError::InvalidParams("arbiter needs k, l_S ≥ 1".into()));
        }
        let mut rng = Rng::new(seed).fork("arbiter");
        let weights =
            (0..output_bits).map(|_| (0..=stages).map(|_| rng.sample::<f64, _>(StandardNormal)).collect()).collect();
        Self::from_weights(weights)
    }

    /// Explicit weights; every vector must have the same length `k + 1 ≥ 2`.
    pub fn from_weights(weights: Vec<Vec<f64>>) -> Result<Self, PufError> {
        let width = weights.first().map(Vec::len).unwrap_or(0);
        if width < 2 || weights.iter().any(|w| w.len() != width) {
            return Err(PufError::InvalidParams("weight vectors must share a length ≥ 2".into()));
        }
        Ok(Self { stages: width - 1, weights, repetition: 1, noise_p: 0.0 })
    }

    /// Comparator flip probability per raw output bit and evaluation.
    pub fn with_noise(mut self, p: f64) -> Result<Self, PufError> {
        if !(0.0..=0.5).contains(&p) {
            return Err(PufError::InvalidParams(format!("noise_p {p} outside [0, 0.5]")));
        }
        self.noise_p = p;
        Ok(self)
    }

    /// Sample each arbiter `r` times per evaluation.
    pub fn with_repetition(mut self, r: usize) -> Result<Self, PufError> {
        if r == 0 || r.is_multiple_of(2) {
            return Err(PufError::InvalidParams(format!("repetition {r} must be odd")));
        }
        self.repetition = r;
        Ok(self)
    }

    pub fn stages(&self) -> usize {
        self.stages
    }

    pub fn output_bits(&self) -> usize {
        self.weights.len()
    }

    pub fn repetition(&self) -> usize {
        self.repetition
    }

    pub fn noise_p(&self) -> f64 {
        self.noise_p
    }

    /// Hidden delay weights (god-mode).
    pub fn weights(&self) -> &[Vec<f64>] {
        &self.weights
    }

    fn noiseless(&self, c: &BitString) -> Result<BitString, PufError> {
        check_challenge_len(self.stages, c)?;
        let phi = arbiter_feature(c);
        let bits = self.weights.iter().map(|w| dot(w, &phi) > 0.0).collect();
        Ok(BitString::from_bits(bits)?)
    }
}

impl PufDevice for ArbiterPuf {
    fn family(&self) -> FamilyId {
        FamilyId::Arbiter
    }

    fn challenge_len(&self) -> usize {
        self.stages
    }

    fn raw_secret_len(&self) -> usize {
        self.weights.len() * self.repetition
    }

    fn challenge_space(&self) -> ChallengeSet {
        ChallengeSet::All { len: self.stages }
    }

    fn evaluate(&mut self, challenge: &BitString, rng: &mut Rng) -> Result<BitString, PufError> {
        let mut raw = repeat_bits(&self.noiseless(challenge)?, self.repetition);
        apply_noise(&mut raw, self.noise_p, rng);
        Ok(raw)
    }
}

impl Foreseen for ArbiterPuf {
    fn foreseen(&self) -> ChallengeSet {
        self.challenge_space()
    }
}

impl GodMode for ArbiterPuf {
    fn true_raw_secret(&self, challenge: &BitString) -> Result<BitString, PufError> {
        Ok(repeat_bits(&self.noiseless(challenge)?, self.repetition))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bs(s: &str) -> BitString {
        s.parse().unwrap()
    }

    #[test]
    fn feature_examples() {
        assert_eq!(arbiter_feature(&bs("0000")), vec![1.0; 5]);
        assert_eq!(arbiter_feature(&bs("10")), vec![-1.0, 1.0, 1.0]);
    }

    #[test]
    fn flipping_last_bit_negates_all_but_constant() {
        for k in 1..=8 {
            for v in 0..(1u64 << k) {
                let c = BitString::from_u64(v, k).unwrap();
                let mut flipped = c.clone();
                flipped.flip(k - 1);
                let (a, b) = (arbiter_feature(&c), arbiter_feature(&flipped));
                for i in 0..k {
                    assert_eq!(a[i], -b[i]);
                }
                assert_eq!(a[k], 1.0);
                assert_eq!(b[k], 1.0);
            }
        }
    }

    #[test]
    fn fixed_weights_hand_example() {
        let mut w = vec![0.0; 5];
        w[0] = 1.0;
        w[4] = -0.5;
        let mut puf = ArbiterPuf::from_weights(vec![w]).unwrap();
        assert_eq!(puf.evaluate(&bs("0000"), &mut Rng::new(0)).unwrap(), bs("1"));
    }

    #[test]
    fn tie_maps_to_zero() {
        let mut puf = ArbiterPuf::from_weights(vec![vec![0.0; 3]]).unwrap();
        assert_eq!(puf.evaluate(&bs("01"), &mut Rng::new(0)).unwrap(), bs("0"));
    }

    #[test]
    fn noiseless_is_deterministic() {
        let mut puf = ArbiterPuf::generate(3, 32, 4).unwrap();
        let mut rng = Rng::new(1);
        let c = BitString::random(32, &mut rng).unwrap();
        assert_eq!(puf.evaluate(&c, &mut rng).unwrap(), puf.evaluate(&c, &mut rng).unwrap());
    }

    #[test]
    fn seeded_weights_reproduce() {
        assert_eq!(
            ArbiterPuf::generate(3, 16, 2).unwrap().weights(),
            ArbiterPuf::generate(3, 16, 2).unwrap().weights()
        );
    }

    #[test]
    fn response_is_balanced() {
        let mut puf = ArbiterPuf::generate(3, 64, 1).unwrap();
        let mut rng = Rng::new(42);
        let n = 10_000;
        let ones: usize = (0..n)
            .map(|_| {
                let c = BitString::random(64, &mut rng).unwrap();
                puf.evaluate(&c, &mut rng).unwrap().count_ones()
            })
            .sum();
        let mean = ones as f64 / n as f64;
        assert!((mean - 0.5).abs() < 0.05, "mean {mean}");
    }
}
