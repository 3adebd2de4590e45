//! Modeling attack on arbiter PUFs: logistic regression on parity features.

use rand::seq::SliceRandom;

use crate::attacks::{AttackError, CloneModel};
use crate::bits::BitString;
use crate::device::PufDevice;
use crate::families::{arbiter_feature, dot, repeat_bits, ArbiterPuf};
use crate::rng::Rng;

#[derive(Debug, Clone, PartialEq)]
pub struct MlConfig {
    pub learning_rate: f64,
    pub max_epochs: usize,
    /// Training stops once training accuracy reaches this value.
    pub target_accuracy: f64,
    /// Initial weights; zeros when absent.
    pub init: Option<Vec<f64>>,
}

impl Default for MlConfig {
    fn default() -> Self {
        Self { learning_rate: 0.05, max_epochs: 200, target_accuracy: 0.99, init: None }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MlOutcome {
    pub weights: Vec<f64>,
    pub epochs: usize,
    pub train_accuracy: f64,
    pub held_out_accuracy: f64,
}

fn sigmoid(z: f64) -> f64 {
    1.0 / (1.0 + (-z).exp())
}

fn accuracy(weights: &[f64], features: &[Vec<f64>], labels: &[bool]) -> f64 {
    if features.is_empty() {
        return 0.0;
    }
    let right = features.iter().zip(labels).filter(|(x, &y)| (dot(weights, x) > 0.0) == y).count();
    right as f64 / features.len() as f64
}

fn featurize(pairs: &[(BitString, bool)], k: usize) -> Result<(Vec<Vec<f64>>, Vec<bool>), AttackError> {
    pairs
        .iter()
        .map(|(c, y)| {
            if c.len() != k {
                return Err(AttackError::FeatureLength { expected: k, actual: c.len() });
            }
            Ok((arbiter_feature(c), *y))
        })
        .collect::<Result<Vec<_>, _>>()
        .map(|v| v.into_iter().unzip())
}

/// Fit a linear threshold model `sign(w · Φ(c))` by stochastic gradient
/// descent on the logistic loss, one shuffled pass per epoch. Training
/// stops early once training accuracy reaches the target; the returned
/// accuracy is measured on `held_out`.
pub fn ml_attack_arbiter(
    training: &[(BitString, bool)],
    held_out: &[(BitString, bool)],
    k: usize,
    config: &MlConfig,
    rng: &mut Rng,
) -> Result<MlOutcome, AttackError> {
    if training.len() < k + 1 {
        return Err(AttackError::InsufficientData { have: training.len(), need: k + 1 });
    }
    let (xs, ys) = featurize(training, k)?;
    let mut w = match &config.init {
        Some(init) if init.len() == k + 1 => init.clone(),
        Some(init) => return Err(AttackError::FeatureLength { expected: k + 1, actual: init.len() }),
        None => vec![0.0; k + 1],
    };

    let mut order: Vec<usize> = (0..xs.len()).collect();
    let mut epochs = 0;
    let mut train_accuracy = accuracy(&w, &xs, &ys);
    while train_accuracy < config.target_accuracy && epochs < config.max_epochs {
        order.shuffle(rng);
        for &i in &order {
            let x = &xs[i];
            let err = sigmoid(dot(&w, x)) - if ys[i] { 1.0 } else { 0.0 };
            let step = config.learning_rate * err;
            w.iter_mut().zip(x).for_each(|(wj, xj)| *wj -= step * xj);
        }
        epochs += 1;
        train_accuracy = accuracy(&w, &xs, &ys);
    }

    let (hx, hy) = featurize(held_out, k)?;
    Ok(MlOutcome { held_out_accuracy: accuracy(&w, &hx, &hy), weights: w, epochs, train_accuracy })
}

/// Collect `n_train + n_test` CRPs from output bit 0 of a noiseless
/// single-output arbiter and run the attack.
pub fn arbiter_ml_experiment(
    device: &mut ArbiterPuf,
    n_train: usize,
    n_test: usize,
    config: &MlConfig,
    rng: &mut Rng,
) -> Result<MlOutcome, AttackError> {
    let k = device.stages();
    let mut collect = |n: usize, rng: &mut Rng| -> Result<Vec<(BitString, bool)>, AttackError> {
        (0..n)
            .map(|_| {
                let c = BitString::random(k, rng).expect("k ≥ 1");
                let bit = device.evaluate(&c, rng)?.bit(0);
                Ok((c, bit))
            })
            .collect()
    };
    let training = collect(n_train, rng)?;
    let held_out = collect(n_test, rng)?;
    ml_attack_arbiter(&training, &held_out, k, config, rng)
}

/// Learned arbiter clone: one weight vector per output bit.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearModel {
    pub weights: Vec<Vec<f64>>,
    pub repetition: usize,
}

impl CloneModel for LinearModel {
    fn predict(&self, challenge: &BitString, _rng: &mut Rng) -> BitString {
        let phi = arbiter_feature(challenge);
        let bits = self.weights.iter().map(|w| dot(w, &phi) > 0.0).collect();
        repeat_bits(&BitString::from_bits(bits).expect("≥ 1 output"), self.repetition)
    }
}
