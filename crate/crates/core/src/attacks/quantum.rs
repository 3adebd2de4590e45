//! Challenge guessing against erasure-upon-read-out devices, and the
//! Monte-Carlo harnesses built on it.
//!
//! Harnesses split trials into fixed-size chunks, each with its own forked
//! stream, so the totals do not depend on how many worker threads run.

use rayon::prelude::*;

use crate::attacks::AttackError;
use crate::bits::BitString;
use crate::device::PufDevice;
use crate::families::QuantumEurPuf;
use crate::rng::Rng;

const CHUNK: u64 = 4096;

fn single_register(device: &QuantumEurPuf) -> Result<(), AttackError> {
    if device.register_count() != 1 {
        return Err(AttackError::Unsupported("a quantum device with exactly one register".into()));
    }
    Ok(())
}

fn hits(out: &BitString, truth: &BitString) -> Vec<bool> {
    out.iter().zip(truth.iter()).map(|(a, b)| a == b).collect()
}

/// Guess the measurement bases uniformly, read once, and take the output as
/// the predicted raw secret. Returns per-bit hits against the prepared
/// secret.
pub fn guess_challenge_attack(device: &mut QuantumEurPuf, rng: &mut Rng) -> Result<Vec<bool>, AttackError> {
    single_register(device)?;
    let output = {
        let access: &mut dyn PufDevice = device;
        let guess = access.challenge_space().sample(rng);
        access.evaluate(&guess, rng)?
    };
    Ok(hits(&output, device.register(0).prepared_values()))
}

/// As [`guess_challenge_attack`] with a fixed basis guess `bases`.
pub fn guess_challenge_attack_with(
    device: &mut QuantumEurPuf,
    bases: &BitString,
    rng: &mut Rng,
) -> Result<Vec<bool>, AttackError> {
    single_register(device)?;
    let challenge = device.challenge(0, bases);
    let output = device.evaluate(&challenge, rng)?;
    Ok(hits(&output, device.register(0).prepared_values()))
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct GuessStats {
    pub trials: u64,
    pub qubits: usize,
    pub bit_hits: u64,
    pub full_hits: u64,
}

impl GuessStats {
    pub fn per_bit_rate(&self) -> f64 {
        self.bit_hits as f64 / (self.trials * self.qubits as u64) as f64
    }

    pub fn full_rate(&self) -> f64 {
        self.full_hits as f64 / self.trials as f64
    }
}

fn chunked<F>(trials: u64, rng: &Rng, label: &str, run: F) -> (u64, u64, u64)
where
    F: Fn(&mut Rng) -> Result<Vec<bool>, AttackError> + Sync,
{
    let chunks = trials.div_ceil(CHUNK);
    (0..chunks)
        .into_par_iter()
        .map(|idx| {
            let mut r = rng.fork_index(label, idx);
            let n = CHUNK.min(trials - idx * CHUNK);
            let (mut bits, mut full) = (0u64, 0u64);
            for _ in 0..n {
                let h = run(&mut r).expect("fresh single-register device");
                bits += h.iter().filter(|&&x| x).count() as u64;
                full += h.iter().all(|&x| x) as u64;
            }
            (n, bits, full)
        })
        .reduce(|| (0, 0, 0), |a, b| (a.0 + b.0, a.1 + b.1, a.2 + b.2))
}

/// Run [`guess_challenge_attack`] on `trials` freshly prepared
/// single-register devices of `qubits` qubits.
pub fn quantum_guess_experiment(qubits: usize, trials: u64, rng: &Rng) -> GuessStats {
    let (n, bit_hits, full_hits) = chunked(trials, rng, "quantum-guess", |r| {
        let mut device = QuantumEurPuf::generate_with(r, 1, qubits, None)?;
        guess_challenge_attack(&mut device, r)
    });
    GuessStats { trials: n, qubits, bit_hits, full_hits }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ErasureStats {
    pub trials: u64,
    pub qubits: usize,
    /// Bits recovered by the honest read after the wrong-basis read.
    pub bit_hits: u64,
    pub full_hits: u64,
}

impl ErasureStats {
    pub fn per_bit_rate(&self) -> f64 {
        self.bit_hits as f64 / (self.trials * self.qubits as u64) as f64
    }

    pub fn full_rate(&self) -> f64 {
        self.full_hits as f64 / self.trials as f64
    }
}

/// Read every qubit of a fresh register in the wrong basis, then read it
/// with the foreseen challenge and count recovered raw-secret bits.
pub fn erasure_experiment(qubits: usize, trials: u64, rng: &Rng) -> ErasureStats {
    let (n, bit_hits, full_hits) = chunked(trials, rng, "erasure", |r| {
        let mut device = QuantumEurPuf::generate_with(r, 1, qubits, None)?;
        let wrong =
            BitString::from_bits(device.register(0).prepared_bases().iter().map(|b| !b).collect()).expect("qubits ≥ 1");
        device.evaluate(&device.challenge(0, &wrong), r)?;
        let honest = device.evaluate(&device.foreseen_challenge(0), r)?;
        Ok(hits(&honest, device.register(0).prepared_values()))
    });
    ErasureStats { trials: n, qubits, bit_hits, full_hits }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn correct_guess_hits_everything() {
        let mut rng = Rng::new(1);
        let mut device = QuantumEurPuf::generate(4, 1, 16, None).unwrap();
        let bases = device.register(0).prepared_bases().clone();
        let h = guess_challenge_attack_with(&mut device, &bases, &mut rng).unwrap();
        assert!(h.iter().all(|&x| x));
    }

    #[test]
    fn multi_register_rejected() {
        let mut device = QuantumEurPuf::generate(4, 2, 4, None).unwrap();
        assert!(guess_challenge_attack(&mut device, &mut Rng::new(0)).is_err());
    }

    #[test]
    fn results_independent_of_thread_count() {
        let rng = Rng::new(77);
        let a = quantum_guess_experiment(3, 10_000, &rng);
        let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let b = pool.install(|| quantum_guess_experiment(3, 10_000, &rng));
        assert_eq!(a, b);
        assert_eq!(a.trials, 10_000);
    }
}
