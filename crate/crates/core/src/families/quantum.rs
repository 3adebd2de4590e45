//! Erasure-upon-read-out device built from conjugate-basis qubits.
//!
//! Each qubit is prepared in basis 0 or 1 holding one raw-secret bit.
//! Measuring in the prepared basis returns the stored bit and leaves the
//! qubit unchanged. Measuring in the other basis returns a fresh uniform bit
//! and collapses the qubit into `(measured basis, returned bit)`, so later
//! reads in that basis repeat the random bit and the original value is gone.
//! Reading again in the original basis after such a collapse is a
//! wrong-basis read of the collapsed state, hence uniform again.

use rand::Rng as _;

use crate::bits::BitString;
use crate::device::{check_challenge_len, ChallengeSet, FamilyId, Foreseen, GodMode, PufDevice, PufError};
use crate::rng::Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Qubit {
    pub basis: bool,
    pub value: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QubitRegister {
    cells: Vec<Qubit>,
    prepared_bases: BitString,
    prepared_values: BitString,
    measured: Vec<bool>,
}

impl QubitRegister {
    /// Cell `i` holds `(bases_i, raw_i)`.
    pub fn prepare(raw: &BitString, bases: &BitString) -> Result<Self, PufError> {
        if raw.len() != bases.len() {
            return Err(PufError::LengthMismatch(raw.len(), bases.len()));
        }
        let cells = bases.iter().zip(raw.iter()).map(|(basis, value)| Qubit { basis, value }).collect();
        Ok(Self {
            cells,
            prepared_bases: bases.clone(),
            prepared_values: raw.clone(),
            measured: vec![false; raw.len()],
        })
    }

    #[allow(clippy::len_without_is_empty)]
    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn cells(&self) -> &[Qubit] {
        &self.cells
    }

    pub fn prepared_bases(&self) -> &BitString {
        &self.prepared_bases
    }

    /// The raw secret written at preparation time.
    pub fn prepared_values(&self) -> &BitString {
        &self.prepared_values
    }

    pub fn measured(&self) -> &[bool] {
        &self.measured
    }

    /// Measure every cell in the bases given by `bases`, collapsing cells
    /// read in the wrong basis.
    pub fn measure(&mut self, bases: &BitString, rng: &mut Rng) -> Result<BitString, PufError> {
        if bases.len() != self.cells.len() {
            return Err(PufError::LengthMismatch(bases.len(), self.cells.len()));
        }
        let out = self
            .cells
            .iter_mut()
            .zip(bases.iter())
            .map(|(cell, basis)| {
                if cell.basis != basis {
                    *cell = Qubit { basis, value: rng.random::<bool>() };
                }
                cell.value
            })
            .collect();
        self.measured.iter_mut().for_each(|m| *m = true);
        Ok(BitString::from_bits(out)?)
    }
}

#[derive(Debug, Clone)]
pub struct QuantumEurPuf {
    registers: Vec<QubitRegister>,
    index_bits: usize,
    qubits: usize,
}

/// ⌈log₂ n⌉, the index width needed to address `n` registers.
pub fn index_bits_for(n: usize) -> usize {
    if n <= 1 {
        0
    } else {
        (usize::BITS - (n - 1).leading_zeros()) as usize
    }
}

impl QuantumEurPuf {
    /// `n` registers of `qubits` qubits with uniform raw secrets and bases.
    /// `index_bits` defaults to ⌈log₂ n⌉.
    pub fn generate(seed: u64, n: usize, qubits: usize, index_bits: Option<usize>) -> Result<Self, PufError> {
        let mut rng = Rng::new(seed).fork("quantum");
        Self::generate_with(&mut rng, n, qubits, index_bits)
    }

    /// Like [`QuantumEurPuf::generate`] but drawing from a caller stream;
    /// used by Monte-Carlo loops that create many fresh devices.
    pub fn generate_with(rng: &mut Rng, n: usize, qubits: usize, index_bits: Option<usize>) -> Result<Self, PufError> {
        if n == 0 || qubits == 0 {
            return Err(PufError::InvalidParams("quantum device needs N, l ≥ 1".into()));
        }
        let registers = (0..n)
            .map(|_| {
                let raw = BitString::random(qubits, rng)?;
                let bases = BitString::random(qubits, rng)?;
                QubitRegister::prepare(&raw, &bases)
            })
            .collect::<Result<Vec<_>, _>>()?;
        Self::from_registers(registers, index_bits)
    }

    pub fn from_registers(registers: Vec<QubitRegister>, index_bits: Option<usize>) -> Result<Self, PufError> {
        let qubits = registers.first().map(QubitRegister::len).unwrap_or(0);
        if qubits == 0 || registers.iter().any(|r| r.len() != qubits) {
            return Err(PufError::InvalidParams("registers must share a length ≥ 1".into()));
        }
        let needed = index_bits_for(registers.len());
        let index_bits = index_bits.unwrap_or(needed);
        if index_bits < needed || index_bits > 63 {
            return Err(PufError::InvalidParams(format!(
                "{index_bits} index bits cannot address {} registers",
                registers.len()
            )));
        }
        Ok(Self { registers, index_bits, qubits })
    }

    pub fn index_bits(&self) -> usize {
        self.index_bits
    }

    pub fn qubits(&self) -> usize {
        self.qubits
    }

    pub fn register_count(&self) -> usize {
        self.registers.len()
    }

    /// Hidden register state (god-mode).
    pub fn register(&self, i: usize) -> &QubitRegister {
        &self.registers[i]
    }

    /// The foreseen challenge for register `i`: `i ∥ prepared bases`.
    pub fn foreseen_challenge(&self, i: usize) -> BitString {
        let bases = self.registers[i].prepared_bases().clone();
        if self.index_bits == 0 {
            return bases;
        }
        BitString::from_u64(i as u64, self.index_bits).expect("index bits").concat(&bases)
    }

    /// Build a challenge addressing register `i` with measurement bases `m`.
    pub fn challenge(&self, i: usize, m: &BitString) -> BitString {
        if self.index_bits == 0 {
            return m.clone();
        }
        BitString::from_u64(i as u64, self.index_bits).expect("index bits").concat(m)
    }

    fn split(&self, c: &BitString) -> Result<(usize, BitString), PufError> {
        check_challenge_len(self.index_bits + self.qubits, c)?;
        let index = match c.slice(0, self.index_bits) {
            Some(bits) => bits.to_u64(),
            None => 0,
        };
        if index >= self.registers.len() as u64 {
            return Err(PufError::IndexOutOfRange { index, count: self.registers.len() });
        }
        let bases = c.slice(self.index_bits, c.len()).expect("qubits ≥ 1");
        Ok((index as usize, bases))
    }
}

impl PufDevice for QuantumEurPuf {
    fn family(&self) -> FamilyId {
        FamilyId::Quantum
    }

    fn challenge_len(&self) -> usize {
        self.index_bits + self.qubits
    }

    fn raw_secret_len(&self) -> usize {
        self.qubits
    }

    fn challenge_space(&self) -> ChallengeSet {
        ChallengeSet::Indexed { count: self.registers.len(), index_bits: self.index_bits, base_bits: self.qubits }
    }

    fn evaluate(&mut self, challenge: &BitString, rng: &mut Rng) -> Result<BitString, PufError> {
        let (i, bases) = self.split(challenge)?;
        self.registers[i].measure(&bases, rng)
    }
}

impl Foreseen for QuantumEurPuf {
    fn foreseen(&self) -> ChallengeSet {
        ChallengeSet::Explicit((0..self.registers.len()).map(|i| self.foreseen_challenge(i)).collect())
    }
}

impl GodMode for QuantumEurPuf {
    /// The prepared raw secret, available only for foreseen challenges.
    fn true_raw_secret(&self, challenge: &BitString) -> Result<BitString, PufError> {
        let (i, bases) = self.split(challenge)?;
        if &bases != self.registers[i].prepared_bases() {
            return Err(PufError::ChallengeNotForeseen(challenge.clone()));
        }
        Ok(self.registers[i].prepared_values().clone())
    }
}
