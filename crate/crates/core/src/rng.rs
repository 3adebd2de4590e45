//! Deterministic, splittable random streams.
//!
//! Every stochastic operation in the crate takes an explicit [`Rng`]. A stream
//! is ChaCha12 keyed with `SHA-256("pufsim/rng/seed" ∥ seed_le)`; forking
//! derives the child seed from `SHA-256("pufsim/rng/fork" ∥ parent_seed_le ∥
//! label)`. Both constructions are platform independent, so the same seed
//! gives the same bits everywhere.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha12Rng;
use sha2::{Digest, Sha256};

#[derive(Debug, Clone)]
pub struct Rng {
    seed: u64,
    inner: ChaCha12Rng,
}

impl Rng {
    pub fn new(seed: u64) -> Self {
        let key: [u8; 32] =
            Sha256::new().chain_update(b"pufsim/rng/seed").chain_update(seed.to_le_bytes()).finalize().into();
        Self { seed, inner: ChaCha12Rng::from_seed(key) }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Child stream determined only by this stream's seed and `label`; the
    /// parent's position is irrelevant and is not advanced.
    pub fn fork(&self, label: impl AsRef<[u8]>) -> Rng {
        let digest = Sha256::new()
            .chain_update(b"pufsim/rng/fork")
            .chain_update(self.seed.to_le_bytes())
            .chain_update(label.as_ref())
            .finalize();
        let mut child = [0u8; 8];
        child.copy_from_slice(&digest[..8]);
        Rng::new(u64::from_le_bytes(child))
    }

    /// Fork with an integer label, for per-chunk or per-worker streams.
    pub fn fork_index(&self, label: &str, index: u64) -> Rng {
        let mut bytes = label.as_bytes().to_vec();
        bytes.push(0);
        bytes.extend_from_slice(&index.to_le_bytes());
        self.fork(bytes)
    }

    pub fn bytes<const N: usize>(&mut self) -> [u8; N] {
        let mut out = [0u8; N];
        self.inner.fill_bytes(&mut out);
        out
    }
}

impl RngCore for Rng {
    fn next_u32(&mut self) -> u32 {
        self.inner.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.inner.fill_bytes(dst)
    }
}
