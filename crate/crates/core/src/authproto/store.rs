//! Challenge/secret pairs held by the verifier.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::sync::{Arc, Mutex};

use rand::Rng as _;
use subtle::ConstantTimeEq;

use super::AuthError;
use crate::bits::BitString;
use crate::device::{Foreseen, PufDevice};
use crate::extractor::{pf3_respond, ExtractorParams, Nonce};
use crate::rng::Rng;

const MAGIC: &str = "PUFCRP1";

/// Raw read-outs per enrolled challenge; their bitwise majority is what
/// goes through PF₂.
pub const ENROLL_READS: usize = 3;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CrpRecord {
    pub challenge: BitString,
    /// S = PF₂(PF₁(challenge)).
    pub secret: BitString,
    pub used: bool,
    /// Nonce sent with the challenge, until the response is checked.
    pub pending: Option<Nonce>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CrpStore {
    pub device_id: [u8; 16],
    pub challenge_len: usize,
    pub secret_len: usize,
    /// Seconds since the Unix epoch; kept in memory only.
    pub created_at: Option<u64>,
    records: Vec<CrpRecord>,
    index: HashMap<BitString, usize>,
    unused: Vec<usize>,
}

/// A store shared between concurrent verifier sessions.
pub type SharedStore = Arc<Mutex<CrpStore>>;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Accept,
    Reject,
}

impl Verdict {
    pub fn accepted(self) -> bool {
        self == Verdict::Accept
    }
}

impl CrpStore {
    pub fn new(
        device_id: [u8; 16],
        challenge_len: usize,
        secret_len: usize,
        records: Vec<CrpRecord>,
    ) -> Result<Self, AuthError> {
        let mut index = HashMap::with_capacity(records.len());
        for (i, r) in records.iter().enumerate() {
            if r.challenge.len() != challenge_len || r.secret.len() != secret_len {
                return Err(AuthError::Store(format!("record {i} does not match header lengths")));
            }
            if index.insert(r.challenge.clone(), i).is_some() {
                return Err(AuthError::Store(format!("duplicate challenge {}", r.challenge.to_hex())));
            }
        }
        let unused = (0..records.len()).filter(|&i| !records[i].used).collect();
        Ok(Self { device_id, challenge_len, secret_len, created_at: None, records, index, unused })
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn unused(&self) -> usize {
        self.unused.len()
    }

    pub fn records(&self) -> &[CrpRecord] {
        &self.records
    }

    pub fn shared(self) -> SharedStore {
        Arc::new(Mutex::new(self))
    }

    /// Pick an unused record uniformly, mark it used and attach a fresh
    /// nonce.
    pub fn issue_challenge(&mut self, rng: &mut Rng) -> Result<(BitString, Nonce), AuthError> {
        if self.unused.is_empty() {
            return Err(AuthError::StoreExhausted);
        }
        let slot = rng.random_range(0..self.unused.len());
        let i = self.unused.swap_remove(slot);
        let nonce = rng.bytes::<16>();
        let record = &mut self.records[i];
        record.used = true;
        record.pending = Some(nonce);
        Ok((record.challenge.clone(), nonce))
    }

    /// Accept iff `response` is the keyed response of the stored secret to
    /// the nonce issued with `challenge`. The pending nonce is consumed
    /// either way, so each issue admits one check.
    pub fn verifier_check(
        &mut self,
        challenge: &BitString,
        nonce: &Nonce,
        response: &[u8; 32],
    ) -> Result<Verdict, AuthError> {
        let &i = self.index.get(challenge).ok_or_else(|| AuthError::UnknownChallenge(challenge.to_hex()))?;
        let record = &mut self.records[i];
        if !record.used {
            return Err(AuthError::NotIssued(challenge.to_hex()));
        }
        let Some(pending) = record.pending.take() else {
            return Ok(Verdict::Reject);
        };
        let expected = pf3_respond(&record.secret, nonce).to_bytes();
        let nonce_ok = pending.ct_eq(nonce);
        let mac_ok = expected.as_slice().ct_eq(response.as_slice());
        Ok(if bool::from(nonce_ok & mac_ok) { Verdict::Accept } else { Verdict::Reject })
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("{MAGIC} {} {} {}\n", hex::encode(self.device_id), self.challenge_len, self.secret_len);
        for r in &self.records {
            let _ = writeln!(out, "{} {} {}", r.challenge.to_hex(), r.secret.to_hex(), r.used as u8);
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self, AuthError> {
        let bad = |line: usize, what: &str| AuthError::Store(format!("line {line}: {what}"));
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        let (_, header) = lines.next().ok_or_else(|| bad(1, "missing header"))?;
        let fields: Vec<&str> = header.split_whitespace().collect();
        let [magic, id, l, l_s] = fields[..] else {
            return Err(bad(1, "header must be `PUFCRP1 <device_id> <l> <l_S>`"));
        };
        if magic != MAGIC {
            return Err(bad(1, "unknown magic"));
        }
        let device_id: [u8; 16] = hex::decode(id)
            .ok()
            .and_then(|b| b.try_into().ok())
            .ok_or_else(|| bad(1, "device id must be 32 hex digits"))?;
        let l: usize = l.parse().ok().filter(|&v| v > 0).ok_or_else(|| bad(1, "bad l"))?;
        let l_s: usize = l_s.parse().ok().filter(|&v| v > 0).ok_or_else(|| bad(1, "bad l_S"))?;
        let canonical = |s: &str, len: usize, line: usize| {
            let bits = BitString::from_hex(s, len).map_err(|e| bad(line, &e.to_string()))?;
            if bits.to_hex() != s {
                return Err(bad(line, "non-canonical hex"));
            }
            Ok(bits)
        };
        let mut records = Vec::new();
        for (n, line) in lines {
            let parts: Vec<&str> = line.split_whitespace().collect();
            let [c, s, used] = parts[..] else {
                return Err(bad(n + 1, "record must be `<challenge> <S> <0|1>`"));
            };
            let used = match used {
                "0" => false,
                "1" => true,
                _ => return Err(bad(n + 1, "used flag must be 0 or 1")),
            };
            records.push(CrpRecord {
                challenge: canonical(c, l, n + 1)?,
                secret: canonical(s, l_s, n + 1)?,
                used,
                pending: None,
            });
        }
        Self::new(device_id, l, l_s, records)
    }
}

fn bitwise_majority(reads: &[BitString]) -> BitString {
    let len = reads[0].len();
    let bits = (0..len).map(|i| reads.iter().filter(|r| r.bit(i)).count() * 2 > reads.len()).collect();
    BitString::from_bits(bits).expect("len ≥ 1")
}

/// Trusted enrollment through the public read-out interface: `n_pairs`
/// distinct foreseen challenges, each read [`ENROLL_READS`] times.
pub fn enroll<D: PufDevice + Foreseen>(
    device: &mut D,
    extractor: &ExtractorParams,
    device_id: [u8; 16],
    n_pairs: usize,
    rng: &mut Rng,
) -> Result<CrpStore, AuthError> {
    let foreseen = device.foreseen();
    if (n_pairs as u128) > foreseen.size() {
        return Err(AuthError::NotEnoughChallenges { requested: n_pairs, available: foreseen.size() });
    }
    let mut records = Vec::with_capacity(n_pairs);
    for challenge in foreseen.sample_distinct(n_pairs, rng) {
        let reads = (0..ENROLL_READS).map(|_| device.evaluate(&challenge, rng)).collect::<Result<Vec<_>, _>>()?;
        let secret = extractor.derive(&bitwise_majority(&reads))?;
        records.push(CrpRecord { challenge, secret, used: false, pending: None });
    }
    CrpStore::new(device_id, device.challenge_len(), extractor.out_len, records)
}
