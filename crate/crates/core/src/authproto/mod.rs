//! Remote authentication from enrolled challenge/secret pairs.
//!
//! A trusted party enrolls pairs (C, S) with S = PF₂(PF₁(C)) and gives them
//! to the verifier. To authenticate, the verifier sends an unused challenge
//! with a fresh nonce, the prover answers with PF₃(S, nonce), and the
//! verifier compares against its stored S. Each challenge is issued once.

mod store;
mod wire;

pub use store::{enroll, CrpRecord, CrpStore, SharedStore, Verdict, ENROLL_READS};
pub use wire::{
    configure_tcp, pipe, read_message, tcp_connect, write_message, Message, PipeEnd, WireError, DEFAULT_TIMEOUT,
    MAX_PAYLOAD,
};

use std::io::{Read, Write};

use thiserror::Error;

use crate::bits::BitString;
use crate::device::{PufDevice, PufError};
use crate::extractor::{pf3_respond, ExtractorError, ExtractorParams, Nonce};
use crate::rng::Rng;

#[derive(Debug, Error)]
pub enum AuthError {
    #[error("asked for {requested} pairs, only {available} foreseen challenges")]
    NotEnoughChallenges { requested: usize, available: u128 },
    #[error("no unused challenge left in the store")]
    StoreExhausted,
    #[error("challenge {0} is not in the store")]
    UnknownChallenge(String),
    #[error("challenge {0} was never issued")]
    NotIssued(String),
    #[error("CRP store: {0}")]
    Store(String),
    #[error("peer reported: {0}")]
    Remote(String),
    #[error("unexpected {0} frame")]
    Unexpected(&'static str),
    #[error(transparent)]
    Wire(#[from] WireError),
    #[error(transparent)]
    Device(#[from] PufError),
    #[error(transparent)]
    Extractor(#[from] ExtractorError),
}

/// R = PF₃(PF₂(PF₁(challenge)), nonce).
pub fn prover_respond(
    device: &mut dyn PufDevice,
    extractor: &ExtractorParams,
    challenge: &BitString,
    nonce: &Nonce,
    rng: &mut Rng,
) -> Result<[u8; 32], AuthError> {
    let secret = extractor.derive(&device.evaluate(challenge, rng)?)?;
    Ok(pf3_respond(&secret, nonce).to_bytes().try_into().expect("256-bit response"))
}

/// What the verifier saw in one session.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SessionOutcome {
    pub challenge: BitString,
    pub verdict: Verdict,
}

fn kind(msg: &Message) -> &'static str {
    match msg {
        Message::ChallengeRequest => "challenge-request",
        Message::Challenge { .. } => "challenge",
        Message::Response(_) => "response",
        Message::Verdict(_) => "verdict",
        Message::Error(_) => "error",
    }
}

/// Report `err` to the peer when it is the peer's fault, then return it.
fn fail<S: Write + ?Sized>(stream: &mut S, err: AuthError) -> AuthError {
    let reason = match &err {
        AuthError::Wire(WireError::Malformed(m)) => Some(m.clone()),
        AuthError::Unexpected(k) => Some(format!("unexpected {k} frame")),
        AuthError::StoreExhausted => Some("store exhausted".into()),
        AuthError::Device(e) => Some(e.to_string()),
        _ => None,
    };
    if let Some(reason) = reason {
        let _ = write_message(stream, &Message::Error(reason));
    }
    err
}

/// Verifier side of one session.
pub fn serve<S: Read + Write + ?Sized>(
    store: &SharedStore,
    stream: &mut S,
    rng: &mut Rng,
) -> Result<SessionOutcome, AuthError> {
    match read_message(stream) {
        Ok(Message::ChallengeRequest) => {}
        Ok(Message::Error(reason)) => return Err(AuthError::Remote(reason)),
        Ok(other) => return Err(fail(stream, AuthError::Unexpected(kind(&other)))),
        Err(e) => return Err(fail(stream, e.into())),
    }
    let issued = store.lock().expect("store lock").issue_challenge(rng);
    let (challenge, nonce) = issued.map_err(|e| fail(stream, e))?;
    write_message(stream, &Message::Challenge { challenge: challenge.clone(), nonce })?;
    let response = match read_message(stream) {
        Ok(Message::Response(r)) => r,
        Ok(Message::Error(reason)) => return Err(AuthError::Remote(reason)),
        Ok(other) => return Err(fail(stream, AuthError::Unexpected(kind(&other)))),
        Err(e) => return Err(fail(stream, e.into())),
    };
    let verdict = store.lock().expect("store lock").verifier_check(&challenge, &nonce, &response)?;
    write_message(stream, &Message::Verdict(verdict.accepted()))?;
    Ok(SessionOutcome { challenge, verdict })
}

/// Prover side of one session.
pub fn authenticate<S: Read + Write + ?Sized>(
    device: &mut dyn PufDevice,
    extractor: &ExtractorParams,
    stream: &mut S,
    rng: &mut Rng,
) -> Result<Verdict, AuthError> {
    write_message(stream, &Message::ChallengeRequest)?;
    let (challenge, nonce) = match read_message(stream) {
        Ok(Message::Challenge { challenge, nonce }) => (challenge, nonce),
        Ok(Message::Error(reason)) => return Err(AuthError::Remote(reason)),
        Ok(other) => return Err(fail(stream, AuthError::Unexpected(kind(&other)))),
        Err(e) => return Err(fail(stream, e.into())),
    };
    let response = prover_respond(device, extractor, &challenge, &nonce, rng).map_err(|e| fail(stream, e))?;
    write_message(stream, &Message::Response(response))?;
    match read_message(stream) {
        Ok(Message::Verdict(true)) => Ok(Verdict::Accept),
        Ok(Message::Verdict(false)) => Ok(Verdict::Reject),
        Ok(Message::Error(reason)) => Err(AuthError::Remote(reason)),
        Ok(other) => Err(fail(stream, AuthError::Unexpected(kind(&other)))),
        Err(e) => Err(fail(stream, e.into())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families::TableMrtPuf;
    use std::sync::Arc;
    use std::thread;

    fn setup(pairs: usize) -> (TableMrtPuf, ExtractorParams, SharedStore) {
        let mut device = TableMrtPuf::generate(21, 200, 16, 128).unwrap();
        let ex = ExtractorParams::for_raw_len(128, 1, [1; 16]).unwrap();
        let store = enroll(&mut device, &ex, [1; 16], pairs, &mut Rng::new(0)).unwrap();
        (device, ex, store.shared())
    }

    fn session(
        device: &mut dyn PufDevice,
        ex: &ExtractorParams,
        store: &SharedStore,
        seed: u64,
    ) -> (Result<SessionOutcome, AuthError>, Result<Verdict, AuthError>) {
        let (mut v_end, mut p_end) = pipe(DEFAULT_TIMEOUT);
        let store = Arc::clone(store);
        let verifier = thread::spawn(move || serve(&store, &mut v_end, &mut Rng::new(seed)));
        let prover = authenticate(device, ex, &mut p_end, &mut Rng::new(seed + 1));
        (verifier.join().unwrap(), prover)
    }

    #[test]
    fn honest_sessions_accept_and_drain() {
        let (mut device, ex, store) = setup(100);
        for i in 0..100 {
            let (v, p) = session(&mut device, &ex, &store, i);
            assert_eq!(v.unwrap().verdict, Verdict::Accept);
            assert_eq!(p.unwrap(), Verdict::Accept);
        }
        assert_eq!(store.lock().unwrap().unused(), 0);
        let (v, p) = session(&mut device, &ex, &store, 999);
        assert!(matches!(v, Err(AuthError::StoreExhausted)));
        assert!(matches!(p, Err(AuthError::Remote(_))));
    }

    #[test]
    fn impostor_rejected() {
        let (_, ex, store) = setup(20);
        let mut impostor = TableMrtPuf::generate(22, 200, 16, 128).unwrap();
        // The impostor does not know the enrolled challenges, so answer
        // with a keyed response of a guessed secret.
        let (mut v_end, mut p_end) = pipe(DEFAULT_TIMEOUT);
        let s = Arc::clone(&store);
        let verifier = thread::spawn(move || serve(&s, &mut v_end, &mut Rng::new(5)));
        let _ = authenticate(&mut impostor, &ex, &mut p_end, &mut Rng::new(6));
        assert!(!matches!(verifier.join().unwrap(), Ok(SessionOutcome { verdict: Verdict::Accept, .. })));
    }

    #[test]
    fn truncated_response_gets_error_frame() {
        let (_, _, store) = setup(5);
        let (mut v_end, mut p_end) = pipe(DEFAULT_TIMEOUT);
        let s = Arc::clone(&store);
        let verifier = thread::spawn(move || serve(&s, &mut v_end, &mut Rng::new(7)));
        write_message(&mut p_end, &Message::ChallengeRequest).unwrap();
        assert!(matches!(read_message(&mut p_end).unwrap(), Message::Challenge { .. }));
        p_end.write_all(&[0x03, 0, 0, 0, 10, 1, 2, 3, 4, 5, 6, 7, 8, 9, 10]).unwrap();
        assert!(matches!(read_message(&mut p_end).unwrap(), Message::Error(_)));
        assert!(matches!(verifier.join().unwrap(), Err(AuthError::Wire(WireError::Malformed(_)))));
    }

    #[test]
    fn replay_with_new_nonce_rejected() {
        let (mut device, ex, store) = setup(3);
        let mut guard = store.lock().unwrap();
        let mut rng = Rng::new(8);
        let (c, n1) = guard.issue_challenge(&mut rng).unwrap();
        let r1 = prover_respond(&mut device, &ex, &c, &n1, &mut rng).unwrap();
        assert_eq!(guard.verifier_check(&c, &n1, &r1).unwrap(), Verdict::Accept);
        // Even if the verifier re-armed the same challenge, the old
        // response does not fit a new nonce.
        let i = guard.records().iter().position(|r| r.challenge == c).unwrap();
        let secret = guard.records()[i].secret.clone();
        let n2 = [0x42; 16];
        assert_ne!(pf3_respond(&secret, &n2).to_bytes(), r1.to_vec());
    }
}
