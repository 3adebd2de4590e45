//! Simulation and security evaluation of physical unclonable functions.
//!
//! A device is modelled as three stages: the physical read-out PF₁ of a raw
//! secret, error correction and privacy amplification PF₂, and a keyed
//! response PF₃ proving possession of the secret. The crate provides
//! simulated device families, attacks within a bounded access window, the
//! requirement checkers for minimum-read-out-time and erasure-upon-read-out
//! devices, and a challenge-response authentication protocol on top.

pub mod attacks;
pub mod authproto;
pub mod bits;
pub mod device;
pub mod evaluator;
pub mod extractor;
pub mod families;
pub mod rng;
pub mod stats;

pub use bits::{popcount_majority, BitString, BitsError, Majority};
pub use device::{
    check_definition1, check_definition1_with, ChallengeSet, Definition1Error, Definition1Verdict, FamilyId, Foreseen,
    GodMode, PufDevice, PufError,
};
pub use rng::Rng;
