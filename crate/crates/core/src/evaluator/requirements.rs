//! Requirement lists for minimum-read-out-time (MRT) and
//! erasure-upon-read-out (EUR) devices.

use serde::{Deserialize, Serialize};

use super::levels::required_n;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MrtParams {
    /// Stored challenge/secret pairs N.
    pub n: u128,
    pub l: usize,
    pub l_s: usize,
    /// Declared combined entropy I of all challenges and secrets, in bits.
    pub declared_entropy: u128,
    pub challenges_stored_externally: bool,
    pub dt_access: f64,
    pub dt_read: f64,
    pub l_target: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EurParams {
    pub l: usize,
    pub l_s: usize,
    pub erases_on_wrong_challenge: bool,
    pub challenges_stored_externally: bool,
    pub l_target: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RequirementVerdict {
    pub id: String,
    pub description: String,
    pub pass: bool,
    /// Distance from the threshold (positive when satisfied); `None` for
    /// yes/no attestations.
    pub margin: Option<f64>,
}

impl RequirementVerdict {
    fn numeric(id: &str, description: String, margin: f64) -> Self {
        Self { id: id.into(), description, pass: margin >= 0.0, margin: Some(margin) }
    }

    fn flag(id: &str, description: &str, holds: bool) -> Self {
        Self { id: id.into(), description: description.into(), pass: holds, margin: None }
    }
}

fn signed_diff(a: u128, b: u128) -> f64 {
    if a >= b {
        (a - b) as f64
    } else {
        -((b - a) as f64)
    }
}

pub fn check_mrt_requirements(p: &MrtParams) -> Vec<RequirementVerdict> {
    let needed = required_n(p.l_target, p.dt_access, p.dt_read);
    let min_entropy = 2u128.saturating_mul(p.n).saturating_mul(p.l as u128);
    let log_n = (p.n as f64).log2();
    let shortest = p.l.min(p.l_s) as f64;
    vec![
        RequirementVerdict::numeric(
            "MRT-1",
            format!("N = {} ≥ L⁻¹·Δt_a/Δt_r = {needed}", p.n),
            signed_diff(p.n, needed),
        ),
        RequirementVerdict::numeric(
            "MRT-2",
            format!("I = {} ≥ 2·N·ℓ = {min_entropy}", p.declared_entropy),
            signed_diff(p.declared_entropy, min_entropy),
        ),
        RequirementVerdict::flag(
            "MRT-3",
            "challenges used in operation are stored outside the device",
            p.challenges_stored_externally,
        ),
        RequirementVerdict::numeric(
            "MRT-4",
            format!("min(ℓ, ℓ_S) = {shortest} ≥ log₂N = {log_n:.2}"),
            shortest - log_n,
        ),
    ]
}

pub fn check_eur_requirements(p: &EurParams) -> Vec<RequirementVerdict> {
    let needed = (1.0 / p.l_target).log2();
    let shortest = p.l.min(p.l_s) as f64;
    vec![
        RequirementVerdict::flag(
            "EUR-1",
            "a wrong challenge erases the secret and returns a random value",
            p.erases_on_wrong_challenge,
        ),
        RequirementVerdict::numeric(
            "EUR-2",
            format!("min(ℓ, ℓ_S) = {shortest} ≥ log₂(1/L) = {needed:.2}"),
            shortest - needed,
        ),
        RequirementVerdict::flag(
            "EUR-3",
            "challenges used in operation are stored outside the device",
            p.challenges_stored_externally,
        ),
    ]
}
