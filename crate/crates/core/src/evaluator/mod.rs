//! Security levels, requirement checks and the device evaluation report.

pub mod levels;
mod report;
mod requirements;

pub use levels::{level_bruteforce, level_quantum_guess, required_n, total_readout_time, BOREL_BOUND};
pub use report::{Answer, Levels, Mechanism, SecurityReport};
pub use requirements::{check_eur_requirements, check_mrt_requirements, EurParams, MrtParams, RequirementVerdict};

use rand::Rng as _;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::attacks::{insider_attack, AttackBudget, AttackError, InsiderKnowledge};
use crate::bits::BitString;
use crate::device::{
    check_definition1_with, sample_foreseen, Definition1Error, FamilyId, GodMode, PufDevice, PufError,
    DEFAULT_DEFINITION1_SAMPLE,
};
use crate::extractor::pf2_correct;
use crate::families::{AnyPuf, FamilyParams, QuantumEurPuf};
use crate::rng::Rng;
use crate::stats::wilson_ci95;

/// Reads granted to the simulated attacker at most. Larger budgets are cut
/// to this and the report says so.
pub const EMPIRICAL_READ_CAP: u64 = 10_000;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvaluatorError {
    #[error("security parameters are for {expected}, device is {actual}")]
    ParamsMismatch { expected: String, actual: String },
    #[error("invalid evaluation parameters: {0}")]
    InvalidParams(String),
    #[error(transparent)]
    Definition1(#[from] Definition1Error),
    #[error(transparent)]
    Attack(#[from] AttackError),
    #[error(transparent)]
    Device(#[from] PufError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mechanism", rename_all = "UPPERCASE")]
pub enum SecurityParams {
    Mrt(MrtParams),
    Eur(EurParams),
}

fn pow2(bits: usize) -> u128 {
    if bits >= 128 {
        u128::MAX
    } else {
        1u128 << bits
    }
}

fn need(v: Option<usize>, name: &str, family: FamilyId) -> Result<usize, EvaluatorError> {
    v.ok_or_else(|| EvaluatorError::InvalidParams(format!("family {family} requires `{name}`")))
}

impl SecurityParams {
    /// Requirement parameters implied by a device's construction.
    ///
    /// Declared entropy I, per family:
    /// * table: N·ℓ for the challenges plus N·ℓ_S for the secrets, all
    ///   uniform and independent;
    /// * arbiter: the delay weights, 64 bits per weight, (k + 1)·ℓ_S weights;
    /// * keyed-hash: the 128-bit key;
    /// * toy: 0, the function is public;
    /// * constant: the single ℓ_S-bit secret.
    ///
    /// Only the table stores its challenges outside the device; every other
    /// MRT family answers the whole of {0,1}^ℓ.
    pub fn for_device(params: &FamilyParams, budget: &AttackBudget, l_target: f64) -> Result<Self, EvaluatorError> {
        if !(l_target > 0.0 && l_target <= 1.0) {
            return Err(EvaluatorError::InvalidParams(format!("L_target {l_target} is not in (0, 1]")));
        }
        let f = params.family;
        let mrt = |n: u128, l: usize, l_s: usize, entropy: u128, external: bool| {
            SecurityParams::Mrt(MrtParams {
                n,
                l,
                l_s,
                declared_entropy: entropy,
                challenges_stored_externally: external,
                dt_access: budget.dt_access,
                dt_read: budget.dt_read,
                l_target,
            })
        };
        Ok(match f {
            FamilyId::Table => {
                let (n, l, l_s) = (need(params.n, "N", f)?, need(params.l, "l", f)?, need(params.l_s, "l_S", f)?);
                let n = n as u128;
                mrt(n, l, l_s, n * l as u128 + n * l_s as u128, true)
            }
            FamilyId::Arbiter => {
                let (k, l_s) = (need(params.k, "k", f)?, need(params.l_s, "l_S", f)?);
                mrt(pow2(k), k, l_s, ((k as u128 + 1) * l_s as u128) * 64, false)
            }
            FamilyId::KeyedHash => {
                let (l, l_s) = (need(params.l, "l", f)?, need(params.l_s, "l_S", f)?);
                mrt(pow2(l), l, l_s, 128, false)
            }
            FamilyId::Toy => {
                let l = need(params.l, "l", f)?;
                mrt(pow2(l), l, l, 0, false)
            }
            FamilyId::Constant => {
                let (l, l_s) = (need(params.l, "l", f)?, need(params.l_s, "l_S", f)?);
                mrt(pow2(l), l, l_s, l_s as u128, false)
            }
            FamilyId::Quantum => {
                let l = need(params.l, "l", f)?;
                SecurityParams::Eur(EurParams {
                    l,
                    l_s: l,
                    erases_on_wrong_challenge: true,
                    challenges_stored_externally: true,
                    l_target,
                })
            }
        })
    }

    pub fn mechanism(&self) -> Mechanism {
        match self {
            SecurityParams::Mrt(_) => Mechanism::Mrt,
            SecurityParams::Eur(_) => Mechanism::Eur,
        }
    }

    pub fn l_target(&self) -> f64 {
        match self {
            SecurityParams::Mrt(p) => p.l_target,
            SecurityParams::Eur(p) => p.l_target,
        }
    }

    /// The closed-form level for this mechanism.
    pub fn analytic_level(&self) -> f64 {
        match self {
            SecurityParams::Mrt(p) => level_bruteforce(p.dt_access, p.dt_read, p.n as f64),
            SecurityParams::Eur(p) => level_quantum_guess(p.l as u32),
        }
    }

    pub fn verdicts(&self) -> Vec<RequirementVerdict> {
        match self {
            SecurityParams::Mrt(p) => check_mrt_requirements(p),
            SecurityParams::Eur(p) => check_eur_requirements(p),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvaluationConfig {
    pub budget: AttackBudget,
    /// Scoring challenges for the empirical attack.
    pub n_trials: usize,
    pub definition1_sample: usize,
    pub definition1_repeats: usize,
}

impl EvaluationConfig {
    pub fn new(budget: AttackBudget) -> Self {
        Self { budget, n_trials: 10_000, definition1_sample: DEFAULT_DEFINITION1_SAMPLE, definition1_repeats: 3 }
    }
}

struct Empirical {
    strategy: String,
    reads: u64,
    hits: u64,
    trials: u64,
    capped: bool,
}

/// Guess-the-bases attack on a copy of the device per trial: pick a
/// register, read it in uniformly random bases, compare with its secret.
fn quantum_guess_on(device: &QuantumEurPuf, trials: usize, rng: &mut Rng) -> Result<Empirical, EvaluatorError> {
    let mut hits = 0u64;
    for _ in 0..trials {
        let mut copy = device.snapshot();
        let i = rng.random_range(0..device.register_count());
        let bases = BitString::random(device.qubits(), rng).expect("qubits ≥ 1");
        let out = copy.evaluate(&device.challenge(i, &bases), rng)?;
        hits += (out == device.true_raw_secret(&device.foreseen_challenge(i))?) as u64;
    }
    Ok(Empirical { strategy: "guess-bases".into(), reads: 1, hits, trials: trials as u64, capped: false })
}

fn mrt_attack(
    device: &AnyPuf,
    params: &FamilyParams,
    config: &EvaluationConfig,
    rng: &mut Rng,
) -> Result<Empirical, EvaluatorError> {
    let capped = config.budget.max_reads() > EMPIRICAL_READ_CAP;
    let budget = if capped { AttackBudget::reads(EMPIRICAL_READ_CAP) } else { config.budget };
    let mut copy = device.snapshot();
    let tr = insider_attack(&mut copy, &InsiderKnowledge::from_params(params), &budget, config.n_trials, rng)?;
    Ok(Empirical { hits: tr.hits(), trials: tr.n_trials(), strategy: tr.strategy, reads: tr.reads_used, capped })
}

fn read_out_form(family: FamilyId) -> &'static str {
    match family {
        FamilyId::Toy => "majority of the challenge bits selects one of two fixed strings",
        FamilyId::Table => "lookup of N stored random pairs, one pair per read-out of duration Δt_r",
        FamilyId::Arbiter => "sign of an additive delay difference w·Φ(C) per output bit",
        FamilyId::KeyedHash => "HMAC-SHA-256 of the challenge under an internal 128-bit key",
        FamilyId::Quantum => "measurement of ℓ qubits in the bases named by the challenge",
        FamilyId::Constant => "a constant secret, independent of the challenge",
    }
}

fn protection(mechanism: Mechanism) -> &'static str {
    match mechanism {
        Mechanism::Mrt => "minimum read-out time: within Δt_a at most Δt_a/Δt_r pairs can be read",
        Mechanism::Eur => "erasure upon read-out: a wrong-basis read randomizes the measured qubit",
    }
}

fn answer(id: &str, topic: &str, text: String) -> Answer {
    Answer { id: id.into(), topic: topic.into(), answer: text }
}

/// Evaluate a device: the PUF definition check on copies of it, the requirement list of
/// its mechanism, the analytic level and an empirical attack estimate.
pub fn evaluate_device(
    device: &AnyPuf,
    params: &FamilyParams,
    security: &SecurityParams,
    config: &EvaluationConfig,
    rng: &mut Rng,
) -> Result<SecurityReport, EvaluatorError> {
    let family = device.family();
    if params.family != family {
        return Err(EvaluatorError::ParamsMismatch { expected: params.family.to_string(), actual: family.to_string() });
    }
    let expected = if family == FamilyId::Quantum { Mechanism::Eur } else { Mechanism::Mrt };
    if security.mechanism() != expected {
        return Err(EvaluatorError::ParamsMismatch {
            expected: security.mechanism().name().into(),
            actual: format!("{family} ({})", expected.name()),
        });
    }

    let r = params.repetition();
    let sample = sample_foreseen(device, config.definition1_sample, &mut rng.fork("definition1-sample"));
    let definition1 = check_definition1_with(
        device,
        &sample,
        config.definition1_repeats,
        |raw| pf2_correct(raw, r).map_err(|e| PufError::InvalidParams(e.to_string())),
        &mut rng.fork("definition1"),
    )?;

    let mut attack_rng = rng.fork("empirical");
    let empirical = match device {
        AnyPuf::Quantum(q) => quantum_guess_on(q, config.n_trials, &mut attack_rng)?,
        _ => mrt_attack(device, params, config, &mut attack_rng)?,
    };
    let ci = wilson_ci95(empirical.hits, empirical.trials);
    let empirical_rate = empirical.hits as f64 / empirical.trials.max(1) as f64;

    let l_target = security.l_target();
    let analytic = security.analytic_level();
    let mechanism = security.mechanism();
    let levels = Levels {
        l_bf: (mechanism == Mechanism::Mrt).then_some(analytic),
        l_guess: (mechanism == Mechanism::Eur).then_some(analytic),
        analytic,
        empirical: empirical_rate,
        empirical_ci95: ci,
        empirical_trials: empirical.trials,
        empirical_strategy: empirical.strategy.clone(),
        empirical_reads: empirical.reads,
        empirical_budget_capped: empirical.capped,
        l_target,
    };

    let mut verdicts = security.verdicts();
    verdicts.push(RequirementVerdict {
        id: "LEVEL".into(),
        description: format!("analytic level {analytic:.4e} ≤ L = {l_target:.1e}"),
        pass: analytic <= l_target,
        margin: Some(l_target - analytic),
    });
    verdicts.push(RequirementVerdict {
        id: "EMPIRICAL".into(),
        description: format!(
            "{} attack success {empirical_rate:.4e}, 95% lower bound {:.4e} ≤ L = {l_target:.1e}",
            empirical.strategy, ci.lo
        ),
        pass: ci.lo <= l_target,
        margin: Some(l_target - ci.lo),
    });

    let declared = match security {
        SecurityParams::Mrt(p) => format!("declared I = {} bits over N = {} pairs", p.declared_entropy, p.n),
        SecurityParams::Eur(p) => format!("{} qubits per register, at most {} bits per secret", p.l, p.l_s),
    };
    let questionnaire = vec![
        answer("Q1", "read-out PF₁", read_out_form(family).to_string()),
        answer(
            "Q2",
            "PF₂",
            format!("repetition-code majority over groups of {r}, then SHA-256(salt ∥ s) truncated; software next to the read-out"),
        ),
        answer("Q3", "information content", declared),
        answer(
            "Q4",
            "clonable fraction L",
            format!(
                "{:.4e} (analytic {analytic:.4e}, empirical {empirical_rate:.4e} by {} with {} reads)",
                analytic.max(empirical_rate),
                empirical.strategy,
                empirical.reads
            ),
        ),
        answer("Q5", "protection mechanism", protection(mechanism).to_string()),
    ];

    let mut notes = Vec::new();
    if mechanism == Mechanism::Mrt {
        notes.push("I counts declared challenge-set entropy plus declared secret entropy".into());
    }
    if empirical.capped {
        notes.push(format!(
            "empirical attack limited to {EMPIRICAL_READ_CAP} of {} budgeted reads",
            config.budget.max_reads()
        ));
    }

    let pass = definition1.is_puf && verdicts.iter().all(|v| v.pass);
    Ok(SecurityReport {
        family,
        mechanism,
        definition1,
        levels,
        requirement_verdicts: verdicts,
        questionnaire,
        notes,
        pass,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run(json: &str, budget: AttackBudget, l_target: f64, seed: u64) -> SecurityReport {
        let params = FamilyParams::from_json(json).unwrap();
        let device = params.build().unwrap();
        let security = SecurityParams::for_device(&params, &budget, l_target).unwrap();
        let mut config = EvaluationConfig::new(budget);
        config.n_trials = 2000;
        evaluate_device(&device, &params, &security, &config, &mut Rng::new(seed)).unwrap()
    }

    #[test]
    fn toy_is_puf_but_fails() {
        let r = run(r#"{"family":"toy","l":10}"#, AttackBudget::reads(2), 1e-3, 1);
        assert!(r.definition1.is_puf);
        assert!(!r.pass);
        assert_eq!(r.levels.empirical, 1.0);
        assert_eq!(r.levels.empirical_strategy, "majority-clone");
    }

    #[test]
    fn desk_scale_table_passes() {
        let r = run(
            r#"{"family":"table","seed":3,"N":10000,"l":16,"l_S":16}"#,
            AttackBudget::new(10.0, 1.0).unwrap(),
            1e-3,
            2,
        );
        assert_eq!(r.levels.l_bf, Some(1e-3));
        assert!(r.pass, "{}", r.render_text());
    }

    #[test]
    fn quantum_128_passes_borel() {
        let r = run(r#"{"family":"quantum","seed":5,"N":4,"l":128}"#, AttackBudget::reads(1), BOREL_BOUND, 3);
        assert!(r.pass, "{}", r.render_text());
        assert!((r.levels.analytic / 1.0e-16 - 1.0).abs() < 0.02);
        assert_eq!(r.levels.empirical, 0.0);
    }

    #[test]
    fn level_above_borel_fails() {
        let r = run(r#"{"family":"quantum","seed":5,"N":4,"l":32}"#, AttackBudget::reads(1), BOREL_BOUND, 3);
        assert!(!r.pass);
        assert!(r.requirement_verdicts.iter().any(|v| v.id == "LEVEL" && !v.pass));
    }

    #[test]
    fn constant_is_not_a_puf() {
        let r = run(r#"{"family":"constant","seed":1,"l":8,"l_S":8}"#, AttackBudget::reads(1), 0.5, 0);
        assert!(!r.definition1.is_puf);
        assert!(!r.pass);
    }

    #[test]
    fn mismatched_mechanism_rejected() {
        let params = FamilyParams::from_json(r#"{"family":"toy","l":10}"#).unwrap();
        let device = params.build().unwrap();
        let security = SecurityParams::Eur(EurParams {
            l: 10,
            l_s: 10,
            erases_on_wrong_challenge: true,
            challenges_stored_externally: true,
            l_target: 0.5,
        });
        let config = EvaluationConfig::new(AttackBudget::reads(2));
        let err = evaluate_device(&device, &params, &security, &config, &mut Rng::new(0)).unwrap_err();
        assert!(matches!(err, EvaluatorError::ParamsMismatch { .. }));
    }

    #[test]
    fn report_renders_five_questions() {
        let r = run(r#"{"family":"toy","l":10}"#, AttackBudget::reads(2), 1e-3, 1);
        let text = r.render_text();
        for q in ["Q1", "Q2", "Q3", "Q4", "Q5", "MRT-1", "MRT-4", "EMPIRICAL"] {
            assert!(text.contains(q), "{q} missing from\n{text}");
        }
        let json: serde_json::Value = serde_json::from_str(&r.to_json()).unwrap();
        assert_eq!(json["questionnaire"].as_array().unwrap().len(), 5);
        assert_eq!(json["mechanism"], "MRT");
    }

    #[test]
    fn invalid_target_rejected() {
        let params = FamilyParams::from_json(r#"{"family":"toy","l":10}"#).unwrap();
        assert!(SecurityParams::for_device(&params, &AttackBudget::reads(1), 0.0).is_err());
        assert!(SecurityParams::for_device(&params, &AttackBudget::reads(1), 1.5).is_err());
    }
}
