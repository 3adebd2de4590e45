//! Acceptance criteria. Each test prints one `criterion N PASS|FAIL` line
//! and then asserts it, including the runtime bound.

use std::collections::HashSet;
use std::sync::Arc;
use std::thread;
use std::time::{Duration, Instant};

use pufsim::attacks::{
    arbiter_ml_experiment, brute_force_attack, erasure_experiment, insider_attack, quantum_guess_experiment,
    AttackBudget, InsiderKnowledge, MlConfig,
};
use pufsim::authproto::{authenticate, enroll, pipe, serve, Verdict, DEFAULT_TIMEOUT};
use pufsim::device::{sample_foreseen, DEFAULT_DEFINITION1_SAMPLE};
use pufsim::evaluator::{level_quantum_guess, required_n, BOREL_BOUND};
use pufsim::extractor::ExtractorParams;
use pufsim::families::{ArbiterPuf, FamilyParams, TableMrtPuf};
use pufsim::stats::{binomial_sigma, within_sigmas};
use pufsim::{check_definition1, GodMode, PufDevice, Rng};

fn report(n: u32, pass: bool, detail: String, started: Instant, limit: Option<Duration>) {
    let elapsed = started.elapsed();
    let in_time = limit.is_none_or(|l| elapsed < l);
    let verdict = if pass && in_time { "PASS" } else { "FAIL" };
    let bound = limit.map_or_else(String::new, |l| format!(" (limit {} s)", l.as_secs()));
    println!("criterion {n} {verdict}: {detail}; {:.2} s{bound}", elapsed.as_secs_f64());
    assert!(pass, "criterion {n}: {detail}");
    assert!(in_time, "criterion {n}: took {elapsed:?}");
}

#[test]
fn criterion_01_quantum_per_bit_guess() {
    let t = Instant::now();
    let stats = quantum_guess_experiment(1, 100_000, &Rng::new(1));
    let rate = stats.per_bit_rate();
    report(
        1,
        (rate - 0.75).abs() <= 0.01,
        format!("per-bit success {rate:.4} over {} single-qubit trials, target 0.75 ± 0.01", stats.trials),
        t,
        Some(Duration::from_secs(5)),
    );
}

#[test]
fn criterion_02_quantum_full_secret_eight_qubits() {
    let t = Instant::now();
    let trials = 100_000;
    let stats = quantum_guess_experiment(8, trials, &Rng::new(2));
    let expected = 6561.0 / 65536.0;
    let rate = stats.full_rate();
    report(
        2,
        within_sigmas(rate, expected, trials, 3.0),
        format!("full-match {rate:.5} vs {expected:.5} ± 3σ = {:.5}", 3.0 * binomial_sigma(expected, trials)),
        t,
        Some(Duration::from_secs(10)),
    );
}

#[test]
fn criterion_03_quantum_128_below_borel() {
    let t = Instant::now();
    let level = level_quantum_guess(128);
    report(3, level < BOREL_BOUND, format!("(3/4)^128 = {level:.4e} < {BOREL_BOUND:e}"), t, None);
}

#[test]
fn criterion_04_mrt_sizing() {
    let t = Instant::now();
    let n = required_n(1e-15, 86_400.0, 1.0);
    report(4, n == 86_400_000_000_000_000_000, format!("required N = {n} (expected 8.64e19)"), t, None);
}

#[test]
fn criterion_05_brute_force_desk_scale() {
    let t = Instant::now();
    let mut device = TableMrtPuf::generate(5, 100, 32, 64).unwrap();
    let tr = brute_force_attack(&mut device, &AttackBudget::new(25.0, 1.0).unwrap(), 10_000, &mut Rng::new(5)).unwrap();
    report(
        5,
        (tr.success_rate - 0.25).abs() <= 0.02 && tr.reads_used == 25,
        format!(
            "success {:.4} with {} reads over {} trials, target 0.25 ± 0.02",
            tr.success_rate,
            tr.reads_used,
            tr.n_trials()
        ),
        t,
        Some(Duration::from_secs(10)),
    );
}

#[test]
fn criterion_06_arbiter_modeling() {
    let t = Instant::now();
    let mut accuracies = Vec::new();
    for n in [100usize, 1000, 10_000] {
        let mut device = ArbiterPuf::generate(6, 64, 1).unwrap();
        let mut rng = Rng::new(6).fork_index("ml", n as u64);
        let out = arbiter_ml_experiment(&mut device, n, 10_000, &MlConfig::default(), &mut rng).unwrap();
        accuracies.push(out.held_out_accuracy);
    }
    let increasing = accuracies.windows(2).all(|w| w[1] > w[0]);
    report(
        6,
        accuracies[2] >= 0.95 && increasing,
        format!(
            "held-out accuracy {:.4} / {:.4} / {:.4} at 10² / 10³ / 10⁴ training pairs, need ≥ 0.95 and increasing",
            accuracies[0], accuracies[1], accuracies[2]
        ),
        t,
        Some(Duration::from_secs(60)),
    );
}

#[test]
fn criterion_07_erasure() {
    let t = Instant::now();
    let stats = erasure_experiment(1, 100_000, &Rng::new(7));
    let rate = stats.per_bit_rate();
    report(
        7,
        (rate - 0.5).abs() <= 0.01,
        format!("recovery after wrong-basis read {rate:.4}, target 0.5 ± 0.01"),
        t,
        Some(Duration::from_secs(5)),
    );
}

#[test]
fn criterion_08_definition_one_fixtures() {
    let t = Instant::now();
    let mut rng = Rng::new(8);
    let toy_params = FamilyParams::from_json(r#"{"family":"toy","l":10}"#).unwrap();
    let mut toy = toy_params.build().unwrap();
    let sample = sample_foreseen(&toy, DEFAULT_DEFINITION1_SAMPLE, &mut rng);
    let toy_verdict = check_definition1(&toy, &sample, 3, &mut rng).unwrap();
    let clone =
        insider_attack(&mut toy, &InsiderKnowledge::from_params(&toy_params), &AttackBudget::reads(2), 1000, &mut rng)
            .unwrap();

    let cuf = FamilyParams::from_json(r#"{"family":"constant","seed":8,"l":10,"l_S":16}"#).unwrap().build().unwrap();
    let sample = sample_foreseen(&cuf, DEFAULT_DEFINITION1_SAMPLE, &mut rng);
    let cuf_verdict = check_definition1(&cuf, &sample, 3, &mut rng).unwrap();

    report(
        8,
        toy_verdict.is_puf && clone.reads_used == 2 && clone.success_rate == 1.0 && !cuf_verdict.is_puf,
        format!(
            "toy is_puf={} cloned with {} reads at success {:.3}; constant is_puf={}",
            toy_verdict.is_puf, clone.reads_used, clone.success_rate, cuf_verdict.is_puf
        ),
        t,
        Some(Duration::from_secs(1)),
    );
}

#[test]
fn criterion_09_protocol_round_trip() {
    let t = Instant::now();
    let params = FamilyParams::from_json(r#"{"family":"keyed-hash","seed":9,"l":64,"l_S":128}"#).unwrap();
    let mut device = params.build().unwrap();
    let extractor = ExtractorParams::for_raw_len(device.raw_secret_len(), 1, params.device_id()).unwrap();
    let store = enroll(&mut device, &extractor, params.device_id(), 1100, &mut Rng::new(9)).unwrap().shared();
    let mut impostor =
        FamilyParams::from_json(r#"{"family":"keyed-hash","seed":10,"l":64,"l_S":128}"#).unwrap().build().unwrap();

    let rng = Rng::new(90);
    let mut issued = Vec::new();
    let (mut honest_ok, mut impostor_ok) = (0, 0);
    for i in 0..1100u64 {
        let (mut v_end, mut p_end) = pipe(DEFAULT_TIMEOUT);
        let shared = Arc::clone(&store);
        let mut v_rng = rng.fork_index("verifier", i);
        let verifier = thread::spawn(move || serve(&shared, &mut v_end, &mut v_rng));
        let prover: &mut dyn PufDevice = if i < 100 { &mut device } else { &mut impostor };
        let _ = authenticate(prover, &extractor, &mut p_end, &mut rng.fork_index("prover", i));
        let outcome = verifier.join().unwrap().unwrap();
        issued.push(outcome.challenge);
        match (i < 100, outcome.verdict) {
            (true, Verdict::Accept) => honest_ok += 1,
            (false, Verdict::Accept) => impostor_ok += 1,
            _ => {}
        }
    }
    let distinct = issued.iter().collect::<HashSet<_>>().len();
    report(
        9,
        honest_ok == 100 && impostor_ok == 0 && distinct == issued.len(),
        format!(
            "honest {honest_ok}/100 accepted, impostor {impostor_ok}/1000 accepted, {distinct}/{} distinct challenges",
            issued.len()
        ),
        t,
        Some(Duration::from_secs(30)),
    );
}

#[test]
fn criterion_10_extraction() {
    let t = Instant::now();
    let mut device =
        TableMrtPuf::generate(10, 100, 32, 64).unwrap().with_noise(0.05).unwrap().with_repetition(5).unwrap();
    let extractor = ExtractorParams::for_raw_len(device.raw_secret_len(), 5, [10; 16]).unwrap();
    let mut rng = Rng::new(10);
    let challenges = device.challenge_space().sample_distinct(100, &mut rng);
    let evaluations = 1000;
    let mut recovered = 0;
    for i in 0..evaluations {
        let c = &challenges[i % challenges.len()];
        let truth = extractor.derive(&device.true_raw_secret(c).unwrap()).unwrap();
        recovered += (extractor.derive(&device.evaluate(c, &mut rng).unwrap()).unwrap() == truth) as usize;
    }
    let rate = recovered as f64 / evaluations as f64;
    // Per-group failure C(5,3)p³q² + 5p⁴q + p⁵ at p = 0.05.
    let group = 10.0 * 0.05f64.powi(3) * 0.95f64.powi(2) + 5.0 * 0.05f64.powi(4) * 0.95 + 0.05f64.powi(5);
    let predicted = (1.0 - group).powi(64);
    report(
        10,
        rate >= 0.99,
        format!(
            "full-secret recovery {rate:.4} over {evaluations} reads, need ≥ 0.99; binomial prediction {predicted:.4}"
        ),
        t,
        Some(Duration::from_secs(10)),
    );
}
