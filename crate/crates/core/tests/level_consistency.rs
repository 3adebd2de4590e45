//! Closed-form levels against Monte-Carlo attack estimates.

use proptest::prelude::*;

use pufsim::attacks::{arbiter_ml_experiment, brute_force_attack, quantum_guess_experiment, AttackBudget, MlConfig};
use pufsim::evaluator::{level_bruteforce, level_quantum_guess, required_n};
use pufsim::families::{ArbiterPuf, TableMrtPuf};
use pufsim::stats::{spearman, within_sigmas};
use pufsim::Rng;

#[test]
fn brute_force_tracks_level_over_twenty_settings() {
    let sizes = [50usize, 100, 200, 400, 1000];
    let fractions = [0.05, 0.25, 0.5, 0.9];
    let trials = 5000u64;
    let root = Rng::new(31);
    let mut checked = 0;
    for (i, &n) in sizes.iter().enumerate() {
        for (j, &f) in fractions.iter().enumerate() {
            let reads = ((n as f64) * f).round() as u64;
            let mut device = TableMrtPuf::generate(100 + i as u64, n, 24, 32).unwrap();
            let budget = AttackBudget::new(reads as f64, 1.0).unwrap();
            let mut rng = root.fork_index("brute", (i * 10 + j) as u64);
            let tr = brute_force_attack(&mut device, &budget, trials as usize, &mut rng).unwrap();
            let level = level_bruteforce(budget.dt_access, budget.dt_read, n as f64);
            assert!(
                within_sigmas(tr.success_rate, level, trials, 3.0),
                "N={n} reads={reads}: {} vs {level}",
                tr.success_rate
            );
            checked += 1;
        }
    }
    assert_eq!(checked, 20);
}

#[test]
fn guess_success_tracks_three_quarters_power() {
    let trials = 100_000u64;
    for qubits in [1usize, 2, 4, 8] {
        let stats = quantum_guess_experiment(qubits, trials, &Rng::new(qubits as u64));
        let level = level_quantum_guess(qubits as u32);
        assert!(within_sigmas(stats.full_rate(), level, trials, 3.0), "ℓ={qubits}: {} vs {level}", stats.full_rate());
    }
}

#[test]
fn modeling_accuracy_rises_with_training_size() {
    let sizes = [100usize, 300, 1000, 3000, 10_000];
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for seed in 0..10u64 {
        for &n in &sizes {
            let mut device = ArbiterPuf::generate(seed, 64, 1).unwrap();
            let mut rng = Rng::new(seed).fork_index("ml", n as u64);
            let out = arbiter_ml_experiment(&mut device, n, 2000, &MlConfig::default(), &mut rng).unwrap();
            xs.push(n as f64);
            ys.push(out.held_out_accuracy);
        }
    }
    let rho = spearman(&xs, &ys);
    assert!(rho > 0.8, "spearman {rho}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn required_n_meets_target(
        log_l in -18.0f64..0.0,
        dt_a in 1e-3f64..1e6,
        dt_r in 1e-3f64..1e3,
    ) {
        let l = 10f64.powf(log_l);
        let n = required_n(l, dt_a, dt_r);
        prop_assert!(level_bruteforce(dt_a, dt_r, n as f64) <= l);
        if n > 1 && n < (1u128 << 53) {
            // One pair fewer no longer meets the target.
            prop_assert!(level_bruteforce(dt_a, dt_r, (n - 1) as f64) > l * (1.0 - 1e-9));
        }
    }
}
