//! Closed-form security levels.

/// Borel's bound: a probability below this is treated as never occurring.
pub const BOREL_BOUND: f64 = 1e-15;

/// Δt_t = Δt_r · N, seconds to read every stored pair.
pub fn total_readout_time(dt_read: f64, n: f64) -> f64 {
    dt_read * n
}

/// L_bf = min(1, Δt_a / Δt_t): the largest fraction of pairs an attacker can
/// read within the access window.
pub fn level_bruteforce(dt_access: f64, dt_read: f64, n: f64) -> f64 {
    (dt_access / total_readout_time(dt_read, n)).min(1.0)
}

/// Smallest N with L_bf ≤ L: ⌈L⁻¹ · Δt_a / Δt_r⌉.
///
/// The ratio is computed in floating point, so a value within a relative
/// 1e-9 of an integer is taken to be that integer rather than rounded up
/// by representation error (10⁻¹⁵ has no exact binary form). The result
/// always satisfies `level_bruteforce(Δt_a, Δt_r, N) ≤ L` as evaluated in
/// floating point.
pub fn required_n(l_target: f64, dt_access: f64, dt_read: f64) -> u128 {
    let ratio = (dt_access / dt_read) / l_target;
    let nearest = ratio.round().max(1.0);
    let near = (ratio - nearest).abs() <= 1e-9 * ratio.max(1.0);
    let mut n =
        if near && level_bruteforce(dt_access, dt_read, nearest) <= l_target { nearest } else { ratio.ceil().max(1.0) };
    while level_bruteforce(dt_access, dt_read, n) > l_target && n.is_finite() {
        // Above 2^53 consecutive integers are not representable.
        n = if n < 9_007_199_254_740_992.0 { n + 1.0 } else { n.next_up() };
    }
    if n >= u128::MAX as f64 {
        u128::MAX
    } else {
        n as u128
    }
}

/// Probability of predicting all ℓ raw bits of a conjugate-basis register
/// by guessing the bases: each bit is right with probability 1/2 · 1 +
/// 1/2 · 1/2 = 3/4, independently, so L = (3/4)^ℓ.
pub fn level_quantum_guess(qubits: u32) -> f64 {
    0.75f64.powi(qubits as i32)
}
