//! Binomial summaries for Monte-Carlo estimates.

use serde::{Deserialize, Serialize};

const Z95: f64 = 1.959_963_984_540_054;

/// Standard deviation of a binomial proportion with success probability
/// `p` over `n` trials.
pub fn binomial_sigma(p: f64, n: u64) -> f64 {
    (p * (1.0 - p) / n as f64).sqrt()
}

/// `|observed − expected| ≤ k·σ(expected, n)`.
pub fn within_sigmas(observed: f64, expected: f64, n: u64, k: f64) -> bool {
    (observed - expected).abs() <= k * binomial_sigma(expected, n)
}

/// Wilson score interval at 95 %.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

pub fn wilson_ci95(successes: u64, n: u64) -> Interval {
    if n == 0 {
        return Interval { lo: 0.0, hi: 1.0 };
    }
    let n_f = n as f64;
    let p = successes as f64 / n_f;
    let z2 = Z95 * Z95;
    let denom = 1.0 + z2 / n_f;
    let centre = (p + z2 / (2.0 * n_f)) / denom;
    let half = Z95 * (p * (1.0 - p) / n_f + z2 / (4.0 * n_f * n_f)).sqrt() / denom;
    Interval { lo: (centre - half).max(0.0), hi: (centre + half).min(1.0) }
}

fn ranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; values.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && values[order[j + 1]] == values[order[i]] {
            j += 1;
        }
        let avg = (i + j) as f64 / 2.0 + 1.0;
        for &idx in &order[i..=j] {
            ranks[idx] = avg;
        }
        i = j + 1;
    }
    ranks
}

/// Spearman rank correlation with average ranks for ties.
pub fn spearman(x: &[f64], y: &[f64]) -> f64 {
    assert_eq!(x.len(), y.len(), "spearman needs paired samples");
    let (rx, ry) = (ranks(x), ranks(y));
    let n = rx.len() as f64;
    let (mx, my) = (rx.iter().sum::<f64>() / n, ry.iter().sum::<f64>() / n);
    let cov: f64 = rx.iter().zip(&ry).map(|(a, b)| (a - mx) * (b - my)).sum();
    let vx: f64 = rx.iter().map(|a| (a - mx).powi(2)).sum();
    let vy: f64 = ry.iter().map(|b| (b - my).powi(2)).sum();
    cov / (vx * vy).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sigma_and_window() {
        assert!((binomial_sigma(0.5, 100) - 0.05).abs() < 1e-12);
        assert!(within_sigmas(0.74, 0.75, 10_000, 3.0));
        assert!(!within_sigmas(0.70, 0.75, 10_000, 3.0));
    }

    #[test]
    fn wilson_contains_estimate() {
        let ci = wilson_ci95(25, 100);
        assert!(ci.lo < 0.25 && 0.25 < ci.hi);
        // Reference values for 25/100 (Wilson): [0.1754, 0.3430].
        assert!((ci.lo - 0.1754).abs() < 1e-3 && (ci.hi - 0.3430).abs() < 1e-3, "{ci:?}");
        let zero = wilson_ci95(0, 1000);
        assert!(zero.lo < 1e-12);
        assert!(zero.hi < 0.004);
    }

    #[test]
    fn spearman_extremes() {
        assert!((spearman(&[1.0, 2.0, 3.0], &[10.0, 20.0, 30.0]) - 1.0).abs() < 1e-12);
        assert!((spearman(&[1.0, 2.0, 3.0], &[3.0, 2.0, 1.0]) + 1.0).abs() < 1e-12);
        assert!((spearman(&[1.0, 2.0, 3.0, 4.0], &[1.0, 3.0, 2.0, 4.0]) - 0.8).abs() < 1e-12);
    }
}
