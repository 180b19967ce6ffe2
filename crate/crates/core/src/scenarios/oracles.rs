//! Closed-form coverage and capacity for the toy and binary scenarios.

use super::data::BinaryCounts;
use crate::error::{param, Result};
use crate::kernel::beta_cdf;
use crate::random_set::IntervalSet;

/// Prior coverage of [θ1, θ2] with θ1 ~ U[0,1], θ2 ~ U[1,2].
pub fn analytic_coverage_toy(gamma: f64) -> f64 {
    if (0.0..=1.0).contains(&gamma) {
        gamma
    } else if (1.0..=2.0).contains(&gamma) {
        2.0 - gamma
    } else {
        0.0
    }
}

/// Prior hitting probability P([θ1, θ2] ∩ K ≠ ∅) = P(θ1 ≤ K.hi) · P(θ2 ≥ K.lo).
pub fn analytic_capacity_toy(probe: &IntervalSet) -> f64 {
    let below = probe.hi().clamp(0.0, 1.0);
    let above = (2.0 - probe.lo()).clamp(0.0, 1.0);
    below * above
}

/// α* = α + (n1, n0, m).
pub fn binary_posterior_params(alpha: [f64; 3], counts: &BinaryCounts) -> [f64; 3] {
    [
        alpha[0] + counts.n1 as f64,
        alpha[1] + counts.n0_obs as f64,
        alpha[2] + counts.m as f64,
    ]
}

/// P(p11 ≤ γ ≤ p11 + p̃·0) for (p11, p01, p̃·0) ~ Dir(alpha).
///
/// Since p11 ≤ p11 + p̃·0 always, the event is {p11 ≤ γ} minus {p11 + p̃·0 < γ},
/// a difference of two Beta CDFs.
pub fn analytic_coverage_binary(gamma: f64, alpha: [f64; 3]) -> Result<f64> {
    if !(0.0..=1.0).contains(&gamma) {
        return param(format!("binary coverage is defined on [0, 1], got {gamma}"));
    }
    let lower = beta_cdf(gamma, alpha[0], alpha[1] + alpha[2])?;
    let upper = beta_cdf(gamma, alpha[0] + alpha[2], alpha[1])?;
    Ok((lower - upper).clamp(0.0, 1.0))
}

/// Posterior means of p11 and p11 + p̃·0.
pub fn binary_point_estimate(alpha: [f64; 3], counts: &BinaryCounts) -> IntervalSet {
    let total = alpha.iter().sum::<f64>() + counts.total() as f64;
    let lo = (alpha[0] + counts.n1 as f64) / total;
    let hi = (alpha[0] + alpha[2] + (counts.n1 + counts.m) as f64) / total;
    IntervalSet::new(lo, hi).expect("posterior means are ordered")
}
