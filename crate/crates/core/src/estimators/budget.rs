use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SampleBudget {
    pub n_batch: u64,
    pub k: u64,
    /// `K · N_batch`.
    pub n: u64,
    /// `32 ε⁻² ln(M/δ) ‖g‖₁² ‖O‖²`, the single-formula headline count (diagnostic).
    pub headline_n: f64,
}

/// Smallest odd integer `≥ x` (at least 1).
pub fn next_odd_at_least(x: f64) -> u64 {
    let k = x.ceil().max(1.0) as u64;
    if k % 2 == 0 {
        k + 1
    } else {
        k
    }
}

fn check(epsilon: f64, delta: f64, m: u64, g_norm: f64, norm_sq: f64) -> Result<()> {
    if !(epsilon > 0.0 && epsilon <= 1.0) {
        return Err(Error::InvalidParameter(format!("ε = {epsilon} outside (0, 1]")));
    }
    if !(delta > 0.0 && delta <= 1.0) {
        return Err(Error::InvalidParameter(format!("δ = {delta} outside (0, 1]")));
    }
    if m == 0 {
        return Err(Error::InvalidParameter("M must be at least 1".into()));
    }
    if !(g_norm >= 1.0 && g_norm.is_finite()) || !(norm_sq > 0.0 && norm_sq.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "need ‖g‖₁ ≥ 1 and a positive shadow norm, got {g_norm}, {norm_sq}"
        )));
    }
    Ok(())
}

/// Batch size and batch count so that all `M` estimates are `ε`-accurate with
/// probability at least `1 − δ`.
pub fn sample_budget(
    epsilon: f64,
    delta: f64,
    m: u64,
    g_norm: f64,
    max_shadow_norm_sq: f64,
) -> Result<SampleBudget> {
    check(epsilon, delta, m, g_norm, max_shadow_norm_sq)?;
    let scaled = g_norm * g_norm * max_shadow_norm_sq / (epsilon * epsilon);
    let n_batch = (4.0 * scaled * (1.0 - 1e-12)).ceil() as u64;
    let log_term = (m as f64 / delta).ln();
    let k = next_odd_at_least(8.0 * log_term);
    Ok(SampleBudget {
        n_batch,
        k,
        n: k * n_batch,
        headline_n: 32.0 * log_term * scaled,
    })
}

/// Accuracy guaranteed by `n_s` snapshots, inverting [`sample_budget`].
pub fn epsilon_bound(n_s: u64, delta: f64, m: u64, g_norm: f64, max_shadow_norm_sq: f64) -> Result<f64> {
    check(1.0, delta, m, g_norm, max_shadow_norm_sq)?;
    let k = next_odd_at_least(8.0 * (m as f64 / delta).ln());
    let n_batch = n_s / k;
    if n_batch == 0 {
        return Ok(f64::INFINITY);
    }
    Ok((4.0 * g_norm * g_norm * max_shadow_norm_sq / n_batch as f64).sqrt())
}

/// `3^q (1 − 2α)^{−2q}`.
pub fn shadow_norm_sq(q: usize, alpha: f64) -> Result<f64> {
    if !(0.0..0.5).contains(&alpha) {
        return Err(Error::InvalidParameter(format!("readout α = {alpha} outside [0, 0.5)")));
    }
    Ok(3f64.powi(q as i32) * (1.0 - 2.0 * alpha).powi(-2 * q as i32))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    #[test]
    fn batch_counts() {
        assert_eq!(sample_budget(0.1, 1e-3, 5940, 1.0, 27.0).unwrap().k, 125);
        let b = sample_budget(0.1, (-8.0f64).exp(), 1, 1.0, 3.0).unwrap();
        assert_eq!(b.n_batch, 1200);
        assert_eq!(b.k, 65);
        assert_eq!(b.n, 65 * 1200);
        assert!(sample_budget(0.0, 0.1, 1, 1.0, 3.0).is_err());
        assert!(sample_budget(0.1, 1.5, 1, 1.0, 3.0).is_err());
    }

    #[test]
    fn norms() {
        assert_abs_diff_eq!(shadow_norm_sq(3, 0.0).unwrap(), 27.0);
        assert_abs_diff_eq!(shadow_norm_sq(0, 0.2).unwrap(), 1.0);
        assert_abs_diff_eq!(shadow_norm_sq(3, 0.01).unwrap(), 27.0 / 0.98f64.powi(6), epsilon = 1e-12);
        assert_abs_diff_eq!(shadow_norm_sq(3, 0.01).unwrap(), 30.4795, epsilon = 1e-4);
        assert!(shadow_norm_sq(1, 0.5).is_err());
    }

    #[test]
    fn inversion_round_trip() {
        let b = sample_budget(0.2, 0.01, 30, 1.3, 9.0).unwrap();
        let eps = epsilon_bound(b.n, 0.01, 30, 1.3, 9.0).unwrap();
        assert!(eps <= 0.2 + 1e-12);
    }

    proptest! {
        #[test]
        fn monotone_in_epsilon(e1 in 0.01f64..1.0, e2 in 0.01f64..1.0, m in 1u64..10_000, g in 1.0f64..3.0) {
            let (lo, hi) = if e1 < e2 { (e1, e2) } else { (e2, e1) };
            let a = sample_budget(lo, 0.05, m, g, 9.0).unwrap();
            let b = sample_budget(hi, 0.05, m, g, 9.0).unwrap();
            prop_assert!(b.n <= a.n);
            prop_assert!(a.k % 2 == 1);
        }
    }
}
