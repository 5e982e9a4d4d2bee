//! Analytic inverses of the single-qubit biased-Pauli and depolarizing channels.
//!
//! Both return `γ` in `[I, X, Y, Z]` order together with `‖γ‖₁`.

use crate::error::{Error, Result};

/// Inverse of the biased-Pauli channel with error rate `p` and bias `eta`.
pub fn biased_pauli_inverse(p: f64, eta: f64) -> Result<([f64; 4], f64)> {
    let lam_x = 1.0 - p * (1.0 + eta);
    let lam_z = 1.0 - 2.0 * p * (1.0 - eta);
    if lam_x.abs() < super::SINGULAR_THRESHOLD || lam_z.abs() < super::SINGULAR_THRESHOLD {
        return Err(Error::SingularChannel {
            gate: None,
            eigenvalue: lam_x.min(lam_z),
        });
    }
    let scale = 0.5 * (1.0 / lam_z + 2.0 / lam_x) - 0.5;
    let d = 2.0 + 2.0 * p * (eta - 1.0) * (1.0 + p + p * eta);
    let g0 = scale * (2.0 - p * (p * eta * eta - p - 2.0 * eta + 4.0)) / d;
    let g1 = -scale * p * (eta - 1.0) * (p * eta + p - 1.0) / d;
    let g3 = -scale * p * (2.0 * eta + p * (eta * eta - 1.0)) / d;
    let gamma = [g0, g1, g1, g3];
    let norm = gamma.iter().map(|g| g.abs()).sum();
    Ok((gamma, norm))
}

/// Inverse of the depolarizing channel with error probability `p`.
pub fn depolarizing_inverse(p: f64) -> Result<([f64; 4], f64)> {
    if (3.0 - 4.0 * p).abs() < 3.0 * super::SINGULAR_THRESHOLD {
        return Err(Error::SingularChannel {
            gate: None,
            eigenvalue: 1.0 - 4.0 * p / 3.0,
        });
    }
    let norm = (3.0 + 2.0 * p) / (3.0 - 4.0 * p);
    let c = norm / (3.0 + 2.0 * p);
    Ok(([c * (3.0 - p), -c * p, -c * p, -c * p], norm))
}

/// Cost-model estimate `(1+p)/(1-p)` of a single-gate norm. Not used for weights.
pub fn diagnostic_norm(p: f64) -> f64 {
    (1.0 + p) / (1.0 - p)
}
