//! Single-qubit factors `C_E⁻¹(E_l)` of shadow snapshots.
//!
//! Factors are stored in Pauli coordinates: `r_P = tr(P F)`, so that
//! `F = ½ Σ_P r_P P`. The measurement channel is inverted numerically, which
//! covers uniform, locally biased and readout-noisy POVMs with one code path.

use nalgebra::{Matrix4, Vector4};
use num_complex::Complex64;

use super::ReadoutModel;
use crate::error::{Error, Result};
use crate::pauli::PauliAxis;

/// `[basis X/Y/Z][bit][axis I/X/Y/Z]`.
pub type QubitTable = [[[f64; 4]; 2]; 3];

pub const UNIFORM_BASIS_PROBS: [f64; 3] = [1.0 / 3.0; 3];

/// Pauli coordinates of the effect for basis `t`, outcome `bit`.
fn effect_coords(t: usize, bit: usize, p_t: f64, a_plus: f64, a_minus: f64) -> Vector4<f64> {
    // diagonal readout effect in the rotated frame
    let (m0, m1) = if bit == 0 {
        (1.0 - a_plus, a_minus)
    } else {
        (a_plus, 1.0 - a_minus)
    };
    let mut e = Vector4::zeros();
    e[0] = p_t * (m0 + m1);
    e[t + 1] = p_t * (m0 - m1);
    e
}

/// Pauli coordinates of all factors for one qubit.
pub fn qubit_table(basis_probs: [f64; 3], a_plus: f64, a_minus: f64) -> Result<QubitTable> {
    if !(0.0..0.5).contains(&a_plus) || !(0.0..0.5).contains(&a_minus) {
        return Err(Error::InvalidParameter(format!(
            "readout flips ({a_plus}, {a_minus}) make the measurement channel singular"
        )));
    }
    if basis_probs.iter().any(|&p| !(p > 0.0)) || (basis_probs.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidParameter(format!(
            "basis probabilities {basis_probs:?} must be positive and sum to 1"
        )));
    }
    let mut m = Matrix4::zeros();
    for (t, &p_t) in basis_probs.iter().enumerate() {
        for bit in 0..2 {
            let e = effect_coords(t, bit, p_t, a_plus, a_minus);
            m += 0.5 * e * e.transpose();
        }
    }
    let inv = m.try_inverse().ok_or_else(|| {
        Error::InvalidParameter("measurement channel is not invertible".into())
    })?;
    let mut table = [[[0.0; 4]; 2]; 3];
    for (t, &p_t) in basis_probs.iter().enumerate() {
        for bit in 0..2 {
            let r = inv * effect_coords(t, bit, p_t, a_plus, a_minus);
            table[t][bit] = [r[0], r[1], r[2], r[3]];
        }
    }
    Ok(table)
}

/// `tr(F_a F_b)` for outcome patterns `basis·2 + bit`.
pub fn pair_matrix(table: &QubitTable) -> [[f64; 6]; 6] {
    let mut out = [[0.0; 6]; 6];
    for a in 0..6 {
        for b in 0..6 {
            let (ra, rb) = (&table[a / 2][a % 2], &table[b / 2][b % 2]);
            out[a][b] = 0.5 * ra.iter().zip(rb).map(|(x, y)| x * y).sum::<f64>();
        }
    }
    out
}

/// Per-qubit factor tables for a whole register.
#[derive(Debug, Clone, PartialEq)]
pub struct FactorTable {
    tables: Vec<QubitTable>,
}

impl FactorTable {
    pub fn new(n_qubits: usize, readout: &ReadoutModel, basis_probs: Option<[f64; 3]>) -> Result<Self> {
        readout.validate(n_qubits)?;
        let probs = basis_probs.unwrap_or(UNIFORM_BASIS_PROBS);
        let tables = (0..n_qubits)
            .map(|q| qubit_table(probs, readout.alpha_plus(q), readout.alpha_minus(q)))
            .collect::<Result<_>>()?;
        Ok(FactorTable { tables })
    }

    /// Tables for the ensemble without readout correction.
    pub fn unmitigated(n_qubits: usize, basis_probs: Option<[f64; 3]>) -> Result<Self> {
        Self::new(n_qubits, &ReadoutModel::none(), basis_probs)
    }

    pub fn n_qubits(&self) -> usize {
        self.tables.len()
    }

    pub fn qubit(&self, q: usize) -> &QubitTable {
        &self.tables[q]
    }

    /// `tr(P F)` for measured `basis`/`bit` on qubit `q`.
    #[inline]
    pub fn coeff(&self, q: usize, basis: usize, bit: usize, axis: usize) -> f64 {
        self.tables[q][basis][bit][axis]
    }
}

/// The 2×2 factor for one qubit of a snapshot.
pub fn snapshot_factor(
    basis: PauliAxis,
    bit: bool,
    readout: &ReadoutModel,
    qubit: usize,
    basis_probs: Option<[f64; 3]>,
) -> Result<[[Complex64; 2]; 2]> {
    let t = basis
        .basis_index()
        .ok_or_else(|| Error::InvalidParameter("basis must be X, Y or Z".into()))?;
    let table = qubit_table(
        basis_probs.unwrap_or(UNIFORM_BASIS_PROBS),
        readout.alpha_plus(qubit),
        readout.alpha_minus(qubit),
    )?;
    let [ri, rx, ry, rz] = table[t][bit as usize];
    let c = |re: f64, im: f64| Complex64::new(re / 2.0, im / 2.0);
    Ok([[c(ri + rz, 0.0), c(rx, -ry)], [c(rx, ry), c(ri - rz, 0.0)]])
}

/// `9|⟨s|t⟩|² − 4` for two single-qubit Pauli eigenstates.
pub fn overlap_pair_factor(basis_a: PauliAxis, bit_a: bool, basis_b: PauliAxis, bit_b: bool) -> f64 {
    let bloch = |basis: PauliAxis, bit: bool| -> [f64; 3] {
        let mut v = [0.0; 3];
        v[basis.basis_index().expect("measurement basis")] = if bit { -1.0 } else { 1.0 };
        v
    };
    let (a, b) = (bloch(basis_a, bit_a), bloch(basis_b, bit_b));
    let overlap = 0.5 * (1.0 + a.iter().zip(&b).map(|(x, y)| x * y).sum::<f64>());
    9.0 * overlap - 4.0
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn uniform_factor() {
        let f = snapshot_factor(PauliAxis::Z, false, &ReadoutModel::none(), 0, None).unwrap();
        assert_abs_diff_eq!(f[0][0].re, 2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(f[1][1].re, -1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(f[0][1].norm(), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn symmetric_readout_coefficients() {
        let alpha = 0.01;
        let ro = ReadoutModel::symmetric(alpha).unwrap();
        for basis in PauliAxis::BASES {
            for bit in [false, true] {
                let f = snapshot_factor(basis, bit, &ro, 0, None).unwrap();
                let g = snapshot_factor(basis, bit, &ReadoutModel::none(), 0, None).unwrap();
                // F = 3/(1-2α)|t⟩⟨t| - (1+α)/(1-2α) 𝟙 with |t⟩⟨t| = (G + 𝟙)/3
                for r in 0..2 {
                    for c in 0..2 {
                        let id = if r == c { 1.0 } else { 0.0 };
                        let proj = (g[r][c] + id) / 3.0;
                        let want = proj * (3.0 / (1.0 - 2.0 * alpha)) - id * (1.0 + alpha) / (1.0 - 2.0 * alpha);
                        assert_abs_diff_eq!((f[r][c] - want).norm(), 0.0, epsilon = 1e-12);
                    }
                }
            }
        }
        assert_abs_diff_eq!(3.0 / 0.98, 3.061224, epsilon = 1e-6);
        assert_abs_diff_eq!(1.01 / 0.98, 1.030612, epsilon = 1e-6);
    }

    #[test]
    fn locally_biased_closed_form() {
        let probs = [0.5, 0.2, 0.3];
        let mu: f64 = probs.iter().map(|p| p * p).sum();
        let table = qubit_table(probs, 0.0, 0.0).unwrap();
        for t in 0..3 {
            let p = probs[t];
            for bit in 0..2 {
                let s = if bit == 0 { 1.0 } else { -1.0 };
                // p⁻² E − (μ−p²)/(2pμ) 𝟙 with E = p(𝟙 ± σ)/2
                let ident = 1.0 / (2.0 * p) - (mu - p * p) / (2.0 * p * mu);
                let sigma = s / (2.0 * p);
                assert_abs_diff_eq!(table[t][bit][0], 2.0 * ident, epsilon = 1e-12);
                assert_abs_diff_eq!(table[t][bit][t + 1], 2.0 * sigma, epsilon = 1e-12);
                assert_abs_diff_eq!(table[t][bit][0], p / mu, epsilon = 1e-12);
            }
        }
        // uniform probabilities give 9E − 𝟙
        let uni = qubit_table(UNIFORM_BASIS_PROBS, 0.0, 0.0).unwrap();
        assert_abs_diff_eq!(uni[1][1][0], 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(uni[1][1][2], -3.0, epsilon = 1e-12);
    }

    #[test]
    fn asymmetric_readout_is_unbiased_in_expectation() {
        // E over outcomes of F equals the input state for every Pauli eigenstate
        let (ap, am) = (0.03, 0.11);
        let probs = UNIFORM_BASIS_PROBS;
        let table = qubit_table(probs, ap, am).unwrap();
        for (axis, sign) in [(1, 1.0), (2, -1.0), (3, 1.0)] {
            let mut mean = [0.0; 4];
            for t in 0..3 {
                // probability of measuring bit 0 before readout flips
                let p0 = if t + 1 == axis { (1.0 + sign) / 2.0 } else { 0.5 };
                let q0 = p0 * (1.0 - ap) + (1.0 - p0) * am;
                for (bit, w) in [(0, q0), (1, 1.0 - q0)] {
                    for k in 0..4 {
                        mean[k] += probs[t] * w * table[t][bit][k];
                    }
                }
            }
            for k in 0..4 {
                let want = if k == 0 { 1.0 } else if k == axis { sign } else { 0.0 };
                assert_abs_diff_eq!(mean[k], want, epsilon = 1e-12);
            }
        }
        assert!(qubit_table(probs, 0.5, 0.1).is_err());
    }

    #[test]
    fn pair_factors() {
        let m = pair_matrix(&qubit_table(UNIFORM_BASIS_PROBS, 0.0, 0.0).unwrap());
        for a in 0..6 {
            for b in 0..6 {
                let (ba, bb) = (PauliAxis::BASES[a / 2], PauliAxis::BASES[b / 2]);
                let want = overlap_pair_factor(ba, a % 2 == 1, bb, b % 2 == 1);
                assert_abs_diff_eq!(m[a][b], want, epsilon = 1e-12);
                let expected = if a / 2 != b / 2 { 0.5 } else if a == b { 5.0 } else { -4.0 };
                assert_abs_diff_eq!(m[a][b], expected, epsilon = 1e-12);
            }
        }
    }
}
