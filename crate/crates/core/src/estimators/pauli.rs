use crate::circuit::Circuit;
use crate::error::{Error, Result};
use crate::lightcone::light_cone;
use crate::pauli::PauliString;
use crate::shadow::{FactorTable, ShadowMode, ShadowSet};

use super::mom::{mom_estimate, Estimate, MomConfig};

/// Snapshot factor tables for a set, with or without readout correction.
pub fn factor_table(set: &ShadowSet, cfg: &MomConfig) -> Result<FactorTable> {
    let h = set.header();
    if cfg.readout_mitigation {
        FactorTable::new(h.n_qubits, &h.readout, h.basis_probs)
    } else {
        FactorTable::unmitigated(h.n_qubits, h.basis_probs)
    }
}

/// Per-snapshot reconstruction of `tr(Pρ̂)` for one Pauli string.
#[derive(Debug, Clone)]
pub struct PauliEvaluator {
    /// `(qubit, basis index, per-bit coefficient)` for the support.
    factors: Vec<(usize, u8, [f64; 2])>,
    phase_sign: f64,
}

impl PauliEvaluator {
    pub fn new(p: &PauliString, tables: &FactorTable) -> Result<Self> {
        if p.n_qubits() != tables.n_qubits() {
            return Err(Error::SizeMismatch {
                expected: tables.n_qubits(),
                actual: p.n_qubits(),
            });
        }
        let phase_sign = p
            .phase()
            .sign()
            .ok_or_else(|| Error::InvalidParameter(format!("observable {p} is not Hermitian")))?;
        let factors = p
            .support()
            .iter()
            .map(|(&q, &axis)| {
                let b = axis.basis_index().expect("support has no identities");
                let a = axis.index();
                (q, b as u8, [tables.coeff(q, b, 0, a), tables.coeff(q, b, 1, a)])
            })
            .collect();
        Ok(PauliEvaluator {
            factors,
            phase_sign,
        })
    }

    pub fn is_identity(&self) -> bool {
        self.factors.is_empty()
    }

    /// `sign(P) · ∏_q tr(P_q F_q)` for snapshot `i`, without the norm and snapshot sign.
    #[inline]
    pub fn raw(&self, set: &ShadowSet, i: usize) -> f64 {
        let bases = set.bases_of(i);
        let bits = set.bits_of(i);
        let mut v = self.phase_sign;
        for &(q, b, c) in &self.factors {
            if bases[q] != b {
                return 0.0;
            }
            v *= c[bits[q] as usize];
        }
        v
    }
}

/// Single-shot values `‖g‖₁ · sign · tr(Pρ̂_i)` for every snapshot.
pub fn single_shot_values(set: &ShadowSet, p: &PauliString, cfg: &MomConfig) -> Result<Vec<f64>> {
    let eval = PauliEvaluator::new(p, &factor_table(set, cfg)?)?;
    if eval.is_identity() {
        return Ok(vec![eval.phase_sign; set.len()]);
    }
    let g = set.g_norm();
    Ok((0..set.len())
        .map(|i| g * set.sign(i) as f64 * eval.raw(set, i))
        .collect())
}

pub fn estimate_pauli(set: &ShadowSet, p: &PauliString, cfg: &MomConfig) -> Result<Estimate> {
    if p.n_qubits() != set.n_qubits() {
        return Err(Error::SizeMismatch {
            expected: set.n_qubits(),
            actual: p.n_qubits(),
        });
    }
    if p.is_identity() {
        let s = p
            .phase()
            .sign()
            .ok_or_else(|| Error::InvalidParameter(format!("observable {p} is not Hermitian")))?;
        return Ok(Estimate::exact(s));
    }
    if set.is_empty() {
        return Err(Error::EmptyShadow);
    }
    mom_estimate(&single_shot_values(set, p, cfg)?, cfg.k, set.g_norm())
}

/// Gate positions (0-based) in the light cone of `p`, and their norm product.
pub fn light_cone_norm(set: &ShadowSet, p: &PauliString, c: &Circuit) -> Result<(Vec<usize>, f64)> {
    let h = set.header();
    if h.mode != ShadowMode::Pec || !h.gate_log {
        return Err(Error::MissingGateLog);
    }
    if c.len() != h.n_gates() {
        return Err(Error::InvalidCircuit(format!(
            "shadow set records {} gates, circuit has {}",
            h.n_gates(),
            c.len()
        )));
    }
    let positions: Vec<usize> = light_cone(c, p)?.into_iter().map(|id| id - 1).collect();
    let norm = positions.iter().map(|&g| h.gate_norms[g]).product();
    Ok((positions, norm))
}

/// Single-shot values re-signed and rescaled over the light cone of `p`.
pub fn single_shot_values_lightcone(
    set: &ShadowSet,
    p: &PauliString,
    c: &Circuit,
    cfg: &MomConfig,
) -> Result<(Vec<f64>, f64)> {
    let (positions, norm) = light_cone_norm(set, p, c)?;
    let eval = PauliEvaluator::new(p, &factor_table(set, cfg)?)?;
    let mut out = Vec::with_capacity(set.len());
    for i in 0..set.len() {
        let raw = eval.raw(set, i);
        out.push(if raw == 0.0 {
            0.0
        } else {
            norm * set.sign_over(i, &positions)? as f64 * raw
        });
    }
    Ok((out, norm))
}

pub fn estimate_pauli_lightcone(
    set: &ShadowSet,
    p: &PauliString,
    c: &Circuit,
    cfg: &MomConfig,
) -> Result<Estimate> {
    if p.is_identity() {
        return estimate_pauli(set, p, cfg);
    }
    if set.is_empty() {
        return Err(Error::EmptyShadow);
    }
    let (values, norm) = single_shot_values_lightcone(set, p, c, cfg)?;
    mom_estimate(&values, cfg.k, norm)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pauli::PauliAxis;
    use crate::shadow::{ReadoutModel, ShadowHeader, Snapshot};

    fn one(basis: PauliAxis, bit: bool) -> ShadowSet {
        let mut set = ShadowSet::new(ShadowHeader::new(1, ShadowMode::Conventional));
        set.push(&Snapshot {
            bases: vec![basis],
            bits: vec![bit],
            sign: 1,
            gate_log: vec![],
        })
        .unwrap();
        set
    }

    #[test]
    fn single_shot_examples() {
        let z0 = PauliString::parse("Z0", 1).unwrap();
        let cfg = MomConfig::default();
        assert_eq!(single_shot_values(&one(PauliAxis::Z, false), &z0, &cfg).unwrap(), vec![3.0]);
        assert_eq!(single_shot_values(&one(PauliAxis::Z, true), &z0, &cfg).unwrap(), vec![-3.0]);
        assert_eq!(single_shot_values(&one(PauliAxis::X, false), &z0, &cfg).unwrap(), vec![0.0]);
        let mz = PauliString::parse("-Z0", 1).unwrap();
        assert_eq!(single_shot_values(&one(PauliAxis::Z, false), &mz, &cfg).unwrap(), vec![-3.0]);
        let iy = PauliString::parse("iY", 1).unwrap();
        assert!(single_shot_values(&one(PauliAxis::Y, false), &iy, &cfg).is_err());
    }

    #[test]
    fn identity_and_empty() {
        let set = ShadowSet::new(ShadowHeader::new(2, ShadowMode::Conventional));
        let id = PauliString::identity(2);
        assert_eq!(estimate_pauli(&set, &id, &MomConfig::default()).unwrap().value, 1.0);
        let z = PauliString::parse("ZI", 2).unwrap();
        assert!(matches!(estimate_pauli(&set, &z, &MomConfig::default()), Err(Error::EmptyShadow)));
    }

    #[test]
    fn readout_coefficient() {
        let mut h = ShadowHeader::new(1, ShadowMode::Conventional);
        h.readout = ReadoutModel::symmetric(0.01).unwrap();
        let mut set = ShadowSet::new(h);
        set.push(&Snapshot {
            bases: vec![PauliAxis::Y],
            bits: vec![false],
            sign: 1,
            gate_log: vec![],
        })
        .unwrap();
        let y = PauliString::parse("Y", 1).unwrap();
        let v = single_shot_values(&set, &y, &MomConfig::default()).unwrap()[0];
        assert!((v - 3.0 / 0.98).abs() < 1e-12);
        let raw = single_shot_values(&set, &y, &MomConfig::default().unmitigated()).unwrap()[0];
        assert!((raw - 3.0).abs() < 1e-12);
    }
}
