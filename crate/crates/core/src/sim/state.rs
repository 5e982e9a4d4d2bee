use rand::Rng;

use super::kernels::{self, PauliMasks, C64};
use crate::circuit::Circuit;
use crate::error::{Error, Result};
use crate::pauli::{PauliAxis, PauliString};

/// Largest statevector the simulator will allocate.
pub const STATEVECTOR_LIMIT: usize = 24;

#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    n_qubits: usize,
    amps: Vec<C64>,
}

impl StateVector {
    /// `|0…0⟩`.
    pub fn zero(n_qubits: usize) -> Result<Self> {
        if n_qubits > STATEVECTOR_LIMIT {
            return Err(Error::TooLarge {
                n_qubits,
                limit: STATEVECTOR_LIMIT,
            });
        }
        let mut amps = vec![C64::new(0.0, 0.0); 1 << n_qubits];
        amps[0] = C64::new(1.0, 0.0);
        Ok(StateVector { n_qubits, amps })
    }

    pub fn from_amplitudes(amps: Vec<C64>) -> Result<Self> {
        if !amps.len().is_power_of_two() {
            return Err(Error::InvalidParameter(format!(
                "amplitude count {} is not a power of two",
                amps.len()
            )));
        }
        let n_qubits = amps.len().trailing_zeros() as usize;
        Ok(StateVector { n_qubits, amps })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    pub fn amplitudes_mut(&mut self) -> &mut [C64] {
        &mut self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn apply_circuit(&mut self, c: &Circuit) -> Result<()> {
        if c.n_qubits() != self.n_qubits {
            return Err(Error::SizeMismatch {
                expected: self.n_qubits,
                actual: c.n_qubits(),
            });
        }
        for g in c.gates() {
            kernels::apply_gate(&mut self.amps, &g.kind, &g.targets, false);
        }
        Ok(())
    }

    /// Ideal output state of a circuit on `|0…0⟩`.
    pub fn from_circuit(c: &Circuit) -> Result<Self> {
        let mut s = Self::zero(c.n_qubits())?;
        s.apply_circuit(c)?;
        Ok(s)
    }

    /// Applies a Pauli up to global phase.
    pub fn apply_pauli_masks(&mut self, m: PauliMasks) {
        kernels::apply_pauli_unphased(&mut self.amps, m);
    }

    /// `⟨ψ|P|ψ⟩` (real part; exact for Hermitian `P`).
    pub fn expectation(&self, p: &PauliString) -> Result<f64> {
        if p.n_qubits() != self.n_qubits {
            return Err(Error::SizeMismatch {
                expected: self.n_qubits,
                actual: p.n_qubits(),
            });
        }
        let m = PauliMasks::from_axes(p.support().iter().map(|(&q, &a)| (q, a)));
        Ok((kernels::pauli_expectation(&self.amps, m) * p.phase().to_complex()).re)
    }

    /// Rotates each qubit into its measurement basis.
    pub fn rotate_to_bases(&mut self, bases: &[PauliAxis]) {
        for (q, &b) in bases.iter().enumerate() {
            if b != PauliAxis::Z {
                kernels::apply_1q(&mut self.amps, q, &kernels::basis_rotation(b));
            }
        }
    }

    /// Born probabilities in the computational basis.
    pub fn probabilities(&self) -> Vec<f64> {
        self.amps.iter().map(|a| a.norm_sqr()).collect()
    }

    /// Samples a basis-state index from the Born distribution.
    pub fn sample_index<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let u: f64 = rng.random::<f64>() * self.norm_sqr();
        let mut acc = 0.0;
        for (i, a) in self.amps.iter().enumerate() {
            acc += a.norm_sqr();
            if u < acc {
                return i;
            }
        }
        // rounding: fall back to the last state with nonzero weight
        self.amps.iter().rposition(|a| a.norm_sqr() > 0.0).unwrap_or(0)
    }
}

/// Measures every qubit in the given Pauli basis; bit 0 is the +1 outcome.
pub fn measure_in_bases<R: Rng + ?Sized>(
    s: &StateVector,
    bases: &[PauliAxis],
    rng: &mut R,
) -> Result<Vec<bool>> {
    if bases.len() != s.n_qubits() {
        return Err(Error::SizeMismatch {
            expected: s.n_qubits(),
            actual: bases.len(),
        });
    }
    if bases.iter().any(|b| *b == PauliAxis::I) {
        return Err(Error::InvalidParameter("measurement basis must be X, Y or Z".into()));
    }
    let mut rotated = s.clone();
    rotated.rotate_to_bases(bases);
    let idx = rotated.sample_index(rng);
    Ok((0..s.n_qubits()).map(|q| idx >> q & 1 == 1).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::GateKind;
    use approx::assert_abs_diff_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn single_x_gate() {
        let s = StateVector::from_circuit(&Circuit::new(1).with(GateKind::X, &[0])).unwrap();
        assert_abs_diff_eq!(s.amplitudes()[1].re, 1.0);
    }

    #[test]
    fn measurement_conventions() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let zero = StateVector::zero(1).unwrap();
        let plus = StateVector::from_circuit(&Circuit::new(1).with(GateKind::H, &[0])).unwrap();
        for _ in 0..100 {
            assert_eq!(measure_in_bases(&zero, &[PauliAxis::Z], &mut rng).unwrap(), vec![false]);
            assert_eq!(measure_in_bases(&plus, &[PauliAxis::X], &mut rng).unwrap(), vec![false]);
        }
        let n = 10_000;
        let ones = (0..n)
            .filter(|_| measure_in_bases(&zero, &[PauliAxis::X], &mut rng).unwrap()[0])
            .count() as f64;
        let sigma = (n as f64 * 0.25).sqrt();
        assert!((ones - n as f64 / 2.0).abs() < 3.0 * sigma);
    }

    #[test]
    fn too_large() {
        assert!(matches!(StateVector::zero(25), Err(Error::TooLarge { .. })));
    }

    #[test]
    fn norm_preserved() {
        let c = Circuit::new(3)
            .with(GateKind::Ry(0.3), &[0])
            .with(GateKind::Rx(1.1), &[1])
            .with(GateKind::Cnot, &[0, 2])
            .with(
                GateKind::PauliRot {
                    axes: [PauliAxis::Y, PauliAxis::Z],
                    angle: 0.4,
                },
                &[2, 1],
            )
            .with(GateKind::S, &[2])
            .with(GateKind::Cz, &[1, 2]);
        let mut s = StateVector::zero(3).unwrap();
        for g in c.gates() {
            kernels::apply_gate(s.amplitudes_mut(), &g.kind, &g.targets, false);
            assert_abs_diff_eq!(s.norm_sqr(), 1.0, epsilon = 1e-12);
        }
    }
}
