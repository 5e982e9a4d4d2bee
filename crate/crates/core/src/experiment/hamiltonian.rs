use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pauli::{PauliAxis, PauliString};
use crate::sim::kernels::C64;
use crate::sim::{DensityMatrix, StateVector};

/// Dense diagonalisation limit for [`Hamiltonian::ground_energy`].
pub const GROUND_ENERGY_LIMIT: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum HamiltonianKind {
    /// `Σ_k ω_k Z_k + J σ_k·σ_{k+1}` on a ring, `ω_k ~ U(-1, 1)`.
    SpinRing,
    /// `Σ_k J_k σ_k·σ_{k+1}` on an open chain, `J_k ~ U(-1, 1)`.
    HeisenbergChain,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HamiltonianSpec {
    pub kind: HamiltonianKind,
    pub n_qubits: usize,
    /// Ring coupling `J`.
    #[serde(default = "default_coupling")]
    pub coupling: f64,
    /// Seed of the random on-site fields or bond couplings.
    #[serde(default)]
    pub seed: u64,
    /// Explicit per-site fields (ring) or per-bond couplings (chain) instead of a seeded draw.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub values: Option<Vec<f64>>,
}

fn default_coupling() -> f64 {
    0.3
}

impl HamiltonianSpec {
    pub fn spin_ring(n_qubits: usize, seed: u64) -> Self {
        HamiltonianSpec {
            kind: HamiltonianKind::SpinRing,
            n_qubits,
            coupling: default_coupling(),
            seed,
            values: None,
        }
    }

    pub fn heisenberg_chain(n_qubits: usize, seed: u64) -> Self {
        HamiltonianSpec {
            kind: HamiltonianKind::HeisenbergChain,
            n_qubits,
            coupling: default_coupling(),
            seed,
            values: None,
        }
    }

    /// Bonds `(k, k+1)`, closing the ring for [`HamiltonianKind::SpinRing`].
    pub fn bonds(&self) -> Vec<(usize, usize)> {
        let n = self.n_qubits;
        match self.kind {
            HamiltonianKind::SpinRing => (0..n).map(|k| (k, (k + 1) % n)).collect(),
            HamiltonianKind::HeisenbergChain => (0..n.saturating_sub(1)).map(|k| (k, k + 1)).collect(),
        }
    }

    fn random_values(&self, count: usize) -> Result<Vec<f64>> {
        match &self.values {
            Some(v) if v.len() == count => Ok(v.clone()),
            Some(v) => Err(Error::InvalidParameter(format!(
                "expected {count} Hamiltonian values, got {}",
                v.len()
            ))),
            None => {
                let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
                Ok((0..count).map(|_| rng.random_range(-1.0..=1.0)).collect())
            }
        }
    }
}

/// Real linear combination of Pauli strings.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Hamiltonian {
    pub n_qubits: usize,
    pub terms: Vec<(f64, PauliString)>,
}

fn two_site(n: usize, a: usize, b: usize, axis: PauliAxis) -> PauliString {
    PauliString::from_sparse(n, [(a, axis), (b, axis)]).expect("distinct sites")
}

pub fn build_hamiltonian(spec: &HamiltonianSpec) -> Result<Hamiltonian> {
    let n = spec.n_qubits;
    let min = match spec.kind {
        HamiltonianKind::SpinRing => 3,
        HamiltonianKind::HeisenbergChain => 2,
    };
    if n < min || n > 64 {
        return Err(Error::InvalidParameter(format!("{:?} needs {min}..=64 sites, got {n}", spec.kind)));
    }
    if !spec.coupling.is_finite() || spec.values.iter().flatten().any(|v| !v.is_finite()) {
        return Err(Error::InvalidParameter("non-finite Hamiltonian coefficient".into()));
    }
    let mut terms = Vec::new();
    let bonds = spec.bonds();
    match spec.kind {
        HamiltonianKind::SpinRing => {
            let omega = spec.random_values(n)?;
            for (k, w) in omega.into_iter().enumerate() {
                terms.push((w, PauliString::single(n, k, PauliAxis::Z)?));
            }
            for &(a, b) in &bonds {
                for axis in PauliAxis::BASES {
                    terms.push((spec.coupling, two_site(n, a, b, axis)));
                }
            }
        }
        HamiltonianKind::HeisenbergChain => {
            let j = spec.random_values(bonds.len())?;
            for (&(a, b), jk) in bonds.iter().zip(j) {
                for axis in PauliAxis::BASES {
                    terms.push((jk, two_site(n, a, b, axis)));
                }
            }
        }
    }
    Ok(Hamiltonian { n_qubits: n, terms })
}

impl Hamiltonian {
    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn expectation(&self, s: &StateVector) -> Result<f64> {
        let mut e = 0.0;
        for (c, p) in &self.terms {
            e += c * s.expectation(p)?;
        }
        Ok(e)
    }

    pub fn expectation_density(&self, rho: &DensityMatrix) -> Result<f64> {
        let mut e = 0.0;
        for (c, p) in &self.terms {
            e += c * rho.expectation_complex(p)?.re;
        }
        Ok(e)
    }

    /// Dense matrix in the computational basis (qubit `q` is bit `q`).
    pub fn to_matrix(&self) -> Result<DMatrix<C64>> {
        let n = self.n_qubits;
        if n > GROUND_ENERGY_LIMIT {
            return Err(Error::TooLarge {
                n_qubits: n,
                limit: GROUND_ENERGY_LIMIT,
            });
        }
        let dim = 1usize << n;
        let mut h = DMatrix::from_element(dim, dim, C64::new(0.0, 0.0));
        for (c, p) in &self.terms {
            let (x, z) = p.masks();
            let base = p.phase().to_complex() * C64::new(0.0, 1.0).powi(p.y_count() as i32) * *c;
            for b in 0..dim as u64 {
                let v = if (b & z).count_ones() % 2 == 1 { -base } else { base };
                h[((b ^ x) as usize, b as usize)] += v;
            }
        }
        Ok(h)
    }

    /// Smallest eigenvalue by dense diagonalisation.
    pub fn ground_energy(&self) -> Result<f64> {
        let h = self.to_matrix()?;
        let eig = h.symmetric_eigen();
        Ok(eig.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn term_counts() {
        let h = build_hamiltonian(&HamiltonianSpec::spin_ring(12, 1)).unwrap();
        assert_eq!(h.len(), 48);
        assert!(h.terms[..12].iter().all(|(w, _)| (-1.0..=1.0).contains(w)));
        assert!(h.terms[12..].iter().all(|(w, p)| *w == 0.3 && p.weight() == 2));
        let c = build_hamiltonian(&HamiltonianSpec::heisenberg_chain(6, 2)).unwrap();
        assert_eq!(c.len(), 15);
        assert!(build_hamiltonian(&HamiltonianSpec::spin_ring(2, 1)).is_err());
        assert!(build_hamiltonian(&HamiltonianSpec::heisenberg_chain(1, 1)).is_err());
    }

    #[test]
    fn singlet_ground_energy() {
        let mut spec = HamiltonianSpec::heisenberg_chain(2, 0);
        spec.values = Some(vec![1.0]);
        let h = build_hamiltonian(&spec).unwrap();
        assert_eq!(h.len(), 3);
        assert_abs_diff_eq!(h.ground_energy().unwrap(), -3.0, epsilon = 1e-12);
        spec.values = Some(vec![1.0, 2.0]);
        assert!(build_hamiltonian(&spec).is_err());
    }

    #[test]
    fn matrix_matches_statevector_expectation() {
        let h = build_hamiltonian(&HamiltonianSpec::spin_ring(3, 7)).unwrap();
        let m = h.to_matrix().unwrap();
        let c = crate::Circuit::new(3)
            .with(crate::GateKind::Ry(0.3), &[0])
            .with(crate::GateKind::Rx(1.1), &[1])
            .with(crate::GateKind::Cnot, &[0, 2])
            .with(crate::GateKind::Exchange(0.4), &[1, 2]);
        let s = StateVector::from_circuit(&c).unwrap();
        let v = nalgebra::DVector::from_column_slice(s.amplitudes());
        let e = (v.adjoint() * &m * &v)[(0, 0)];
        assert_abs_diff_eq!(e.re, h.expectation(&s).unwrap(), epsilon = 1e-12);
        assert_abs_diff_eq!(e.im, 0.0, epsilon = 1e-12);
    }
}
