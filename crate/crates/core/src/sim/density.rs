use serde::Serialize;

use super::kernels::{self, PauliMasks, C64};
use super::state::StateVector;
use crate::circuit::{Circuit, GateOp};
use crate::error::{Error, Result};
use crate::noise::{
    invert_pauli_channel, pauli_axes, NoiseSpec, PauliChannel, QuasiChannel,
};
use crate::pauli::{PauliAxis, PauliString};

/// Largest density matrix the oracle will allocate.
pub const DENSITY_LIMIT: usize = 12;

/// What to apply after each noisy gate's channel in [`exact_density`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RecoveryPolicy {
    None,
    /// The exact inverse channel, which yields the ideal state.
    FullPecAverage,
}

/// Dense density matrix stored as a `4^n` vector with entry `(r, c)` at
/// index `r | c << n`.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    n_qubits: usize,
    data: Vec<C64>,
}

impl DensityMatrix {
    pub fn zero_state(n_qubits: usize) -> Result<Self> {
        if n_qubits > DENSITY_LIMIT {
            return Err(Error::TooLarge {
                n_qubits,
                limit: DENSITY_LIMIT,
            });
        }
        let mut data = vec![C64::new(0.0, 0.0); 1 << (2 * n_qubits)];
        data[0] = C64::new(1.0, 0.0);
        Ok(DensityMatrix { n_qubits, data })
    }

    pub fn from_pure(s: &StateVector) -> Result<Self> {
        let n = s.n_qubits();
        if n > DENSITY_LIMIT {
            return Err(Error::TooLarge {
                n_qubits: n,
                limit: DENSITY_LIMIT,
            });
        }
        let a = s.amplitudes();
        let dim = a.len();
        let mut data = vec![C64::new(0.0, 0.0); dim * dim];
        for c in 0..dim {
            for r in 0..dim {
                data[r | c << n] = a[r] * a[c].conj();
            }
        }
        Ok(DensityMatrix { n_qubits: n, data })
    }

    /// `𝟙 / 2^n`.
    pub fn maximally_mixed(n_qubits: usize) -> Result<Self> {
        let mut rho = Self::zero_state(n_qubits)?;
        rho.data[0] = C64::new(0.0, 0.0);
        let dim = 1usize << n_qubits;
        for r in 0..dim {
            rho.data[r | r << n_qubits] = C64::new(1.0 / dim as f64, 0.0);
        }
        Ok(rho)
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        1 << self.n_qubits
    }

    pub fn get(&self, row: usize, col: usize) -> C64 {
        self.data[row | col << self.n_qubits]
    }

    pub fn trace(&self) -> C64 {
        (0..self.dim()).map(|r| self.get(r, r)).sum()
    }

    pub fn purity(&self) -> f64 {
        self.data.iter().map(|x| x.norm_sqr()).sum()
    }

    pub fn apply_gate(&mut self, g: &GateOp) {
        kernels::apply_gate(&mut self.data, &g.kind, &g.targets, false);
        let shifted: Vec<usize> = g.targets.iter().map(|t| t + self.n_qubits).collect();
        kernels::apply_gate(&mut self.data, &g.kind, &shifted, true);
    }

    /// `ρ ← P ρ P†`.
    pub fn conjugate_pauli(&mut self, m: PauliMasks) {
        kernels::apply_pauli_unphased(&mut self.data, m.doubled(self.n_qubits));
    }

    /// `ρ ← Σ_k w_k P_k ρ P_k` over Paulis on `targets` indexed like channel probabilities.
    fn apply_pauli_mixture(&mut self, targets: &[usize], weights: &[f64]) {
        let original = self.data.clone();
        self.data.iter_mut().for_each(|x| *x *= weights[0]);
        let mut scratch = original.clone();
        for (k, &w) in weights.iter().enumerate().skip(1) {
            if w == 0.0 {
                continue;
            }
            scratch.copy_from_slice(&original);
            let m = PauliMasks::from_axes(targets.iter().copied().zip(pauli_axes(targets.len(), k)));
            kernels::apply_pauli_unphased(&mut scratch, m.doubled(self.n_qubits));
            for (d, s) in self.data.iter_mut().zip(&scratch) {
                *d += w * s;
            }
        }
    }

    pub fn apply_channel(&mut self, targets: &[usize], ch: &PauliChannel) {
        self.apply_pauli_mixture(targets, ch.probs());
    }

    pub fn apply_quasi_channel(&mut self, targets: &[usize], q: &QuasiChannel) {
        self.apply_pauli_mixture(targets, q.gamma());
    }

    /// `tr(Pρ)` including the phase of `P`.
    pub fn expectation_complex(&self, p: &PauliString) -> Result<C64> {
        if p.n_qubits() != self.n_qubits {
            return Err(Error::SizeMismatch {
                expected: self.n_qubits,
                actual: p.n_qubits(),
            });
        }
        let m = PauliMasks::from_axes(p.support().iter().map(|(&q, &a)| (q, a)));
        let n = self.n_qubits;
        // tr(Pρ) = Σ_j ⟨j^x|P|j⟩ ρ(j, j^x)
        let mut acc = C64::new(0.0, 0.0);
        for j in 0..self.dim() {
            let v = self.data[j | (j ^ m.x) << n];
            acc += if (j & m.z).count_ones() % 2 == 1 { -v } else { v };
        }
        Ok(acc * kernels::y_phase(m.n_y) * p.phase().to_complex())
    }

    /// Reduced density matrix on `qubits` (in the given order).
    pub fn partial_trace_keep(&self, qubits: &[usize]) -> Result<DensityMatrix> {
        if qubits.is_empty() {
            return Err(Error::InvalidParameter("empty subsystem".into()));
        }
        for (i, &q) in qubits.iter().enumerate() {
            if q >= self.n_qubits || qubits[..i].contains(&q) {
                return Err(Error::InvalidParameter(format!("bad subsystem qubit {q}")));
            }
        }
        let k = qubits.len();
        let n = self.n_qubits;
        let rest: Vec<usize> = (0..n).filter(|q| !qubits.contains(q)).collect();
        let spread = |bits: usize, positions: &[usize]| -> usize {
            positions
                .iter()
                .enumerate()
                .fold(0, |acc, (i, &q)| acc | ((bits >> i & 1) << q))
        };
        let mut out = vec![C64::new(0.0, 0.0); 1 << (2 * k)];
        for a in 0..1usize << k {
            let ra = spread(a, qubits);
            for b in 0..1usize << k {
                let rb = spread(b, qubits);
                let mut acc = C64::new(0.0, 0.0);
                for r in 0..1usize << rest.len() {
                    let rr = spread(r, &rest);
                    acc += self.get(ra | rr, rb | rr);
                }
                out[a | b << k] = acc;
            }
        }
        Ok(DensityMatrix {
            n_qubits: k,
            data: out,
        })
    }

    /// Hermitian matrix as an nalgebra matrix (for eigenvalue checks).
    pub fn to_matrix(&self) -> nalgebra::DMatrix<C64> {
        let d = self.dim();
        nalgebra::DMatrix::from_fn(d, d, |r, c| self.get(r, c))
    }

    pub fn to_json(&self) -> serde_json::Value {
        #[derive(Serialize)]
        struct Export {
            n_qubits: usize,
            re: Vec<Vec<f64>>,
            im: Vec<Vec<f64>>,
        }
        let d = self.dim();
        let rows = |f: fn(C64) -> f64| -> Vec<Vec<f64>> {
            (0..d).map(|r| (0..d).map(|c| f(self.get(r, c))).collect()).collect()
        };
        serde_json::to_value(Export {
            n_qubits: self.n_qubits,
            re: rows(|z| z.re),
            im: rows(|z| z.im),
        })
        .expect("matrix serialises")
    }
}

/// Evolves `|0…0⟩⟨0…0|` through the circuit with each gate followed by its
/// channel (and, with [`RecoveryPolicy::FullPecAverage`], by the channel's inverse).
pub fn exact_density(c: &Circuit, noise: &NoiseSpec, policy: RecoveryPolicy) -> Result<DensityMatrix> {
    exact_density_with_channels(c, &noise.resolve(c)?, policy)
}

pub fn exact_density_with_channels(
    c: &Circuit,
    channels: &[Option<PauliChannel>],
    policy: RecoveryPolicy,
) -> Result<DensityMatrix> {
    if channels.len() != c.len() {
        return Err(Error::InvalidNoise(format!(
            "{} channels for {} gates",
            channels.len(),
            c.len()
        )));
    }
    let mut rho = DensityMatrix::zero_state(c.n_qubits())?;
    for (g, ch) in c.gates().iter().zip(channels) {
        rho.apply_gate(g);
        if let Some(ch) = ch {
            rho.apply_channel(&g.targets, ch);
            if policy == RecoveryPolicy::FullPecAverage {
                let inv = invert_pauli_channel(ch).map_err(|e| match e {
                    Error::SingularChannel { eigenvalue, .. } => Error::SingularChannel {
                        gate: Some(g.id),
                        eigenvalue,
                    },
                    e => e,
                })?;
                rho.apply_quasi_channel(&g.targets, &inv);
            }
        }
    }
    Ok(rho)
}

/// `tr(Pρ)`.
pub fn exact_expectation(rho: &DensityMatrix, p: &PauliString) -> Result<f64> {
    Ok(rho.expectation_complex(p)?.re)
}

/// `tr(ρ_Q²)`.
pub fn exact_subsystem_purity(rho: &DensityMatrix, qubits: &[usize]) -> Result<f64> {
    Ok(rho.partial_trace_keep(qubits)?.purity())
}

/// `Tr(Π ρ Π O) / Tr(Π ρ)` with `Π` the uniform average over a Pauli group.
pub fn exact_symmetry_verified(
    rho: &DensityMatrix,
    o: &PauliString,
    group: &[PauliString],
) -> Result<f64> {
    let mut num = C64::new(0.0, 0.0);
    let mut den = C64::new(0.0, 0.0);
    for s in group {
        den += rho.expectation_complex(s)?;
        for s2 in group {
            let sos = crate::pauli::pauli_mul(&crate::pauli::pauli_mul(s, o)?, s2)?;
            num += rho.expectation_complex(&sos)?;
        }
    }
    let num = num / group.len() as f64;
    if den.norm() < 1e-14 {
        return Err(Error::DegenerateProjection {
            value: den.re,
            stderr: 0.0,
        });
    }
    Ok((num / den).re)
}

/// All Pauli strings supported within `qubits` (including the identity).
pub fn paulis_on(n_qubits: usize, qubits: &[usize]) -> Vec<PauliString> {
    let k = qubits.len();
    (0..1usize << (2 * k))
        .map(|idx| {
            PauliString::from_sparse(
                n_qubits,
                qubits
                    .iter()
                    .copied()
                    .zip(pauli_axes(k, idx))
                    .filter(|(_, a)| *a != PauliAxis::I),
            )
            .expect("distinct qubits")
        })
        .collect()
}
