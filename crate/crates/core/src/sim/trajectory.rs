use rand::Rng;

use super::kernels::{self, PauliMasks};
use super::state::StateVector;
use crate::circuit::{Circuit, GateOp};
use crate::error::{Error, Result};
use crate::noise::{pauli_axes, NoiseSpec, PauliChannel};

/// Masks of Pauli `index` (channel indexing) placed on the gate's targets.
pub fn gate_pauli_masks(gate: &GateOp, index: usize) -> PauliMasks {
    PauliMasks::from_axes(
        gate.targets
            .iter()
            .copied()
            .zip(pauli_axes(gate.targets.len(), index)),
    )
}

/// Draws an index from a probability vector.
pub fn sample_index<R: Rng + ?Sized>(probs: &[f64], rng: &mut R) -> usize {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    for (i, &p) in probs.iter().enumerate() {
        acc += p;
        if u < acc {
            return i;
        }
    }
    probs.iter().rposition(|&p| p > 0.0).unwrap_or(0)
}

/// One Monte-Carlo trajectory: per gate the ideal unitary, a Pauli drawn from
/// its channel, then the prescribed recovery Pauli (`0` = identity).
pub fn run_trajectory<R: Rng + ?Sized>(
    c: &Circuit,
    recovery: &[usize],
    channels: &[Option<PauliChannel>],
    rng: &mut R,
) -> Result<StateVector> {
    if recovery.len() != c.len() || channels.len() != c.len() {
        return Err(Error::InvalidParameter(format!(
            "circuit has {} gates but got {} recoveries and {} channels",
            c.len(),
            recovery.len(),
            channels.len()
        )));
    }
    let mut s = StateVector::zero(c.n_qubits())?;
    for ((g, &k), ch) in c.gates().iter().zip(recovery).zip(channels) {
        if k >= 1 << (2 * g.targets.len()) {
            return Err(Error::InvalidParameter(format!(
                "recovery index {k} out of range for gate {}",
                g.id
            )));
        }
        kernels::apply_gate(s.amplitudes_mut(), &g.kind, &g.targets, false);
        let mut m = gate_pauli_masks(g, k);
        if let Some(ch) = ch {
            m = m.xor(gate_pauli_masks(g, sample_index(ch.probs(), rng)));
        }
        if !m.is_identity() {
            s.apply_pauli_masks(m);
        }
    }
    Ok(s)
}

/// [`run_trajectory`] resolving channels from a noise spec.
pub fn run_trajectory_with_spec<R: Rng + ?Sized>(
    c: &Circuit,
    recovery: &[usize],
    noise: &NoiseSpec,
    rng: &mut R,
) -> Result<StateVector> {
    run_trajectory(c, recovery, &noise.resolve(c)?, rng)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::GateKind;
    use crate::noise::GateNoise;
    use crate::sim::{exact_density, DensityMatrix, RecoveryPolicy};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn noiseless_trajectory_is_ideal() {
        let c = Circuit::new(2).with(GateKind::H, &[0]).with(GateKind::Cnot, &[0, 1]);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let s = run_trajectory_with_spec(&c, &[0, 0], &NoiseSpec::noiseless(), &mut rng).unwrap();
        let ideal = StateVector::from_circuit(&c).unwrap();
        for (a, b) in s.amplitudes().iter().zip(ideal.amplitudes()) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn trajectory_average_matches_density() {
        let c = Circuit::new(2)
            .with(GateKind::Ry(0.7), &[0])
            .with(GateKind::Cnot, &[0, 1])
            .with(GateKind::Rx(0.3), &[1]);
        let mut spec = NoiseSpec::noiseless();
        spec.insert("2", GateNoise::biased_pauli(0.2, 0.6));
        spec.insert("3", GateNoise::depolarizing(0.1));
        let channels = spec.resolve(&c).unwrap();
        let exact = exact_density(&c, &spec, RecoveryPolicy::None).unwrap();
        let n = 100_000;
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut sum = vec![vec![num_complex::Complex64::new(0.0, 0.0); 4]; 4];
        let mut sumsq = vec![vec![0.0f64; 4]; 4];
        for _ in 0..n {
            let s = run_trajectory(&c, &[0, 0, 0], &channels, &mut rng).unwrap();
            let rho = DensityMatrix::from_pure(&s).unwrap();
            for r in 0..4 {
                for col in 0..4 {
                    let v = rho.get(r, col);
                    sum[r][col] += v;
                    sumsq[r][col] += v.norm_sqr();
                }
            }
        }
        for r in 0..4 {
            for col in 0..4 {
                let mean = sum[r][col] / n as f64;
                let var = sumsq[r][col] / n as f64 - mean.norm_sqr();
                let se = (var.max(0.0) / n as f64).sqrt().max(1e-12);
                assert!(
                    (mean - exact.get(r, col)).norm() < 5.0 * se + 1e-12,
                    "entry ({r},{col}): {mean} vs {}",
                    exact.get(r, col)
                );
            }
        }
    }
}
