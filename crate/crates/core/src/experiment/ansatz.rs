use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::hamiltonian::{build_hamiltonian, Hamiltonian, HamiltonianKind, HamiltonianSpec};
use crate::circuit::{Circuit, GateKind};
use crate::error::{Error, Result};
use crate::sim::StateVector;

/// Number of ansatz angles: an initial `Ry` per qubit, then per layer one
/// angle per `Z` field (ring only) and one per bond. Zero layers take none.
pub fn hva_param_count(spec: &HamiltonianSpec, layers: usize) -> usize {
    if layers == 0 {
        return 0;
    }
    let per_layer = spec.bonds().len()
        + match spec.kind {
            HamiltonianKind::SpinRing => spec.n_qubits,
            HamiltonianKind::HeisenbergChain => 0,
        };
    spec.n_qubits + layers * per_layer
}

/// Even bonds first, then odd ones.
fn brickwork(bonds: &[(usize, usize)]) -> Vec<(usize, usize)> {
    let mut out: Vec<_> = bonds.iter().copied().step_by(2).collect();
    out.extend(bonds.iter().copied().skip(1).step_by(2));
    out
}

/// Layered ansatz `Ry` layer, then per layer `Rz(θ)` on every field term and
/// an exchange rotation `exp(-iθ σ·σ/2)` on every bond. Only the exchange
/// gates are two-qubit, so two-qubit-only noise specs make exactly them noisy.
pub fn build_hva_ansatz(spec: &HamiltonianSpec, layers: usize, params: &[f64]) -> Result<Circuit> {
    let need = hva_param_count(spec, layers);
    if params.len() != need {
        return Err(Error::InvalidParameter(format!(
            "ansatz with {layers} layers needs {need} parameters, got {}",
            params.len()
        )));
    }
    if params.iter().any(|t| !t.is_finite()) {
        return Err(Error::InvalidParameter("non-finite ansatz parameter".into()));
    }
    let n = spec.n_qubits;
    let mut c = Circuit::new(n);
    if layers == 0 {
        return Ok(c);
    }
    let bonds = brickwork(&spec.bonds());
    let mut it = params.iter().copied();
    let mut next = || it.next().expect("count checked");
    for q in 0..n {
        c.push(GateKind::Ry(next()), &[q])?;
    }
    for _ in 0..layers {
        if spec.kind == HamiltonianKind::SpinRing {
            for q in 0..n {
                c.push(GateKind::Rz(next()), &[q])?;
            }
        }
        for &(a, b) in &bonds {
            c.push(GateKind::Exchange(next()), &[a, b])?;
        }
    }
    Ok(c)
}

/// Optimised ansatz angles for one Hamiltonian instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnsatzFixture {
    pub name: String,
    pub hamiltonian: HamiltonianSpec,
    pub layers: usize,
    pub params: Vec<f64>,
    pub energy: f64,
    pub ground_energy: f64,
}

const FIXTURES: &[&str] = &[
    include_str!("../../fixtures/spin-ring-6-l5.json"),
    include_str!("../../fixtures/heisenberg-chain-6-l8.json"),
];

/// Shipped fixtures.
pub fn fixtures() -> Vec<AnsatzFixture> {
    FIXTURES
        .iter()
        .map(|s| serde_json::from_str(s).expect("shipped fixture parses"))
        .collect()
}

/// Shipped fixture for this Hamiltonian and depth, if any.
pub fn find_fixture(spec: &HamiltonianSpec, layers: usize) -> Option<AnsatzFixture> {
    fixtures()
        .into_iter()
        .find(|f| f.hamiltonian == *spec && f.layers == layers)
}

fn energy_of(spec: &HamiltonianSpec, h: &Hamiltonian, layers: usize, params: &[f64]) -> Result<f64> {
    let c = build_hva_ansatz(spec, layers, params)?;
    h.expectation(&StateVector::from_circuit(&c)?)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptimizerOptions {
    pub steps: usize,
    pub learning_rate: f64,
    pub restarts: usize,
    pub seed: u64,
}

impl Default for OptimizerOptions {
    fn default() -> Self {
        OptimizerOptions {
            steps: 1500,
            learning_rate: 0.05,
            restarts: 3,
            seed: 0,
        }
    }
}

/// Adam on central-difference gradients of the exact ansatz energy; keeps the
/// best of several seeded starts.
pub fn optimize_hva(spec: &HamiltonianSpec, layers: usize, opts: &OptimizerOptions) -> Result<AnsatzFixture> {
    let h = build_hamiltonian(spec)?;
    let dim = hva_param_count(spec, layers);
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let init = Normal::new(0.0, 0.5).expect("valid normal");
    let (b1, b2, eps, fd) = (0.9, 0.999, 1e-8, 1e-5);
    let mut best: Option<(f64, Vec<f64>)> = None;
    for _ in 0..opts.restarts.max(1) {
        let mut x: Vec<f64> = (0..dim).map(|_| init.sample(&mut rng)).collect();
        let (mut m, mut v) = (vec![0.0; dim], vec![0.0; dim]);
        for t in 1..=opts.steps {
            let mut grad = vec![0.0; dim];
            for i in 0..dim {
                let keep = x[i];
                x[i] = keep + fd;
                let up = energy_of(spec, &h, layers, &x)?;
                x[i] = keep - fd;
                let down = energy_of(spec, &h, layers, &x)?;
                x[i] = keep;
                grad[i] = (up - down) / (2.0 * fd);
            }
            for i in 0..dim {
                m[i] = b1 * m[i] + (1.0 - b1) * grad[i];
                v[i] = b2 * v[i] + (1.0 - b2) * grad[i] * grad[i];
                let mh = m[i] / (1.0 - b1.powi(t as i32));
                let vh = v[i] / (1.0 - b2.powi(t as i32));
                x[i] -= opts.learning_rate * mh / (vh.sqrt() + eps);
            }
        }
        let e = energy_of(spec, &h, layers, &x)?;
        if best.as_ref().is_none_or(|(b, _)| e < *b) {
            best = Some((e, x));
        }
    }
    let (energy, params) = best.expect("at least one restart");
    let name = match spec.kind {
        HamiltonianKind::SpinRing => format!("spin-ring-{}-l{layers}", spec.n_qubits),
        HamiltonianKind::HeisenbergChain => format!("heisenberg-chain-{}-l{layers}", spec.n_qubits),
    };
    Ok(AnsatzFixture {
        name,
        hamiltonian: spec.clone(),
        layers,
        params,
        energy,
        ground_energy: h.ground_energy()?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn zero_layers_is_empty() {
        let spec = HamiltonianSpec::spin_ring(4, 0);
        assert_eq!(hva_param_count(&spec, 0), 0);
        assert!(build_hva_ansatz(&spec, 0, &[]).unwrap().is_empty());
        assert!(build_hva_ansatz(&spec, 0, &[0.1]).is_err());
    }

    #[test]
    fn zero_angles_act_as_identity() {
        let spec = HamiltonianSpec::spin_ring(4, 0);
        let n = hva_param_count(&spec, 1);
        assert_eq!(n, 4 + 4 + 4);
        let c = build_hva_ansatz(&spec, 1, &vec![0.0; n]).unwrap();
        let s = StateVector::from_circuit(&c).unwrap();
        assert_abs_diff_eq!(s.amplitudes()[0].norm_sqr(), 1.0, epsilon = 1e-12);
        let chain = HamiltonianSpec::heisenberg_chain(5, 0);
        assert_eq!(hva_param_count(&chain, 3), 5 + 3 * 4);
    }

    #[test]
    fn two_qubit_gates_are_the_bonds() {
        let spec = HamiltonianSpec::spin_ring(6, 0);
        let c = build_hva_ansatz(&spec, 5, &vec![0.1; hva_param_count(&spec, 5)]).unwrap();
        assert_eq!(c.gates().iter().filter(|g| g.kind.arity() == 2).count(), 30);
    }

    #[test]
    fn fixtures_are_consistent() {
        for f in fixtures() {
            let h = build_hamiltonian(&f.hamiltonian).unwrap();
            let e = energy_of(&f.hamiltonian, &h, f.layers, &f.params).unwrap();
            assert_abs_diff_eq!(e, f.energy, epsilon = 1e-9);
            assert!(f.energy >= f.ground_energy - 1e-9);
            assert_eq!(find_fixture(&f.hamiltonian, f.layers).unwrap().name, f.name);
        }
    }

    #[test]
    fn optimiser_lowers_energy() {
        let spec = HamiltonianSpec::heisenberg_chain(3, 4);
        let opts = OptimizerOptions {
            steps: 200,
            restarts: 1,
            ..Default::default()
        };
        let f = optimize_hva(&spec, 2, &opts).unwrap();
        let h = build_hamiltonian(&spec).unwrap();
        let zero = energy_of(&spec, &h, 2, &vec![0.0; f.params.len()]).unwrap();
        assert!(f.energy < zero);
        assert!(f.energy >= f.ground_energy - 1e-9);
    }
}
