//! Backward light cones of observables.

use std::collections::{BTreeSet, HashMap};
use std::sync::{Arc, Mutex};

use crate::circuit::Circuit;
use crate::error::{Error, Result};
use crate::pauli::PauliString;

/// Ids of the gates in the backward light cone of `p`'s support.
///
/// Gates are swept from last to first; a gate joins the cone when it touches a
/// live qubit, and then all of its targets become live. Gate noise is assumed
/// to act only on the gate's own targets.
pub fn light_cone(circuit: &Circuit, p: &PauliString) -> Result<BTreeSet<usize>> {
    if circuit.n_qubits() != p.n_qubits() {
        return Err(Error::SizeMismatch {
            expected: circuit.n_qubits(),
            actual: p.n_qubits(),
        });
    }
    Ok(cone_of_support(circuit, p.qubits()))
}

fn cone_of_support(circuit: &Circuit, support: impl Iterator<Item = usize>) -> BTreeSet<usize> {
    let mut live = vec![false; circuit.n_qubits()];
    for q in support {
        live[q] = true;
    }
    let mut cone = BTreeSet::new();
    for gate in circuit.gates().iter().rev() {
        if gate.targets.iter().any(|&t| live[t]) {
            cone.insert(gate.id);
            for &t in &gate.targets {
                live[t] = true;
            }
        }
    }
    cone
}

/// Light cones of one circuit, memoised by support.
pub struct LightConeCache<'c> {
    circuit: &'c Circuit,
    cones: Mutex<HashMap<Vec<usize>, Arc<BTreeSet<usize>>>>,
}

impl<'c> LightConeCache<'c> {
    pub fn new(circuit: &'c Circuit) -> Self {
        LightConeCache {
            circuit,
            cones: Mutex::new(HashMap::new()),
        }
    }

    pub fn circuit(&self) -> &Circuit {
        self.circuit
    }

    pub fn get(&self, p: &PauliString) -> Result<Arc<BTreeSet<usize>>> {
        if self.circuit.n_qubits() != p.n_qubits() {
            return Err(Error::SizeMismatch {
                expected: self.circuit.n_qubits(),
                actual: p.n_qubits(),
            });
        }
        let key: Vec<usize> = p.qubits().collect();
        let mut cones = self.cones.lock().expect("light cone cache poisoned");
        let cone = cones
            .entry(key)
            .or_insert_with_key(|k| Arc::new(cone_of_support(self.circuit, k.iter().copied())));
        Ok(Arc::clone(cone))
    }
}
