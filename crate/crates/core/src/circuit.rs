//! Circuit intermediate representation.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pauli::PauliAxis;

/// Ideal gate kinds. Rotations use the `exp(-i θ P / 2)` convention.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GateKind {
    Rx(f64),
    Ry(f64),
    Rz(f64),
    H,
    S,
    X,
    Y,
    Z,
    Cnot,
    Cz,
    /// Two-qubit Pauli rotation `exp(-i θ P⊗Q / 2)`.
    PauliRot { axes: [PauliAxis; 2], angle: f64 },
    /// Exchange rotation `exp(-i θ (XX + YY + ZZ) / 2)`.
    Exchange(f64),
}

impl GateKind {
    pub fn arity(&self) -> usize {
        match self {
            GateKind::Cnot | GateKind::Cz | GateKind::PauliRot { .. } | GateKind::Exchange(_) => 2,
            _ => 1,
        }
    }

    pub fn angle(&self) -> Option<f64> {
        match *self {
            GateKind::Rx(a) | GateKind::Ry(a) | GateKind::Rz(a) | GateKind::Exchange(a) => Some(a),
            GateKind::PauliRot { angle, .. } => Some(angle),
            _ => None,
        }
    }

    pub fn name(&self) -> String {
        match self {
            GateKind::Rx(_) => "rx".into(),
            GateKind::Ry(_) => "ry".into(),
            GateKind::Rz(_) => "rz".into(),
            GateKind::H => "h".into(),
            GateKind::S => "s".into(),
            GateKind::X => "x".into(),
            GateKind::Y => "y".into(),
            GateKind::Z => "z".into(),
            GateKind::Cnot => "cnot".into(),
            GateKind::Cz => "cz".into(),
            GateKind::Exchange(_) => "exchange".into(),
            GateKind::PauliRot { axes, .. } => format!(
                "r{}{}",
                axes[0].as_char().to_ascii_lowercase(),
                axes[1].as_char().to_ascii_lowercase()
            ),
        }
    }

    pub fn from_name(name: &str, angle: Option<f64>) -> Result<Self> {
        let need_angle = || {
            angle.ok_or_else(|| Error::InvalidCircuit(format!("gate {name:?} needs an angle")))
        };
        let kind = match name {
            "rx" => GateKind::Rx(need_angle()?),
            "ry" => GateKind::Ry(need_angle()?),
            "rz" => GateKind::Rz(need_angle()?),
            "h" => GateKind::H,
            "s" => GateKind::S,
            "x" => GateKind::X,
            "y" => GateKind::Y,
            "z" => GateKind::Z,
            "cnot" | "cx" => GateKind::Cnot,
            "cz" => GateKind::Cz,
            "exchange" => GateKind::Exchange(need_angle()?),
            other => {
                let axis = |c: char| match c {
                    'x' => Some(PauliAxis::X),
                    'y' => Some(PauliAxis::Y),
                    'z' => Some(PauliAxis::Z),
                    _ => None,
                };
                let chars: Vec<char> = other.chars().collect();
                match chars.as_slice() {
                    ['r', a, b] => match (axis(*a), axis(*b)) {
                        (Some(a), Some(b)) => GateKind::PauliRot {
                            axes: [a, b],
                            angle: need_angle()?,
                        },
                        _ => return Err(Error::InvalidCircuit(format!("unknown gate {other:?}"))),
                    },
                    _ => return Err(Error::InvalidCircuit(format!("unknown gate {other:?}"))),
                }
            }
        };
        if let Some(a) = kind.angle() {
            if !a.is_finite() {
                return Err(Error::InvalidCircuit(format!("non-finite angle for {name:?}")));
            }
        }
        Ok(kind)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GateOp {
    pub id: usize,
    pub kind: GateKind,
    pub targets: Vec<usize>,
    pub noise_ref: Option<String>,
}

impl GateOp {
    /// Key under which this gate's channel is looked up in a noise spec.
    pub fn noise_key(&self) -> String {
        self.noise_ref.clone().unwrap_or_else(|| self.id.to_string())
    }

    pub fn touches(&self, qubit: usize) -> bool {
        self.targets.contains(&qubit)
    }
}

/// Ordered gate list applied to `|0…0⟩`; gate ids run `1..=ν`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Circuit {
    n_qubits: usize,
    gates: Vec<GateOp>,
}

impl Circuit {
    pub fn new(n_qubits: usize) -> Self {
        Circuit {
            n_qubits,
            gates: Vec::new(),
        }
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn gates(&self) -> &[GateOp] {
        &self.gates
    }

    pub fn len(&self) -> usize {
        self.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    pub fn gate(&self, id: usize) -> Option<&GateOp> {
        id.checked_sub(1).and_then(|i| self.gates.get(i))
    }

    /// Appends a gate and returns its id.
    pub fn push(&mut self, kind: GateKind, targets: &[usize]) -> Result<usize> {
        self.push_with_noise(kind, targets, None)
    }

    pub fn push_with_noise(
        &mut self,
        kind: GateKind,
        targets: &[usize],
        noise_ref: Option<&str>,
    ) -> Result<usize> {
        let op = GateOp {
            id: self.gates.len() + 1,
            kind,
            targets: targets.to_vec(),
            noise_ref: noise_ref.map(str::to_string),
        };
        self.check_gate(&op)?;
        self.gates.push(op);
        Ok(self.gates.len())
    }

    /// Builder-style [`Circuit::push`] that panics on invalid input.
    pub fn with(mut self, kind: GateKind, targets: &[usize]) -> Self {
        self.push(kind, targets).expect("invalid gate");
        self
    }

    /// Returns a copy where gate `id` acts as the identity on the same qubits.
    pub fn with_identity_at(&self, id: usize) -> Circuit {
        let mut c = self.clone();
        if let Some(op) = id.checked_sub(1).and_then(|i| c.gates.get_mut(i)) {
            op.kind = if op.kind.arity() == 2 {
                GateKind::PauliRot {
                    axes: [PauliAxis::Z, PauliAxis::Z],
                    angle: 0.0,
                }
            } else {
                GateKind::Rz(0.0)
            };
        }
        c
    }

    fn check_gate(&self, op: &GateOp) -> Result<()> {
        if op.targets.len() != op.kind.arity() {
            return Err(Error::InvalidCircuit(format!(
                "gate {} ({}) expects {} targets, got {}",
                op.id,
                op.kind.name(),
                op.kind.arity(),
                op.targets.len()
            )));
        }
        for (i, &t) in op.targets.iter().enumerate() {
            if t >= self.n_qubits {
                return Err(Error::InvalidCircuit(format!(
                    "gate {} targets qubit {t} but the circuit has {} qubits",
                    op.id, self.n_qubits
                )));
            }
            if op.targets[..i].contains(&t) {
                return Err(Error::InvalidCircuit(format!(
                    "gate {} repeats target {t}",
                    op.id
                )));
            }
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_qubits == 0 {
            return Err(Error::InvalidCircuit("circuit has no qubits".into()));
        }
        for (i, op) in self.gates.iter().enumerate() {
            if op.id != i + 1 {
                return Err(Error::InvalidCircuit(format!(
                    "gate ids must run 1..ν in order; found {} at position {}",
                    op.id,
                    i + 1
                )));
            }
            self.check_gate(op)?;
        }
        Ok(())
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        let raw: RawCircuit = serde_json::from_str(s)?;
        raw.try_into()
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(&RawCircuit::from(self)).expect("circuit serialises")
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGate {
    id: usize,
    kind: String,
    targets: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    angle: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    noise_ref: Option<String>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCircuit {
    n_qubits: usize,
    gates: Vec<RawGate>,
}

impl From<&Circuit> for RawCircuit {
    fn from(c: &Circuit) -> Self {
        RawCircuit {
            n_qubits: c.n_qubits,
            gates: c
                .gates
                .iter()
                .map(|g| RawGate {
                    id: g.id,
                    kind: g.kind.name(),
                    targets: g.targets.clone(),
                    angle: g.kind.angle(),
                    noise_ref: g.noise_ref.clone(),
                })
                .collect(),
        }
    }
}

impl TryFrom<RawCircuit> for Circuit {
    type Error = Error;

    fn try_from(raw: RawCircuit) -> Result<Self> {
        let mut gates = Vec::with_capacity(raw.gates.len());
        for g in raw.gates {
            let kind = GateKind::from_name(&g.kind, g.angle)?;
            gates.push(GateOp {
                id: g.id,
                kind,
                targets: g.targets,
                noise_ref: g.noise_ref,
            });
        }
        let c = Circuit {
            n_qubits: raw.n_qubits,
            gates,
        };
        c.validate()?;
        Ok(c)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_round_trip() {
        let mut c = Circuit::new(3);
        c.push(GateKind::H, &[0]).unwrap();
        c.push_with_noise(GateKind::Cnot, &[0, 1], Some("cx")).unwrap();
        c.push(
            GateKind::PauliRot {
                axes: [PauliAxis::X, PauliAxis::Y],
                angle: 0.25,
            },
            &[1, 2],
        )
        .unwrap();
        c.push(GateKind::Exchange(-0.5), &[2, 0]).unwrap();
        let back = Circuit::from_json_str(&c.to_json_string()).unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn rejects_bad_targets() {
        let mut c = Circuit::new(2);
        assert!(c.push(GateKind::Cnot, &[0, 0]).is_err());
        assert!(c.push(GateKind::H, &[2]).is_err());
        assert!(c.push(GateKind::H, &[0, 1]).is_err());
    }

    #[test]
    fn rejects_out_of_order_ids() {
        let json = r#"{"n_qubits":2,"gates":[{"id":2,"kind":"h","targets":[0]}]}"#;
        assert!(Circuit::from_json_str(json).is_err());
        let json = r#"{"n_qubits":2,"gates":[{"id":1,"kind":"rx","targets":[0]}]}"#;
        assert!(Circuit::from_json_str(json).is_err());
        let json = r#"{"n_qubits":2,"gates":[{"id":1,"kind":"rq","targets":[0],"angle":1}]}"#;
        assert!(Circuit::from_json_str(json).is_err());
    }
}
