use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Classical readout flips: `alpha_plus[q]` is P(0→1), `alpha_minus[q]` is P(1→0).
///
/// An empty list means no flips; a single entry applies to every qubit.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReadoutModel {
    #[serde(default)]
    pub alpha_plus: Vec<f64>,
    #[serde(default)]
    pub alpha_minus: Vec<f64>,
}

impl ReadoutModel {
    pub fn none() -> Self {
        Self::default()
    }

    pub fn symmetric(alpha: f64) -> Result<Self> {
        Self::new(vec![alpha], vec![alpha])
    }

    pub fn new(alpha_plus: Vec<f64>, alpha_minus: Vec<f64>) -> Result<Self> {
        let m = ReadoutModel {
            alpha_plus,
            alpha_minus,
        };
        m.check_ranges()?;
        Ok(m)
    }

    pub fn check_ranges(&self) -> Result<()> {
        for &a in self.alpha_plus.iter().chain(&self.alpha_minus) {
            if !(0.0..0.5).contains(&a) {
                return Err(Error::InvalidParameter(format!(
                    "readout flip probability {a} outside [0, 0.5)"
                )));
            }
        }
        Ok(())
    }

    /// Checks ranges and that per-qubit lists fit `n_qubits`.
    pub fn validate(&self, n_qubits: usize) -> Result<()> {
        self.check_ranges()?;
        for list in [&self.alpha_plus, &self.alpha_minus] {
            if list.len() > 1 && list.len() != n_qubits {
                return Err(Error::SizeMismatch {
                    expected: n_qubits,
                    actual: list.len(),
                });
            }
        }
        Ok(())
    }

    fn lookup(list: &[f64], qubit: usize) -> f64 {
        match list.len() {
            0 => 0.0,
            1 => list[0],
            _ => list.get(qubit).copied().unwrap_or(0.0),
        }
    }

    pub fn alpha_plus(&self, qubit: usize) -> f64 {
        Self::lookup(&self.alpha_plus, qubit)
    }

    pub fn alpha_minus(&self, qubit: usize) -> f64 {
        Self::lookup(&self.alpha_minus, qubit)
    }

    pub fn is_trivial(&self) -> bool {
        self.alpha_plus.iter().chain(&self.alpha_minus).all(|&a| a == 0.0)
    }

    /// Flip probability for a measured bit on `qubit`.
    pub fn flip_probability(&self, qubit: usize, bit: bool) -> f64 {
        if bit {
            self.alpha_minus(qubit)
        } else {
            self.alpha_plus(qubit)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn broadcast_and_validation() {
        let m = ReadoutModel::symmetric(0.01).unwrap();
        assert_eq!(m.alpha_plus(5), 0.01);
        assert!(m.validate(7).is_ok());
        assert!(ReadoutModel::symmetric(0.5).is_err());
        let m = ReadoutModel::new(vec![0.01, 0.02], vec![]).unwrap();
        assert!(m.validate(3).is_err());
        assert_eq!(m.alpha_minus(1), 0.0);
        assert!(ReadoutModel::none().is_trivial());
    }
}
