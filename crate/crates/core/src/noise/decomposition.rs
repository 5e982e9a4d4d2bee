use super::channel::{invert_pauli_channel, PauliChannel, QuasiChannel};
use super::spec::NoiseSpec;
use crate::circuit::Circuit;
use crate::error::{Error, Result};

/// Quasiprobability decomposition of a noisy circuit's ideal action.
#[derive(Debug, Clone)]
pub struct QuasiDecomposition {
    channels: Vec<Option<PauliChannel>>,
    inverses: Vec<Option<QuasiChannel>>,
    g_norm: f64,
    xi: f64,
}

impl QuasiDecomposition {
    /// Per-gate noise channels in circuit order.
    pub fn channels(&self) -> &[Option<PauliChannel>] {
        &self.channels
    }

    /// Per-gate inverses in circuit order; `None` for noiseless gates.
    pub fn inverses(&self) -> &[Option<QuasiChannel>] {
        &self.inverses
    }

    pub fn gate(&self, id: usize) -> Option<&QuasiChannel> {
        id.checked_sub(1)
            .and_then(|i| self.inverses.get(i))
            .and_then(Option::as_ref)
    }

    pub fn len(&self) -> usize {
        self.inverses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.inverses.is_empty()
    }

    /// `‖γ^(l)‖₁` per gate, 1 for noiseless gates.
    pub fn gate_norms(&self) -> Vec<f64> {
        self.inverses
            .iter()
            .map(|q| q.as_ref().map_or(1.0, QuasiChannel::norm))
            .collect()
    }

    /// `‖g‖₁ = ∏ ‖γ^(l)‖₁`.
    pub fn g_norm(&self) -> f64 {
        self.g_norm
    }

    /// Expected number of errors `Σ p_k`.
    pub fn xi(&self) -> f64 {
        self.xi
    }

    pub fn is_noiseless(&self) -> bool {
        self.inverses.iter().all(Option::is_none)
    }
}

pub fn circuit_decomposition(c: &Circuit, ns: &NoiseSpec) -> Result<QuasiDecomposition> {
    decomposition_from_channels(ns.resolve(c)?)
}

pub fn decomposition_from_channels(channels: Vec<Option<PauliChannel>>) -> Result<QuasiDecomposition> {
    let mut inverses = Vec::with_capacity(channels.len());
    let mut g_norm = 1.0;
    let mut xi = 0.0;
    for (i, ch) in channels.iter().enumerate() {
        let inv = match ch {
            Some(ch) => {
                xi += ch.error_probability();
                let q = invert_pauli_channel(ch).map_err(|e| match e {
                    Error::SingularChannel { eigenvalue, .. } => Error::SingularChannel {
                        gate: Some(i + 1),
                        eigenvalue,
                    },
                    e => e,
                })?;
                g_norm *= q.norm();
                Some(q)
            }
            None => None,
        };
        inverses.push(inv);
    }
    Ok(QuasiDecomposition {
        channels,
        inverses,
        g_norm,
        xi,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::GateKind;
    use crate::noise::GateNoise;
    use approx::assert_abs_diff_eq;

    #[test]
    fn noiseless() {
        let c = Circuit::new(2).with(GateKind::H, &[0]).with(GateKind::Cnot, &[0, 1]);
        let d = circuit_decomposition(&c, &NoiseSpec::noiseless()).unwrap();
        assert_eq!(d.g_norm(), 1.0);
        assert_eq!(d.xi(), 0.0);
        assert!(d.is_noiseless());
    }

    #[test]
    fn depolarizing_product() {
        let mut c = Circuit::new(2);
        let mut spec = NoiseSpec::noiseless();
        let mut want_norm = 1.0;
        let mut want_xi = 0.0;
        for k in 0..60 {
            let id = c.push(GateKind::H, &[k % 2]).unwrap();
            let p = 0.0025 * (1.0 + (k as f64) / 60.0);
            spec.insert(id.to_string(), GateNoise::depolarizing(p));
            want_norm *= (3.0 + 2.0 * p) / (3.0 - 4.0 * p);
            want_xi += p;
        }
        let d = circuit_decomposition(&c, &spec).unwrap();
        assert_abs_diff_eq!(d.g_norm(), want_norm, epsilon = 1e-12);
        assert_abs_diff_eq!(d.xi(), want_xi, epsilon = 1e-12);
        assert_abs_diff_eq!(d.gate_norms().iter().product::<f64>(), d.g_norm(), epsilon = 1e-12);
    }

    #[test]
    fn singular_gate_is_named() {
        let c = Circuit::new(1).with(GateKind::H, &[0]).with(GateKind::X, &[0]);
        let mut spec = NoiseSpec::noiseless();
        spec.insert("2", GateNoise::depolarizing(0.75));
        match circuit_decomposition(&c, &spec) {
            Err(Error::SingularChannel { gate, .. }) => assert_eq!(gate, Some(2)),
            other => panic!("unexpected {other:?}"),
        }
    }
}
