use std::collections::BTreeMap;

use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::channel::{biased_pauli_channel, PauliChannel};
use crate::circuit::{Circuit, GateOp};
use crate::error::{Error, Result};
use crate::shadow::ReadoutModel;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseModelKind {
    BiasedPauli,
    Depolarizing,
    Explicit,
}

/// Noise attached to one gate (or to every gate sharing a `noise_ref`).
///
/// `biased_pauli` and `depolarizing` act independently on each target qubit.
/// `explicit` lists probabilities by Pauli label over the gate's targets.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GateNoise {
    pub model: NoiseModelKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub probs: Option<BTreeMap<String, f64>>,
}

impl GateNoise {
    pub fn biased_pauli(p: f64, eta: f64) -> Self {
        GateNoise {
            model: NoiseModelKind::BiasedPauli,
            p: Some(p),
            eta: Some(eta),
            probs: None,
        }
    }

    pub fn depolarizing(p: f64) -> Self {
        GateNoise {
            model: NoiseModelKind::Depolarizing,
            p: Some(p),
            eta: None,
            probs: None,
        }
    }

    pub fn explicit(probs: BTreeMap<String, f64>) -> Self {
        GateNoise {
            model: NoiseModelKind::Explicit,
            p: None,
            eta: None,
            probs: Some(probs),
        }
    }

    fn need_p(&self) -> Result<f64> {
        self.p
            .ok_or_else(|| Error::InvalidNoise(format!("model {:?} needs p", self.model)))
    }

    /// Single-qubit channel for product models.
    fn local_channel(&self) -> Result<PauliChannel> {
        match self.model {
            NoiseModelKind::BiasedPauli => {
                let eta = self
                    .eta
                    .ok_or_else(|| Error::InvalidNoise("biased_pauli needs eta".into()))?;
                biased_pauli_channel(self.need_p()?, eta)
            }
            NoiseModelKind::Depolarizing => PauliChannel::depolarizing(self.need_p()?),
            NoiseModelKind::Explicit => unreachable!(),
        }
    }

    pub fn channel(&self, arity: usize) -> Result<PauliChannel> {
        match self.model {
            NoiseModelKind::Explicit => {
                let probs = self
                    .probs
                    .as_ref()
                    .ok_or_else(|| Error::InvalidNoise("explicit model needs probs".into()))?;
                PauliChannel::from_labels(arity, probs)
            }
            _ => {
                let local = self.local_channel()?;
                let mut ch = local.clone();
                for _ in 1..arity {
                    ch = ch.tensor(&local)?;
                }
                Ok(ch)
            }
        }
    }

    /// Rate used for boosting: `p`, or the error probability of an explicit channel.
    pub fn rate(&self) -> Result<f64> {
        match self.model {
            NoiseModelKind::Explicit => {
                let probs = self
                    .probs
                    .as_ref()
                    .ok_or_else(|| Error::InvalidNoise("explicit model needs probs".into()))?;
                Ok(probs
                    .iter()
                    .filter(|(k, _)| k.chars().any(|c| c != 'I'))
                    .map(|(_, v)| v)
                    .sum())
            }
            _ => self.need_p(),
        }
    }

    fn scaled(&self, factor: f64) -> Result<GateNoise> {
        let mut out = self.clone();
        match self.model {
            NoiseModelKind::Explicit => {
                let probs = out.probs.as_mut().expect("rate() checked probs");
                probs.retain(|k, _| k.chars().any(|c| c != 'I'));
                probs.values_mut().for_each(|v| *v *= factor);
            }
            _ => out.p = Some(self.need_p()? * factor),
        }
        Ok(out)
    }
}

/// Per-gate noise plus readout errors.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseSpec {
    #[serde(default)]
    pub gates: BTreeMap<String, GateNoise>,
    #[serde(default)]
    pub readout: ReadoutModel,
}

impl NoiseSpec {
    pub fn noiseless() -> Self {
        Self::default()
    }

    pub fn with_readout(mut self, readout: ReadoutModel) -> Self {
        self.readout = readout;
        self
    }

    pub fn insert(&mut self, key: impl Into<String>, noise: GateNoise) {
        self.gates.insert(key.into(), noise);
    }

    /// The same noise on every gate of the circuit (optionally only two-qubit gates).
    pub fn uniform(circuit: &Circuit, noise: GateNoise, two_qubit_only: bool) -> Self {
        let mut spec = NoiseSpec::default();
        for g in circuit.gates() {
            if !two_qubit_only || g.kind.arity() == 2 {
                spec.insert(g.noise_key(), noise.clone());
            }
        }
        spec
    }

    /// Biased-Pauli noise with per-gate `p ~ N(p_mean, p_mean)` truncated to
    /// `[0, 0.5)` and `η ~ N(eta_mean, eta_sd)` truncated to `[0, 1]`.
    pub fn random_biased<R: Rng + ?Sized>(
        circuit: &Circuit,
        p_mean: f64,
        eta_mean: f64,
        eta_sd: f64,
        two_qubit_only: bool,
        rng: &mut R,
    ) -> Result<Self> {
        if !(0.0..0.5).contains(&p_mean) || !(0.0..=1.0).contains(&eta_mean) || eta_sd < 0.0 {
            return Err(Error::InvalidParameter(format!(
                "noise draw parameters p = {p_mean}, η = {eta_mean} ± {eta_sd}"
            )));
        }
        let p_dist = Normal::new(p_mean, p_mean).map_err(|e| Error::InvalidParameter(e.to_string()))?;
        let eta_dist =
            Normal::new(eta_mean, eta_sd).map_err(|e| Error::InvalidParameter(e.to_string()))?;
        let mut spec = NoiseSpec::default();
        for g in circuit.gates() {
            if two_qubit_only && g.kind.arity() != 2 {
                continue;
            }
            let p = loop {
                let x = p_dist.sample(rng);
                if (0.0..0.5).contains(&x) {
                    break x;
                }
            };
            let eta = loop {
                let x = eta_dist.sample(rng);
                if (0.0..=1.0).contains(&x) {
                    break x;
                }
            };
            spec.insert(g.noise_key(), GateNoise::biased_pauli(p, eta));
        }
        Ok(spec)
    }

    fn lookup(&self, gate: &GateOp) -> Result<Option<&GateNoise>> {
        match &gate.noise_ref {
            Some(key) => self.gates.get(key).map(Some).ok_or_else(|| {
                Error::InvalidNoise(format!(
                    "gate {} references unknown noise entry {key:?}",
                    gate.id
                ))
            }),
            None => Ok(self.gates.get(&gate.id.to_string())),
        }
    }

    /// Channel of each gate, in circuit order; `None` for noiseless gates.
    pub fn resolve(&self, circuit: &Circuit) -> Result<Vec<Option<PauliChannel>>> {
        self.readout.validate(circuit.n_qubits())?;
        circuit
            .gates()
            .iter()
            .map(|g| {
                let Some(noise) = self.lookup(g)? else {
                    return Ok(None);
                };
                let ch = noise.channel(g.kind.arity()).map_err(|e| match e {
                    Error::InvalidNoise(m) | Error::InvalidParameter(m) => {
                        Error::InvalidNoise(format!("gate {}: {m}", g.id))
                    }
                    other => other,
                })?;
                Ok((!ch.is_identity()).then_some(ch))
            })
            .collect()
    }

    /// Mean rate over all entries.
    pub fn native_rate(&self) -> Result<f64> {
        if self.gates.is_empty() {
            return Ok(0.0);
        }
        let mut total = 0.0;
        for g in self.gates.values() {
            total += g.rate()?;
        }
        Ok(total / self.gates.len() as f64)
    }

    /// Every gate's rate scaled by `target / native_rate`.
    pub fn boosted(&self, target: f64) -> Result<NoiseSpec> {
        let native = self.native_rate()?;
        if target < native {
            return Err(Error::BoostBelowNative { native, target });
        }
        if native == 0.0 {
            return if target == 0.0 {
                Ok(self.clone())
            } else {
                Err(Error::InvalidParameter("cannot boost a noiseless spec".into()))
            };
        }
        self.scaled(target / native)
    }

    /// Every gate's rate multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Result<NoiseSpec> {
        if !(factor >= 0.0 && factor.is_finite()) {
            return Err(Error::InvalidParameter(format!("noise scale factor {factor}")));
        }
        let mut out = self.clone();
        for (key, g) in &self.gates {
            out.gates.insert(key.clone(), g.scaled(factor)?);
        }
        Ok(out)
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        let spec: NoiseSpec = serde_json::from_str(s)?;
        spec.readout.check_ranges()?;
        Ok(spec)
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(self).expect("noise spec serialises")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::GateKind;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn circ() -> Circuit {
        let mut c = Circuit::new(2);
        c.push(GateKind::H, &[0]).unwrap();
        c.push_with_noise(GateKind::Cnot, &[0, 1], Some("cx")).unwrap();
        c.push(GateKind::Cz, &[0, 1]).unwrap();
        c
    }

    #[test]
    fn json_and_resolution() {
        let json = r#"{
            "gates": {
                "cx": {"model": "depolarizing", "p": 0.01},
                "3": {"model": "explicit", "probs": {"XI": 0.1, "ZZ": 0.05}}
            },
            "readout": {"alpha_plus": [0.01], "alpha_minus": [0.02]}
        }"#;
        let spec = NoiseSpec::from_json_str(json).unwrap();
        let chans = spec.resolve(&circ()).unwrap();
        assert!(chans[0].is_none());
        let cx = chans[1].as_ref().unwrap();
        assert_eq!(cx.arity(), 2);
        assert!((cx.prob("II") - 0.99 * 0.99).abs() < 1e-15);
        assert!((chans[2].as_ref().unwrap().prob("II") - 0.85).abs() < 1e-15);
        let back = NoiseSpec::from_json_str(&spec.to_json_string()).unwrap();
        assert_eq!(back, spec);
    }

    #[test]
    fn dangling_reference() {
        let spec = NoiseSpec::default();
        assert!(spec.resolve(&circ()).is_err());
        let bad = r#"{"gates":{"1":{"model":"biased_pauli","p":0.1}}}"#;
        let mut c = Circuit::new(1);
        c.push(GateKind::H, &[0]).unwrap();
        assert!(NoiseSpec::from_json_str(bad).unwrap().resolve(&c).is_err());
        assert!(NoiseSpec::from_json_str(r#"{"gates":{},"extra":1}"#).is_err());
    }

    #[test]
    fn boosting_scales_rates() {
        let mut c = Circuit::new(2);
        c.push(GateKind::Cz, &[0, 1]).unwrap();
        c.push(GateKind::Cz, &[0, 1]).unwrap();
        let spec = NoiseSpec::uniform(&c, GateNoise::depolarizing(1e-3), false);
        let b = spec.boosted(2e-3).unwrap();
        assert!((b.gates["1"].p.unwrap() - 2e-3).abs() < 1e-18);
        assert!(matches!(spec.boosted(5e-4), Err(Error::BoostBelowNative { .. })));
    }

    #[test]
    fn random_draws_in_range() {
        let mut c = Circuit::new(3);
        for _ in 0..50 {
            c.push(GateKind::Cnot, &[0, 1]).unwrap();
            c.push(GateKind::H, &[2]).unwrap();
        }
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let spec = NoiseSpec::random_biased(&c, 0.01, 0.9, 0.015, true, &mut rng).unwrap();
        assert_eq!(spec.gates.len(), 50);
        for g in spec.gates.values() {
            assert!((0.0..0.5).contains(&g.p.unwrap()));
            assert!((0.0..=1.0).contains(&g.eta.unwrap()));
        }
    }
}
