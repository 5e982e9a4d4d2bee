//! Pauli channels and their quasiprobability inverses.
//!
//! A Pauli channel on `a` qubits is stored as a probability vector of length
//! `4^a`. Entry `k` is the Pauli whose factor on target `j` is
//! `PauliAxis::from_index((k >> 2j) & 3)`. The channel is diagonal in the Pauli
//! basis; its eigenvalues are `λ_P = Σ_Q prob(Q) (-1)^{⟨P,Q⟩}` where `⟨P,Q⟩` is
//! 1 when the two anticommute. The transform factorises over qubits, so it is
//! applied one 4×4 block at a time.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::pauli::PauliAxis;

/// Eigenvalues with magnitude below this are treated as singular.
pub const SINGULAR_THRESHOLD: f64 = 1e-9;

const COMMUTE_SIGNS: [[f64; 4]; 4] = [
    [1.0, 1.0, 1.0, 1.0],
    [1.0, 1.0, -1.0, -1.0],
    [1.0, -1.0, 1.0, -1.0],
    [1.0, -1.0, -1.0, 1.0],
];

/// In-place transform `v ← (⊗ C) v` with `C[a][b] = ±1` for commuting/anticommuting
/// single-qubit Paulis. Applying it twice multiplies by `4^arity`.
pub fn commutation_transform(v: &mut [f64]) {
    let n = v.len();
    debug_assert!(n.is_power_of_two() && n.trailing_zeros() % 2 == 0);
    let mut stride = 1;
    while stride < n {
        for block in (0..n).step_by(4 * stride) {
            for off in 0..stride {
                let idx = |a: usize| block + off + a * stride;
                let x = [v[idx(0)], v[idx(1)], v[idx(2)], v[idx(3)]];
                for (a, row) in COMMUTE_SIGNS.iter().enumerate() {
                    v[idx(a)] = row.iter().zip(&x).map(|(s, xi)| s * xi).sum();
                }
            }
        }
        stride *= 4;
    }
}

fn inverse_commutation_transform(v: &mut [f64]) {
    commutation_transform(v);
    let scale = 1.0 / v.len() as f64;
    v.iter_mut().for_each(|x| *x *= scale);
}

pub fn pauli_label(arity: usize, index: usize) -> String {
    (0..arity)
        .map(|j| PauliAxis::ALL[(index >> (2 * j)) & 3].as_char())
        .collect()
}

pub fn pauli_index(label: &str) -> Option<usize> {
    label
        .chars()
        .enumerate()
        .try_fold(0usize, |acc, (j, c)| {
            PauliAxis::from_char(c).map(|a| acc | (a.index() << (2 * j)))
        })
}

/// Per-target axes of Pauli `index` on `arity` qubits.
pub fn pauli_axes(arity: usize, index: usize) -> impl Iterator<Item = PauliAxis> {
    (0..arity).map(move |j| PauliAxis::ALL[(index >> (2 * j)) & 3])
}

#[derive(Debug, Clone, PartialEq)]
pub struct PauliChannel {
    arity: usize,
    probs: Vec<f64>,
}

impl PauliChannel {
    pub fn new(arity: usize, probs: Vec<f64>) -> Result<Self> {
        if !(1..=2).contains(&arity) {
            return Err(Error::InvalidNoise(format!("unsupported channel arity {arity}")));
        }
        if probs.len() != 1 << (2 * arity) {
            return Err(Error::InvalidNoise(format!(
                "{}-qubit Pauli channel needs {} probabilities, got {}",
                arity,
                1 << (2 * arity),
                probs.len()
            )));
        }
        if probs.iter().any(|p| !p.is_finite() || *p < 0.0) {
            return Err(Error::InvalidNoise("probabilities must be finite and ≥ 0".into()));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidNoise(format!(
                "probabilities sum to {total}, expected 1"
            )));
        }
        Ok(PauliChannel { arity, probs })
    }

    pub fn identity(arity: usize) -> Self {
        let mut probs = vec![0.0; 1 << (2 * arity)];
        probs[0] = 1.0;
        PauliChannel { arity, probs }
    }

    /// Channel from `label → probability`; a missing identity label takes the
    /// remaining mass.
    pub fn from_labels(arity: usize, labels: &BTreeMap<String, f64>) -> Result<Self> {
        let mut probs = vec![0.0; 1 << (2 * arity)];
        let mut has_identity = false;
        for (label, &p) in labels {
            if label.chars().count() != arity {
                return Err(Error::InvalidNoise(format!(
                    "label {label:?} does not match channel arity {arity}"
                )));
            }
            let idx = pauli_index(label)
                .ok_or_else(|| Error::InvalidNoise(format!("bad Pauli label {label:?}")))?;
            has_identity |= idx == 0;
            probs[idx] += p;
        }
        if !has_identity {
            probs[0] = 1.0 - probs[1..].iter().sum::<f64>();
        }
        Self::new(arity, probs)
    }

    /// `(1-p) ρ + p/3 (XρX + YρY + ZρZ)`.
    pub fn depolarizing(p: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::InvalidParameter(format!("depolarizing p = {p} outside [0, 1]")));
        }
        Self::new(1, vec![1.0 - p, p / 3.0, p / 3.0, p / 3.0])
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn prob(&self, label: &str) -> f64 {
        pauli_index(label).map_or(0.0, |i| self.probs.get(i).copied().unwrap_or(0.0))
    }

    /// Probability that some non-identity Pauli occurs.
    pub fn error_probability(&self) -> f64 {
        1.0 - self.probs[0]
    }

    pub fn is_identity(&self) -> bool {
        self.probs[1..].iter().all(|&p| p == 0.0)
    }

    /// `self` on the first targets, `other` on the following ones.
    pub fn tensor(&self, other: &PauliChannel) -> Result<PauliChannel> {
        let arity = self.arity + other.arity;
        let mut probs = vec![0.0; 1 << (2 * arity)];
        for (i, &a) in self.probs.iter().enumerate() {
            for (j, &b) in other.probs.iter().enumerate() {
                probs[i | (j << (2 * self.arity))] = a * b;
            }
        }
        PauliChannel::new(arity, probs)
    }

    /// Pauli-transfer eigenvalues, indexed like the probabilities.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut v = self.probs.clone();
        commutation_transform(&mut v);
        v
    }

    /// Channel with the given eigenvalues, without a positivity check.
    fn from_eigenvalues_unchecked(arity: usize, mut eig: Vec<f64>) -> Vec<f64> {
        debug_assert_eq!(eig.len(), 1 << (2 * arity));
        inverse_commutation_transform(&mut eig);
        eig
    }

    /// Composition `other ∘ self` (both are diagonal, so order is irrelevant).
    pub fn compose(&self, other: &PauliChannel) -> Result<PauliChannel> {
        if self.arity != other.arity {
            return Err(Error::SizeMismatch {
                expected: self.arity,
                actual: other.arity,
            });
        }
        let eig: Vec<f64> = self
            .eigenvalues()
            .iter()
            .zip(other.eigenvalues())
            .map(|(a, b)| a * b)
            .collect();
        let mut probs = Self::from_eigenvalues_unchecked(self.arity, eig);
        for p in &mut probs {
            if p.abs() < 1e-15 {
                *p = 0.0;
            }
        }
        PauliChannel::new(self.arity, probs)
    }
}

/// Quasiprobability vector `γ` of an inverse Pauli channel.
#[derive(Debug, Clone, PartialEq)]
pub struct QuasiChannel {
    arity: usize,
    gamma: Vec<f64>,
    norm: f64,
}

impl QuasiChannel {
    pub fn identity(arity: usize) -> Self {
        let mut gamma = vec![0.0; 1 << (2 * arity)];
        gamma[0] = 1.0;
        QuasiChannel {
            arity,
            gamma,
            norm: 1.0,
        }
    }

    pub fn from_gamma(arity: usize, gamma: Vec<f64>) -> Self {
        let norm = gamma.iter().map(|g| g.abs()).sum();
        QuasiChannel { arity, gamma, norm }
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn gamma(&self) -> &[f64] {
        &self.gamma
    }

    /// `‖γ‖₁`.
    pub fn norm(&self) -> f64 {
        self.norm
    }

    pub fn sign(&self, index: usize) -> i8 {
        if self.gamma[index] < 0.0 {
            -1
        } else {
            1
        }
    }

    /// Sampling probabilities `|γ_k| / ‖γ‖₁`.
    pub fn sampling_probs(&self) -> Vec<f64> {
        self.gamma.iter().map(|g| g.abs() / self.norm).collect()
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut v = self.gamma.clone();
        commutation_transform(&mut v);
        v
    }
}

/// Inverse of a Pauli channel as a signed mixture of Pauli recoveries.
pub fn invert_pauli_channel(ch: &PauliChannel) -> Result<QuasiChannel> {
    let eig = ch.eigenvalues();
    if let Some(&bad) = eig.iter().find(|l| l.abs() < SINGULAR_THRESHOLD) {
        return Err(Error::SingularChannel {
            gate: None,
            eigenvalue: bad,
        });
    }
    let inv: Vec<f64> = eig.iter().map(|l| 1.0 / l).collect();
    let gamma = PauliChannel::from_eigenvalues_unchecked(ch.arity, inv);
    Ok(QuasiChannel::from_gamma(ch.arity, gamma))
}

/// `(1-p) ρ + p ((1-η)/2 XρX + (1-η)/2 YρY + η ZρZ)`.
pub fn biased_pauli_channel(p: f64, eta: f64) -> Result<PauliChannel> {
    if !(0.0..0.75).contains(&p) || !p.is_finite() {
        return Err(Error::InvalidParameter(format!("error probability p = {p} outside [0, 0.75)")));
    }
    if !(0.0..=1.0).contains(&eta) {
        return Err(Error::InvalidParameter(format!("bias η = {eta} outside [0, 1]")));
    }
    let xy = p * (1.0 - eta) / 2.0;
    PauliChannel::new(1, vec![1.0 - p, xy, xy, p * eta])
}

/// Pauli insertions that turn `native` into `target`: the channel whose
/// eigenvalues are `λ_target / λ_native`. Fails if that is not a probability
/// distribution.
pub fn insertion_channel(native: &PauliChannel, target: &PauliChannel) -> Result<PauliChannel> {
    if native.arity != target.arity {
        return Err(Error::SizeMismatch {
            expected: native.arity,
            actual: target.arity,
        });
    }
    let nat = native.eigenvalues();
    if let Some(&bad) = nat.iter().find(|l| l.abs() < SINGULAR_THRESHOLD) {
        return Err(Error::SingularChannel {
            gate: None,
            eigenvalue: bad,
        });
    }
    let ratio: Vec<f64> = target
        .eigenvalues()
        .iter()
        .zip(&nat)
        .map(|(t, n)| t / n)
        .collect();
    let mut probs = PauliChannel::from_eigenvalues_unchecked(native.arity, ratio);
    for p in &mut probs {
        if *p < -1e-12 {
            return Err(Error::NonPhysicalBoost(*p));
        }
        if *p < 0.0 {
            *p = 0.0;
        }
    }
    let total: f64 = probs.iter().sum();
    probs.iter_mut().for_each(|p| *p /= total);
    PauliChannel::new(native.arity, probs)
}

/// Scales the error part of a channel from rate `p0` to rate `p`, keeping the
/// shape of its error distribution.
pub fn rescale_channel(ch: &PauliChannel, p0: f64, p: f64) -> Result<PauliChannel> {
    if p == p0 {
        return Ok(ch.clone());
    }
    if p0 <= 0.0 {
        return Err(Error::InvalidParameter(
            "cannot rescale a channel with zero native rate".into(),
        ));
    }
    let scale = p / p0;
    let mut probs: Vec<f64> = ch.probs.iter().map(|q| q * scale).collect();
    probs[0] = 1.0 - probs[1..].iter().sum::<f64>();
    if probs[0] < 0.0 {
        return Err(Error::InvalidParameter(format!("rate {p} overflows the channel")));
    }
    PauliChannel::new(ch.arity, probs)
}

/// Pauli-insertion distribution that boosts `ch` from native rate `p0` to `p`.
pub fn boost_distribution(ch: &PauliChannel, p0: f64, p: f64) -> Result<PauliChannel> {
    if p < p0 {
        return Err(Error::BoostBelowNative { native: p0, target: p });
    }
    if p == p0 {
        return Ok(PauliChannel::identity(ch.arity));
    }
    insertion_channel(ch, &rescale_channel(ch, p0, p)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    /// Brute-force eigenvalues from explicit symplectic products.
    fn eigen_bruteforce(ch: &PauliChannel) -> Vec<f64> {
        let n = ch.probs.len();
        (0..n)
            .map(|p| {
                (0..n)
                    .map(|q| {
                        let anti = pauli_axes(ch.arity, p)
                            .zip(pauli_axes(ch.arity, q))
                            .filter(|(a, b)| a.anticommutes(*b))
                            .count();
                        ch.probs[q] * if anti % 2 == 0 { 1.0 } else { -1.0 }
                    })
                    .sum()
            })
            .collect()
    }

    #[test]
    fn identity_inverse() {
        let q = invert_pauli_channel(&PauliChannel::identity(1)).unwrap();
        assert_eq!(q.gamma(), &[1.0, 0.0, 0.0, 0.0]);
        assert_eq!(q.norm(), 1.0);
    }

    #[test]
    fn depolarizing_norm() {
        let q = invert_pauli_channel(&PauliChannel::depolarizing(0.1).unwrap()).unwrap();
        assert_abs_diff_eq!(q.norm(), 3.2 / 2.6, epsilon = 1e-12);
        assert_abs_diff_eq!(q.norm(), 1.230769, epsilon = 1e-6);
    }

    #[test]
    fn singular_channel() {
        let err = invert_pauli_channel(&PauliChannel::depolarizing(0.75).unwrap()).unwrap_err();
        assert!(matches!(err, Error::SingularChannel { .. }));
    }

    #[test]
    fn biased_channel_definition() {
        let ch = biased_pauli_channel(0.05, 0.9).unwrap();
        for (got, want) in ch.probs().iter().zip([0.95, 0.0025, 0.0025, 0.045]) {
            assert_abs_diff_eq!(*got, want, epsilon = 1e-15);
        }
        assert!(biased_pauli_channel(0.0, 0.4).unwrap().is_identity());
        let sym = biased_pauli_channel(0.09, 1.0 / 3.0).unwrap();
        let dep = PauliChannel::depolarizing(0.09).unwrap();
        for (a, b) in sym.probs().iter().zip(dep.probs()) {
            assert_abs_diff_eq!(*a, *b, epsilon = 1e-15);
        }
        assert!(biased_pauli_channel(0.8, 0.5).is_err());
        assert!(biased_pauli_channel(0.1, 1.5).is_err());
    }

    #[test]
    fn labels() {
        assert_eq!(pauli_label(2, pauli_index("XZ").unwrap()), "XZ");
        let mut m = BTreeMap::new();
        m.insert("XI".to_string(), 0.2);
        let ch = PauliChannel::from_labels(2, &m).unwrap();
        assert_abs_diff_eq!(ch.prob("II"), 0.8);
        assert_abs_diff_eq!(ch.prob("XI"), 0.2);
        m.insert("X".to_string(), 0.1);
        assert!(PauliChannel::from_labels(2, &m).is_err());
    }

    #[test]
    fn boost_identity_and_depolarizing() {
        let dep = PauliChannel::depolarizing(1e-3).unwrap();
        assert!(boost_distribution(&dep, 1e-3, 1e-3).unwrap().is_identity());
        let ins = boost_distribution(&dep, 1e-3, 2e-3).unwrap();
        // (1 - 4q/3)(1 - 4p0/3) = 1 - 4p/3
        let q = 0.75 * (1.0 - (1.0 - 4.0 * 2e-3 / 3.0) / (1.0 - 4.0 * 1e-3 / 3.0));
        assert_abs_diff_eq!(ins.error_probability(), q, epsilon = 1e-14);
        assert!((ins.error_probability() - 1e-3).abs() < 1e-5);
        for k in 1..4 {
            assert_abs_diff_eq!(ins.probs()[k], q / 3.0, epsilon = 1e-14);
        }
        let composed = dep.compose(&ins).unwrap().eigenvalues();
        let target = PauliChannel::depolarizing(2e-3).unwrap().eigenvalues();
        for (a, b) in composed.iter().zip(&target) {
            assert_abs_diff_eq!(*a, *b, epsilon = 1e-10);
        }
        assert!(matches!(
            boost_distribution(&dep, 1e-3, 5e-4),
            Err(Error::BoostBelowNative { .. })
        ));
    }

    fn arb_channel(arity: usize) -> impl Strategy<Value = PauliChannel> {
        let n = 1usize << (2 * arity);
        (proptest::collection::vec(0.0f64..1.0, n - 1), 0.0f64..0.3).prop_map(move |(w, p)| {
            let total: f64 = w.iter().sum::<f64>().max(1e-12);
            let mut probs = vec![1.0 - p];
            probs.extend(w.iter().map(|x| p * x / total));
            PauliChannel::new(arity, probs).unwrap()
        })
    }

    proptest! {
        #[test]
        fn fast_transform_matches_bruteforce(ch in prop_oneof![arb_channel(1), arb_channel(2)]) {
            let fast = ch.eigenvalues();
            let slow = eigen_bruteforce(&ch);
            for (a, b) in fast.iter().zip(&slow) {
                prop_assert!((a - b).abs() < 1e-12);
            }
        }

        #[test]
        fn inverse_eigenvalues_and_normalisation(ch in prop_oneof![arb_channel(1), arb_channel(2)]) {
            let q = invert_pauli_channel(&ch).unwrap();
            for (a, b) in ch.eigenvalues().iter().zip(q.eigenvalues()) {
                prop_assert!((a * b - 1.0).abs() < 1e-12);
            }
            prop_assert!((q.gamma().iter().sum::<f64>() - 1.0).abs() < 1e-12);
            prop_assert!(q.norm() >= 1.0 - 1e-12);
            if !ch.is_identity() {
                prop_assert!(q.norm() > 1.0);
            }
        }
    }
}
