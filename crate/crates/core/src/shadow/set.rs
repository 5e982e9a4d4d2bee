use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::ReadoutModel;
use crate::error::{Error, Result};
use crate::pauli::PauliAxis;

pub const FORMAT_VERSION: &str = "pecshadow/1";

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ShadowMode {
    Pec,
    Conventional,
    /// Noise boosted to the given rate.
    Boosted(f64),
}

impl fmt::Display for ShadowMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ShadowMode::Pec => f.write_str("pec"),
            ShadowMode::Conventional => f.write_str("conventional"),
            ShadowMode::Boosted(p) => write!(f, "boosted({p:e})"),
        }
    }
}

impl FromStr for ShadowMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "pec" => Ok(ShadowMode::Pec),
            "conventional" => Ok(ShadowMode::Conventional),
            _ => s
                .strip_prefix("boosted(")
                .and_then(|r| r.strip_suffix(')'))
                .and_then(|p| p.parse::<f64>().ok())
                .filter(|p| p.is_finite() && *p >= 0.0)
                .map(ShadowMode::Boosted)
                .ok_or_else(|| Error::Parse(format!("unknown shadow mode {s:?}"))),
        }
    }
}

impl Serialize for ShadowMode {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for ShadowMode {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ShadowHeader {
    pub format: String,
    pub n_qubits: usize,
    pub mode: ShadowMode,
    /// `‖γ^(l)‖₁` per gate in circuit order (PEC only).
    #[serde(default)]
    pub gate_norms: Vec<f64>,
    pub g_norm: f64,
    #[serde(default)]
    pub readout: ReadoutModel,
    /// Basis probabilities `[p_x, p_y, p_z]`; absent means uniform.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub basis_probs: Option<[f64; 3]>,
    pub seed: u64,
    pub n_snapshots: u64,
    /// Whether snapshots carry per-gate recovery records.
    #[serde(default)]
    pub gate_log: bool,
}

impl ShadowHeader {
    pub fn new(n_qubits: usize, mode: ShadowMode) -> Self {
        ShadowHeader {
            format: FORMAT_VERSION.to_string(),
            n_qubits,
            mode,
            gate_norms: Vec::new(),
            g_norm: 1.0,
            readout: ReadoutModel::none(),
            basis_probs: None,
            seed: 0,
            n_snapshots: 0,
            gate_log: false,
        }
    }

    pub fn n_gates(&self) -> usize {
        self.gate_norms.len()
    }

    pub fn validate(&self) -> Result<()> {
        if self.format != FORMAT_VERSION {
            return Err(Error::Version(self.format.clone()));
        }
        if self.n_qubits == 0 || self.n_qubits > 64 {
            return Err(Error::Parse(format!("bad qubit count {}", self.n_qubits)));
        }
        self.readout.validate(self.n_qubits)?;
        if self.gate_norms.iter().any(|g| !(g.is_finite() && *g >= 1.0 - 1e-12)) {
            return Err(Error::Parse("gate norms must be finite and ≥ 1".into()));
        }
        match self.mode {
            ShadowMode::Pec => {
                let prod: f64 = self.gate_norms.iter().product();
                if (prod - self.g_norm).abs() > 1e-9 * self.g_norm.max(1.0) {
                    return Err(Error::Parse(format!(
                        "g_norm {} differs from the product of gate norms {prod}",
                        self.g_norm
                    )));
                }
            }
            _ => {
                if self.g_norm != 1.0 || self.gate_log {
                    return Err(Error::Parse(format!(
                        "{} shadows must have g_norm 1 and no gate log",
                        self.mode
                    )));
                }
            }
        }
        if let Some(p) = self.basis_probs {
            if p.iter().any(|x| !(*x > 0.0)) || (p.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
                return Err(Error::Parse(format!("bad basis probabilities {p:?}")));
            }
        }
        Ok(())
    }
}

/// One shadow record.
#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub bases: Vec<PauliAxis>,
    pub bits: Vec<bool>,
    pub sign: i8,
    /// `(k_l, sign γ^(l)_{k_l})` for every gate in circuit order.
    pub gate_log: Vec<(u8, i8)>,
}

impl Snapshot {
    pub fn n_qubits(&self) -> usize {
        self.bases.len()
    }

    pub fn validate(&self, header: &ShadowHeader) -> Result<()> {
        if self.bases.len() != header.n_qubits || self.bits.len() != header.n_qubits {
            return Err(Error::SizeMismatch {
                expected: header.n_qubits,
                actual: self.bases.len().max(self.bits.len()),
            });
        }
        if self.bases.iter().any(|b| *b == PauliAxis::I) {
            return Err(Error::Parse("snapshot basis must be X, Y or Z".into()));
        }
        if self.sign != 1 && self.sign != -1 {
            return Err(Error::Parse(format!("bad snapshot sign {}", self.sign)));
        }
        if header.gate_log {
            if self.gate_log.len() != header.n_gates() {
                return Err(Error::Parse(format!(
                    "gate log has {} entries for {} gates",
                    self.gate_log.len(),
                    header.n_gates()
                )));
            }
            let mut prod = 1i8;
            for &(k, s) in &self.gate_log {
                if k > 15 || (s != 1 && s != -1) {
                    return Err(Error::Parse(format!("bad gate log entry [{k}, {s}]")));
                }
                prod *= s;
            }
            if prod != self.sign {
                return Err(Error::Parse("snapshot sign differs from its gate log".into()));
            }
        } else if !self.gate_log.is_empty() {
            return Err(Error::Parse("gate log present but disabled in header".into()));
        }
        if header.mode != ShadowMode::Pec && self.sign != 1 {
            return Err(Error::Parse("non-PEC snapshots must have sign +1".into()));
        }
        Ok(())
    }
}

/// Gate-log entries pack `k` in the low nibble and a negative sign in bit 7.
#[inline]
pub(crate) fn pack_log(k: u8, sign: i8) -> u8 {
    k | if sign < 0 { 0x80 } else { 0 }
}

#[inline]
pub(crate) fn unpack_log(v: u8) -> (u8, i8) {
    (v & 0x0f, if v & 0x80 != 0 { -1 } else { 1 })
}

/// A header plus snapshots, stored column-wise.
#[derive(Debug, Clone, PartialEq)]
pub struct ShadowSet {
    header: ShadowHeader,
    /// basis index 0/1/2 for X/Y/Z, `n_qubits` per snapshot
    bases: Vec<u8>,
    bits: Vec<u8>,
    signs: Vec<i8>,
    glog: Vec<u8>,
}

impl ShadowSet {
    pub fn new(mut header: ShadowHeader) -> Self {
        header.n_snapshots = 0;
        ShadowSet {
            header,
            bases: Vec::new(),
            bits: Vec::new(),
            signs: Vec::new(),
            glog: Vec::new(),
        }
    }

    pub fn header(&self) -> &ShadowHeader {
        &self.header
    }

    pub fn n_qubits(&self) -> usize {
        self.header.n_qubits
    }

    pub fn len(&self) -> usize {
        self.signs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.signs.is_empty()
    }

    pub fn g_norm(&self) -> f64 {
        self.header.g_norm
    }

    pub fn has_gate_log(&self) -> bool {
        self.header.gate_log
    }

    pub fn push(&mut self, s: &Snapshot) -> Result<()> {
        s.validate(&self.header)?;
        self.bases
            .extend(s.bases.iter().map(|b| b.basis_index().expect("validated") as u8));
        self.bits.extend(s.bits.iter().map(|&b| b as u8));
        self.signs.push(s.sign);
        self.glog.extend(s.gate_log.iter().map(|&(k, sg)| pack_log(k, sg)));
        self.header.n_snapshots += 1;
        Ok(())
    }

    pub(crate) fn push_raw(&mut self, bases: &[u8], bits: &[u8], sign: i8, glog: &[u8]) {
        self.bases.extend_from_slice(bases);
        self.bits.extend_from_slice(bits);
        self.signs.push(sign);
        self.glog.extend_from_slice(glog);
        self.header.n_snapshots += 1;
    }

    pub fn append(&mut self, other: ShadowSet) {
        self.bases.extend(other.bases);
        self.bits.extend(other.bits);
        self.signs.extend(other.signs);
        self.glog.extend(other.glog);
        self.header.n_snapshots = self.signs.len() as u64;
    }

    pub fn snapshot(&self, i: usize) -> Snapshot {
        let n = self.n_qubits();
        Snapshot {
            bases: self.bases_of(i)
                .iter()
                .map(|&b| PauliAxis::BASES[b as usize])
                .collect(),
            bits: self.bits[i * n..(i + 1) * n].iter().map(|&b| b == 1).collect(),
            sign: self.signs[i],
            gate_log: self.raw_log(i).iter().map(|&v| unpack_log(v)).collect(),
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = Snapshot> + '_ {
        (0..self.len()).map(|i| self.snapshot(i))
    }

    /// Basis indices (0 = X, 1 = Y, 2 = Z) of snapshot `i`.
    #[inline]
    pub fn bases_of(&self, i: usize) -> &[u8] {
        let n = self.n_qubits();
        &self.bases[i * n..(i + 1) * n]
    }

    #[inline]
    pub fn bits_of(&self, i: usize) -> &[u8] {
        let n = self.n_qubits();
        &self.bits[i * n..(i + 1) * n]
    }

    #[inline]
    pub fn sign(&self, i: usize) -> i8 {
        self.signs[i]
    }

    #[inline]
    pub(crate) fn raw_log(&self, i: usize) -> &[u8] {
        if self.header.gate_log {
            let g = self.header.n_gates();
            &self.glog[i * g..(i + 1) * g]
        } else {
            &[]
        }
    }

    /// Sign of snapshot `i` restricted to the gates in `gates` (0-based positions).
    pub fn sign_over(&self, i: usize, gates: &[usize]) -> Result<i8> {
        if !self.header.gate_log {
            return Err(Error::MissingGateLog);
        }
        let log = self.raw_log(i);
        Ok(gates
            .iter()
            .fold(1i8, |acc, &g| if log[g] & 0x80 != 0 { -acc } else { acc }))
    }

    /// Snapshots `idx` in the given order, as a new set.
    pub fn select(&self, idx: &[usize]) -> ShadowSet {
        let mut out = ShadowSet::new(self.header.clone());
        for &i in idx {
            out.push_raw(self.bases_of(i), self.bits_of(i), self.signs[i], self.raw_log(i));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn header() -> ShadowHeader {
        let mut h = ShadowHeader::new(2, ShadowMode::Pec);
        h.gate_norms = vec![1.0, 1.5];
        h.g_norm = 1.5;
        h.gate_log = true;
        h
    }

    #[test]
    fn mode_strings() {
        for m in [ShadowMode::Pec, ShadowMode::Conventional, ShadowMode::Boosted(2e-3)] {
            assert_eq!(m.to_string().parse::<ShadowMode>().unwrap(), m);
        }
        assert_eq!(ShadowMode::Boosted(2e-3).to_string(), "boosted(2e-3)");
        assert!("boosted(x)".parse::<ShadowMode>().is_err());
    }

    #[test]
    fn push_and_read_back() {
        let mut set = ShadowSet::new(header());
        let s = Snapshot {
            bases: vec![PauliAxis::X, PauliAxis::Z],
            bits: vec![true, false],
            sign: -1,
            gate_log: vec![(0, 1), (3, -1)],
        };
        set.push(&s).unwrap();
        assert_eq!(set.snapshot(0), s);
        assert_eq!(set.sign_over(0, &[0]).unwrap(), 1);
        assert_eq!(set.sign_over(0, &[0, 1]).unwrap(), -1);
        let bad = Snapshot { sign: 1, ..s.clone() };
        assert!(set.push(&bad).is_err());
        assert_eq!(set.header().n_snapshots, 1);
    }

    #[test]
    fn header_invariants() {
        assert!(header().validate().is_ok());
        let mut h = header();
        h.g_norm = 2.0;
        assert!(h.validate().is_err());
        let mut h = ShadowHeader::new(2, ShadowMode::Conventional);
        assert!(h.validate().is_ok());
        h.g_norm = 1.2;
        assert!(h.validate().is_err());
        let mut h = header();
        h.format = "pecshadow/0".into();
        assert!(matches!(h.validate(), Err(Error::Version(_))));
    }
}
