//! Sparse multi-qubit Pauli strings.
//!
//! A [`PauliString`] stores only its non-identity tensor factors together with
//! a global phase that is a power of `i`. Qubit 0 is the leftmost character of
//! the dense text form, so `"XIZ"` is `X` on qubit 0 and `Z` on qubit 2.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Single-qubit Pauli operator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
#[repr(u8)]
pub enum PauliAxis {
    #[default]
    I = 0,
    X = 1,
    Y = 2,
    Z = 3,
}

impl PauliAxis {
    pub const ALL: [PauliAxis; 4] = [PauliAxis::I, PauliAxis::X, PauliAxis::Y, PauliAxis::Z];
    /// The three measurement bases, in the order used for basis codes.
    pub const BASES: [PauliAxis; 3] = [PauliAxis::X, PauliAxis::Y, PauliAxis::Z];

    #[inline]
    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<Self> {
        Self::ALL.get(i).copied()
    }

    /// Index into [`PauliAxis::BASES`]; `None` for the identity.
    #[inline]
    pub fn basis_index(self) -> Option<usize> {
        match self {
            PauliAxis::I => None,
            a => Some(a as usize - 1),
        }
    }

    pub fn from_char(c: char) -> Option<Self> {
        match c {
            'I' => Some(PauliAxis::I),
            'X' => Some(PauliAxis::X),
            'Y' => Some(PauliAxis::Y),
            'Z' => Some(PauliAxis::Z),
            _ => None,
        }
    }

    pub fn as_char(self) -> char {
        match self {
            PauliAxis::I => 'I',
            PauliAxis::X => 'X',
            PauliAxis::Y => 'Y',
            PauliAxis::Z => 'Z',
        }
    }

    /// `(x, z)` bits of the symplectic representation.
    #[inline]
    pub fn xz(self) -> (bool, bool) {
        match self {
            PauliAxis::I => (false, false),
            PauliAxis::X => (true, false),
            PauliAxis::Y => (true, true),
            PauliAxis::Z => (false, true),
        }
    }

    #[inline]
    pub fn anticommutes(self, other: PauliAxis) -> bool {
        self != PauliAxis::I && other != PauliAxis::I && self != other
    }

    /// `self · other = i^k · result`.
    pub fn mul(self, other: PauliAxis) -> (Phase, PauliAxis) {
        use PauliAxis::*;
        match (self, other) {
            (I, b) => (Phase::ONE, b),
            (a, I) => (Phase::ONE, a),
            (a, b) if a == b => (Phase::ONE, I),
            (X, Y) => (Phase::I, Z),
            (Y, Z) => (Phase::I, X),
            (Z, X) => (Phase::I, Y),
            (Y, X) => (Phase::MINUS_I, Z),
            (Z, Y) => (Phase::MINUS_I, X),
            (X, Z) => (Phase::MINUS_I, Y),
            _ => unreachable!(),
        }
    }
}

/// A phase `i^k`, `k` in `0..4`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct Phase(u8);

impl Phase {
    pub const ONE: Phase = Phase(0);
    pub const I: Phase = Phase(1);
    pub const MINUS_ONE: Phase = Phase(2);
    pub const MINUS_I: Phase = Phase(3);

    pub fn from_power(k: u8) -> Self {
        Phase(k & 3)
    }

    pub fn power(self) -> u8 {
        self.0
    }

    pub fn is_real(self) -> bool {
        self.0 & 1 == 0
    }

    /// `+1` or `-1` for real phases, `None` for `±i`.
    pub fn sign(self) -> Option<f64> {
        match self.0 {
            0 => Some(1.0),
            2 => Some(-1.0),
            _ => None,
        }
    }

    pub fn to_complex(self) -> Complex64 {
        match self.0 {
            0 => Complex64::new(1.0, 0.0),
            1 => Complex64::new(0.0, 1.0),
            2 => Complex64::new(-1.0, 0.0),
            _ => Complex64::new(0.0, -1.0),
        }
    }

    pub fn conj(self) -> Phase {
        Phase((4 - self.0) & 3)
    }
}

impl std::ops::Mul for Phase {
    type Output = Phase;
    fn mul(self, rhs: Phase) -> Phase {
        Phase((self.0 + rhs.0) & 3)
    }
}

/// Sparse Pauli operator on `n_qubits` qubits.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PauliString {
    n_qubits: usize,
    support: BTreeMap<usize, PauliAxis>,
    phase: Phase,
}

impl PauliString {
    pub fn identity(n_qubits: usize) -> Self {
        PauliString {
            n_qubits,
            support: BTreeMap::new(),
            phase: Phase::ONE,
        }
    }

    pub fn single(n_qubits: usize, qubit: usize, axis: PauliAxis) -> Result<Self> {
        Self::from_sparse(n_qubits, [(qubit, axis)])
    }

    /// Builds a string from `(qubit, axis)` pairs. Identity entries are dropped;
    /// a repeated qubit is an error.
    pub fn from_sparse<I>(n_qubits: usize, entries: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, PauliAxis)>,
    {
        let mut support = BTreeMap::new();
        for (q, a) in entries {
            if q >= n_qubits {
                return Err(Error::Parse(format!(
                    "qubit {q} out of range for {n_qubits} qubits"
                )));
            }
            if support.contains_key(&q) {
                return Err(Error::Parse(format!("qubit {q} given twice")));
            }
            if a != PauliAxis::I {
                support.insert(q, a);
            }
        }
        Ok(PauliString {
            n_qubits,
            support,
            phase: Phase::ONE,
        })
    }

    pub fn from_axes(axes: &[PauliAxis]) -> Self {
        let support = axes
            .iter()
            .enumerate()
            .filter(|(_, a)| **a != PauliAxis::I)
            .map(|(q, a)| (q, *a))
            .collect();
        PauliString {
            n_qubits: axes.len(),
            support,
            phase: Phase::ONE,
        }
    }

    pub fn with_phase(mut self, phase: Phase) -> Self {
        self.phase = phase;
        self
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn phase(&self) -> Phase {
        self.phase
    }

    pub fn support(&self) -> &BTreeMap<usize, PauliAxis> {
        &self.support
    }

    pub fn qubits(&self) -> impl Iterator<Item = usize> + '_ {
        self.support.keys().copied()
    }

    pub fn get(&self, qubit: usize) -> PauliAxis {
        self.support.get(&qubit).copied().unwrap_or(PauliAxis::I)
    }

    pub fn weight(&self) -> usize {
        self.support.len()
    }

    pub fn is_identity(&self) -> bool {
        self.support.is_empty()
    }

    /// Same operator with the phase reset to `+1`.
    pub fn unsigned(&self) -> PauliString {
        PauliString {
            phase: Phase::ONE,
            ..self.clone()
        }
    }

    pub fn commutes_with(&self, other: &PauliString) -> bool {
        let anti = self
            .support
            .iter()
            .filter(|(q, a)| a.anticommutes(other.get(**q)))
            .count();
        anti % 2 == 0
    }

    /// `(x_mask, z_mask)` bit masks; bit `q` refers to qubit `q`.
    ///
    /// Panics if the string acts on qubit 64 or beyond.
    pub fn masks(&self) -> (u64, u64) {
        let mut x = 0u64;
        let mut z = 0u64;
        for (&q, &a) in &self.support {
            assert!(q < 64, "mask form supports at most 64 qubits");
            let (xb, zb) = a.xz();
            if xb {
                x |= 1 << q;
            }
            if zb {
                z |= 1 << q;
            }
        }
        (x, z)
    }

    /// Number of `Y` factors.
    pub fn y_count(&self) -> usize {
        self.support.values().filter(|a| **a == PauliAxis::Y).count()
    }

    /// Sparse label without phase, e.g. `"X0 Z2"`; `"I"` for the identity.
    pub fn sparse_label(&self) -> String {
        if self.support.is_empty() {
            return "I".to_string();
        }
        self.support
            .iter()
            .map(|(q, a)| format!("{}{}", a.as_char(), q))
            .collect::<Vec<_>>()
            .join(" ")
    }

    /// Dense label without phase, e.g. `"XIZ"`.
    pub fn dense_label(&self) -> String {
        (0..self.n_qubits).map(|q| self.get(q).as_char()).collect()
    }

    /// Parses either dense (`"XIZ"`) or sparse (`"X0 Z2"`) text, with an
    /// optional leading phase among `+`, `-`, `i`, `+i`, `-i`.
    pub fn parse(text: &str, n_qubits: usize) -> Result<Self> {
        let (phase, body) = split_phase(text.trim());
        let body = body.trim();
        let parsed = if body.is_empty() || body == "I" {
            PauliString::identity(n_qubits)
        } else if body.chars().all(|c| PauliAxis::from_char(c).is_some()) {
            if body.chars().count() != n_qubits {
                return Err(Error::Parse(format!(
                    "dense Pauli {body:?} has {} characters, expected {n_qubits}",
                    body.chars().count()
                )));
            }
            let axes: Vec<PauliAxis> = body.chars().filter_map(PauliAxis::from_char).collect();
            PauliString::from_axes(&axes)
        } else {
            PauliString::from_sparse(n_qubits, parse_sparse_tokens(body)?)?
        };
        Ok(parsed.with_phase(phase))
    }
}

fn split_phase(text: &str) -> (Phase, &str) {
    for (prefix, phase) in [
        ("-i", Phase::MINUS_I),
        ("+i", Phase::I),
        ("i", Phase::I),
        ("-", Phase::MINUS_ONE),
        ("+", Phase::ONE),
    ] {
        if let Some(rest) = text.strip_prefix(prefix) {
            return (phase, rest);
        }
    }
    (Phase::ONE, text)
}

fn parse_sparse_tokens(body: &str) -> Result<Vec<(usize, PauliAxis)>> {
    body.split_whitespace()
        .map(|tok| {
            let mut chars = tok.chars();
            let axis = chars
                .next()
                .and_then(PauliAxis::from_char)
                .ok_or_else(|| Error::Parse(format!("bad Pauli token {tok:?}")))?;
            let digits = chars.as_str();
            if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
                return Err(Error::Parse(format!("bad qubit index in {tok:?}")));
            }
            let q: usize = digits
                .parse()
                .map_err(|_| Error::Parse(format!("bad qubit index in {tok:?}")))?;
            Ok((q, axis))
        })
        .collect()
}

impl FromStr for PauliString {
    type Err = Error;

    /// Infers the qubit count: the length of a dense label, or one past the
    /// largest index of a sparse label.
    fn from_str(s: &str) -> Result<Self> {
        let (_, body) = split_phase(s.trim());
        let body = body.trim();
        let n = if body.chars().all(|c| PauliAxis::from_char(c).is_some()) {
            body.chars().count().max(1)
        } else {
            parse_sparse_tokens(body)?
                .iter()
                .map(|(q, _)| q + 1)
                .max()
                .unwrap_or(1)
        };
        PauliString::parse(s, n)
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let prefix = match self.phase.power() {
            0 => "",
            1 => "i",
            2 => "-",
            _ => "-i",
        };
        write!(f, "{prefix}{}", self.dense_label())
    }
}

impl Serialize for PauliString {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for PauliString {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Product `a · b` with the accumulated phase.
pub fn pauli_mul(a: &PauliString, b: &PauliString) -> Result<PauliString> {
    if a.n_qubits != b.n_qubits {
        return Err(Error::SizeMismatch {
            expected: a.n_qubits,
            actual: b.n_qubits,
        });
    }
    let mut phase = a.phase * b.phase;
    let mut support = a.support.clone();
    for (&q, &bq) in &b.support {
        let aq = support.remove(&q).unwrap_or(PauliAxis::I);
        let (ph, c) = aq.mul(bq);
        phase = phase * ph;
        if c != PauliAxis::I {
            support.insert(q, c);
        }
    }
    Ok(PauliString {
        n_qubits: a.n_qubits,
        support,
        phase,
    })
}

pub fn pauli_weight(p: &PauliString) -> usize {
    p.weight()
}
