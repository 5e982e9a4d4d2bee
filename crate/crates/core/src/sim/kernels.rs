//! Amplitude kernels shared by the statevector and the vectorised density matrix.
//!
//! Qubit `q` is bit `q` of the amplitude index.

use num_complex::Complex64;

use crate::circuit::GateKind;
use crate::pauli::PauliAxis;

pub type C64 = Complex64;
pub type Mat2 = [[C64; 2]; 2];

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);
const I: C64 = C64::new(0.0, 1.0);

pub fn gate_matrix(kind: &GateKind) -> Option<Mat2> {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let half = |a: f64| ((a / 2.0).cos(), (a / 2.0).sin());
    Some(match *kind {
        GateKind::Rx(a) => {
            let (c, s) = half(a);
            [[c.into(), C64::new(0.0, -s)], [C64::new(0.0, -s), c.into()]]
        }
        GateKind::Ry(a) => {
            let (c, s) = half(a);
            [[c.into(), (-s).into()], [s.into(), c.into()]]
        }
        GateKind::Rz(a) => {
            let (c, s) = half(a);
            [[C64::new(c, -s), ZERO], [ZERO, C64::new(c, s)]]
        }
        GateKind::H => [[h.into(), h.into()], [h.into(), (-h).into()]],
        GateKind::S => [[ONE, ZERO], [ZERO, I]],
        GateKind::X => [[ZERO, ONE], [ONE, ZERO]],
        GateKind::Y => [[ZERO, -I], [I, ZERO]],
        GateKind::Z => [[ONE, ZERO], [ZERO, -ONE]],
        _ => return None,
    })
}

/// Rotation taking the +1 eigenstate of `basis` to `|0⟩`: Z ↦ 𝟙, X ↦ H, Y ↦ H·S†.
pub fn basis_rotation(basis: PauliAxis) -> Mat2 {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    match basis {
        PauliAxis::X => [[h.into(), h.into()], [h.into(), (-h).into()]],
        PauliAxis::Y => [[h.into(), C64::new(0.0, -h)], [h.into(), C64::new(0.0, h)]],
        _ => [[ONE, ZERO], [ZERO, ONE]],
    }
}

pub fn conj2(m: &Mat2) -> Mat2 {
    [[m[0][0].conj(), m[0][1].conj()], [m[1][0].conj(), m[1][1].conj()]]
}

pub fn apply_1q(v: &mut [C64], q: usize, m: &Mat2) {
    let bit = 1usize << q;
    let n = v.len();
    let mut base = 0;
    while base < n {
        for i0 in base..base + bit {
            let i1 = i0 | bit;
            let (a, b) = (v[i0], v[i1]);
            v[i0] = m[0][0] * a + m[0][1] * b;
            v[i1] = m[1][0] * a + m[1][1] * b;
        }
        base += 2 * bit;
    }
}

pub fn apply_cnot(v: &mut [C64], control: usize, target: usize) {
    let (cb, tb) = (1usize << control, 1usize << target);
    for i in 0..v.len() {
        if i & cb != 0 && i & tb == 0 {
            v.swap(i, i | tb);
        }
    }
}

pub fn apply_cz(v: &mut [C64], a: usize, b: usize) {
    let mask = (1usize << a) | (1usize << b);
    for (i, x) in v.iter_mut().enumerate() {
        if i & mask == mask {
            *x = -*x;
        }
    }
}

/// Masks of a Pauli: `x` has bits where the factor is X or Y, `z` where Z or Y.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct PauliMasks {
    pub x: usize,
    pub z: usize,
    pub n_y: u32,
}

impl PauliMasks {
    pub fn from_axes<'a>(items: impl IntoIterator<Item = (usize, PauliAxis)>) -> Self {
        let mut m = PauliMasks::default();
        for (q, a) in items {
            let (x, z) = a.xz();
            if x {
                m.x |= 1 << q;
            }
            if z {
                m.z |= 1 << q;
            }
            if x && z {
                m.n_y += 1;
            }
        }
        m
    }

    /// Product up to a global phase.
    pub fn xor(self, other: PauliMasks) -> PauliMasks {
        let x = self.x ^ other.x;
        let z = self.z ^ other.z;
        PauliMasks {
            x,
            z,
            n_y: (x & z).count_ones(),
        }
    }

    pub fn is_identity(&self) -> bool {
        self.x == 0 && self.z == 0
    }

    /// Same Pauli on qubits shifted by `offset` as well (for `P ⊗ P*`).
    pub fn doubled(self, offset: usize) -> PauliMasks {
        PauliMasks {
            x: self.x | (self.x << offset),
            z: self.z | (self.z << offset),
            n_y: 2 * self.n_y,
        }
    }
}

fn parity(x: usize) -> bool {
    x.count_ones() & 1 == 1
}

/// `v ← P v` up to the global phase `i^{n_y}`.
pub fn apply_pauli_unphased(v: &mut [C64], m: PauliMasks) {
    if m.x == 0 {
        if m.z != 0 {
            for (i, a) in v.iter_mut().enumerate() {
                if parity(i & m.z) {
                    *a = -*a;
                }
            }
        }
        return;
    }
    let pivot = 1usize << m.x.trailing_zeros();
    for i in 0..v.len() {
        if i & pivot != 0 {
            continue;
        }
        let j = i ^ m.x;
        // P|j⟩ ∝ (-1)^{|j∧z|} |i⟩ and P|i⟩ ∝ (-1)^{|i∧z|} |j⟩
        let (a, b) = (v[i], v[j]);
        v[i] = if parity(j & m.z) { -b } else { b };
        v[j] = if parity(i & m.z) { -a } else { a };
    }
}

/// `i^{n_y}` as a complex number.
pub fn y_phase(n_y: u32) -> C64 {
    match n_y % 4 {
        0 => ONE,
        1 => I,
        2 => -ONE,
        _ => -I,
    }
}

/// `v ← exp(-i θ P / 2) v` for a Hermitian Pauli with masks `m`.
pub fn apply_pauli_rotation(v: &mut [C64], m: PauliMasks, theta: f64) {
    let (c, s) = ((theta / 2.0).cos(), (theta / 2.0).sin());
    if m.x == 0 {
        let plus = C64::new(c, -s);
        let minus = C64::new(c, s);
        for (i, a) in v.iter_mut().enumerate() {
            *a *= if parity(i & m.z) { minus } else { plus };
        }
        return;
    }
    let ph = y_phase(m.n_y);
    let coef = C64::new(0.0, -s) * ph;
    let pivot = 1usize << m.x.trailing_zeros();
    for i in 0..v.len() {
        if i & pivot != 0 {
            continue;
        }
        let j = i ^ m.x;
        let (a, b) = (v[i], v[j]);
        let pb = if parity(j & m.z) { -b } else { b };
        let pa = if parity(i & m.z) { -a } else { a };
        v[i] = a * c + coef * pb;
        v[j] = b * c + coef * pa;
    }
}

/// Applies an ideal gate. With `conj`, applies the entrywise conjugate unitary
/// (used on the bra half of a vectorised density matrix).
pub fn apply_gate(v: &mut [C64], kind: &GateKind, targets: &[usize], conj: bool) {
    match *kind {
        GateKind::Cnot => apply_cnot(v, targets[0], targets[1]),
        GateKind::Cz => apply_cz(v, targets[0], targets[1]),
        GateKind::PauliRot { axes, angle } => {
            let m = PauliMasks::from_axes([(targets[0], axes[0]), (targets[1], axes[1])]);
            let theta = if conj {
                if m.n_y % 2 == 1 {
                    angle
                } else {
                    -angle
                }
            } else {
                angle
            };
            apply_pauli_rotation(v, m, theta);
        }
        GateKind::Exchange(angle) => {
            // XX, YY and ZZ commute; each has an even Y count
            let theta = if conj { -angle } else { angle };
            for axis in [PauliAxis::X, PauliAxis::Y, PauliAxis::Z] {
                let m = PauliMasks::from_axes([(targets[0], axis), (targets[1], axis)]);
                apply_pauli_rotation(v, m, theta);
            }
        }
        ref k => {
            let m = gate_matrix(k).expect("single-qubit gate");
            let m = if conj { conj2(&m) } else { m };
            apply_1q(v, targets[0], &m);
        }
    }
}

/// `⟨v| P |v⟩` including the Y phase, for a Pauli with masks `m`.
pub fn pauli_expectation(v: &[C64], m: PauliMasks) -> C64 {
    let mut acc = ZERO;
    for (j, a) in v.iter().enumerate() {
        let term = v[j ^ m.x].conj() * a;
        acc += if parity(j & m.z) { -term } else { term };
    }
    acc * y_phase(m.n_y)
}
