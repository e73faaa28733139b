//! Pauli words in symplectic form.
//!
//! A word on `n` qubits stores an X mask, a Z mask and a phase `i^k`. Bit
//! `n - 1 - q` of each mask belongs to qubit position `q`, so the integer
//! masks read like the written bitstring. A qubit with both bits set is `Y`
//! (convention `Y = iXZ`), i.e. the word is realized as
//! `phase * P_0 (x) P_1 (x) ...` with `P_q` in `{I, X, Y, Z}`.

use std::fmt;
use std::ops::Mul;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{kron_all, pauli_2x2, CMatrix, Qubit, C64};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub const ALL: [Pauli; 4] = [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z];

    fn bits(self) -> (bool, bool) {
        match self {
            Pauli::I => (false, false),
            Pauli::X => (true, false),
            Pauli::Z => (false, true),
            Pauli::Y => (true, true),
        }
    }

    fn from_bits(x: bool, z: bool) -> Pauli {
        match (x, z) {
            (false, false) => Pauli::I,
            (true, false) => Pauli::X,
            (false, true) => Pauli::Z,
            (true, true) => Pauli::Y,
        }
    }

    fn letter(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }
}

/// Global phase `i^k`, `k` mod 4.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Phase {
    PlusOne,
    PlusI,
    MinusOne,
    MinusI,
}

impl Phase {
    fn from_power(k: i32) -> Phase {
        match k.rem_euclid(4) {
            0 => Phase::PlusOne,
            1 => Phase::PlusI,
            2 => Phase::MinusOne,
            _ => Phase::MinusI,
        }
    }

    fn power(self) -> i32 {
        match self {
            Phase::PlusOne => 0,
            Phase::PlusI => 1,
            Phase::MinusOne => 2,
            Phase::MinusI => 3,
        }
    }

    pub fn to_complex(self) -> C64 {
        match self {
            Phase::PlusOne => C64::new(1.0, 0.0),
            Phase::PlusI => C64::new(0.0, 1.0),
            Phase::MinusOne => C64::new(-1.0, 0.0),
            Phase::MinusI => C64::new(0.0, -1.0),
        }
    }

    /// `Some(+1.0)` / `Some(-1.0)` for real phases.
    pub fn real_sign(self) -> Option<f64> {
        match self {
            Phase::PlusOne => Some(1.0),
            Phase::MinusOne => Some(-1.0),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PauliWord {
    n_qubits: usize,
    x_mask: u8,
    z_mask: u8,
    phase: Phase,
}

impl PauliWord {
    pub fn identity(n_qubits: usize) -> Self {
        assert!((1..=8).contains(&n_qubits), "1..=8 qubits supported");
        PauliWord {
            n_qubits,
            x_mask: 0,
            z_mask: 0,
            phase: Phase::PlusOne,
        }
    }

    pub fn new(n_qubits: usize, x_mask: u8, z_mask: u8, phase: Phase) -> Self {
        assert!((1..=8).contains(&n_qubits), "1..=8 qubits supported");
        let full = if n_qubits == 8 {
            u8::MAX
        } else {
            (1u8 << n_qubits) - 1
        };
        assert!(
            x_mask & !full == 0 && z_mask & !full == 0,
            "mask wider than word"
        );
        PauliWord {
            n_qubits,
            x_mask,
            z_mask,
            phase,
        }
    }

    /// Word with a single-qubit Pauli per position and phase `+1`.
    pub fn from_paulis(ops: &[Pauli]) -> Self {
        let n = ops.len();
        let mut w = PauliWord::identity(n);
        for (q, p) in ops.iter().enumerate() {
            let (x, z) = p.bits();
            let bit = 1u8 << (n - 1 - q);
            if x {
                w.x_mask |= bit;
            }
            if z {
                w.z_mask |= bit;
            }
        }
        w
    }

    /// Places single-qubit operators on named qubits of a labelled register.
    pub fn on(labels: &[Qubit], ops: &[(Qubit, Pauli)]) -> Self {
        let mut paulis = vec![Pauli::I; labels.len()];
        for &(q, p) in ops {
            let pos = labels
                .iter()
                .position(|l| *l == q)
                .unwrap_or_else(|| panic!("qubit {q} not in {labels:?}"));
            paulis[pos] = p;
        }
        Self::from_paulis(&paulis)
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn x_mask(&self) -> u8 {
        self.x_mask
    }

    pub fn z_mask(&self) -> u8 {
        self.z_mask
    }

    pub fn phase(&self) -> Phase {
        self.phase
    }

    pub fn with_phase(mut self, phase: Phase) -> Self {
        self.phase = phase;
        self
    }

    pub fn negated(mut self) -> Self {
        self.phase = Phase::from_power(self.phase.power() + 2);
        self
    }

    /// Single-qubit factor at position `q`.
    pub fn pauli_at(&self, q: usize) -> Pauli {
        let bit = 1u8 << (self.n_qubits - 1 - q);
        Pauli::from_bits(self.x_mask & bit != 0, self.z_mask & bit != 0)
    }

    pub fn paulis(&self) -> Vec<Pauli> {
        (0..self.n_qubits).map(|q| self.pauli_at(q)).collect()
    }

    pub fn is_identity(&self) -> bool {
        self.x_mask == 0 && self.z_mask == 0
    }

    /// Number of qubits carrying a non-identity factor.
    pub fn weight(&self) -> u32 {
        (self.x_mask | self.z_mask).count_ones()
    }

    /// Symplectic inner product mod 2: `true` iff the words anticommute.
    pub fn symplectic_product(&self, other: &PauliWord) -> bool {
        assert_eq!(self.n_qubits, other.n_qubits);
        let s =
            (self.x_mask & other.z_mask).count_ones() + (self.z_mask & other.x_mask).count_ones();
        s % 2 == 1
    }

    pub fn commutes_with(&self, other: &PauliWord) -> bool {
        !self.symplectic_product(other)
    }

    /// Self-adjoint iff the phase is real.
    pub fn is_hermitian(&self) -> bool {
        self.phase.real_sign().is_some()
    }

    /// Dense `2^n x 2^n` realization.
    pub fn matrix(&self) -> CMatrix {
        let factors: Vec<CMatrix> = self.paulis().into_iter().map(pauli_2x2).collect();
        kron_all(&factors) * self.phase.to_complex()
    }

    /// Word with the factor on position `q` replaced by identity.
    pub fn without_position(&self, q: usize) -> PauliWord {
        let mut ops = self.paulis();
        ops.remove(q);
        if ops.is_empty() {
            return PauliWord::identity(1).with_phase(self.phase);
        }
        PauliWord::from_paulis(&ops).with_phase(self.phase)
    }

    /// Label string such as `ZC.XA.ZB`; identity factors are omitted, the
    /// identity word prints as `I`. A leading `-`, `i` or `-i` carries the
    /// phase.
    pub fn label_string(&self, labels: &[Qubit]) -> String {
        assert_eq!(labels.len(), self.n_qubits);
        let body: Vec<String> = labels
            .iter()
            .enumerate()
            .filter_map(|(q, l)| {
                let p = self.pauli_at(q);
                (p != Pauli::I).then(|| format!("{}{}", p.letter(), l))
            })
            .collect();
        let body = if body.is_empty() {
            "I".to_string()
        } else {
            body.join(".")
        };
        let prefix = match self.phase {
            Phase::PlusOne => "",
            Phase::MinusOne => "-",
            Phase::PlusI => "i",
            Phase::MinusI => "-i",
        };
        format!("{prefix}{body}")
    }
}

/// Phase exponent picked up when multiplying single-qubit factors
/// `P(x1, z1) P(x2, z2) = i^g P(x1 ^ x2, z1 ^ z2)`.
fn product_exponent(x1: bool, z1: bool, x2: bool, z2: bool) -> i32 {
    let (x2i, z2i) = (x2 as i32, z2 as i32);
    match (x1, z1) {
        (false, false) => 0,
        (true, true) => z2i - x2i,
        (true, false) => z2i * (2 * x2i - 1),
        (false, true) => x2i * (1 - 2 * z2i),
    }
}

impl Mul for PauliWord {
    type Output = PauliWord;

    fn mul(self, rhs: PauliWord) -> PauliWord {
        assert_eq!(self.n_qubits, rhs.n_qubits, "word length mismatch");
        let mut k = self.phase.power() + rhs.phase.power();
        for q in 0..self.n_qubits {
            let bit = 1u8 << (self.n_qubits - 1 - q);
            k += product_exponent(
                self.x_mask & bit != 0,
                self.z_mask & bit != 0,
                rhs.x_mask & bit != 0,
                rhs.z_mask & bit != 0,
            );
        }
        PauliWord {
            n_qubits: self.n_qubits,
            x_mask: self.x_mask ^ rhs.x_mask,
            z_mask: self.z_mask ^ rhs.z_mask,
            phase: Phase::from_power(k),
        }
    }
}

impl fmt::Display for PauliWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.phase {
            Phase::PlusOne => {}
            Phase::MinusOne => f.write_str("-")?,
            Phase::PlusI => f.write_str("i")?,
            Phase::MinusI => f.write_str("-i")?,
        }
        for p in self.paulis() {
            write!(f, "{}", p.letter())?;
        }
        Ok(())
    }
}

/// Positional notation: `"ZXZ"`, optionally prefixed by `-`, `i` or `-i`.
impl FromStr for PauliWord {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (phase, body) = if let Some(rest) = s.strip_prefix("-i") {
            (Phase::MinusI, rest)
        } else if let Some(rest) = s.strip_prefix('-') {
            (Phase::MinusOne, rest)
        } else if let Some(rest) = s.strip_prefix('i') {
            (Phase::PlusI, rest)
        } else if let Some(rest) = s.strip_prefix('+') {
            (Phase::PlusOne, rest)
        } else {
            (Phase::PlusOne, s)
        };
        if body.is_empty() || body.len() > 8 {
            return Err(format!("bad Pauli word {s:?}"));
        }
        let ops = body
            .chars()
            .map(|c| match c {
                'I' => Ok(Pauli::I),
                'X' => Ok(Pauli::X),
                'Y' => Ok(Pauli::Y),
                'Z' => Ok(Pauli::Z),
                other => Err(format!("bad Pauli letter {other:?} in {s:?}")),
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(PauliWord::from_paulis(&ops).with_phase(phase))
    }
}
