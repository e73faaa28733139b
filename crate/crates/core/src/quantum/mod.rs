//! Dense linear algebra for systems of up to three qubits.
//!
//! Every closed form elsewhere in the crate is cross-checked against the
//! brute-force routines here. Matrices are indexed with the first label as the
//! most significant bit, and the global label order is `(C, A, B)`.

mod density;
mod entropy;
mod pauli;
pub mod random;
mod spectrum;

use std::fmt;

use serde::{Deserialize, Serialize};

pub use density::{embed_operator, DensityMatrix};
pub use entropy::{binary_entropy, relative_entropy, shannon_term, RelativeEntropy};
pub use pauli::{Pauli, PauliWord, Phase};
pub use spectrum::{hermitian_spectrum, min_eigenpair, Spectrum};
pub(crate) use spectrum::{matrix_spectrum, min_eigenvalue};

pub use nalgebra::Complex;

/// Complex scalar used throughout.
pub type C64 = Complex<f64>;
pub type CMatrix = nalgebra::DMatrix<C64>;
pub type CVector = nalgebra::DVector<C64>;

/// Hermiticity tolerance for spectrum computations.
pub const HERMITIAN_TOL: f64 = 1e-10;

/// Qubit labels. `C` is the ancilla carrier, `A` Alice's stored qubit and
/// `B` Bob's.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Qubit {
    C,
    A,
    B,
}

impl Qubit {
    pub const ALL: [Qubit; 3] = [Qubit::C, Qubit::A, Qubit::B];
}

impl fmt::Display for Qubit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let c = match self {
            Qubit::C => "C",
            Qubit::A => "A",
            Qubit::B => "B",
        };
        f.write_str(c)
    }
}

impl std::str::FromStr for Qubit {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "C" | "c" => Ok(Qubit::C),
            "A" | "a" => Ok(Qubit::A),
            "B" | "b" => Ok(Qubit::B),
            other => Err(format!("unknown qubit label {other:?}")),
        }
    }
}

#[inline]
pub(crate) fn c64(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// Single-qubit Pauli matrix.
pub fn pauli_2x2(p: Pauli) -> CMatrix {
    let z = C64::new(0.0, 0.0);
    let o = C64::new(1.0, 0.0);
    let i = C64::new(0.0, 1.0);
    match p {
        Pauli::I => CMatrix::from_row_slice(2, 2, &[o, z, z, o]),
        Pauli::X => CMatrix::from_row_slice(2, 2, &[z, o, o, z]),
        Pauli::Y => CMatrix::from_row_slice(2, 2, &[z, -i, i, z]),
        Pauli::Z => CMatrix::from_row_slice(2, 2, &[o, z, z, -o]),
    }
}

/// Kronecker product of a list of matrices, first factor most significant.
pub fn kron_all(factors: &[CMatrix]) -> CMatrix {
    let mut out = CMatrix::identity(1, 1);
    for f in factors {
        out = out.kronecker(f);
    }
    out
}

/// Hermitian conjugate.
pub fn dagger(m: &CMatrix) -> CMatrix {
    m.adjoint()
}

/// Maximum entry-wise deviation `|a - b|`.
pub fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    assert_eq!(a.shape(), b.shape(), "shape mismatch");
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

/// Controlled-phase gate on two qubits.
pub fn controlled_phase() -> CMatrix {
    let mut m = CMatrix::identity(4, 4);
    m[(3, 3)] = c64(-1.0, 0.0);
    m
}

/// Projector onto the maximally entangled state `(|00> + |11>)/sqrt 2`.
pub fn bell_projector() -> DensityMatrix {
    let mut m = CMatrix::zeros(4, 4);
    for &(r, c) in &[(0, 0), (0, 3), (3, 0), (3, 3)] {
        m[(r, c)] = c64(0.5, 0.0);
    }
    DensityMatrix::from_matrix(vec![Qubit::A, Qubit::B], m).expect("4x4 on two labels")
}
