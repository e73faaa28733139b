use std::fmt;

use crate::error::{EdssError, Result};

use super::{max_abs_diff, CMatrix, Qubit, C64};

/// Dense operator on a labelled qubit register.
///
/// The matrix may be any operator on the register; state-specific invariants
/// (unit trace, positivity) are checked with [`DensityMatrix::validate_state`].
#[derive(Clone, PartialEq)]
pub struct DensityMatrix {
    labels: Vec<Qubit>,
    data: CMatrix,
}

impl fmt::Debug for DensityMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("DensityMatrix")
            .field("labels", &self.labels)
            .field("data", &self.data)
            .finish()
    }
}

impl DensityMatrix {
    pub fn from_matrix(labels: Vec<Qubit>, data: CMatrix) -> Result<Self> {
        let n = labels.len();
        if n == 0 || n > 3 {
            return Err(EdssError::Dimension(format!("{n} qubits; 1..=3 supported")));
        }
        for (i, l) in labels.iter().enumerate() {
            if labels[..i].contains(l) {
                return Err(EdssError::Dimension(format!("duplicate label {l}")));
            }
        }
        let dim = 1usize << n;
        if data.shape() != (dim, dim) {
            return Err(EdssError::Dimension(format!(
                "matrix is {:?}, expected {dim}x{dim}",
                data.shape()
            )));
        }
        Ok(DensityMatrix { labels, data })
    }

    pub fn identity(labels: Vec<Qubit>) -> Self {
        let dim = 1usize << labels.len();
        Self::from_matrix(labels, CMatrix::identity(dim, dim)).expect("well-formed identity")
    }

    pub fn maximally_mixed(labels: Vec<Qubit>) -> Self {
        let dim = 1usize << labels.len();
        let mut m = Self::identity(labels);
        m.data /= C64::new(dim as f64, 0.0);
        m
    }

    /// Pure state `|v><v|`.
    pub fn pure(labels: Vec<Qubit>, v: &super::CVector) -> Result<Self> {
        Self::from_matrix(labels, v * v.adjoint())
    }

    pub fn labels(&self) -> &[Qubit] {
        &self.labels
    }

    pub fn n_qubits(&self) -> usize {
        self.labels.len()
    }

    pub fn dim(&self) -> usize {
        self.data.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.data
    }

    pub fn into_matrix(self) -> CMatrix {
        self.data
    }

    pub fn trace(&self) -> C64 {
        self.data.trace()
    }

    pub fn position(&self, q: Qubit) -> Result<usize> {
        self.labels
            .iter()
            .position(|l| *l == q)
            .ok_or(EdssError::UnknownQubit(q))
    }

    fn positions(&self, subset: &[Qubit]) -> Result<Vec<usize>> {
        subset.iter().map(|q| self.position(*q)).collect()
    }

    /// Row-index bit belonging to register position `pos`.
    fn bit(&self, pos: usize) -> usize {
        self.n_qubits() - 1 - pos
    }

    pub fn hermiticity_deviation(&self) -> f64 {
        max_abs_diff(&self.data, &self.data.adjoint())
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_deviation() <= tol
    }

    pub fn scaled(&self, factor: f64) -> Self {
        DensityMatrix {
            labels: self.labels.clone(),
            data: &self.data * C64::new(factor, 0.0),
        }
    }

    /// Checks Hermiticity (1e-12), unit trace (1e-12) and positivity (-1e-10).
    pub fn validate_state(&self) -> Result<()> {
        let dev = self.hermiticity_deviation();
        if dev > 1e-12 {
            return Err(EdssError::NotHermitian { deviation: dev });
        }
        let tr = self.trace();
        if (tr.re - 1.0).abs() > 1e-12 || tr.im.abs() > 1e-12 {
            return Err(EdssError::InvalidSpectrum(format!("trace {tr} != 1")));
        }
        let spec = super::hermitian_spectrum(self, false)?;
        let min = spec.min();
        if min < -1e-10 {
            return Err(EdssError::InvalidSpectrum(format!(
                "negative eigenvalue {min:e}"
            )));
        }
        Ok(())
    }

    /// `self (x) other`, labels concatenated.
    pub fn tensor(&self, other: &DensityMatrix) -> Result<DensityMatrix> {
        let mut labels = self.labels.clone();
        labels.extend_from_slice(&other.labels);
        DensityMatrix::from_matrix(labels, self.data.kronecker(&other.data))
    }

    /// Transposes the indices of the qubits in `subset` only.
    pub fn partial_transpose(&self, subset: &[Qubit]) -> Result<DensityMatrix> {
        let mask = self
            .positions(subset)?
            .into_iter()
            .fold(0usize, |m, p| m | (1 << self.bit(p)));
        let dim = self.dim();
        let mut out = CMatrix::zeros(dim, dim);
        for r in 0..dim {
            for c in 0..dim {
                // swap the selected bits between row and column index
                let diff = (r ^ c) & mask;
                out[(r ^ diff, c ^ diff)] = self.data[(r, c)];
            }
        }
        Ok(DensityMatrix {
            labels: self.labels.clone(),
            data: out,
        })
    }

    /// Traces out the qubits in `subset`.
    pub fn partial_trace(&self, subset: &[Qubit]) -> Result<DensityMatrix> {
        let traced = self.positions(subset)?;
        let kept: Vec<usize> = (0..self.n_qubits())
            .filter(|p| !traced.contains(p))
            .collect();
        if kept.is_empty() {
            return Err(EdssError::Dimension("cannot trace out every qubit".into()));
        }
        let labels: Vec<Qubit> = kept.iter().map(|&p| self.labels[p]).collect();
        let dk = 1usize << kept.len();
        let dt = 1usize << traced.len();
        let compose = |k: usize, t: usize| -> usize {
            let mut idx = 0usize;
            for (j, &p) in kept.iter().enumerate() {
                if k >> (kept.len() - 1 - j) & 1 == 1 {
                    idx |= 1 << self.bit(p);
                }
            }
            for (j, &p) in traced.iter().enumerate() {
                if t >> (traced.len() - 1 - j) & 1 == 1 {
                    idx |= 1 << self.bit(p);
                }
            }
            idx
        };
        let mut out = CMatrix::zeros(dk, dk);
        for r in 0..dk {
            for c in 0..dk {
                let mut acc = C64::new(0.0, 0.0);
                for t in 0..dt {
                    acc += self.data[(compose(r, t), compose(c, t))];
                }
                out[(r, c)] = acc;
            }
        }
        DensityMatrix::from_matrix(labels, out)
    }

    /// Reorders the register so that `order` becomes the label sequence.
    pub fn permuted(&self, order: &[Qubit]) -> Result<DensityMatrix> {
        if order.len() != self.n_qubits() {
            return Err(EdssError::Dimension("permutation length mismatch".into()));
        }
        let src: Vec<usize> = self.positions(order)?;
        let n = self.n_qubits();
        let map = |i: usize| -> usize {
            // bit j of the new index (position j) comes from old position src[j]
            let mut old = 0usize;
            for (j, &p) in src.iter().enumerate() {
                if i >> (n - 1 - j) & 1 == 1 {
                    old |= 1 << (n - 1 - p);
                }
            }
            old
        };
        let dim = self.dim();
        let mut out = CMatrix::zeros(dim, dim);
        for r in 0..dim {
            for c in 0..dim {
                out[(r, c)] = self.data[(map(r), map(c))];
            }
        }
        DensityMatrix::from_matrix(order.to_vec(), out)
    }

    /// `U rho U^dag` for a full-register unitary.
    pub fn conjugated(&self, u: &CMatrix) -> DensityMatrix {
        assert_eq!(u.shape(), self.data.shape(), "unitary dimension");
        DensityMatrix {
            labels: self.labels.clone(),
            data: u * &self.data * u.adjoint(),
        }
    }

    /// Applies `op` (acting on `targets`, first target most significant) by
    /// conjugation.
    pub fn conjugated_on(&self, op: &CMatrix, targets: &[Qubit]) -> Result<DensityMatrix> {
        let full = embed_operator(&self.labels, targets, op)?;
        Ok(self.conjugated(&full))
    }

    pub fn add(&self, other: &DensityMatrix) -> Result<DensityMatrix> {
        if self.labels != other.labels {
            return Err(EdssError::Dimension("label mismatch in sum".into()));
        }
        Ok(DensityMatrix {
            labels: self.labels.clone(),
            data: &self.data + &other.data,
        })
    }

    /// Expectation `Tr(rho P)` of an operator on the full register.
    pub fn expectation(&self, op: &CMatrix) -> C64 {
        (&self.data * op).trace()
    }
}

/// Lifts `op` acting on `targets` to the full register described by `labels`.
pub fn embed_operator(labels: &[Qubit], targets: &[Qubit], op: &CMatrix) -> Result<CMatrix> {
    let n = labels.len();
    let k = targets.len();
    if op.shape() != (1 << k, 1 << k) {
        return Err(EdssError::Dimension(format!(
            "operator {:?} does not act on {k} qubits",
            op.shape()
        )));
    }
    let pos: Vec<usize> = targets
        .iter()
        .map(|q| {
            labels
                .iter()
                .position(|l| l == q)
                .ok_or(EdssError::UnknownQubit(*q))
        })
        .collect::<Result<_>>()?;
    let target_mask = pos.iter().fold(0usize, |m, &p| m | 1 << (n - 1 - p));
    let sub = |i: usize| -> usize {
        pos.iter().enumerate().fold(0usize, |acc, (j, &p)| {
            acc | ((i >> (n - 1 - p) & 1) << (k - 1 - j))
        })
    };
    let dim = 1usize << n;
    let mut out = CMatrix::zeros(dim, dim);
    for r in 0..dim {
        for c in 0..dim {
            if r & !target_mask == c & !target_mask {
                out[(r, c)] = op[(sub(r), sub(c))];
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::{bell_projector, hermitian_spectrum, kron_all, pauli_2x2, random, Pauli};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    const CAB: [Qubit; 3] = [Qubit::C, Qubit::A, Qubit::B];

    fn dm(labels: &[Qubit], m: CMatrix) -> DensityMatrix {
        DensityMatrix::from_matrix(labels.to_vec(), m).unwrap()
    }

    #[test]
    fn identity_tensor_identity() {
        let i2 = DensityMatrix::identity(vec![Qubit::A]);
        let i2b = DensityMatrix::identity(vec![Qubit::B]);
        let t = i2.tensor(&i2b).unwrap();
        assert_eq!(t.labels(), &[Qubit::A, Qubit::B]);
        assert!(max_abs_diff(t.matrix(), &CMatrix::identity(4, 4)) == 0.0);
    }

    #[test]
    fn x_tensor_x_is_antidiagonal() {
        let x = dm(&[Qubit::A], pauli_2x2(Pauli::X));
        let xb = dm(&[Qubit::B], pauli_2x2(Pauli::X));
        let t = x.tensor(&xb).unwrap();
        for r in 0..4 {
            for c in 0..4 {
                let expect = if r + c == 3 { 1.0 } else { 0.0 };
                assert_eq!(t.matrix()[(r, c)], C64::new(expect, 0.0));
            }
        }
    }

    #[test]
    fn trace_is_multiplicative() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            let a = dm(&[Qubit::A], random::hermitian(2, &mut rng));
            let b = dm(&[Qubit::C, Qubit::B], random::hermitian(4, &mut rng));
            let t = a.tensor(&b).unwrap();
            assert!((t.trace() - a.trace() * b.trace()).norm() < 1e-12);
        }
    }

    #[test]
    fn partial_transpose_of_product_state() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let a = random::density_matrix(vec![Qubit::A], &mut rng);
        let b = random::density_matrix(vec![Qubit::B], &mut rng);
        let ab = a.tensor(&b).unwrap();
        let pt = ab.partial_transpose(&[Qubit::A]).unwrap();
        let expected = dm(&[Qubit::A], a.matrix().transpose()).tensor(&b).unwrap();
        assert!(max_abs_diff(pt.matrix(), expected.matrix()) < 1e-15);
        let s0 = hermitian_spectrum(&ab, false).unwrap();
        let s1 = hermitian_spectrum(&pt, false).unwrap();
        assert!(s0.max_abs_diff(&s1) < 1e-12);
    }

    #[test]
    fn partial_transpose_over_everything_is_transpose_and_involution() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let rho = random::density_matrix(CAB.to_vec(), &mut rng);
        let full = rho.partial_transpose(&CAB).unwrap();
        assert_eq!(full.matrix(), &rho.matrix().transpose());
        for subset in [&[Qubit::A][..], &[Qubit::C, Qubit::B], &[Qubit::B]] {
            let twice = rho
                .partial_transpose(subset)
                .unwrap()
                .partial_transpose(subset)
                .unwrap();
            assert_eq!(twice.matrix(), rho.matrix());
            assert!(rho.partial_transpose(subset).unwrap().is_hermitian(1e-14));
        }
    }

    #[test]
    fn maximally_entangled_partial_transpose_min_is_minus_half() {
        let phi = bell_projector();
        let pt = phi.partial_transpose(&[Qubit::A]).unwrap();
        let spec = hermitian_spectrum(&pt, false).unwrap();
        assert!((spec.min() + 0.5).abs() < 1e-12);
    }

    #[test]
    fn unknown_label_is_an_error() {
        let phi = bell_projector();
        assert_eq!(
            phi.partial_transpose(&[Qubit::C]).unwrap_err(),
            EdssError::UnknownQubit(Qubit::C)
        );
        assert!(phi.partial_trace(&[Qubit::C]).is_err());
    }

    #[test]
    fn partial_trace_of_product_and_bell() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let c = random::density_matrix(vec![Qubit::C], &mut rng);
        let ab = random::density_matrix(vec![Qubit::A, Qubit::B], &mut rng);
        let cab = c.tensor(&ab).unwrap();
        let back = cab.partial_trace(&[Qubit::C]).unwrap();
        assert!(max_abs_diff(back.matrix(), ab.matrix()) < 1e-14);
        let back_c = cab.partial_trace(&[Qubit::A, Qubit::B]).unwrap();
        assert!(max_abs_diff(back_c.matrix(), c.matrix()) < 1e-14);

        let half = bell_projector().partial_trace(&[Qubit::B]).unwrap();
        assert!(
            max_abs_diff(
                half.matrix(),
                &(CMatrix::identity(2, 2) * C64::new(0.5, 0.0))
            ) < 1e-15
        );
    }

    #[test]
    fn partial_trace_of_middle_qubit() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let c = random::density_matrix(vec![Qubit::C], &mut rng);
        let a = random::density_matrix(vec![Qubit::A], &mut rng);
        let b = random::density_matrix(vec![Qubit::B], &mut rng);
        let cab = c.tensor(&a).unwrap().tensor(&b).unwrap();
        let cb = cab.partial_trace(&[Qubit::A]).unwrap();
        let expected = c.tensor(&b).unwrap();
        assert!(max_abs_diff(cb.matrix(), expected.matrix()) < 1e-14);
    }

    #[test]
    fn permutation_reorders_factors() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let c = random::density_matrix(vec![Qubit::C], &mut rng);
        let a = random::density_matrix(vec![Qubit::A], &mut rng);
        let b = random::density_matrix(vec![Qubit::B], &mut rng);
        let cab = c.tensor(&a).unwrap().tensor(&b).unwrap();
        let acb = cab.permuted(&[Qubit::A, Qubit::C, Qubit::B]).unwrap();
        let expected = a.tensor(&c).unwrap().tensor(&b).unwrap();
        assert!(max_abs_diff(acb.matrix(), expected.matrix()) < 1e-14);
    }

    #[test]
    fn embedding_matches_kronecker_placement() {
        let z = pauli_2x2(Pauli::Z);
        let x = pauli_2x2(Pauli::X);
        let zx = z.kronecker(&x);
        // Z on A, X on B inside (C, A, B)
        let full = embed_operator(&CAB, &[Qubit::A, Qubit::B], &zx).unwrap();
        let expected = kron_all(&[pauli_2x2(Pauli::I), z.clone(), x.clone()]);
        assert!(max_abs_diff(&full, &expected) < 1e-15);
        // reversed target order: X on C, Z on B acting as (B, C)
        let full = embed_operator(&CAB, &[Qubit::B, Qubit::C], &zx).unwrap();
        let expected = kron_all(&[x, pauli_2x2(Pauli::I), z]);
        assert!(max_abs_diff(&full, &expected) < 1e-15);
    }
}
