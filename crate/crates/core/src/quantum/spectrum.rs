use nalgebra::SymmetricEigen;

use crate::error::{EdssError, Result};

use super::{CMatrix, CVector, DensityMatrix, HERMITIAN_TOL};

/// Real eigenvalues sorted descending, with optional orthonormal eigenvectors
/// (column `k` belongs to `eigenvalues[k]`).
#[derive(Debug, Clone)]
pub struct Spectrum {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: Option<CMatrix>,
}

impl Spectrum {
    pub fn max(&self) -> f64 {
        self.eigenvalues[0]
    }

    pub fn min(&self) -> f64 {
        *self.eigenvalues.last().expect("non-empty spectrum")
    }

    pub fn sum(&self) -> f64 {
        self.eigenvalues.iter().sum()
    }

    /// Largest pointwise difference between two sorted spectra.
    pub fn max_abs_diff(&self, other: &Spectrum) -> f64 {
        assert_eq!(self.eigenvalues.len(), other.eigenvalues.len());
        self.eigenvalues
            .iter()
            .zip(&other.eigenvalues)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    /// Eigenvector for the `k`-th (descending) eigenvalue.
    pub fn vector(&self, k: usize) -> Option<CVector> {
        self.eigenvectors.as_ref().map(|v| v.column(k).into_owned())
    }

    /// `V diag(lambda) V^dag`, available when eigenvectors were requested.
    pub fn reconstruct(&self) -> Option<CMatrix> {
        let v = self.eigenvectors.as_ref()?;
        let n = v.nrows();
        let mut d = CMatrix::zeros(n, n);
        for (k, &l) in self.eigenvalues.iter().enumerate() {
            d[(k, k)] = super::c64(l, 0.0);
        }
        Some(v * d * v.adjoint())
    }
}

fn decompose(m: &CMatrix, vectors: bool) -> Result<Spectrum> {
    let dev = super::max_abs_diff(m, &m.adjoint());
    if dev > HERMITIAN_TOL {
        return Err(EdssError::NotHermitian { deviation: dev });
    }
    // symmetrize so the solver sees an exactly Hermitian input
    let h = (m + m.adjoint()) * super::c64(0.5, 0.0);
    let n = h.nrows();
    if !vectors {
        let vals = h.symmetric_eigenvalues();
        let mut ev: Vec<f64> = vals.iter().copied().collect();
        ev.sort_by(|a, b| b.total_cmp(a));
        return Ok(Spectrum {
            eigenvalues: ev,
            eigenvectors: None,
        });
    }
    let eig = SymmetricEigen::try_new(h, f64::EPSILON, 10_000).ok_or(EdssError::EigenSolver)?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let mut vecs = CMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        vecs.set_column(dst, &eig.eigenvectors.column(src));
    }
    Ok(Spectrum {
        eigenvalues: order.iter().map(|&k| eig.eigenvalues[k]).collect(),
        eigenvectors: Some(vecs),
    })
}

/// Eigenvalues (descending) of a Hermitian operator, optionally with
/// eigenvectors.
pub fn hermitian_spectrum(rho: &DensityMatrix, vectors: bool) -> Result<Spectrum> {
    decompose(rho.matrix(), vectors)
}

/// Smallest eigenvalue and a matching unit eigenvector of a Hermitian matrix.
pub fn min_eigenpair(m: &CMatrix) -> Result<(f64, CVector)> {
    let spec = decompose(m, true)?;
    let k = spec.eigenvalues.len() - 1;
    Ok((
        spec.eigenvalues[k],
        spec.vector(k).expect("vectors requested"),
    ))
}

/// Smallest eigenvalue only.
pub(crate) fn min_eigenvalue(m: &CMatrix) -> Result<f64> {
    Ok(decompose(m, false)?.min())
}

/// Spectrum of an arbitrary Hermitian matrix.
pub(crate) fn matrix_spectrum(m: &CMatrix, vectors: bool) -> Result<Spectrum> {
    decompose(m, vectors)
}
