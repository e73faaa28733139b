//! Seeded random operators for property sweeps.

use rand::Rng;
use rand_distr::StandardNormal;

use super::{c64, CMatrix, DensityMatrix, Qubit};

fn standard_normal<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    rng.sample(StandardNormal)
}

fn ginibre<R: Rng + ?Sized>(n: usize, rng: &mut R) -> CMatrix {
    CMatrix::from_fn(n, n, |_, _| c64(standard_normal(rng), standard_normal(rng)))
}

/// Random Hermitian matrix with Gaussian entries.
pub fn hermitian<R: Rng + ?Sized>(n: usize, rng: &mut R) -> CMatrix {
    let g = ginibre(n, rng);
    (&g + g.adjoint()) * c64(0.5, 0.0)
}

/// Haar-distributed unitary (QR of a Ginibre matrix with the phase fix).
pub fn haar_unitary<R: Rng + ?Sized>(n: usize, rng: &mut R) -> CMatrix {
    let qr = ginibre(n, rng).qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..n {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 {
            d / d.norm()
        } else {
            c64(1.0, 0.0)
        };
        let mut col = q.column_mut(j);
        col *= phase;
    }
    q
}

/// Random mixed state `G G^dag / Tr` (Hilbert-Schmidt measure); may be close
/// to rank-deficient.
pub fn density_matrix<R: Rng + ?Sized>(labels: Vec<Qubit>, rng: &mut R) -> DensityMatrix {
    let n = 1usize << labels.len();
    let g = ginibre(n, rng);
    let m = &g * g.adjoint();
    let tr = m.trace();
    DensityMatrix::from_matrix(labels, m / tr).expect("square on labels")
}

/// Random state mixed with a little white noise so that it has full support.
pub fn full_rank_density_matrix<R: Rng + ?Sized>(labels: Vec<Qubit>, rng: &mut R) -> DensityMatrix {
    let n = 1usize << labels.len();
    let rho = density_matrix(labels.clone(), rng);
    let mixed = rho.matrix() * c64(0.9, 0.0) + CMatrix::identity(n, n) * c64(0.1 / n as f64, 0.0);
    DensityMatrix::from_matrix(labels, mixed).expect("square on labels")
}

/// Uniform point on the probability simplex with `k` entries.
pub fn simplex_point<R: Rng + ?Sized>(k: usize, rng: &mut R) -> Vec<f64> {
    let e: Vec<f64> = (0..k)
        .map(|_| -rng.random::<f64>().max(f64::MIN_POSITIVE).ln())
        .collect();
    let total: f64 = e.iter().sum();
    e.into_iter().map(|x| x / total).collect()
}
