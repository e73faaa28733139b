use crate::error::{EdssError, Result};

use super::{spectrum::matrix_spectrum, DensityMatrix};

/// Eigenvalues below this magnitude are treated as exact zeros.
const CLAMP: f64 = 1e-14;

/// Support tolerance for the relative entropy.
const SUPPORT_TOL: f64 = 1e-12;

/// `-x log2 x` with the continuous extension at 0; inputs clamped to [0, 1].
pub fn shannon_term(x: f64) -> f64 {
    let x = x.clamp(0.0, 1.0);
    if x <= CLAMP {
        0.0
    } else {
        -x * x.log2()
    }
}

/// Binary entropy in bits; `H(0) = H(1) = 0`.
pub fn binary_entropy(x: f64) -> f64 {
    let x = x.clamp(0.0, 1.0);
    shannon_term(x) + shannon_term(1.0 - x)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RelativeEntropy {
    Finite(f64),
    /// `supp(rho)` is not contained in `supp(sigma)`.
    Infinite,
}

impl RelativeEntropy {
    pub fn bits(self) -> f64 {
        match self {
            RelativeEntropy::Finite(v) => v,
            RelativeEntropy::Infinite => f64::INFINITY,
        }
    }
}

/// `S(rho || sigma) = Tr(rho log2 rho - rho log2 sigma)` in bits.
pub fn relative_entropy(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<RelativeEntropy> {
    if rho.labels() != sigma.labels() {
        return Err(EdssError::Dimension(
            "relative entropy on different registers".into(),
        ));
    }
    let sr = matrix_spectrum(rho.matrix(), false)?;
    let neg_entropy: f64 = sr.eigenvalues.iter().map(|&p| -shannon_term(p)).sum();

    let ss = matrix_spectrum(sigma.matrix(), true)?;
    let vecs = ss.eigenvectors.as_ref().expect("vectors requested");
    let mut cross = 0.0;
    for (k, &q) in ss.eigenvalues.iter().enumerate() {
        let v = vecs.column(k);
        let weight = (v.adjoint() * rho.matrix() * v)[(0, 0)].re;
        if q <= SUPPORT_TOL {
            if weight > SUPPORT_TOL {
                return Ok(RelativeEntropy::Infinite);
            }
            continue;
        }
        cross += weight * q.log2();
    }
    Ok(RelativeEntropy::Finite((neg_entropy - cross).max(0.0)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::{c64, random, CMatrix, Qubit};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn binary_entropy_endpoints_and_midpoint() {
        assert_eq!(binary_entropy(0.0), 0.0);
        assert_eq!(binary_entropy(1.0), 0.0);
        assert!((binary_entropy(0.5) - 1.0).abs() < 1e-15);
        assert!((binary_entropy(0.6) - 0.970_950_594_454_668_5).abs() < 1e-14);
    }

    #[test]
    fn self_relative_entropy_vanishes() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..20 {
            let rho = random::density_matrix(vec![Qubit::A, Qubit::B], &mut rng);
            let s = relative_entropy(&rho, &rho).unwrap().bits();
            assert!(s.abs() < 1e-10, "{s}");
        }
    }

    #[test]
    fn pure_state_against_maximally_mixed_is_one_bit() {
        let mut m = CMatrix::zeros(2, 2);
        m[(0, 0)] = c64(1.0, 0.0);
        let pure = DensityMatrix::from_matrix(vec![Qubit::A], m).unwrap();
        let mixed = DensityMatrix::maximally_mixed(vec![Qubit::A]);
        let s = relative_entropy(&pure, &mixed).unwrap();
        assert!((s.bits() - 1.0).abs() < 1e-14);
        // and the reverse direction diverges
        assert_eq!(
            relative_entropy(&mixed, &pure).unwrap(),
            RelativeEntropy::Infinite
        );
    }

    #[test]
    fn nonnegative_on_random_pairs() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for _ in 0..1000 {
            let rho = random::density_matrix(vec![Qubit::A, Qubit::B], &mut rng);
            let sigma = random::full_rank_density_matrix(vec![Qubit::A, Qubit::B], &mut rng);
            match relative_entropy(&rho, &sigma).unwrap() {
                RelativeEntropy::Finite(v) => assert!(v >= -1e-12),
                RelativeEntropy::Infinite => panic!("full-rank sigma"),
            }
        }
    }
}
