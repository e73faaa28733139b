//! Bell-diagonal resource states.
//!
//! A state is stored as its three correlation coefficients and realized in
//! the graph basis of the two-vertex chain,
//! `rho = (I + s10 X_A Z_B + s01 Z_A X_B + s11 Y_A Y_B) / 4`, which is a
//! Hadamard on `B` away from the literal Bell-diagonal matrix. In that basis
//! the eigenvalue attached to the sign pattern `(a, b)` is
//! `(1 + a s01 + b s10 + ab s11) / 4`, and the slots are ordered
//! `(+,+), (+,-), (-,+), (-,-)`.

use serde::{Deserialize, Serialize};

use crate::error::{EdssError, Result};
use crate::quantum::{
    binary_entropy, c64, shannon_term, CMatrix, DensityMatrix, Pauli, PauliWord, Qubit,
};

/// Positivity and normalization tolerance.
pub const STATE_TOL: f64 = 1e-12;

/// Sign patterns `(a, b)` in slot order.
pub const SLOTS: [(i8, i8); 4] = [(1, 1), (1, -1), (-1, 1), (-1, -1)];

/// Where the single negative coefficient goes when the product of the
/// coefficients is negative.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum NegativeSlot {
    S01,
    S11,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawCoefficients")]
pub struct BellDiagonalState {
    s01: f64,
    s10: f64,
    s11: f64,
}

#[derive(Deserialize)]
struct RawCoefficients {
    s01: f64,
    s10: f64,
    s11: f64,
}

impl TryFrom<RawCoefficients> for BellDiagonalState {
    type Error = EdssError;

    fn try_from(r: RawCoefficients) -> Result<Self> {
        BellDiagonalState::new(r.s01, r.s10, r.s11)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasureReport {
    pub i_locc: f64,
    pub i_class: f64,
    pub i_edss_naive: f64,
    #[serde(rename = "lambda")]
    pub lambda_sorted: [f64; 4],
}

fn slot_eigenvalue(s01: f64, s10: f64, s11: f64, a: i8, b: i8) -> f64 {
    let (a, b) = (a as f64, b as f64);
    (1.0 + a * s01 + b * s10 + a * b * s11) / 4.0
}

fn sorted_desc(mut v: [f64; 4]) -> [f64; 4] {
    v.sort_by(|x, y| y.total_cmp(x));
    v
}

impl BellDiagonalState {
    pub fn new(s01: f64, s10: f64, s11: f64) -> Result<Self> {
        for (name, value) in [("s01", s01), ("s10", s10), ("s11", s11)] {
            if !value.is_finite() || !(-1.0..=1.0).contains(&value) {
                return Err(EdssError::CoefficientRange { name, value });
            }
        }
        for (a, b) in SLOTS {
            let value = slot_eigenvalue(s01, s10, s11, a, b);
            if value < -STATE_TOL {
                return Err(EdssError::Positivity { a, b, value });
            }
        }
        Ok(BellDiagonalState { s01, s10, s11 })
    }

    pub fn maximally_mixed() -> Self {
        BellDiagonalState {
            s01: 0.0,
            s10: 0.0,
            s11: 0.0,
        }
    }

    /// Inverse of the slot map: `lambdas[k]` is the weight of `SLOTS[k]`.
    pub fn from_spectrum(lambdas: [f64; 4]) -> Result<Self> {
        if lambdas.iter().any(|l| !l.is_finite() || *l < -STATE_TOL) {
            return Err(EdssError::InvalidSpectrum(format!(
                "negative or non-finite entry in {lambdas:?}"
            )));
        }
        let total: f64 = lambdas.iter().sum();
        if (total - 1.0).abs() > STATE_TOL {
            return Err(EdssError::InvalidSpectrum(format!(
                "entries sum to {total}"
            )));
        }
        let [l1, l2, l3, l4] = lambdas;
        let clamp = |x: f64| x.clamp(-1.0, 1.0);
        Self::new(
            clamp(l1 + l2 - l3 - l4),
            clamp(l1 - l2 + l3 - l4),
            clamp(l1 - l2 - l3 + l4),
        )
    }

    pub fn s01(&self) -> f64 {
        self.s01
    }

    pub fn s10(&self) -> f64 {
        self.s10
    }

    pub fn s11(&self) -> f64 {
        self.s11
    }

    pub fn coefficients(&self) -> [f64; 3] {
        [self.s01, self.s10, self.s11]
    }

    /// Eigenvalue for sign pattern `(a, b)`.
    pub fn eigenvalue(&self, a: i8, b: i8) -> f64 {
        slot_eigenvalue(self.s01, self.s10, self.s11, a, b)
    }

    /// Eigenvalues in slot order `(+,+), (+,-), (-,+), (-,-)`.
    pub fn slot_spectrum(&self) -> [f64; 4] {
        SLOTS.map(|(a, b)| self.eigenvalue(a, b))
    }

    /// Closed-form eigenvalues, sorted descending.
    pub fn spectrum(&self) -> [f64; 4] {
        sorted_desc(self.slot_spectrum())
    }

    /// State with every coefficient replaced by its magnitude.
    pub fn magnitudes(&self) -> BellDiagonalState {
        BellDiagonalState {
            s01: self.s01.abs(),
            s10: self.s10.abs(),
            s11: self.s11.abs(),
        }
    }

    /// Slot spectrum of [`Self::magnitudes`]; descending for canonical states.
    ///
    /// The magnitude state need not be a valid state itself, so this bypasses
    /// the positivity check.
    pub fn magnitude_spectrum(&self) -> [f64; 4] {
        let m = self.magnitudes();
        m.slot_spectrum()
    }

    /// Number of strictly negative coefficients.
    pub fn negative_count(&self) -> usize {
        self.coefficients().iter().filter(|c| **c < 0.0).count()
    }

    pub fn all_positive(&self) -> bool {
        self.coefficients().iter().all(|c| *c > 0.0)
    }

    /// `lambda_1 <= 1/2`.
    pub fn is_separable(&self) -> bool {
        self.spectrum()[0] <= 0.5 + STATE_TOL
    }

    /// `|s01| >= |s10| >= |s11|` and the signs are in canonical position.
    pub fn is_canonical(&self) -> bool {
        let [a, b, c] = self.coefficients().map(f64::abs);
        if a + STATE_TOL < b || b + STATE_TOL < c {
            return false;
        }
        match self.negative_count() {
            0 => true,
            1 => {
                (self.s11 < 0.0 || self.s01 < 0.0) && self.coefficients().iter().all(|x| *x != 0.0)
            }
            _ => false,
        }
    }

    /// Negative slot dictated by the protocol: `s11` unless
    /// `|s01 - s11 - s s01 - s s11|` vanishes at the protocol's `s`, in which
    /// case `s01`. Evaluated on magnitudes.
    pub fn preferred_negative_slot(&self) -> NegativeSlot {
        let mut m = self.coefficients().map(f64::abs);
        m.sort_by(|x, y| y.total_cmp(x));
        let [a, b, c] = m;
        let mags = BellDiagonalState {
            s01: a,
            s10: b,
            s11: c,
        };
        let s = crate::protocol::choose_s_magnitudes(&mags).s;
        if (a - c - s * a - s * c).abs() > STATE_TOL {
            NegativeSlot::S11
        } else {
            NegativeSlot::S01
        }
    }

    /// Canonical form with the negative coefficient (if any) placed by
    /// [`Self::preferred_negative_slot`].
    pub fn canonicalize(&self) -> BellDiagonalState {
        self.canonicalize_with(self.preferred_negative_slot())
    }

    /// Sorts by magnitude and uses pair sign flips to leave at most one
    /// negative coefficient, in `slot`. A zero coefficient absorbs the parity
    /// so that such states come out all nonnegative.
    pub fn canonicalize_with(&self, slot: NegativeSlot) -> BellDiagonalState {
        let mut m = self.coefficients();
        m.sort_by(|x, y| y.abs().total_cmp(&x.abs()));
        let negatives = m.iter().filter(|c| **c < 0.0).count();
        let has_zero = m.contains(&0.0);
        let mut out = m.map(f64::abs);
        if negatives % 2 == 1 && !has_zero {
            match slot {
                NegativeSlot::S01 => out[0] = -out[0],
                NegativeSlot::S11 => out[2] = -out[2],
            }
        }
        BellDiagonalState {
            s01: out[0],
            s10: out[1],
            s11: out[2],
        }
    }

    /// All 24 images under coefficient permutations combined with pair sign
    /// flips.
    pub fn symmetry_orbit(&self) -> Vec<BellDiagonalState> {
        const PERMS: [[usize; 3]; 6] = [
            [0, 1, 2],
            [0, 2, 1],
            [1, 0, 2],
            [1, 2, 0],
            [2, 0, 1],
            [2, 1, 0],
        ];
        const FLIPS: [[f64; 3]; 4] = [
            [1.0, 1.0, 1.0],
            [-1.0, -1.0, 1.0],
            [-1.0, 1.0, -1.0],
            [1.0, -1.0, -1.0],
        ];
        let c = self.coefficients();
        let mut out = Vec::with_capacity(24);
        for p in PERMS {
            for f in FLIPS {
                out.push(BellDiagonalState {
                    s01: f[0] * c[p[0]],
                    s10: f[1] * c[p[1]],
                    s11: f[2] * c[p[2]],
                });
            }
        }
        out
    }

    pub fn measures(&self) -> MeasureReport {
        let l = self.spectrum().map(|x| x.clamp(0.0, 1.0));
        let i_locc = 1.0 - binary_entropy(l[0].max(0.5));
        let neg_entropy: f64 = l.iter().map(|&x| -shannon_term(x)).sum();
        let i_class = (1.0 + neg_entropy + binary_entropy(l[0] + l[1])).max(0.0);
        let i_edss_naive = 1.0 - binary_entropy(l[0] + l[3]);
        MeasureReport {
            i_locc,
            i_class,
            i_edss_naive,
            lambda_sorted: l,
        }
    }

    /// Graph-basis realization on `(A, B)`.
    pub fn to_density_matrix(&self) -> DensityMatrix {
        let labels = [Qubit::A, Qubit::B];
        let words = [
            (
                self.s10,
                PauliWord::on(&labels, &[(Qubit::A, Pauli::X), (Qubit::B, Pauli::Z)]),
            ),
            (
                self.s01,
                PauliWord::on(&labels, &[(Qubit::A, Pauli::Z), (Qubit::B, Pauli::X)]),
            ),
            (
                self.s11,
                PauliWord::on(&labels, &[(Qubit::A, Pauli::Y), (Qubit::B, Pauli::Y)]),
            ),
        ];
        let mut m = CMatrix::identity(4, 4);
        for (coeff, w) in words {
            m += w.matrix() * c64(coeff, 0.0);
        }
        m *= c64(0.25, 0.0);
        DensityMatrix::from_matrix(labels.to_vec(), m).expect("4x4 on two labels")
    }

    /// Literal Bell-diagonal matrix: the graph realization with a Hadamard
    /// applied to `B`.
    pub fn to_bell_basis_matrix(&self) -> DensityMatrix {
        let h = hadamard();
        self.to_density_matrix()
            .conjugated_on(&h, &[Qubit::B])
            .expect("B is present")
    }
}

pub(crate) fn hadamard() -> CMatrix {
    let r = std::f64::consts::FRAC_1_SQRT_2;
    CMatrix::from_row_slice(2, 2, &[c64(r, 0.0), c64(r, 0.0), c64(r, 0.0), c64(-r, 0.0)])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::{hermitian_spectrum, random};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn state(a: f64, b: f64, c: f64) -> BellDiagonalState {
        BellDiagonalState::new(a, b, c).unwrap()
    }

    fn dense_spectrum(s: &BellDiagonalState) -> Vec<f64> {
        hermitian_spectrum(&s.to_density_matrix(), false)
            .unwrap()
            .eigenvalues
    }

    fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
        a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() < tol)
    }

    pub(crate) fn random_state<R: Rng>(rng: &mut R) -> BellDiagonalState {
        let l = random::simplex_point(4, rng);
        BellDiagonalState::from_spectrum([l[0], l[1], l[2], l[3]]).unwrap()
    }

    #[test]
    fn closed_form_examples() {
        assert_eq!(state(0.0, 0.0, 0.0).spectrum(), [0.25; 4]);
        assert_eq!(state(0.5, 0.25, 0.25).spectrum(), [0.5, 0.25, 0.125, 0.125]);
        let s = state(0.4, 0.3, 0.2).spectrum();
        assert!(close(&s, &[0.475, 0.225, 0.175, 0.125], 1e-15));
    }

    #[test]
    fn closed_form_matches_dense_on_examples() {
        for s in [
            state(0.5, 0.25, 0.25),
            state(0.4, 0.3, 0.2),
            state(0.5, 0.25, -0.25),
        ] {
            assert!(close(&s.spectrum(), &dense_spectrum(&s), 1e-12));
        }
    }

    #[test]
    fn closed_form_matches_dense_random() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..10_000 {
            let s = random_state(&mut rng);
            assert!(close(&s.spectrum(), &dense_spectrum(&s), 1e-12), "{s:?}");
        }
    }

    #[test]
    fn positivity_error_names_pattern() {
        let err = BellDiagonalState::new(1.0, 1.0, -1.0).unwrap_err();
        assert!(matches!(err, EdssError::Positivity { .. }));
        assert!(matches!(
            BellDiagonalState::new(1.5, 0.0, 0.0),
            Err(EdssError::CoefficientRange { name: "s01", .. })
        ));
        match BellDiagonalState::new(0.9, 0.9, -0.9) {
            Err(EdssError::Positivity { a: -1, b: -1, .. }) => {}
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn from_spectrum_examples() {
        assert_eq!(
            BellDiagonalState::from_spectrum([0.25; 4])
                .unwrap()
                .coefficients(),
            [0.0; 3]
        );
        let s = BellDiagonalState::from_spectrum([0.5, 0.25, 0.25, 0.0]).unwrap();
        assert_eq!(s.coefficients(), [0.5, 0.5, 0.0]);
        assert!(BellDiagonalState::from_spectrum([0.5, 0.5, 0.5, -0.5]).is_err());
        assert!(BellDiagonalState::from_spectrum([0.5, 0.25, 0.25, 0.1]).is_err());
    }

    #[test]
    fn from_spectrum_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for _ in 0..1000 {
            let l = random::simplex_point(4, &mut rng);
            let l = [l[0], l[1], l[2], l[3]];
            let s = BellDiagonalState::from_spectrum(l).unwrap();
            assert!(close(&s.slot_spectrum(), &l, 1e-14));
            assert!(close(&s.spectrum(), &sorted_desc(l), 1e-14));
        }
    }

    #[test]
    fn canonicalize_examples() {
        assert_eq!(
            state(0.25, 0.5, 0.25).canonicalize().coefficients(),
            [0.5, 0.25, 0.25]
        );
        assert_eq!(
            state(-0.5, -0.25, 0.25).canonicalize().coefficients(),
            [0.5, 0.25, 0.25]
        );
        let c = state(0.5, 0.25, -0.25).canonicalize();
        assert_eq!(c.coefficients().map(f64::abs), [0.5, 0.25, 0.25]);
        assert_eq!(c.negative_count(), 1);
        assert_eq!(c.coefficients(), [0.5, 0.25, -0.25]);
    }

    #[test]
    fn orbit_preserves_spectrum_and_contains_canonical_form() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for _ in 0..200 {
            let s = random_state(&mut rng);
            let orbit = s.symmetry_orbit();
            assert_eq!(orbit.len(), 24);
            for t in &orbit {
                assert!(close(&t.spectrum(), &s.spectrum(), 1e-14));
            }
            for slot in [NegativeSlot::S01, NegativeSlot::S11] {
                let c = s.canonicalize_with(slot);
                assert!(orbit.iter().any(|t| t.coefficients() == c.coefficients()));
                assert!(c.is_canonical(), "{c:?}");
            }
        }
    }

    #[test]
    fn canonicalize_is_idempotent() {
        let mut rng = ChaCha8Rng::seed_from_u64(14);
        for _ in 0..500 {
            let c = random_state(&mut rng).canonicalize();
            assert_eq!(c.canonicalize(), c);
        }
    }

    #[test]
    fn zero_coefficient_canonicalizes_nonnegative() {
        let c = state(-0.5, 0.25, 0.0).canonicalize();
        assert_eq!(c.coefficients(), [0.5, 0.25, 0.0]);
        assert!(c.is_canonical());
    }

    #[test]
    fn pair_sums_track_sign_of_product() {
        // on canonical states: s11 = 0 iff lambda1 + lambda4 = 1/2, and all
        // positive iff lambda1 + lambda4 > 1/2
        let steps = 20;
        for i in 0..=steps {
            for j in 0..=i {
                for k in -j..=j {
                    let (a, b, c) = (
                        i as f64 / steps as f64,
                        j as f64 / steps as f64,
                        k as f64 / steps as f64,
                    );
                    let Ok(s) = BellDiagonalState::new(a, b, c) else {
                        continue;
                    };
                    let s = s.canonicalize();
                    let l = s.spectrum();
                    let pair = l[0] + l[3];
                    if s.s11() == 0.0 {
                        assert!((pair - 0.5).abs() < 1e-14, "{s:?}");
                    }
                    if (pair - 0.5).abs() < 1e-14 {
                        assert!(s.coefficients().iter().any(|x| x.abs() < 1e-14));
                    }
                    assert_eq!(s.all_positive(), pair > 0.5 + 1e-14, "{s:?}");
                }
            }
        }
    }

    #[test]
    fn measures_examples() {
        let m = state(0.5, 0.25, 0.25).measures();
        assert_eq!(m.i_locc, 0.0);
        assert!(
            (m.i_class - 0.061_278_124_459_132_8).abs() < 1e-12,
            "{}",
            m.i_class
        );

        let m = BellDiagonalState::from_spectrum([0.5, 0.25, 0.25, 0.0])
            .unwrap()
            .measures();
        let expected = 1.0 - 1.5 + binary_entropy(0.75);
        assert!((m.i_class - expected).abs() < 1e-14);
        assert!((m.i_class - 0.3113).abs() < 1e-4);

        let m = BellDiagonalState::maximally_mixed().measures();
        assert_eq!((m.i_locc, m.i_class, m.i_edss_naive), (0.0, 0.0, 0.0));
    }

    #[test]
    fn measures_nonnegative_and_locc_vanishes_when_separable() {
        let mut rng = ChaCha8Rng::seed_from_u64(15);
        for _ in 0..2000 {
            let s = random_state(&mut rng);
            let m = s.measures();
            assert!(m.i_locc >= 0.0 && m.i_class >= 0.0);
            if s.is_separable() {
                assert!(m.i_locc.abs() < 1e-12);
            }
        }
    }

    #[test]
    fn zero_discord_states_have_two_nonzero_coefficients() {
        for p in [0.05, 0.1, 0.2, 0.3, 0.45] {
            let q = 0.5 - p;
            let s = BellDiagonalState::from_spectrum([p, p, q, q]).unwrap();
            assert!(s.measures().i_class.abs() < 1e-12);
            let nonzero = 1 + s.coefficients().iter().filter(|c| c.abs() > 1e-14).count();
            assert_eq!(nonzero, 2);
        }
    }

    #[test]
    fn hadamard_on_b_preserves_spectrum() {
        let mut rng = ChaCha8Rng::seed_from_u64(16);
        for _ in 0..100 {
            let s = random_state(&mut rng);
            let lit = hermitian_spectrum(&s.to_bell_basis_matrix(), false)
                .unwrap()
                .eigenvalues;
            assert!(close(&lit, &dense_spectrum(&s), 1e-12));
        }
    }

    #[test]
    fn literal_matrix_is_bell_diagonal() {
        // the Hadamard-rotated realization is diagonal in the Bell basis
        let s = state(0.4, 0.3, 0.2);
        let r = std::f64::consts::FRAC_1_SQRT_2;
        let columns = [
            [1.0, 0.0, 0.0, 1.0],
            [1.0, 0.0, 0.0, -1.0],
            [0.0, 1.0, 1.0, 0.0],
            [0.0, 1.0, -1.0, 0.0],
        ];
        let bell = CMatrix::from_fn(4, 4, |i, j| c64(r * columns[j][i], 0.0));
        let m = bell.adjoint() * s.to_bell_basis_matrix().matrix() * &bell;
        for r in 0..4 {
            for c in 0..4 {
                if r != c {
                    assert!(m[(r, c)].norm() < 1e-14, "{m}");
                }
            }
        }
    }

    #[test]
    fn json_shape() {
        let s = state(0.5, 0.25, 0.25);
        let v: serde_json::Value = serde_json::to_value(s).unwrap();
        assert_eq!(v, serde_json::json!({"s01": 0.5, "s10": 0.25, "s11": 0.25}));
        let back: BellDiagonalState = serde_json::from_value(v).unwrap();
        assert_eq!(back, s);
        assert!(serde_json::from_str::<BellDiagonalState>(r#"{"s01":2,"s10":0,"s11":0}"#).is_err());
        let m = serde_json::to_value(s.measures()).unwrap();
        assert_eq!(m["lambda"].as_array().unwrap().len(), 4);
        assert!(
            m.get("i_locc").is_some()
                && m.get("i_class").is_some()
                && m.get("i_edss_naive").is_some()
        );
    }
}
