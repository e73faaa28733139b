//! Partial-transpose certificates, entanglement localization onto two qubits,
//! and explicit separable decompositions of the protocol state.

use serde::Serialize;

use crate::bell::BellDiagonalState;
use crate::error::{EdssError, Result};
use crate::graph::{graph_basis_vector, Graph};
use crate::protocol::build_rho_abc;
use crate::quantum::{
    c64, kron_all, matrix_spectrum, max_abs_diff, min_eigenpair, min_eigenvalue, pauli_2x2,
    CMatrix, CVector, DensityMatrix, Pauli, PauliWord, Qubit,
};

/// A partial-transpose eigenvalue below this is treated as negative.
pub const NPT_TOL: f64 = 1e-10;

/// PSD tolerance for decomposition terms.
pub const PSD_TOL: f64 = 1e-10;

/// Second Schmidt coefficient above which a vector counts as entangled.
pub const SCHMIDT_TOL: f64 = 1e-8;

/// Eigenvalues closer than this to the minimum count as degenerate with it.
const DEGENERACY_TOL: f64 = 1e-9;

const CAB: [Qubit; 3] = [Qubit::C, Qubit::A, Qubit::B];

/// Smallest eigenvalue of the partial transpose over `subset`, with a unit
/// eigenvector.
pub fn min_pt_eigenvalue(rho: &DensityMatrix, subset: &[Qubit]) -> Result<(f64, CVector)> {
    min_eigenpair(rho.partial_transpose(subset)?.matrix())
}

/// Smallest partial-transpose eigenvalue without the eigenvector.
pub fn min_pt_value(rho: &DensityMatrix, subset: &[Qubit]) -> Result<f64> {
    min_eigenvalue(rho.partial_transpose(subset)?.matrix())
}

/// How the projection for [`localize`] was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum LocalizationMethod {
    /// Negative eigenvector is the chain graph-basis vector with this index.
    GraphBasis { x: usize },
    /// Schmidt basis of the negative eigenvector on the two projected qubits.
    Schmidt,
}

#[derive(Debug, Clone)]
pub struct LocalizationResult {
    /// Normalized two-qubit state on `(cut, output)`.
    pub projected_state: DensityMatrix,
    pub success_probability: f64,
    /// Smallest eigenvalue of the projected state's partial transpose.
    pub pt_min_eigenvalue: f64,
    /// Smallest partial-transpose eigenvalue of the three-qubit input.
    pub input_pt_min: f64,
    pub cut: Qubit,
    pub method: LocalizationMethod,
    /// More than one eigenvector shares the minimum eigenvalue.
    pub degenerate: bool,
    /// Two-to-one projection applied to the qubits opposite the cut.
    pub projection: CMatrix,
}

impl LocalizationResult {
    /// `input_pt_min / success_probability`, the value the projected state's
    /// minimum should reproduce.
    pub fn expected_pt_min(&self) -> f64 {
        self.input_pt_min / self.success_probability
    }
}

fn rest_of(labels: &[Qubit], r: Qubit) -> Vec<Qubit> {
    labels.iter().copied().filter(|q| *q != r).collect()
}

/// Projects the two qubits opposite `r` onto one qubit so that the negative
/// partial transpose over `r` survives on a pair.
///
/// The input must be labelled `(C, A, B)`. When the negative eigenvector is a
/// basis vector `|psi_x>` of the chain `C - A - B`, the projection is
/// `|0><psi_x'| + |1><psi_x'| Z_E`, with `x'` the bits of `x` off `r`,
/// `psi_x'` taken on the chain with `r` deleted and `E` the neighbours of `r`.
/// Otherwise the Schmidt basis of the negative eigenvector is used.
pub fn localize(rho_abc: &DensityMatrix, r: Qubit) -> Result<LocalizationResult> {
    if rho_abc.labels() != CAB {
        return Err(EdssError::Dimension(
            "localization expects labels (C, A, B)".into(),
        ));
    }
    let r_pos = rho_abc.position(r)?;
    let pt = rho_abc.partial_transpose(&[r])?;
    let spec = matrix_spectrum(pt.matrix(), true)?;
    let min = spec.min();
    if min >= -NPT_TOL {
        return Err(EdssError::NothingToLocalize { qubit: r, min });
    }
    let vecs = spec.eigenvectors.as_ref().expect("vectors requested");
    let deg: Vec<usize> = (0..8)
        .filter(|&k| spec.eigenvalues[k] - min < DEGENERACY_TOL)
        .collect();

    // eigenvector in the degenerate space closest to a graph-basis vector
    let g3 = Graph::g3();
    let mut best = (0usize, -1.0f64, CVector::zeros(8));
    for x in 0..8 {
        let psi = graph_basis_vector(&g3, x);
        let mut proj = CVector::zeros(8);
        for &k in &deg {
            let v = vecs.column(k);
            proj += v * (v.adjoint() * &psi)[(0, 0)];
        }
        let overlap = proj.norm_squared();
        if overlap > best.1 {
            best = (x, overlap, proj);
        }
    }
    let (x, overlap, proj) = best;

    let rest = rest_of(CAB.as_slice(), r);
    let (method, projection) = if overlap > 1.0 - 1e-8 {
        let gr = g3.without_vertex(r_pos)?;
        let x_rest = drop_bit(x, 2 - r_pos, 3);
        let psi = graph_basis_vector(&gr, x_rest);
        let rest_pos: Vec<usize> = (0..3).filter(|p| *p != r_pos).collect();
        let z_e: Vec<CMatrix> = rest_pos
            .iter()
            .map(|&p| {
                pauli_2x2(if g3.has_edge(p, r_pos) {
                    Pauli::Z
                } else {
                    Pauli::I
                })
            })
            .collect();
        let z_e = kron_all(&z_e);
        let bra = psi.adjoint();
        let mut p = CMatrix::zeros(2, 4);
        p.set_row(0, &bra);
        p.set_row(1, &(&bra * &z_e));
        (LocalizationMethod::GraphBasis { x }, p)
    } else {
        let v = if deg.len() > 1 && overlap > 0.0 {
            proj.normalize()
        } else {
            vecs.column(7).into_owned()
        };
        (LocalizationMethod::Schmidt, schmidt_projection(&v, r_pos))
    };

    let mut order = vec![r];
    order.extend_from_slice(&rest);
    let ordered = rho_abc.permuted(&order)?;
    let k = CMatrix::identity(2, 2).kronecker(&projection);
    let un = &k * ordered.matrix() * k.adjoint();
    let p = un.trace().re;
    let output = *rest.last().expect("two qubits remain");
    let projected = DensityMatrix::from_matrix(vec![r, output], un / c64(p, 0.0))?;
    let pt_min = min_pt_value(&projected, &[r])?;
    Ok(LocalizationResult {
        projected_state: projected,
        success_probability: p,
        pt_min_eigenvalue: pt_min,
        input_pt_min: min,
        cut: r,
        method,
        degenerate: deg.len() > 1,
        projection,
    })
}

/// Removes bit `bit` (counted from the least significant end) of an
/// `n`-bit integer.
fn drop_bit(x: usize, bit: usize, n: usize) -> usize {
    let high = (x >> (bit + 1)) << bit;
    let low = x & ((1 << bit) - 1);
    debug_assert!(bit < n);
    high | low
}

/// Rows are the conjugated Schmidt vectors of `v` on the qubits other than
/// position `r_pos`.
fn schmidt_projection(v: &CVector, r_pos: usize) -> CMatrix {
    let m = reshape_cut(v, r_pos);
    let svd = m.svd(false, true);
    let v_t = svd.v_t.expect("requested V^dag");
    CMatrix::from_fn(2, 4, |i, j| v_t[(i, j)].conj())
}

/// Reshapes a three-qubit vector into a `2 x 4` matrix, rows indexed by the
/// qubit at `r_pos`, columns by the other two in order.
fn reshape_cut(v: &CVector, r_pos: usize) -> CMatrix {
    let n = 3;
    let r_bit = n - 1 - r_pos;
    CMatrix::from_fn(2, 4, |i, j| {
        let hi = (j >> r_bit) << (r_bit + 1);
        let lo = j & ((1 << r_bit) - 1);
        v[hi | (i << r_bit) | lo]
    })
}

/// Schmidt coefficients (descending) of a vector across `position | rest`.
pub fn schmidt_coefficients(v: &CVector, r_pos: usize, n_qubits: usize) -> Vec<f64> {
    let rest = 1usize << (n_qubits - 1);
    let r_bit = n_qubits - 1 - r_pos;
    let m = CMatrix::from_fn(2, rest, |i, j| {
        let hi = (j >> r_bit) << (r_bit + 1);
        let lo = j & ((1 << r_bit) - 1);
        v[hi | (i << r_bit) | lo]
    });
    let mut s: Vec<f64> = m.singular_values().iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

/// One line of a separable decomposition: a real combination of Pauli words.
#[derive(Debug, Clone, PartialEq)]
pub struct DecompositionTerm {
    pub label: String,
    pub words: Vec<(f64, PauliWord)>,
}

impl DecompositionTerm {
    fn new(label: impl Into<String>, words: Vec<(f64, PauliWord)>) -> Self {
        DecompositionTerm {
            label: label.into(),
            words,
        }
    }

    pub fn matrix(&self) -> CMatrix {
        let mut m = CMatrix::zeros(8, 8);
        for (c, w) in &self.words {
            m += w.matrix() * c64(*c, 0.0);
        }
        m
    }

    pub fn density_matrix(&self) -> DensityMatrix {
        DensityMatrix::from_matrix(CAB.to_vec(), self.matrix()).expect("8x8 on (C, A, B)")
    }
}

/// Which term list was produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Construction {
    /// The fixed line-by-line grouping, valid for nonnegative coefficients.
    Standard,
    /// Per-group balancing of the single word acting trivially on the cut.
    Balanced,
}

#[derive(Debug, Clone)]
pub struct SeparableDecomposition {
    pub cut: Qubit,
    pub construction: Construction,
    pub terms: Vec<DecompositionTerm>,
    /// `8 rho_ABC`.
    pub target: DensityMatrix,
}

/// Serializable `{coeff, pauli}` record of one word in a term.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WordRecord {
    pub coeff: f64,
    pub pauli: String,
}

impl SeparableDecomposition {
    pub fn reconstruct(&self) -> CMatrix {
        self.terms
            .iter()
            .fold(CMatrix::zeros(8, 8), |acc, t| acc + t.matrix())
    }

    pub fn reconstruction_error(&self) -> f64 {
        max_abs_diff(&self.reconstruct(), self.target.matrix())
    }

    /// Runs [`verify_term_separable`] on every term.
    pub fn verify(&self) -> DecompositionReport {
        let terms: Vec<TermVerdict> = self
            .terms
            .iter()
            .map(|t| verify_term_separable(t, self.cut))
            .collect();
        DecompositionReport {
            reconstruction_error: self.reconstruction_error(),
            terms,
        }
    }

    /// `[[{"coeff": .., "pauli": "ZC.XA.ZB"}, ..], ..]`.
    pub fn export_terms(&self) -> Vec<Vec<WordRecord>> {
        self.terms
            .iter()
            .map(|t| {
                t.words
                    .iter()
                    .map(|(c, w)| WordRecord {
                        coeff: *c,
                        pauli: w.label_string(&CAB),
                    })
                    .collect()
            })
            .collect()
    }
}

#[derive(Debug, Clone)]
pub struct DecompositionReport {
    pub reconstruction_error: f64,
    pub terms: Vec<TermVerdict>,
}

impl DecompositionReport {
    /// Reconstruction within `tol` and every term certified.
    pub fn passed(&self, tol: f64) -> bool {
        self.reconstruction_error <= tol && self.terms.iter().all(|t| t.separable)
    }
}

/// Product vector `|r> (x) |rest>` with weight, in `(cut, rest)` order.
#[derive(Debug, Clone)]
pub struct ProductComponent {
    pub weight: f64,
    pub cut_state: CVector,
    pub rest_state: CVector,
}

/// Why a term failed certification.
#[derive(Debug, Clone, PartialEq)]
pub enum SeparabilityWitness {
    /// Eigenvector with a negative eigenvalue.
    NotPsd {
        eigenvalue: f64,
        eigenvector: CVector,
    },
    /// Two words of the term anticommute.
    NonCommuting { first: PauliWord, second: PauliWord },
    /// The words use more than one non-identity Pauli on the cut qubit.
    MixedCutPaulis { paulis: Vec<Pauli> },
    /// Negative eigenvalue of the partial transpose across the cut.
    Npt { eigenvalue: f64 },
    /// Product eigenbasis does not reproduce the term or is not product.
    Certificate {
        reconstruction_error: f64,
        max_second_schmidt: f64,
    },
}

#[derive(Debug, Clone)]
pub struct TermVerdict {
    pub label: String,
    pub separable: bool,
    pub min_eigenvalue: f64,
    /// Product eigenbasis of the term (empty on failure).
    pub certificate: Vec<ProductComponent>,
    pub witness: Option<SeparabilityWitness>,
}

/// Certifies a term as separable across `cut | rest`: positive
/// semidefinite, pairwise commuting words, and an eigenbasis of product
/// vectors that reconstructs it.
pub fn verify_term_separable(term: &DecompositionTerm, cut: Qubit) -> TermVerdict {
    let fail = |min: f64, w: SeparabilityWitness| TermVerdict {
        label: term.label.clone(),
        separable: false,
        min_eigenvalue: min,
        certificate: Vec::new(),
        witness: Some(w),
    };
    let dm = term.density_matrix();
    let (min, vec) = match min_eigenpair(dm.matrix()) {
        Ok(p) => p,
        Err(_) => {
            return fail(
                f64::NAN,
                SeparabilityWitness::Certificate {
                    reconstruction_error: f64::INFINITY,
                    max_second_schmidt: f64::INFINITY,
                },
            )
        }
    };
    if min < -PSD_TOL {
        return fail(
            min,
            SeparabilityWitness::NotPsd {
                eigenvalue: min,
                eigenvector: vec,
            },
        );
    }
    for (i, (_, a)) in term.words.iter().enumerate() {
        for (_, b) in &term.words[i + 1..] {
            if !a.commutes_with(b) {
                return fail(
                    min,
                    SeparabilityWitness::NonCommuting {
                        first: *a,
                        second: *b,
                    },
                );
            }
        }
    }
    let pt_min = min_pt_value(&dm, &[cut]).unwrap_or(f64::NAN);
    if pt_min.is_nan() || pt_min < -PSD_TOL {
        return fail(min, SeparabilityWitness::Npt { eigenvalue: pt_min });
    }

    let r_pos = CAB
        .iter()
        .position(|q| *q == cut)
        .expect("cut in (C, A, B)");
    let mut sigma = Pauli::I;
    let mut seen = Vec::new();
    for (_, w) in &term.words {
        let p = w.pauli_at(r_pos);
        if p != Pauli::I && !seen.contains(&p) {
            seen.push(p);
            sigma = p;
        }
    }
    if seen.len() > 1 {
        return fail(min, SeparabilityWitness::MixedCutPaulis { paulis: seen });
    }
    if sigma == Pauli::I {
        sigma = Pauli::Z;
    }

    // term = I_r (x) B + sigma_r (x) A on (cut, rest)
    let mut a = CMatrix::zeros(4, 4);
    let mut b = CMatrix::zeros(4, 4);
    for (c, w) in &term.words {
        let rest = w.without_position(r_pos).matrix() * c64(*c, 0.0);
        if w.pauli_at(r_pos) == Pauli::I {
            b += rest;
        } else {
            a += rest;
        }
    }
    let sig_spec = matrix_spectrum(&pauli_2x2(sigma), true).expect("Pauli is Hermitian");
    let sig_vecs = sig_spec.eigenvectors.expect("vectors requested");
    let mut certificate = Vec::new();
    for (k, &sign) in sig_spec.eigenvalues.iter().enumerate() {
        let block = &b + &a * c64(sign, 0.0);
        let spec = match matrix_spectrum(&block, true) {
            Ok(s) => s,
            Err(_) => continue,
        };
        let vecs = spec.eigenvectors.expect("vectors requested");
        for (j, &mu) in spec.eigenvalues.iter().enumerate() {
            certificate.push(ProductComponent {
                weight: mu,
                cut_state: sig_vecs.column(k).into_owned(),
                rest_state: vecs.column(j).into_owned(),
            });
        }
    }

    let mut order = vec![cut];
    order.extend(rest_of(&CAB, cut));
    let target = dm.permuted(&order).expect("labels are a permutation");
    let mut rebuilt = CMatrix::zeros(8, 8);
    let mut max_second = 0.0f64;
    for comp in &certificate {
        let v = comp.cut_state.kronecker(&comp.rest_state);
        let sc = schmidt_coefficients(&v, 0, 3);
        max_second = max_second.max(sc[1]);
        rebuilt += &v * v.adjoint() * c64(comp.weight, 0.0);
    }
    let err = max_abs_diff(&rebuilt, target.matrix());
    let min_weight = certificate
        .iter()
        .map(|c| c.weight)
        .fold(f64::INFINITY, f64::min);
    if err > 1e-10 || max_second >= SCHMIDT_TOL || min_weight < -PSD_TOL {
        return fail(
            min,
            SeparabilityWitness::Certificate {
                reconstruction_error: err,
                max_second_schmidt: max_second,
            },
        );
    }
    TermVerdict {
        label: term.label.clone(),
        separable: true,
        min_eigenvalue: min,
        certificate,
        witness: None,
    }
}

fn w(ops: &[(Qubit, Pauli)]) -> PauliWord {
    PauliWord::on(&CAB, ops)
}

fn identity() -> PauliWord {
    PauliWord::identity(3)
}

use Pauli::{X, Y, Z};
use Qubit::{A, B, C};

/// Separable decomposition of `8 rho_ABC` across `r | rest` for the
/// controlled-phase protocol state.
///
/// Nonnegative coefficients use the fixed standard grouping; a state with a
/// negative coefficient uses the balanced grouping, which is exact whenever
/// the cut is PPT.
pub fn lemma2_decomposition(
    state: &BellDiagonalState,
    s: f64,
    r: Qubit,
) -> Result<SeparableDecomposition> {
    if r == Qubit::B {
        return Err(EdssError::UnknownQubit(r));
    }
    let rho = build_rho_abc(state, s)?;
    let min = min_pt_value(&rho, &[r])?;
    if min < -1e-12 {
        return Err(EdssError::DecompositionNotClaimed { qubit: r, min });
    }
    let target = rho.scaled(8.0);
    let nonnegative = state.coefficients().iter().all(|c| *c >= 0.0);
    let (construction, terms) = if nonnegative {
        (Construction::Standard, standard_terms(state, s, r, min))
    } else {
        (Construction::Balanced, balanced_terms(state, s, r))
    };
    Ok(SeparableDecomposition {
        cut: r,
        construction,
        terms,
        target,
    })
}

fn standard_terms(state: &BellDiagonalState, s: f64, r: Qubit, min: f64) -> Vec<DecompositionTerm> {
    let [s01, s10, s11] = state.coefficients();
    let id = identity();
    let zx = w(&[(A, Z), (B, X)]);
    match r {
        Qubit::C => {
            let (lc, _) = crate::protocol::closed_form_pt(state, s).unwrap_or((min, 0.0));
            let d = s01 - s11 - s * s01 - s * s11;
            vec![
                DecompositionTerm::new("identity", vec![(8.0 * lc.max(0.0), id)]),
                DecompositionTerm::new(
                    "Z_C",
                    vec![
                        (s11, zx),
                        (s10, w(&[(C, Z), (A, X), (B, Z)])),
                        (s11, w(&[(C, Z), (A, Y), (B, Y)])),
                        (s10, id),
                    ],
                ),
                DecompositionTerm::new(
                    "X_C",
                    vec![
                        (s * s01, zx),
                        (s, w(&[(C, X), (A, Z)])),
                        (s * s01, w(&[(C, X), (B, X)])),
                        (s, id),
                    ],
                ),
                DecompositionTerm::new(
                    "Y_C",
                    vec![
                        (s * s11, zx),
                        (s * s10, w(&[(C, Y), (A, Y), (B, Z)])),
                        (-s * s11, w(&[(C, Y), (A, X), (B, Y)])),
                        (s * s10, id),
                    ],
                ),
                DecompositionTerm::new("I_C", vec![(d, zx), (d.abs(), id)]),
            ]
        }
        _ => {
            let (_, la) = crate::protocol::closed_form_pt(state, s).unwrap_or((0.0, min));
            vec![
                DecompositionTerm::new("identity", vec![(8.0 * la.max(0.0), id)]),
                DecompositionTerm::new(
                    "Z_A",
                    vec![
                        (s * s01, w(&[(C, X), (B, X)])),
                        (s, w(&[(C, X), (A, Z)])),
                        (s01, zx),
                        (s + s01 - s * s01, id),
                    ],
                ),
                DecompositionTerm::new(
                    "X_A",
                    vec![
                        (s10, w(&[(C, Z), (A, X), (B, Z)])),
                        (-s * s11, w(&[(C, Y), (A, X), (B, Y)])),
                        (s10 + s * s11, id),
                    ],
                ),
                DecompositionTerm::new(
                    "Y_A",
                    vec![
                        (s * s10, w(&[(C, Y), (A, Y), (B, Z)])),
                        (s11, w(&[(C, Z), (A, Y), (B, Y)])),
                        (s * s10 + s11, id),
                    ],
                ),
            ]
        }
    }
}

/// Groups the stabilizer expansion by the Pauli on `r`. Each group
/// `sigma_r (x) (a1 P1 + a2 P2)` is paired with a share `gamma` of the single
/// word `W` acting trivially on `r`, chosen so that both blocks
/// `+-(a1 P1 + a2 P2) + gamma W + c 1` are PSD with the least identity `c`.
fn balanced_terms(state: &BellDiagonalState, s: f64, r: Qubit) -> Vec<DecompositionTerm> {
    let r_pos = CAB.iter().position(|q| *q == r).expect("cut in (C, A, B)");
    let expansion = crate::protocol::protocol_graph_state(state, s).terms();
    let mut w_word: Option<(f64, PauliWord)> = None;
    let mut groups: Vec<(Pauli, Vec<(f64, PauliWord)>)> = Vec::new();
    for (c, word) in expansion {
        if word.is_identity() {
            continue;
        }
        let p = word.pauli_at(r_pos);
        if p == Pauli::I {
            debug_assert!(w_word.is_none(), "one word acts trivially on the cut");
            w_word = Some((c, word));
            continue;
        }
        match groups.iter_mut().find(|(q, _)| *q == p) {
            Some((_, v)) => v.push((c, word)),
            None => groups.push((p, vec![(c, word)])),
        }
    }
    // a zero coefficient drops the word from the expansion; recover it from the graph
    let (g, w_word) = w_word.unwrap_or_else(|| {
        let word = (1..8)
            .map(|x| crate::graph::stabilizer_product(&Graph::g3(), x))
            .find(|wd| wd.pauli_at(r_pos) == Pauli::I)
            .expect("some chain stabilizer product is trivial on the cut");
        (0.0, word)
    });
    let w_rest = w_word.without_position(r_pos);

    let mut terms = Vec::new();
    let mut used = 0.0;
    let mut gamma_total = 0.0;
    for (p, words) in &groups {
        let (q_plus, q_minus) = group_extremes(words, r_pos, &w_rest);
        let gamma = (q_plus - q_minus) / 2.0;
        let cost = (q_plus + q_minus) / 2.0;
        gamma_total += gamma;
        used += cost;
        let mut line = words.clone();
        line.push((gamma, w_word));
        line.push((cost, identity()));
        terms.push(DecompositionTerm::new(format!("{p:?}_{r}"), line));
    }
    let excess = g - gamma_total;
    terms.push(DecompositionTerm::new(
        format!("I_{r}"),
        vec![(excess, w_word), (excess.abs(), identity())],
    ));
    used += excess.abs();
    let mut leftover = 1.0 - used;
    if leftover < 0.0 && leftover > -1e-12 {
        leftover = 0.0;
    }
    terms.insert(
        0,
        DecompositionTerm::new("identity", vec![(leftover, identity())]),
    );
    terms
}

/// `(Q+, Q-)`: largest `|a1 e1 + a2 e2|` over joint eigenvalues of the rest
/// words for which `W = +1` and `W = -1` respectively.
fn group_extremes(words: &[(f64, PauliWord)], r_pos: usize, w_rest: &PauliWord) -> (f64, f64) {
    let rest: Vec<(f64, PauliWord)> = words
        .iter()
        .map(|(c, w)| (*c, w.without_position(r_pos)))
        .collect();
    let m: CMatrix = rest.iter().fold(CMatrix::zeros(4, 4), |acc, (c, w)| {
        acc + w.matrix() * c64(*c, 0.0)
    });
    // eigen-decompose a generic combination of the commuting rest words and W
    // to read off joint eigenvalues
    let wm = w_rest.matrix();
    let probe = &m + &wm * c64(std::f64::consts::E, 0.0);
    let spec = matrix_spectrum(&probe, true).expect("Hermitian combination");
    let vecs = spec.eigenvectors.expect("vectors requested");
    let (mut q_plus, mut q_minus) = (0.0f64, 0.0f64);
    for k in 0..4 {
        let v = vecs.column(k);
        let alpha = (v.adjoint() * &m * v)[(0, 0)].re;
        let wv = (v.adjoint() * &wm * v)[(0, 0)].re;
        if wv > 0.0 {
            q_plus = q_plus.max(alpha.abs());
        } else {
            q_minus = q_minus.max(alpha.abs());
        }
    }
    (q_plus, q_minus)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::protocol::{build_rho_abc, closed_form_pt};

    fn st(a: f64, b: f64, c: f64) -> BellDiagonalState {
        BellDiagonalState::new(a, b, c).unwrap()
    }

    #[test]
    fn product_state_is_ppt_everywhere() {
        let rho = DensityMatrix::maximally_mixed(vec![C])
            .tensor(&st(0.3, 0.2, 0.1).to_density_matrix())
            .unwrap();
        for q in CAB {
            assert!(min_pt_eigenvalue(&rho, &[q]).unwrap().0 >= -1e-12);
        }
    }

    #[test]
    fn optimum_pt_minima() {
        let rho = build_rho_abc(&st(0.5, 0.25, 0.25), 0.5).unwrap();
        let (la, v) = min_pt_eigenvalue(&rho, &[A]).unwrap();
        assert!((la + 1.0 / 16.0).abs() < 1e-12);
        assert!((v.norm() - 1.0).abs() < 1e-12);
        assert!(min_pt_eigenvalue(&rho, &[C]).unwrap().0.abs() < 1e-12);
    }

    #[test]
    fn optimum_localization() {
        let rho = build_rho_abc(&st(0.5, 0.25, 0.25), 0.5).unwrap();
        let loc = localize(&rho, A).unwrap();
        assert!((loc.success_probability - 0.625).abs() < 1e-12);
        assert!((loc.pt_min_eigenvalue + 0.1).abs() < 1e-10);
        assert!(matches!(loc.method, LocalizationMethod::GraphBasis { .. }));
        // Bob's projection is |0><++| + |1><--| up to a unitary on his
        // output qubit, i.e. the same two-dimensional row space
        let h = 0.5;
        let expected = CMatrix::from_row_slice(
            2,
            4,
            &[
                c64(h, 0.0),
                c64(h, 0.0),
                c64(h, 0.0),
                c64(h, 0.0),
                c64(h, 0.0),
                c64(-h, 0.0),
                c64(-h, 0.0),
                c64(h, 0.0),
            ],
        );
        let p = &loc.projection;
        assert!(max_abs_diff(&(p * p.adjoint()), &CMatrix::identity(2, 2)) < 1e-12);
        assert!(max_abs_diff(&(p.adjoint() * p), &(expected.adjoint() * &expected)) < 1e-12);
        assert_eq!(loc.projected_state.labels(), &[A, B]);
    }

    #[test]
    fn second_golden_localization() {
        let s = 9.0 / 19.0;
        let state = st(0.4, 0.3, 0.2);
        let rho = build_rho_abc(&state, s).unwrap();
        let loc = localize(&rho, A).unwrap();
        let (_, la) = closed_form_pt(&state, s).unwrap();
        assert!((loc.success_probability - 0.594_736_842_105_263).abs() < 1e-9);
        assert!((loc.pt_min_eigenvalue - la / loc.success_probability).abs() < 1e-10);
    }

    #[test]
    fn ppt_input_has_nothing_to_localize() {
        let rho = build_rho_abc(&st(0.5, 0.25, 0.25), 0.5).unwrap();
        assert!(matches!(
            localize(&rho, C),
            Err(EdssError::NothingToLocalize { .. })
        ));
    }

    #[test]
    fn schmidt_projection_preserves_negativity() {
        // a generic negative eigenvector: rotate the protocol state so the
        // graph path does not apply
        let rho = build_rho_abc(&st(0.5, 0.25, 0.25), 0.5).unwrap();
        let t = std::f64::consts::PI / 7.0;
        let u1 = CMatrix::from_row_slice(
            2,
            2,
            &[
                c64(t.cos(), 0.0),
                c64(-t.sin(), 0.0),
                c64(t.sin(), 0.0),
                c64(t.cos(), 0.0),
            ],
        );
        let rotated = rho
            .conjugated_on(&u1, &[C])
            .unwrap()
            .conjugated_on(&u1, &[B])
            .unwrap();
        let loc = localize(&rotated, A).unwrap();
        assert_eq!(loc.method, LocalizationMethod::Schmidt);
        assert!(loc.pt_min_eigenvalue < -1e-3);
        assert!(loc.pt_min_eigenvalue <= loc.expected_pt_min() + 1e-10);
    }

    #[test]
    fn drop_bit_cases() {
        assert_eq!(drop_bit(0b101, 1, 3), 0b11);
        assert_eq!(drop_bit(0b110, 2, 3), 0b10);
        assert_eq!(drop_bit(0b011, 0, 3), 0b01);
    }

    #[test]
    fn standard_decomposition_at_optimum() {
        let d = lemma2_decomposition(&st(0.5, 0.25, 0.25), 0.5, C).unwrap();
        assert_eq!(d.construction, Construction::Standard);
        assert_eq!(d.terms.len(), 5);
        assert!(d.reconstruction_error() < 1e-12);
        assert_eq!(d.terms[0].words[0].0, 0.0);
        let report = d.verify();
        assert!(report.passed(1e-12), "{report:?}");
    }

    #[test]
    fn z_line_eigenvalues_at_optimum() {
        // eigenvalues 2(s10 + s11), 0, 2(s10 - s11), 0 each with multiplicity
        let d = lemma2_decomposition(&st(0.5, 0.25, 0.25), 0.5, C).unwrap();
        let spec = matrix_spectrum(&d.terms[1].matrix(), false).unwrap();
        for l in spec.eigenvalues {
            assert!([1.0, 0.0].iter().any(|e| (l - e).abs() < 1e-12), "{l}");
        }
    }

    #[test]
    fn negative_branch_a_cut_decomposition() {
        let state = st(0.5, 0.25, -0.25);
        let d = lemma2_decomposition(&state, 0.5, A).unwrap();
        assert_eq!(d.construction, Construction::Balanced);
        assert!(d.reconstruction_error() < 1e-12);
        assert!(d.verify().passed(1e-12));
    }

    #[test]
    fn negative_state_without_carrier_coherence() {
        // s = 0 removes every word that acts trivially on A
        let d = lemma2_decomposition(&st(0.25, 0.25, -0.25), 0.0, A).unwrap();
        assert!(d.reconstruction_error() < 1e-12);
        let report = d.verify();
        assert!(report.passed(1e-12), "{report:?}");
    }

    #[test]
    fn maximally_mixed_decomposition_is_identity_heavy() {
        let d = lemma2_decomposition(&BellDiagonalState::maximally_mixed(), 0.0, C).unwrap();
        assert!(d.reconstruction_error() < 1e-12);
        for t in &d.terms {
            for (c, word) in &t.words {
                if word.is_identity() {
                    assert!(*c >= 0.0);
                } else {
                    assert_eq!(*c, 0.0);
                }
            }
        }
        assert!(d.verify().passed(1e-12));
    }

    #[test]
    fn npt_cut_is_not_claimed() {
        match lemma2_decomposition(&st(0.5, 0.25, 0.25), 0.5, A) {
            Err(e @ EdssError::DecompositionNotClaimed { .. }) => {
                assert!(e
                    .to_string()
                    .contains("decomposition not claimed by Lemma 2"))
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn corrupted_line_fails_with_psd_witness() {
        let d = lemma2_decomposition(&st(0.5, 0.25, 0.25), 0.5, C).unwrap();
        let mut bad = d.terms[1].clone();
        bad.words[3].0 = -bad.words[3].0;
        let v = verify_term_separable(&bad, C);
        assert!(!v.separable);
        assert!(matches!(
            v.witness,
            Some(SeparabilityWitness::NotPsd { .. })
        ));
    }

    #[test]
    fn identity_line_is_trivially_separable() {
        let t = DecompositionTerm::new("identity", vec![(0.7, identity())]);
        let v = verify_term_separable(&t, A);
        assert!(v.separable);
        assert_eq!(v.certificate.len(), 8);
    }

    #[test]
    fn anticommuting_words_flagged() {
        let t = DecompositionTerm::new(
            "bad",
            vec![(0.1, w(&[(A, X)])), (0.1, w(&[(A, Z)])), (1.0, identity())],
        );
        let v = verify_term_separable(&t, C);
        assert!(matches!(
            v.witness,
            Some(SeparabilityWitness::NonCommuting { .. })
        ));
    }

    #[test]
    fn json_export_labels() {
        let d = lemma2_decomposition(&st(0.5, 0.25, 0.25), 0.5, C).unwrap();
        let j = d.export_terms();
        assert_eq!(j.len(), 5);
        assert_eq!(j[1][1].pauli, "ZC.XA.ZB");
        assert_eq!(j[1][3].pauli, "I");
        let text = serde_json::to_string(&j).unwrap();
        assert!(text.starts_with("[[{\"coeff\":"));
    }
}
