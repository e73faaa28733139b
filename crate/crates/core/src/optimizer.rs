//! Search over general `C`-`A` interactions for a protocol that beats the
//! controlled-phase gate, and the dephasing upper bound.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bell::BellDiagonalState;
use crate::error::{EdssError, Result};
use crate::protocol::{choose_s, closed_form_pt, Branch};
use crate::quantum::{
    c64, hermitian_spectrum, kron_all, min_eigenvalue, pauli_2x2, CMatrix, DensityMatrix, Pauli,
    PauliWord, Qubit,
};

/// Restart `k` draws its start point from `ChaCha8Rng::seed_from_u64(OPTIMIZER_SEED + k)`.
pub const OPTIMIZER_SEED: u64 = 0x00ED_5500;
pub const FEASIBILITY_TOL: f64 = 1e-9;
pub const PENALTY_WEIGHT: f64 = 1e3;
pub const PENALTY_GROWTH: f64 = 10.0;

const N_COEFFS: usize = 16;
const DIM: usize = N_COEFFS + 1;
const PAULIS: [Pauli; 4] = [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z];

/// Coefficients of `H = sum_k c_k P_k` on `(C, A)`, with `k = 4 p_C + p_A`
/// and Pauli order `I, X, Y, Z`. The unitary is `exp(iH)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UnitaryParams {
    pub generator_coeffs: [f64; N_COEFFS],
}

impl UnitaryParams {
    pub fn identity() -> Self {
        UnitaryParams {
            generator_coeffs: [0.0; N_COEFFS],
        }
    }

    /// `CZ = exp(i pi/4 (II - IZ - ZI + ZZ))`.
    pub fn controlled_phase() -> Self {
        let mut c = [0.0; N_COEFFS];
        c[0] = PI / 4.0;
        c[3] = -PI / 4.0;
        c[12] = -PI / 4.0;
        c[15] = PI / 4.0;
        UnitaryParams {
            generator_coeffs: c,
        }
    }

    /// Coefficients box-clamped to `[-pi, pi]`.
    pub fn clamped(mut self) -> Self {
        for c in &mut self.generator_coeffs {
            *c = c.clamp(-PI, PI);
        }
        self
    }

    pub fn generator(&self) -> CMatrix {
        let mut h = CMatrix::zeros(4, 4);
        for (k, &c) in self.generator_coeffs.iter().enumerate() {
            if c != 0.0 {
                h += pauli_pair(k) * c64(c, 0.0);
            }
        }
        h
    }

    pub fn unitary(&self) -> CMatrix {
        (self.generator() * c64(0.0, 1.0)).exp()
    }
}

fn pauli_pair(k: usize) -> CMatrix {
    kron_all(&[pauli_2x2(PAULIS[k / 4]), pauli_2x2(PAULIS[k % 4])])
}

/// Dense `(lambda_{C|AB}, lambda_{A|BC})` of `U (rho_C (x) rho_AB) U^dag`.
pub fn objective(state: &BellDiagonalState, params: &UnitaryParams, s: f64) -> Result<(f64, f64)> {
    Evaluator::new(state).evaluate(&params.unitary(), s)
}

/// Reusable dense evaluation with the resource matrix cached.
struct Evaluator {
    rho_ab: CMatrix,
    id2: CMatrix,
}

// bit masks in (C, A, B) order
const MASK_C: usize = 0b100;
const MASK_A: usize = 0b010;

impl Evaluator {
    fn new(state: &BellDiagonalState) -> Self {
        Evaluator {
            rho_ab: state.to_density_matrix().matrix().clone(),
            id2: CMatrix::identity(2, 2),
        }
    }

    fn evaluate(&self, u: &CMatrix, s: f64) -> Result<(f64, f64)> {
        let half = c64(0.5, 0.0);
        let off = c64(s / 2.0, 0.0);
        let rho_c = CMatrix::from_row_slice(2, 2, &[half, off, off, half]);
        let u8 = u.kronecker(&self.id2);
        let rho = &u8 * rho_c.kronecker(&self.rho_ab) * u8.adjoint();
        Ok((
            min_eigenvalue(&pt(&rho, MASK_C))?,
            min_eigenvalue(&pt(&rho, MASK_A))?,
        ))
    }
}

fn pt(m: &CMatrix, mask: usize) -> CMatrix {
    let d = m.nrows();
    CMatrix::from_fn(d, d, |r, c| {
        let diff = (r ^ c) & mask;
        m[(r ^ diff, c ^ diff)]
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct OptimizationResult {
    pub branch: Branch,
    /// Most negative partial-transpose eigenvalue found on the cut the
    /// branch entangles (`A|BC` for `SendC`, `C|AB` for `SendA`).
    pub best_lambda_a_bc: f64,
    /// Carrier-cut minimum at the incumbent; at least `-1e-9`.
    pub best_lambda_c_ab: f64,
    pub best_s: f64,
    pub best_params: UnitaryParams,
    /// Controlled-phase value at the chosen `s`.
    pub cz_baseline: f64,
    /// `(1/4)(1 - lambda_4/lambda_3) |s11|`.
    pub slack: f64,
    pub evaluations: usize,
    pub best_restart: usize,
    /// Largest `gap - (1+s)|s11|/4` over every evaluated point.
    pub max_gap_excess: f64,
}

impl OptimizationResult {
    /// `|best| - |baseline|`.
    pub fn improvement(&self) -> f64 {
        self.best_lambda_a_bc.abs() - self.cz_baseline.abs()
    }

    pub fn within_slack(&self, tol: f64) -> bool {
        self.improvement() <= self.slack + tol
    }
}

/// `(1/4)(1 - lambda_4/lambda_3) |s11|` on the magnitude spectrum. With
/// `lambda_3 = 0` the ratio is taken as 0.
pub fn improvement_slack(state: &BellDiagonalState) -> f64 {
    let [_, _, l3, l4] = state.magnitude_spectrum();
    let ratio = if l3 > 0.0 { (l4 / l3).min(1.0) } else { 0.0 };
    0.25 * (1.0 - ratio) * state.s11().abs()
}

#[derive(Debug, Clone)]
struct RestartOutcome {
    best: Option<(f64, f64, [f64; DIM])>,
    least_infeasible: f64,
    evaluations: usize,
    max_gap_excess: f64,
}

/// Multi-start penalized simplex search over `(U, s)`.
///
/// `budget` is the number of objective evaluations per restart. Restart 0
/// starts at the controlled-phase gate with the protocol's `s`.
pub fn optimize(
    state: &BellDiagonalState,
    restarts: usize,
    budget: usize,
) -> Result<OptimizationResult> {
    if !state.is_canonical() {
        return Err(EdssError::NonCanonical);
    }
    if state.s11() == 0.0 {
        return Err(EdssError::UselessResource);
    }
    let choice = choose_s(state)?;
    let branch = if state.negative_count() == 0 {
        Branch::SendC
    } else {
        Branch::SendA
    };
    let (lc, la) = closed_form_pt(state, choice.s)?;
    let cz_baseline = match branch {
        Branch::SendC => la,
        Branch::SendA => lc,
    };
    let gap_scale = 0.25 * state.s11().abs();
    let evaluator = Evaluator::new(state);

    let outcomes: Vec<RestartOutcome> = (0..restarts.max(1))
        .into_par_iter()
        .map(|k| {
            let x0 = start_point(k, choice.s);
            run_restart(&evaluator, branch, gap_scale, x0, budget)
        })
        .collect::<Result<_>>()?;

    let evaluations = outcomes.iter().map(|o| o.evaluations).sum();
    let max_gap_excess = outcomes
        .iter()
        .map(|o| o.max_gap_excess)
        .fold(f64::NEG_INFINITY, f64::max);
    let mut best: Option<(usize, f64, f64, [f64; DIM])> = None;
    for (k, o) in outcomes.iter().enumerate() {
        if let Some((target, carrier, x)) = o.best {
            if best.is_none_or(|b| target < b.1) {
                best = Some((k, target, carrier, x));
            }
        }
    }
    let Some((best_restart, target, carrier, x)) = best else {
        let least = outcomes
            .iter()
            .map(|o| o.least_infeasible)
            .fold(f64::NEG_INFINITY, f64::max);
        return Err(EdssError::NoFeasiblePoint {
            best_lambda_c_ab: least,
            evaluations,
        });
    };
    let (params, s) = split(&x);
    Ok(OptimizationResult {
        branch,
        best_lambda_a_bc: target,
        best_lambda_c_ab: carrier,
        best_s: s,
        best_params: params,
        cz_baseline,
        slack: improvement_slack(state),
        evaluations,
        best_restart,
        max_gap_excess,
    })
}

fn start_point(k: usize, s: f64) -> [f64; DIM] {
    let mut x = [0.0; DIM];
    if k == 0 {
        x[..N_COEFFS].copy_from_slice(&UnitaryParams::controlled_phase().generator_coeffs);
        x[N_COEFFS] = s;
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(OPTIMIZER_SEED + k as u64);
        for c in &mut x[..N_COEFFS] {
            *c = rng.random_range(-PI..=PI);
        }
        x[N_COEFFS] = rng.random_range(0.0..=1.0);
    }
    x
}

fn split(x: &[f64; DIM]) -> (UnitaryParams, f64) {
    let mut c = [0.0; N_COEFFS];
    c.copy_from_slice(&x[..N_COEFFS]);
    (
        UnitaryParams {
            generator_coeffs: c,
        },
        x[N_COEFFS],
    )
}

fn bounds() -> ([f64; DIM], [f64; DIM]) {
    let mut lo = [-PI; DIM];
    let mut hi = [PI; DIM];
    lo[N_COEFFS] = 0.0;
    hi[N_COEFFS] = 1.0;
    (lo, hi)
}

fn run_restart(
    evaluator: &Evaluator,
    branch: Branch,
    gap_scale: f64,
    x0: [f64; DIM],
    budget: usize,
) -> Result<RestartOutcome> {
    let mut out = RestartOutcome {
        best: None,
        least_infeasible: f64::NEG_INFINITY,
        evaluations: 0,
        max_gap_excess: f64::NEG_INFINITY,
    };
    let mut failure = None;
    let (lo, hi) = bounds();
    let mut steps = [0.5; DIM];
    steps[N_COEFFS] = 0.1;

    let mut x = x0;
    let mut weight = PENALTY_WEIGHT;
    let phases = [budget / 2, budget - budget / 2];
    for (i, &evals) in phases.iter().enumerate() {
        if i == 1 {
            weight *= PENALTY_GROWTH;
            steps = steps.map(|v| v * 0.1);
        }
        let mut f = |p: &[f64; DIM]| -> f64 {
            let (params, s) = split(p);
            let (lc, la) = match evaluator.evaluate(&params.unitary(), s) {
                Ok(v) => v,
                Err(e) => {
                    failure.get_or_insert(e);
                    return f64::INFINITY;
                }
            };
            out.evaluations += 1;
            out.max_gap_excess = out
                .max_gap_excess
                .max((la - lc).abs() - (1.0 + s) * gap_scale);
            let (carrier, target) = match branch {
                Branch::SendC => (lc, la),
                Branch::SendA => (la, lc),
            };
            if carrier >= -FEASIBILITY_TOL {
                if out.best.is_none_or(|b| target < b.0) {
                    out.best = Some((target, carrier, *p));
                }
            } else {
                out.least_infeasible = out.least_infeasible.max(carrier);
            }
            target + weight * (-carrier).max(0.0)
        };
        x = nelder_mead(&mut f, x, &steps, &lo, &hi, evals).0;
    }
    match failure {
        Some(e) => Err(e),
        None => Ok(out),
    }
}

/// Box-constrained Nelder-Mead with dimension-adaptive coefficients.
/// Trial points are projected onto the box. Returns the best vertex and its
/// value.
fn nelder_mead<const N: usize, F: FnMut(&[f64; N]) -> f64>(
    f: &mut F,
    x0: [f64; N],
    steps: &[f64; N],
    lo: &[f64; N],
    hi: &[f64; N],
    max_evals: usize,
) -> ([f64; N], f64) {
    let n = N as f64;
    let (alpha, gamma, rho, sigma) = (1.0, 1.0 + 2.0 / n, 0.75 - 1.0 / (2.0 * n), 1.0 - 1.0 / n);
    let project = |mut p: [f64; N]| {
        for i in 0..N {
            p[i] = p[i].clamp(lo[i], hi[i]);
        }
        p
    };
    if max_evals == 0 {
        return (x0, f64::INFINITY);
    }

    let mut evals = 0usize;
    let mut eval = |p: &[f64; N], evals: &mut usize| {
        *evals += 1;
        f(p)
    };

    let x0 = project(x0);
    let mut simplex: Vec<([f64; N], f64)> = Vec::with_capacity(N + 1);
    let f0 = eval(&x0, &mut evals);
    simplex.push((x0, f0));
    for i in 0..N {
        if evals >= max_evals {
            break;
        }
        let mut p = x0;
        p[i] = if x0[i] + steps[i] <= hi[i] {
            x0[i] + steps[i]
        } else {
            x0[i] - steps[i]
        };
        let p = project(p);
        let fp = eval(&p, &mut evals);
        simplex.push((p, fp));
    }
    if simplex.len() < N + 1 {
        return best_of(&simplex);
    }

    while evals < max_evals {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        let (best_f, worst_f) = (simplex[0].1, simplex[N].1);
        if (worst_f - best_f).abs() <= 1e-15 * (1.0 + best_f.abs()) && spread(&simplex) < 1e-12 {
            break;
        }

        let mut centroid = [0.0; N];
        for (p, _) in &simplex[..N] {
            for i in 0..N {
                centroid[i] += p[i] / n;
            }
        }
        let toward = |t: f64| {
            let worst = &simplex[N].0;
            let mut p = [0.0; N];
            for i in 0..N {
                p[i] = centroid[i] + t * (worst[i] - centroid[i]);
            }
            project(p)
        };

        let xr = toward(-alpha);
        let fr = eval(&xr, &mut evals);
        if fr < simplex[0].1 {
            let xe = toward(-gamma);
            let fe = if evals < max_evals {
                eval(&xe, &mut evals)
            } else {
                f64::INFINITY
            };
            simplex[N] = if fe < fr { (xe, fe) } else { (xr, fr) };
            continue;
        }
        if fr < simplex[N - 1].1 {
            simplex[N] = (xr, fr);
            continue;
        }
        if evals >= max_evals {
            break;
        }
        let (xc, fc) = if fr < simplex[N].1 {
            let xc = toward(-rho);
            let fc = eval(&xc, &mut evals);
            (xc, if fc <= fr { fc } else { f64::INFINITY })
        } else {
            let xc = toward(rho);
            let fc = eval(&xc, &mut evals);
            (xc, if fc < simplex[N].1 { fc } else { f64::INFINITY })
        };
        if fc.is_finite() {
            simplex[N] = (xc, fc);
            continue;
        }
        // shrink toward the best vertex
        let x_best = simplex[0].0;
        for v in simplex.iter_mut().skip(1) {
            if evals >= max_evals {
                break;
            }
            let mut p = [0.0; N];
            for i in 0..N {
                p[i] = x_best[i] + sigma * (v.0[i] - x_best[i]);
            }
            let p = project(p);
            *v = (p, eval(&p, &mut evals));
        }
    }
    best_of(&simplex)
}

fn best_of<const N: usize>(simplex: &[([f64; N], f64)]) -> ([f64; N], f64) {
    *simplex
        .iter()
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .expect("nonempty simplex")
}

fn spread<const N: usize>(simplex: &[([f64; N], f64)]) -> f64 {
    let x0 = &simplex[0].0;
    simplex
        .iter()
        .flat_map(|(p, _)| p.iter().zip(x0).map(|(a, b)| (a - b).abs()))
        .fold(0.0, f64::max)
}

/// Result of dephasing Bob's qubit.
#[derive(Debug, Clone, Serialize)]
pub struct DephasingBound {
    /// `I_class` of the input, an upper bound on distributable entanglement.
    pub upper_bound: f64,
    /// Sorted eigenvalues of the dephased state.
    pub chi: [f64; 4],
    /// Canonical coefficients of the dephased state.
    pub dephased: [f64; 3],
}

/// Dephases `B` in the basis that keeps the `Z_A X_B` correlation and
/// returns the classical-correlation bound together with the dephased state.
pub fn dephasing_upper_bound(state: &BellDiagonalState) -> Result<DephasingBound> {
    let rho = state.to_density_matrix();
    let xb = PauliWord::on(&[Qubit::A, Qubit::B], &[(Qubit::B, Pauli::X)]).matrix();
    let sigma = rho.add(&rho.conjugated(&xb))?.scaled(0.5);
    let spec = hermitian_spectrum(&sigma, false)?;
    let mut chi = [0.0; 4];
    chi.copy_from_slice(&spec.eigenvalues.as_slice()[..4]);
    if (chi[0] - chi[1]).abs() > 1e-12 || (chi[2] - chi[3]).abs() > 1e-12 {
        return Err(EdssError::CheckFailed(format!(
            "dephased spectrum not pairwise degenerate: {chi:?}"
        )));
    }
    let dephased = BellDiagonalState::new(state.s01(), 0.0, 0.0)?;
    check_dephased_matches(&sigma, &dephased)?;
    Ok(DephasingBound {
        upper_bound: state.measures().i_class,
        chi,
        dephased: dephased.canonicalize().coefficients(),
    })
}

fn check_dephased_matches(sigma: &DensityMatrix, expected: &BellDiagonalState) -> Result<()> {
    let d = crate::quantum::max_abs_diff(sigma.matrix(), expected.to_density_matrix().matrix());
    if d > 1e-12 {
        return Err(EdssError::CheckFailed(format!(
            "dephased state deviates by {d:e}"
        )));
    }
    Ok(())
}
