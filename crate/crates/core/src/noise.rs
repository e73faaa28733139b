//! Pauli noise on the transmitted qubit and the resulting thresholds.

use serde::{Deserialize, Serialize};

use crate::bell::BellDiagonalState;
use crate::error::{EdssError, Result};
use crate::protocol::{build_rho_abc, choose_s, run, Branch};
use crate::quantum::{c64, CMatrix, DensityMatrix, Pauli, PauliWord, Qubit};
use crate::separability::{localize, min_pt_value, NPT_TOL};

/// Bisection steps; `2^-30` is well below the 1e-6 target.
pub const BISECTION_STEPS: usize = 30;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum NoiseKind {
    Depolarizing,
    PhaseFlip,
}

impl NoiseKind {
    /// Upper end of the bisection interval. A phase flip with `q` and one
    /// with `1 - q` differ by a unitary `Z`, so only `[0, 1/2]` is searched.
    pub fn q_max(self) -> f64 {
        match self {
            NoiseKind::Depolarizing => 1.0,
            NoiseKind::PhaseFlip => 0.5,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            NoiseKind::Depolarizing => "depolarizing",
            NoiseKind::PhaseFlip => "phase_flip",
        }
    }
}

impl std::str::FromStr for NoiseKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "depolarizing" | "depolarising" => Ok(NoiseKind::Depolarizing),
            "phase_flip" | "phase-flip" | "dephasing" => Ok(NoiseKind::PhaseFlip),
            other => Err(format!("unknown channel {other:?}")),
        }
    }
}

/// Single-qubit Pauli channel `rho -> sum_k w_k P_k rho P_k`.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseChannel {
    kind: NoiseKind,
    q: f64,
    kraus: Vec<(f64, PauliWord)>,
}

impl NoiseChannel {
    pub fn new(kind: NoiseKind, q: f64) -> Result<Self> {
        if !q.is_finite() || !(0.0..=1.0).contains(&q) {
            return Err(EdssError::NoiseRange(q));
        }
        let p = |x: Pauli| PauliWord::from_paulis(&[x]);
        let kraus = match kind {
            NoiseKind::Depolarizing => vec![
                (1.0 - 0.75 * q, p(Pauli::I)),
                (q / 4.0, p(Pauli::X)),
                (q / 4.0, p(Pauli::Y)),
                (q / 4.0, p(Pauli::Z)),
            ],
            NoiseKind::PhaseFlip => vec![(1.0 - q, p(Pauli::I)), (q, p(Pauli::Z))],
        };
        Ok(NoiseChannel { kind, q, kraus })
    }

    pub fn kind(&self) -> NoiseKind {
        self.kind
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    pub fn kraus(&self) -> &[(f64, PauliWord)] {
        &self.kraus
    }

    /// `max |sum_k w_k P_k^dag P_k - 1|`.
    pub fn trace_preservation_error(&self) -> f64 {
        let mut m = CMatrix::zeros(2, 2);
        for (w, p) in &self.kraus {
            let pm = p.matrix();
            m += pm.adjoint() * pm * c64(*w, 0.0);
        }
        crate::quantum::max_abs_diff(&m, &CMatrix::identity(2, 2))
    }

    /// Applies the channel to one qubit of `rho`.
    pub fn apply(&self, rho: &DensityMatrix, qubit: Qubit) -> Result<DensityMatrix> {
        rho.position(qubit)?;
        let mut acc: Option<DensityMatrix> = None;
        for (w, p) in &self.kraus {
            let term = rho.conjugated_on(&p.matrix(), &[qubit])?.scaled(*w);
            acc = Some(match acc {
                None => term,
                Some(a) => a.add(&term)?,
            });
        }
        Ok(acc.expect("at least one Kraus operator"))
    }
}

/// One evaluation of the survival predicate during bisection.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TracePoint {
    pub q: f64,
    pub survives: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Threshold {
    /// Largest `q` at which entanglement survives, to within `2^-30`.
    pub q_star: f64,
    pub trace: Vec<TracePoint>,
}

impl Threshold {
    /// Every surviving `q` in the trace lies below every failing one.
    pub fn monotone(&self) -> bool {
        let lowest_fail = self
            .trace
            .iter()
            .filter(|t| !t.survives)
            .map(|t| t.q)
            .fold(f64::INFINITY, f64::min);
        self.trace
            .iter()
            .filter(|t| t.survives)
            .all(|t| t.q < lowest_fail)
    }
}

fn bisect<F: FnMut(f64) -> Result<bool>>(q_max: f64, mut survives: F) -> Result<Threshold> {
    let mut trace = Vec::with_capacity(BISECTION_STEPS + 2);
    let at0 = survives(0.0)?;
    trace.push(TracePoint {
        q: 0.0,
        survives: at0,
    });
    if !at0 {
        return Ok(Threshold { q_star: 0.0, trace });
    }
    let at_max = survives(q_max)?;
    trace.push(TracePoint {
        q: q_max,
        survives: at_max,
    });
    if at_max {
        return Ok(Threshold {
            q_star: q_max,
            trace,
        });
    }
    let (mut lo, mut hi) = (0.0, q_max);
    for _ in 0..BISECTION_STEPS {
        let mid = 0.5 * (lo + hi);
        let ok = survives(mid)?;
        trace.push(TracePoint {
            q: mid,
            survives: ok,
        });
        if ok {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(Threshold {
        q_star: 0.5 * (lo + hi),
        trace,
    })
}

/// Qubit sent to Bob in each branch.
fn transmitted(branch: Branch) -> Qubit {
    match branch {
        Branch::SendC => Qubit::C,
        Branch::SendA => Qubit::A,
    }
}

/// Largest `q` for which noise on the transmitted qubit still leaves the
/// target cut NPT with a successful heralded localization.
pub fn edss_threshold(state: &BellDiagonalState, kind: NoiseKind) -> Result<Threshold> {
    if state.s11() == 0.0 {
        return Err(EdssError::UselessResource);
    }
    let s = choose_s(state)?.s;
    let branch = if state.negative_count() == 0 {
        Branch::SendC
    } else {
        Branch::SendA
    };
    let rho = build_rho_abc(state, s)?;
    let sent = transmitted(branch);
    let cut = branch.entangled_cut();
    bisect(kind.q_max(), |q| {
        let noisy = NoiseChannel::new(kind, q)?.apply(&rho, sent)?;
        if min_pt_value(&noisy, &[cut])? >= -NPT_TOL {
            return Ok(false);
        }
        Ok(match localize(&noisy, cut) {
            Ok(loc) => loc.pt_min_eigenvalue < -NPT_TOL,
            Err(EdssError::NothingToLocalize { .. }) => false,
            Err(e) => return Err(e),
        })
    })
}

/// Threshold for sending half of a maximally entangled pair directly.
pub fn direct_threshold(kind: NoiseKind) -> Result<Threshold> {
    let pair = BellDiagonalState::new(1.0, 1.0, 1.0)?.to_density_matrix();
    bisect(kind.q_max(), |q| {
        let noisy = NoiseChannel::new(kind, q)?.apply(&pair, Qubit::B)?;
        Ok(min_pt_value(&noisy, &[Qubit::A])? < -NPT_TOL)
    })
}

/// Threshold for sending one half of the heralded pair produced by the
/// noiseless protocol.
pub fn rho_suc_threshold(state: &BellDiagonalState, kind: NoiseKind) -> Result<Threshold> {
    let out = run(state)?;
    let loc = out.localized.ok_or(EdssError::UselessResource)?;
    let pair = loc.projected_state;
    let sent = pair.labels()[1];
    let keep = pair.labels()[0];
    bisect(kind.q_max(), |q| {
        let noisy = NoiseChannel::new(kind, q)?.apply(&pair, sent)?;
        Ok(min_pt_value(&noisy, &[keep])? < -NPT_TOL)
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NoiseComparison {
    pub kind: NoiseKind,
    pub q_star_edss: f64,
    pub q_star_direct: f64,
    pub q_star_suc: f64,
    /// `lambda_1 = 1/2`, the family the published orderings refer to.
    pub half_weight_family: bool,
    /// `direct >= edss >= suc`.
    pub ordered: bool,
}

pub fn compare(state: &BellDiagonalState, kind: NoiseKind) -> Result<NoiseComparison> {
    let edss = edss_threshold(state, kind)?.q_star;
    let direct = direct_threshold(kind)?.q_star;
    let suc = rho_suc_threshold(state, kind)?.q_star;
    Ok(NoiseComparison {
        kind,
        q_star_edss: edss,
        q_star_direct: direct,
        q_star_suc: suc,
        half_weight_family: (state.spectrum()[0] - 0.5).abs() < 1e-12,
        ordered: direct >= edss - 1e-6 && edss >= suc - 1e-6,
    })
}

/// Canonical resource with `lambda_1 = 1/2` for which the protocol picks
/// exactly `s` through the `lambda_4 / lambda_3` ratio; `0 < s < 1`.
pub fn half_weight_resource(s: f64) -> Result<BellDiagonalState> {
    if !(s > 0.0 && s < 1.0) {
        return Err(EdssError::AncillaRange(s));
    }
    let mu = 0.5 * (1.0 / (2.0 * (2.0 + s))).min((1.0 - s) / (2.0 * (1.0 + s)));
    BellDiagonalState::from_spectrum([0.5, 0.5 - mu * (1.0 + s), mu, s * mu])
}

/// `2s / (2s + 1)`.
pub fn analytic_depolarizing_threshold(s: f64) -> f64 {
    2.0 * s / (2.0 * s + 1.0)
}
