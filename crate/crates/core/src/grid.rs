//! Coefficient grids and protocol sweeps.

use rayon::prelude::*;
use serde::Serialize;

use crate::bell::BellDiagonalState;
use crate::error::{EdssError, Result};
use crate::protocol::run;

pub const DEFAULT_STEP: f64 = 0.05;

/// Number of grid intervals on `[0, 1]`; the step must divide 1.
fn intervals(step: f64) -> Result<usize> {
    let n = (1.0 / step).round();
    if !step.is_finite() || step <= 0.0 || step > 1.0 || (n * step - 1.0).abs() > 1e-9 {
        return Err(EdssError::CoefficientRange {
            name: "step",
            value: step,
        });
    }
    Ok(n as usize)
}

/// `{0, step, ..., 1}` computed as `k / n` so grid values are exact
/// multiples.
pub fn unit_grid(step: f64) -> Result<Vec<f64>> {
    let n = intervals(step)?;
    Ok((0..=n).map(|k| k as f64 / n as f64).collect())
}

/// Canonical states on a `step` grid of magnitudes `s01 >= s10 >= |s11|`.
///
/// Each magnitude triple contributes its nonnegative state and, when
/// `s11 != 0`, the state with one negative coefficient placed by the
/// protocol's rule. Sign patterns that are not positive semidefinite are
/// dropped.
pub fn canonical_grid(step: f64) -> Result<Vec<BellDiagonalState>> {
    let values = unit_grid(step)?;
    let mut out = Vec::new();
    for (i, &a) in values.iter().enumerate() {
        for (j, &b) in values[..=i].iter().enumerate() {
            for &c in &values[..=j] {
                if let Ok(st) = BellDiagonalState::new(a, b, c) {
                    out.push(st);
                }
                if c > 0.0 {
                    if let Ok(st) = BellDiagonalState::new(a, b, -c) {
                        out.push(st.canonicalize());
                    }
                }
            }
        }
    }
    Ok(out)
}

/// One CSV row of a sweep.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub s01: f64,
    pub s10: f64,
    pub s11: f64,
    pub s: f64,
    pub branch: &'static str,
    pub lambda_c_ab: f64,
    pub lambda_a_bc: f64,
    pub p: f64,
    pub ent_lower_bound: f64,
    pub i_class: f64,
    pub i_edss_naive: f64,
}

pub const SWEEP_HEADER: [&str; 11] = [
    "s01",
    "s10",
    "s11",
    "s",
    "branch",
    "lambda_c_ab",
    "lambda_a_bc",
    "p",
    "ent_lower_bound",
    "i_class",
    "i_edss_naive",
];

pub fn sweep_row(state: &BellDiagonalState) -> Result<SweepRow> {
    let out = run(state)?;
    let m = state.measures();
    Ok(SweepRow {
        s01: state.s01(),
        s10: state.s10(),
        s11: state.s11(),
        s: out.s,
        branch: out.branch.as_str(),
        lambda_c_ab: out.lambda_c_ab,
        lambda_a_bc: out.lambda_a_bc,
        p: out.success_probability,
        ent_lower_bound: out.ent_lower_bound,
        i_class: m.i_class,
        i_edss_naive: m.i_edss_naive,
    })
}

/// Runs the protocol on every state; rows keep the input order.
pub fn sweep(states: &[BellDiagonalState]) -> Result<Vec<SweepRow>> {
    states.par_iter().map(sweep_row).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_grid_is_exact() {
        let g = unit_grid(0.05).unwrap();
        assert_eq!(g.len(), 21);
        assert_eq!(g[10], 0.5);
        assert_eq!(g[20], 1.0);
        assert!(unit_grid(0.3).is_err());
        assert!(unit_grid(0.0).is_err());
    }

    #[test]
    fn grid_states_are_canonical_and_distinct() {
        let g = canonical_grid(0.05).unwrap();
        assert!(g.iter().all(|s| s.is_canonical()));
        let mut keys: Vec<_> = g
            .iter()
            .map(|s| s.coefficients().map(f64::to_bits))
            .collect();
        keys.sort();
        keys.dedup();
        assert_eq!(keys.len(), g.len());
        assert!(g.iter().any(|s| s.negative_count() == 1));
        assert!(g.contains(&BellDiagonalState::new(0.5, 0.25, 0.25).unwrap()));
    }

    #[test]
    fn grid_counts_by_hand_on_a_coarse_step() {
        // step 1/2: magnitudes from {0, 1/2, 1}
        let g = canonical_grid(0.5).unwrap();
        let mut brute = 0;
        let v = [0.0, 0.5, 1.0];
        for a in v {
            for b in v {
                for c in [-1.0f64, -0.5, 0.0, 0.5, 1.0] {
                    if b <= a && c.abs() <= b && BellDiagonalState::new(a, b, c).is_ok() {
                        brute += 1;
                    }
                }
            }
        }
        assert_eq!(g.len(), brute);
    }

    #[test]
    fn sweep_keeps_order_and_matches_run() {
        let states: Vec<_> = canonical_grid(0.25).unwrap();
        let rows = sweep(&states).unwrap();
        assert_eq!(rows.len(), states.len());
        for (st, row) in states.iter().zip(&rows) {
            assert_eq!(row.s01, st.s01());
            let out = run(st).unwrap();
            assert_eq!(row.lambda_a_bc, out.lambda_a_bc);
        }
        let opt = sweep_row(&BellDiagonalState::new(0.5, 0.25, 0.25).unwrap()).unwrap();
        assert_eq!(opt.branch, "SendC");
        assert!((opt.lambda_a_bc + 0.0625).abs() < 1e-12);
    }
}
