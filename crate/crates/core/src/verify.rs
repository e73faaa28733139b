//! Invariant suites behind `edss verify` and the acceptance tests.
//!
//! Each suite checks one claim over the coefficient grid or over seeded
//! random samples and reports the first failing point.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::bell::BellDiagonalState;
use crate::error::{EdssError, Result};
use crate::grid::{canonical_grid, unit_grid};
use crate::noise::{
    analytic_depolarizing_threshold, direct_threshold, edss_threshold, half_weight_resource,
    NoiseKind,
};
use crate::optimizer::dephasing_upper_bound;
use crate::protocol::{
    build_rho_abc, choose_s, closed_form_pt, cut_spectra, dense_pt_minima, gap_bound_check, run,
    Branch,
};
use crate::quantum::{controlled_phase, random};
use crate::separability::lemma2_decomposition;

#[derive(Debug, Clone, Serialize)]
pub struct VerifyConfig {
    pub step: f64,
    pub s_step: f64,
    pub theorem1_samples: usize,
    pub gap_samples: usize,
    pub seed: u64,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig {
            step: 0.05,
            s_step: 0.1,
            theorem1_samples: 1000,
            gap_samples: 10_000,
            seed: 0x5EED,
        }
    }
}

/// First failing point of a suite.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Witness {
    pub s01: f64,
    pub s10: f64,
    pub s11: f64,
    pub s: Option<f64>,
    pub detail: String,
}

impl Witness {
    fn new(state: &BellDiagonalState, s: Option<f64>, detail: String) -> Self {
        let [s01, s10, s11] = state.coefficients();
        Witness {
            s01,
            s10,
            s11,
            s,
            detail,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SuiteReport {
    pub name: &'static str,
    pub passed: bool,
    pub checked: usize,
    pub failures: usize,
    pub witness: Option<Witness>,
    pub notes: Vec<String>,
}

impl SuiteReport {
    fn from_tally(name: &'static str, t: Tally) -> Self {
        SuiteReport {
            name,
            passed: t.failures == 0 && t.checked > 0,
            checked: t.checked,
            failures: t.failures,
            witness: t.witness,
            notes: Vec::new(),
        }
    }
}

#[derive(Debug, Default)]
struct Tally {
    checked: usize,
    failures: usize,
    witness: Option<Witness>,
}

/// Applies `check` to every item in parallel; the witness is the first
/// failure in item order.
fn tally<T, F>(items: &[T], check: F) -> Result<Tally>
where
    T: Sync,
    F: Fn(&T) -> Result<Option<Witness>> + Sync + Send,
{
    let results: Vec<Option<Witness>> = items.par_iter().map(check).collect::<Result<_>>()?;
    let mut t = Tally {
        checked: results.len(),
        ..Tally::default()
    };
    for w in results.into_iter().flatten() {
        t.failures += 1;
        t.witness.get_or_insert(w);
    }
    Ok(t)
}

fn grid_with_s(cfg: &VerifyConfig) -> Result<Vec<(BellDiagonalState, f64)>> {
    let states = canonical_grid(cfg.step)?;
    let svals = unit_grid(cfg.s_step)?;
    Ok(states
        .iter()
        .flat_map(|st| svals.iter().map(move |&s| (*st, s)))
        .collect())
}

/// Closed-form partial-transpose minima against the dense oracle on the
/// grid times the `s` grid.
pub fn closed_forms(cfg: &VerifyConfig) -> Result<SuiteReport> {
    let points = grid_with_s(cfg)?;
    let t = tally(&points, |(st, s)| {
        let (lc, la) = closed_form_pt(st, *s)?;
        let (dc, da) = dense_pt_minima(&build_rho_abc(st, *s)?)?;
        let err = (lc - dc).abs().max((la - da).abs());
        Ok((err > 1e-10).then(|| {
            Witness::new(
                st,
                Some(*s),
                format!("closed ({lc}, {la}) dense ({dc}, {da})"),
            )
        }))
    })?;
    Ok(SuiteReport::from_tally("closed forms", t))
}

/// With `s11 = 0` the partial-transpose spectra over `A` and `C` coincide
/// for any interaction, so the carrier cut is PPT exactly when the target
/// cut is.
pub fn theorem1(cfg: &VerifyConfig) -> Result<SuiteReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut samples = Vec::with_capacity(cfg.theorem1_samples);
    while samples.len() < cfg.theorem1_samples {
        let (a, b) = (rng.random_range(-1.0..=1.0), rng.random_range(-1.0..=1.0));
        let Ok(st) = BellDiagonalState::new(a, b, 0.0) else {
            continue;
        };
        samples.push((
            st,
            random::haar_unitary(4, &mut rng),
            rng.random_range(0.0..=1.0),
        ));
    }
    let t = tally(&samples, |(st, u, s)| {
        let spectra = cut_spectra(st, u, *s)?;
        let d = spectra.over_a.max_abs_diff(&spectra.over_c);
        let (la, lc) = (spectra.over_a.min(), spectra.over_c.min());
        let one_sided = la < -1e-9 && lc >= -1e-12;
        Ok((d > 1e-9 || one_sided).then(|| {
            Witness::new(
                st,
                Some(*s),
                format!("spectra differ by {d:e}; A-min {la}, C-min {lc}"),
            )
        }))
    })?;
    Ok(SuiteReport::from_tally("Theorem 1", t))
}

/// Every nonnegative grid state with all coefficients positive and
/// `lambda_1 <= 1/2` keeps `C|AB` PPT and makes `A|BC` NPT.
pub fn theorem2(cfg: &VerifyConfig) -> Result<SuiteReport> {
    let states: Vec<_> = canonical_grid(cfg.step)?
        .into_iter()
        .filter(|st| st.coefficients().iter().all(|c| *c > 0.0) && st.is_separable())
        .collect();
    let t = tally(&states, |st| {
        let s = choose_s(st)?.s;
        let (lc, la) = dense_pt_minima(&build_rho_abc(st, s)?)?;
        Ok((lc < -1e-12 || la >= 0.0)
            .then(|| Witness::new(st, Some(s), format!("C-min {lc}, A-min {la}"))))
    })?;
    Ok(SuiteReport::from_tally("Theorem 2", t))
}

/// Every grid state with one negative coefficient succeeds by sending `A`.
pub fn negative_branch(cfg: &VerifyConfig) -> Result<SuiteReport> {
    let states: Vec<_> = canonical_grid(cfg.step)?
        .into_iter()
        .filter(|st| st.negative_count() == 1)
        .collect();
    let t = tally(&states, |st| {
        let out = run(st)?;
        let rho = build_rho_abc(st, out.s)?;
        let (lc, la) = dense_pt_minima(&rho)?;
        let ok = out.branch == Branch::SendA
            && la >= -1e-12
            && lc < 0.0
            && out
                .localized
                .as_ref()
                .is_some_and(|l| l.pt_min_eigenvalue < 0.0);
        Ok((!ok).then(|| {
            Witness::new(
                st,
                Some(out.s),
                format!("branch {:?}, C-min {lc}, A-min {la}", out.branch),
            )
        }))
    })?;
    Ok(SuiteReport::from_tally("negative branch", t))
}

/// Localization of every grid state whose target cut is NPT reproduces
/// `lambda_R / p` on the heralded pair; the optimum gives `-1/10`.
pub fn lemma1(cfg: &VerifyConfig) -> Result<SuiteReport> {
    let states = canonical_grid(cfg.step)?;
    let mut t = tally(&states, |st| {
        let out = run(st)?;
        let Some(loc) = out.localized else {
            return Ok(None);
        };
        let err = (loc.pt_min_eigenvalue - loc.expected_pt_min()).abs();
        Ok((err > 1e-10 || loc.pt_min_eigenvalue >= 0.0).then(|| {
            Witness::new(
                st,
                Some(out.s),
                format!(
                    "localized {} expected {}",
                    loc.pt_min_eigenvalue,
                    loc.expected_pt_min()
                ),
            )
        }))
    })?;
    let opt = BellDiagonalState::new(0.5, 0.25, 0.25)?;
    let loc = run(&opt)?.localized.ok_or(EdssError::UselessResource)?;
    t.checked += 1;
    if (loc.pt_min_eigenvalue + 0.1).abs() > 1e-10 {
        t.failures += 1;
        t.witness.get_or_insert_with(|| {
            Witness::new(
                &opt,
                Some(0.5),
                format!("localized {}", loc.pt_min_eigenvalue),
            )
        });
    }
    Ok(SuiteReport::from_tally("Lemma 1", t))
}

/// Explicit separable decomposition on every grid point whose carrier cut
/// is PPT.
pub fn lemma2(cfg: &VerifyConfig) -> Result<SuiteReport> {
    let points = grid_with_s(cfg)?;
    let t = tally(&points, |(st, s)| {
        let cut = if st.negative_count() == 0 {
            Branch::SendC.carrier_cut()
        } else {
            Branch::SendA.carrier_cut()
        };
        let d = match lemma2_decomposition(st, *s, cut) {
            Ok(d) => d,
            Err(EdssError::DecompositionNotClaimed { .. }) => return Ok(None),
            Err(e) => return Err(e),
        };
        let report = d.verify();
        if report.passed(1e-12) {
            return Ok(None);
        }
        let bad = report.terms.iter().find(|v| !v.separable);
        let detail = match bad {
            Some(v) => format!("term {} fails: {:?}", v.label, v.witness),
            None => format!("reconstruction error {:e}", report.reconstruction_error),
        };
        Ok(Some(Witness::new(st, Some(*s), detail)))
    })?;
    Ok(SuiteReport::from_tally("Lemma 2", t))
}

/// Canonical resource where `lambda_4 / lambda_3` binds; the gap bound is
/// attained there.
pub fn saturation_state() -> BellDiagonalState {
    BellDiagonalState::from_spectrum([0.45, 0.25, 0.20, 0.10])
        .expect("valid spectrum")
        .canonicalize()
}

/// Gap between the two cut minima against `(1+s)|s11|/4`.
///
/// The stated bound is checked on random `(state, s)` pairs with the
/// controlled-phase gate and at the saturating state. For Haar-random
/// interactions it can be exceeded by a few percent, so those samples are
/// held to the provable `(1+s)|s11|/2`; the excess count and the largest
/// ratio are reported in the notes.
pub fn gap_bound(cfg: &VerifyConfig) -> Result<SuiteReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed.wrapping_add(1));
    let mut samples = Vec::with_capacity(cfg.gap_samples);
    while samples.len() < cfg.gap_samples {
        let c: [f64; 3] = std::array::from_fn(|_| rng.random_range(-1.0..=1.0));
        let Ok(st) = BellDiagonalState::new(c[0], c[1], c[2]) else {
            continue;
        };
        samples.push((
            st.canonicalize(),
            random::haar_unitary(4, &mut rng),
            rng.random_range(0.0..=1.0),
        ));
    }
    let cz = controlled_phase();

    let results: Vec<(Option<Witness>, f64)> = samples
        .par_iter()
        .map(|(st, u, s)| -> Result<(Option<Witness>, f64)> {
            let general = gap_bound_check(st, u, *s)?;
            let with_cz = gap_bound_check(st, &cz, *s)?;
            let ratio = if general.bound > 0.0 {
                general.gap / general.bound
            } else {
                0.0
            };
            let w = if general.gap > 2.0 * general.bound + 1e-9 {
                Some(Witness::new(
                    st,
                    Some(*s),
                    format!("gap {} exceeds twice {}", general.gap, general.bound),
                ))
            } else if !with_cz.holds(1e-9) {
                Some(Witness::new(
                    st,
                    Some(*s),
                    format!("CZ gap {} > {}", with_cz.gap, with_cz.bound),
                ))
            } else {
                None
            };
            Ok((w, ratio))
        })
        .collect::<Result<_>>()?;

    let mut t = Tally::default();
    let mut exceeded = 0usize;
    let mut worst_ratio: f64 = 0.0;
    for ((w, ratio), (st, u, s)) in results.into_iter().zip(&samples) {
        t.checked += 1;
        if let Some(w) = w {
            t.failures += 1;
            t.witness.get_or_insert(w);
        }
        if !gap_bound_check(st, u, *s)?.holds(1e-9) {
            exceeded += 1;
        }
        worst_ratio = worst_ratio.max(ratio);
    }

    let sat = saturation_state();
    let s = choose_s(&sat)?.s;
    let g = gap_bound_check(&sat, &cz, s)?;
    t.checked += 1;
    if (g.bound - g.gap).abs() > 1e-6 {
        t.failures += 1;
        t.witness.get_or_insert_with(|| {
            Witness::new(
                &sat,
                Some(s),
                format!("gap {} not at bound {}", g.gap, g.bound),
            )
        });
    }

    let mut report = SuiteReport::from_tally("Eq. 5", t);
    report.notes.push(format!(
        "random interactions: {exceeded} of {} samples exceed (1+s)|s11|/4, largest gap/bound ratio {worst_ratio:.6}",
        samples.len()
    ));
    report.notes.push(format!(
        "saturation at spectrum (0.45, 0.25, 0.20, 0.10): gap {} bound {}",
        g.gap, g.bound
    ));
    Ok(report)
}

/// Bisection thresholds against their closed forms.
pub fn noise_thresholds(_cfg: &VerifyConfig) -> Result<SuiteReport> {
    let mut t = Tally::default();
    let mut check = |ok: bool, st: &BellDiagonalState, detail: String| {
        t.checked += 1;
        if !ok {
            t.failures += 1;
            t.witness
                .get_or_insert_with(|| Witness::new(st, None, detail));
        }
    };
    let pair = BellDiagonalState::new(1.0, 1.0, 1.0)?;
    let d = direct_threshold(NoiseKind::Depolarizing)?.q_star;
    check(
        (d - 2.0 / 3.0).abs() < 1e-4,
        &pair,
        format!("direct depolarizing {d}"),
    );
    let p = direct_threshold(NoiseKind::PhaseFlip)?.q_star;
    check(
        (p - 0.5).abs() < 1e-4,
        &pair,
        format!("direct phase flip {p}"),
    );
    for s in [0.1, 0.25, 0.5, 0.9] {
        let st = half_weight_resource(s)?;
        let q = edss_threshold(&st, NoiseKind::Depolarizing)?;
        let want = analytic_depolarizing_threshold(s);
        check(
            (q.q_star - want).abs() < 1e-4 && q.monotone(),
            &st,
            format!("depolarizing {} expected {want}", q.q_star),
        );
        let q = edss_threshold(&st, NoiseKind::PhaseFlip)?.q_star;
        check((q - 0.5).abs() < 1e-4, &st, format!("phase flip {q}"));
    }
    Ok(SuiteReport::from_tally("noise thresholds", t))
}

/// Hashing lower bound never exceeds the dephasing upper bound.
pub fn bounds_ordering(cfg: &VerifyConfig) -> Result<SuiteReport> {
    let states = canonical_grid(cfg.step)?;
    let t = tally(&states, |st| {
        let lower = run(st)?.ent_lower_bound;
        let upper = dephasing_upper_bound(st)?.upper_bound;
        Ok((lower > upper + 1e-12)
            .then(|| Witness::new(st, None, format!("lower {lower} > upper {upper}"))))
    })?;
    Ok(SuiteReport::from_tally("bounds ordering", t))
}

/// All suites in table order.
pub fn run_all(cfg: &VerifyConfig) -> Result<Vec<SuiteReport>> {
    Ok(vec![
        theorem1(cfg)?,
        theorem2(cfg)?,
        lemma1(cfg)?,
        lemma2(cfg)?,
        negative_branch(cfg)?,
        gap_bound(cfg)?,
        noise_thresholds(cfg)?,
        closed_forms(cfg)?,
        bounds_ordering(cfg)?,
    ])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn coarse() -> VerifyConfig {
        VerifyConfig {
            step: 0.25,
            s_step: 0.25,
            theorem1_samples: 50,
            gap_samples: 200,
            seed: 3,
        }
    }

    #[test]
    fn all_suites_pass_on_a_coarse_grid() {
        for r in run_all(&coarse()).unwrap() {
            assert!(r.passed, "{r:?}");
            assert!(r.checked > 0);
        }
    }

    #[test]
    fn saturation_state_binds_lambda43() {
        let st = saturation_state();
        let c = choose_s(&st).unwrap();
        assert_eq!(c.binding, crate::protocol::Binding::Lambda43);
        assert!((c.s - 0.5).abs() < 1e-12);
    }

    #[test]
    fn witnesses_come_first_in_order() {
        let items = [1, 2, 3, 4];
        let st = BellDiagonalState::maximally_mixed();
        let t = tally(&items, |i| {
            Ok((*i % 2 == 0).then(|| Witness::new(&st, None, i.to_string())))
        })
        .unwrap();
        assert_eq!((t.checked, t.failures), (4, 2));
        assert_eq!(t.witness.unwrap().detail, "2");
    }
}
