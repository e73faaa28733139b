use edss_core::grid::{canonical_grid, sweep};
use edss_core::noise::{compare, NoiseKind};
use edss_core::optimizer::{objective, UnitaryParams};
use edss_core::protocol::{build_rho_abc, run, Branch};
use edss_core::separability::{lemma2_decomposition, min_pt_value};
use edss_core::{BellDiagonalState, EdssError, Qubit};

fn st(a: f64, b: f64, c: f64) -> BellDiagonalState {
    BellDiagonalState::new(a, b, c).unwrap()
}

#[test]
fn optimum_end_to_end() {
    let state = st(0.5, 0.25, 0.25);
    let out = run(&state).unwrap();
    assert_eq!(out.branch, Branch::SendC);

    // the carrier cut has an explicit separable decomposition
    let d = lemma2_decomposition(&state, out.s, Qubit::C).unwrap();
    assert!(d.verify().passed(1e-12));

    // Bob's heralded pair keeps the negativity
    let loc = out.localized.as_ref().unwrap();
    assert!((loc.pt_min_eigenvalue + 0.1).abs() < 1e-10);
    assert!((loc.success_probability - 0.625).abs() < 1e-12);
    assert!((out.ent_lower_bound - 0.018156).abs() < 1e-6);

    let rec = serde_json::to_value(out.record()).unwrap();
    assert_eq!(rec["branch"], "SendC");
    assert!((rec["lambda_a_bc"].as_f64().unwrap() + 0.0625).abs() < 1e-12);
    assert_eq!(rec.as_object().unwrap().len(), 11);
}

#[test]
fn optimizer_objective_agrees_with_protocol() {
    let state = st(0.4, 0.3, 0.2);
    let out = run(&state).unwrap();
    let (lc, la) = objective(&state, &UnitaryParams::controlled_phase(), out.s).unwrap();
    assert!((lc - out.lambda_c_ab).abs() < 1e-10);
    assert!((la - out.lambda_a_bc).abs() < 1e-10);
}

#[test]
fn negative_state_sends_a() {
    let state = st(0.5, 0.25, -0.25);
    let out = run(&state).unwrap();
    assert_eq!(out.branch, Branch::SendA);
    let rho = build_rho_abc(&state, out.s).unwrap();
    assert!(min_pt_value(&rho, &[Qubit::A]).unwrap() >= -1e-12);
    assert!(min_pt_value(&rho, &[Qubit::C]).unwrap() < 0.0);
    assert!(lemma2_decomposition(&state, out.s, Qubit::A)
        .unwrap()
        .verify()
        .passed(1e-12));
    assert!(matches!(
        lemma2_decomposition(&state, out.s, Qubit::C),
        Err(EdssError::DecompositionNotClaimed { .. })
    ));
}

#[test]
fn sweep_rows_are_consistent() {
    let states = canonical_grid(0.1).unwrap();
    let rows = sweep(&states).unwrap();
    for row in &rows {
        assert!(row.ent_lower_bound <= row.i_class + 1e-12);
        assert!((0.0..=1.0).contains(&row.s));
        assert!(row.p >= 0.5 - 1e-12 && row.p <= 1.0 + 1e-12);
    }
    // zero s11 never distributes anything
    for (st, row) in states.iter().zip(&rows) {
        if st.s11() == 0.0 {
            assert_eq!(row.ent_lower_bound, 0.0);
            assert!(row.lambda_a_bc >= -1e-12 && row.lambda_c_ab >= -1e-12);
        }
    }
}

#[test]
fn noise_comparison_orders_the_protocols() {
    let c = compare(
        &edss_core::noise::half_weight_resource(0.25).unwrap(),
        NoiseKind::Depolarizing,
    )
    .unwrap();
    assert!(c.ordered, "{c:?}");
    assert!((c.q_star_edss - 1.0 / 3.0).abs() < 1e-6);
    let p = compare(&st(0.5, 0.25, 0.25), NoiseKind::PhaseFlip).unwrap();
    assert!((p.q_star_edss - 0.5).abs() < 1e-6 && (p.q_star_direct - 0.5).abs() < 1e-6);
    assert!((p.q_star_suc - 1.0 / 3.0).abs() < 1e-6);
}
