use edss_core::noise::{NoiseChannel, NoiseKind};
use edss_core::protocol::{
    build_rho_abc, choose_s, closed_form_pt, dense_pt_minima, gap_bound_check, run,
};
use edss_core::quantum::{controlled_phase, hermitian_spectrum};
use edss_core::{BellDiagonalState, Qubit};
use proptest::prelude::*;

fn spectrum() -> impl Strategy<Value = [f64; 4]> {
    prop::array::uniform4(0.0f64..1.0).prop_filter_map("nonzero mass", |v| {
        let t: f64 = v.iter().sum();
        (t > 1e-6).then(|| v.map(|x| x / t))
    })
}

fn state() -> impl Strategy<Value = BellDiagonalState> {
    spectrum().prop_map(|l| BellDiagonalState::from_spectrum(l).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn closed_form_spectrum_matches_dense(st in state()) {
        let spec = hermitian_spectrum(&st.to_density_matrix(), false).unwrap();
        let closed = st.spectrum();
        for (a, b) in spec.eigenvalues.iter().zip(closed) {
            prop_assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn canonical_form_keeps_the_spectrum(st in state()) {
        let c = st.canonicalize();
        prop_assert!(c.is_canonical());
        prop_assert_eq!(c.canonicalize(), c);
        for (a, b) in st.spectrum().iter().zip(c.spectrum()) {
            prop_assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn closed_forms_match_dense_minima(st in state(), s in 0.0f64..=1.0) {
        let st = st.canonicalize();
        let (lc, la) = closed_form_pt(&st, s).unwrap();
        let (dc, da) = dense_pt_minima(&build_rho_abc(&st, s).unwrap()).unwrap();
        prop_assert!((lc - dc).abs() < 1e-10, "{} vs {}", lc, dc);
        prop_assert!((la - da).abs() < 1e-10, "{} vs {}", la, da);
    }

    #[test]
    fn chosen_s_keeps_the_carrier_separable(st in state()) {
        let st = st.canonicalize();
        let out = run(&st).unwrap();
        let carrier = match out.branch {
            edss_core::Branch::SendC => out.lambda_c_ab,
            edss_core::Branch::SendA => out.lambda_a_bc,
        };
        prop_assert!(carrier >= -1e-12);
        prop_assert!(out.ent_lower_bound >= 0.0);
        prop_assert!((0.0..=1.0).contains(&out.s));
        prop_assert_eq!(out.s, choose_s(&st).unwrap().s);
    }

    #[test]
    fn controlled_phase_respects_the_gap_bound(st in state(), s in 0.0f64..=1.0) {
        let g = gap_bound_check(&st.canonicalize(), &controlled_phase(), s).unwrap();
        prop_assert!(g.holds(1e-9), "{:?}", g);
    }

    #[test]
    fn noise_keeps_states_valid(st in state(), q in 0.0f64..=1.0, depolarize in any::<bool>()) {
        let kind = if depolarize { NoiseKind::Depolarizing } else { NoiseKind::PhaseFlip };
        let ch = NoiseChannel::new(kind, q).unwrap();
        prop_assert!(ch.trace_preservation_error() < 1e-12);
        let out = ch.apply(&st.to_density_matrix(), Qubit::B).unwrap();
        prop_assert!((out.trace().re - 1.0).abs() < 1e-12);
        prop_assert!(hermitian_spectrum(&out, false).unwrap().min() > -1e-12);
    }

    #[test]
    fn json_round_trip(st in state()) {
        let text = serde_json::to_string(&st).unwrap();
        let back: BellDiagonalState = serde_json::from_str(&text).unwrap();
        prop_assert_eq!(back, st);
    }
}

#[test]
fn invalid_json_state_is_rejected() {
    let err = serde_json::from_str::<BellDiagonalState>(r#"{"s01": 2.0, "s10": 0.0, "s11": 0.0}"#);
    assert!(err.is_err());
}
