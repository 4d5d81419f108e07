mod common;

use factor_approx::series::TruncatedSeries;
use proptest::prelude::*;

fn nonzero(lo: f64, hi: f64) -> impl Strategy<Value = f64> {
    (lo..hi, any::<bool>()).prop_map(|(v, neg)| if neg { -v } else { v })
}

fn factors(max: usize) -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
    (1..=max).prop_flat_map(|p| {
        (
            prop::collection::vec(nonzero(0.2, 1.0), p),
            prop::collection::vec(nonzero(0.2, 2.0), p),
        )
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn fit_recovers_known_factors((nodes, exps) in factors(3)) {
        prop_assume!(common::well_separated(&nodes, 0.2));
        prop_assert!(common::round_trip(&nodes, &exps, 1e-7).is_ok(), "{:?}", common::round_trip(&nodes, &exps, 1e-7));
    }

    #[test]
    fn fitted_forms_reproduce_their_series(coeffs in prop::collection::vec(-1.0f64..1.0, 2..=6)) {
        let r = common::re_expansion(&coeffs, 1e-8);
        prop_assert!(r.is_ok(), "{:?}", r);
    }

    #[test]
    fn real_series_give_conjugate_closed_forms(coeffs in prop::collection::vec(-1.0f64..1.0, 2..=6)) {
        let r = common::conjugate_closure(&coeffs);
        prop_assert!(r.is_ok(), "{:?}", r);
    }

    #[test]
    fn derivatives_agree_with_finite_differences(
        (nodes, exps) in factors(3),
        scale in 0.2f64..3.0,
        sigma in 0i32..3,
        x in 0.05f64..0.45,
    ) {
        let f = common::form(scale, sigma, &nodes, &exps);
        let r = common::derivatives(&f, x, 1e-6);
        prop_assert!(r.is_ok(), "{:?}", r);
    }

    #[test]
    fn moments_are_power_sums((nodes, exps) in factors(4), order in 1usize..10) {
        let r = common::moment_log(&nodes, &exps, order);
        prop_assert!(r.is_ok(), "{:?}", r);
    }

    #[test]
    fn division_undoes_multiplication(
        a in prop::collection::vec(-2.0f64..2.0, 6),
        b in prop::collection::vec(-2.0f64..2.0, 6),
        b0 in nonzero(0.5, 2.0),
    ) {
        let mut b = b;
        b[0] = b0;
        let (sa, sb) = (TruncatedSeries::from_real(&a), TruncatedSeries::from_real(&b));
        let back = sa.mul(&sb).unwrap().div(&sb).unwrap();
        for n in 0..6 {
            prop_assert!((back.coeff(n) - sa.coeff(n)).norm() < 1e-9 * (1.0 + 2f64.powi(n as i32 + 3)));
        }
    }

    #[test]
    fn exact_solutions_have_no_defect(which in 0usize..5, eps in 0.1f64..10.0) {
        let r = common::exact_defect(common::EXACT[which], eps, 1e-10);
        prop_assert!(r.is_ok(), "{:?}", r);
    }

    #[test]
    fn error_is_ratio_times_defect(which in 0usize..5, eps in 0.1f64..10.0, amp in 1e-6f64..0.1) {
        let report = common::perturbed_report(common::EXACT[which], eps, amp);
        prop_assert!(common::ratio_identity(&report).is_ok());
        if let (Some(e), Some(q)) = (report.max_error, report.ratio) {
            prop_assert!(e <= q * report.max_defect * (1.0 + 1e-12));
        }
    }
}
