use bundle_cert::closed_forms::{brev, relaxed_optimum};
use bundle_cert::fields::{Affine, PiecewiseField};
use bundle_cert::lp_oracle::{build_lp, oracle_report, solve, solve_with, LpStatus, Solver};
use bundle_cert::mechanisms::best_full_bundle;
use bundle_cert::solutions::{DualVariant, SolutionPair};
use proptest::prelude::*;

const OFFSETS: [f64; 5] = [0.0, 0.03, 0.08, 0.4, 1.2];

#[test]
fn continuum_optimum_restricts_to_a_feasible_point() {
    for c in OFFSETS {
        let lp = build_lp(c, 30).unwrap();
        let pair = SolutionPair::for_offset(c, DualVariant::Standard).unwrap();
        let u = lp.restriction(&pair.u).unwrap();
        assert!(lp.max_violation(&u) <= 1e-9, "c={c}");
        let s = solve(&lp).unwrap();
        assert_eq!(s.status, LpStatus::Optimal);
        assert!(lp.max_violation(&s.u_grid) <= 1e-9);
        // The grid optimum dominates every feasible grid point.
        assert!(s.value >= lp.objective(&u) - 1e-9, "c={c}");
    }
}

#[test]
fn full_bundle_restriction_is_feasible() {
    for c in OFFSETS {
        let p = best_full_bundle(c).unwrap().price;
        let u =
            PiecewiseField::upper_envelope(c, &[Affine::ZERO, Affine::new(-p, 1.0, 1.0)]).unwrap();
        let lp = build_lp(c, 24).unwrap();
        let g = lp.restriction(&u).unwrap();
        assert!(lp.max_violation(&g) <= 1e-9);
        assert!((lp.objective(&g) - brev(c).unwrap()).abs() <= 5e-3, "c={c}");
    }
}

#[test]
fn grid_values_converge_to_the_continuum() {
    for c in [0.02, 0.6] {
        let target = relaxed_optimum(c).unwrap();
        let errs: Vec<f64> = [10, 20, 40]
            .iter()
            .map(|&n| (solve(&build_lp(c, n).unwrap()).unwrap().value - target).abs())
            .collect();
        assert!(errs[0] > errs[1] && errs[1] > errs[2], "c={c}: {errs:?}");
        assert!(errs[2] < 1e-3);
    }
}

#[test]
fn window_report_compares_with_deterministic() {
    assert!(oracle_report(0.05, 10)
        .unwrap()
        .exceeds_deterministic()
        .is_none());
    let r = oracle_report(0.085, 10).unwrap();
    assert!(r.exceeds_deterministic().is_some());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn solvers_agree(c in 0.0..2.0f64, n in 4usize..9) {
        let lp = build_lp(c, n).unwrap();
        let a = solve_with(&lp, Solver::Network).unwrap();
        let b = solve_with(&lp, Solver::Dense).unwrap();
        prop_assert!((a.value - b.value).abs() <= 1e-9);
        prop_assert!(lp.max_violation(&b.u_grid) <= 1e-9);
    }
}
