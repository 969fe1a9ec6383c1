use bundle_cert::closed_forms::{cbar, relaxed_optimum};
use bundle_cert::solutions::{DualVariant, SolutionPair};
use bundle_cert::verify::{check_dual, check_primal, full_verify, primal_objective_routes};
use bundle_cert::Regime;
use proptest::prelude::*;

#[test]
fn certificates_do_not_depend_on_sample_grid() {
    for c in [0.03, 0.6] {
        let pair = SolutionPair::for_offset(c, DualVariant::Standard).unwrap();
        let reps: Vec<_> = [100, 200, 400]
            .iter()
            .map(|&n| full_verify(&pair, n))
            .collect();
        for r in &reps {
            assert!(r.certified(), "{r}");
            assert_eq!(r.primal_objective, reps[0].primal_objective);
            assert_eq!(r.dual_objective, reps[0].dual_objective);
        }
    }
}

#[test]
fn regime_a_dual_breaks_above_threshold() {
    let pair = SolutionPair::forced(cbar() + 0.01, Regime::A, DualVariant::Standard).unwrap();
    let primal = check_primal(&pair.u, 200);
    let dual = check_dual(&pair.z1, &pair.z2, 200);
    let rep = full_verify(&pair, 200);
    assert!(!rep.certified(), "{rep}");
    assert!(!(primal.result.passed && dual.passed), "{rep}");
}

#[test]
fn regime_b_dual_breaks_below_threshold() {
    let pair = SolutionPair::forced(cbar() - 0.01, Regime::B, DualVariant::Standard).unwrap();
    let rep = full_verify(&pair, 200);
    assert!(!rep.dual_feasible.passed);
    assert!(!rep.certified());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn regime_a_is_certified(c in 0.0..=0.0915f64, alt in any::<bool>()) {
        let variant = if alt { DualVariant::Alternative } else { DualVariant::Standard };
        let pair = SolutionPair::new(c, Regime::A, variant).unwrap();
        let rep = full_verify(&pair, 60);
        prop_assert!(rep.certified(), "{}", rep);
        prop_assert!((rep.dual_objective - relaxed_optimum(c).unwrap()).abs() <= 1e-6);
    }

    #[test]
    fn regime_b_is_certified(c in 0.0916..4.0f64) {
        let pair = SolutionPair::new(c, Regime::B, DualVariant::Standard).unwrap();
        let rep = full_verify(&pair, 60);
        prop_assert!(rep.certified(), "{}", rep);
        prop_assert!((rep.primal_objective - relaxed_optimum(c).unwrap()).abs() <= 1e-6);
    }

    #[test]
    fn objective_routes_agree(c in 0.0..4.0f64) {
        let pair = SolutionPair::for_offset(c, DualVariant::Standard).unwrap();
        let r = primal_objective_routes(&pair.u).unwrap();
        prop_assert!((r.direct - r.boundary).abs() <= 1e-10);
    }
}
