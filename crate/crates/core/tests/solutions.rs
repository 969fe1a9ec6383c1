use bundle_cert::closed_forms::{cbar, opt_value, params_a};
use bundle_cert::fields::{partition_check, Point, Square};
use bundle_cert::mechanisms::menu_revenue;
use bundle_cert::solutions::{extract_menu, DualVariant, MenuExtraction, SolutionPair};
use bundle_cert::Regime;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

fn offsets() -> Vec<(f64, Regime)> {
    let a = [0.0, 0.01, 0.03, 0.06, 0.088].map(|c| (c, Regime::A));
    let b = [cbar() + 1e-6, 0.15, 0.7, 1.5, 4.0].map(|c| (c, Regime::B));
    a.into_iter().chain(b).collect()
}

#[test]
fn primal_and_dual_are_mirror_symmetric() {
    let mut rng = StdRng::seed_from_u64(21);
    for (c, regime) in offsets() {
        let pair = SolutionPair::new(c, regime, DualVariant::Standard).unwrap();
        for _ in 0..1000 {
            let x = Point::new(c + rng.gen::<f64>(), c + rng.gen::<f64>());
            let (u, ut) = (
                pair.u.value(x).unwrap(),
                pair.u.value(x.transposed()).unwrap(),
            );
            assert!((u - ut).abs() <= 1e-12, "u at {x:?}, c={c}");
            let (z1, z2t) = (
                pair.z1.value(x).unwrap(),
                pair.z2.value(x.transposed()).unwrap(),
            );
            assert!((z1 - z2t).abs() <= 1e-12, "z at {x:?}, c={c}");
        }
    }
}

#[test]
fn every_field_partitions_the_square() {
    for (c, regime) in offsets() {
        for variant in [DualVariant::Standard, DualVariant::Alternative] {
            if variant == DualVariant::Alternative && regime == Regime::B {
                continue;
            }
            let pair = SolutionPair::new(c, regime, variant).unwrap();
            let sq = Square::new(c).region();
            for (name, f) in [("u", &pair.u), ("z1", &pair.z1), ("z2", &pair.z2)] {
                let rep = partition_check(f.specs(), &sq);
                assert!(rep.passed, "{name} at c={c} {variant}: {rep:?}");
            }
        }
    }
}

#[test]
fn primal_vanishes_on_the_low_corner_only() {
    for (c, regime) in offsets() {
        let pair = SolutionPair::new(c, regime, DualVariant::Standard).unwrap();
        assert_eq!(pair.u.value(Point::new(c, c)).unwrap(), 0.0);
        assert!(pair.u.value(Point::new(c + 1.0, c + 1.0)).unwrap() > 0.0);
    }
}

#[test]
fn convex_primals_induce_their_own_revenue() {
    // Where u is convex its gradients form a menu whose revenue is the
    // primal objective.
    for c in [0.0, 0.5, 1.0] {
        let pair = SolutionPair::for_offset(c, DualVariant::Standard).unwrap();
        match extract_menu(&pair.u).unwrap() {
            MenuExtraction::Convex(menu) => {
                let target = bundle_cert::verify::primal_objective(&pair.u).unwrap();
                assert!((menu_revenue(&menu, c) - target).abs() <= 1e-9, "c={c}");
            }
            other => panic!("c={c}: {other:?}"),
        }
    }
}

#[test]
fn stripe_endpoint_is_tight_for_regime_a() {
    for c in [0.0, 0.04, 0.09] {
        let p = params_a(c).unwrap();
        assert!(p.stripe_end_value().abs() <= 1e-10);
        assert!(opt_value(c).unwrap() > 0.0);
    }
}

#[test]
fn out_of_range_pairs_are_rejected() {
    assert!(SolutionPair::new(0.05, Regime::B, DualVariant::Standard).is_err());
    assert!(SolutionPair::new(-0.1, Regime::A, DualVariant::Standard).is_err());
    assert!(SolutionPair::forced(0.05, Regime::B, DualVariant::Standard).is_ok());
}
