//! Acceptance gate. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any fails.

use std::process::ExitCode;

use bundle_cert::closed_forms::{
    brev, bundle_foc_residual, bundle_revenue, cbar, opt_value, params_a, params_b, relaxed_optimum,
};
use bundle_cert::fields::{Affine, PiecewiseField};
use bundle_cert::lp_oracle::oracle_value;
use bundle_cert::mechanisms::best_deterministic;
use bundle_cert::solutions::{
    build_primal, extract_menu, DualVariant, MenuExtraction, SolutionPair,
};
use bundle_cert::sweep::{max_ratios, run_sweep, sweep_points, SweepConfig};
use bundle_cert::verify::{check_dual, check_nonnegativity, full_verify, primal_objective_routes};
use bundle_cert::Regime;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

const GRID: usize = 200;

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        passed,
        detail: detail.into(),
    }
}

fn certify(c: f64, regime: Regime, variant: DualVariant, target: f64) -> Result<String, String> {
    let pair = SolutionPair::new(c, regime, variant).map_err(|e| e.to_string())?;
    let rep = full_verify(&pair, GRID);
    let dp = (rep.primal_objective - target).abs();
    let dd = (rep.dual_objective - target).abs();
    if rep.certified() && dp <= 1e-6 && dd <= 1e-6 {
        Ok(format!("c={c:.6}: {:.9}", rep.dual_objective))
    } else {
        Err(format!("c={c:.6} regime {regime} {variant}:\n{rep}"))
    }
}

fn certificates(cs: &[f64], regime: Regime) -> Outcome {
    let mut notes = Vec::new();
    for &c in cs {
        let target = match regime {
            Regime::A => opt_value(c),
            Regime::B => brev(c),
        };
        match target
            .map_err(|e| e.to_string())
            .and_then(|t| certify(c, regime, DualVariant::Standard, t))
        {
            Ok(s) => notes.push(s),
            Err(e) => return outcome(false, e),
        }
    }
    outcome(true, notes.join("; "))
}

fn criterion_1() -> Outcome {
    certificates(&[0.0, 0.02, 0.05, 0.08, cbar()], Regime::A)
}

fn criterion_2() -> Outcome {
    certificates(&[cbar(), 0.2, 0.5, 1.0, 2.0], Regime::B)
}

fn criterion_3() -> Outcome {
    let above = SolutionPair::forced(cbar() + 1e-3, Regime::B, DualVariant::Standard).unwrap();
    let below = SolutionPair::forced(cbar() - 1e-3, Regime::B, DualVariant::Standard).unwrap();
    let ok_above = check_nonnegativity(&above.z1, GRID, "z1 >= 0").passed
        && check_nonnegativity(&above.z2, GRID, "z2 >= 0").passed
        && check_dual(&above.z1, &above.z2, GRID).passed;
    let neg_below = check_nonnegativity(&below.z1, GRID, "z1 >= 0");
    let passed = ok_above && !neg_below.passed;
    outcome(
        passed,
        format!(
            "above: {}, below: min z1 = {:.3e}",
            if ok_above { "nonnegative" } else { "NEGATIVE" },
            -neg_below.max_violation
        ),
    )
}

fn criterion_4() -> Outcome {
    let mut notes = Vec::new();
    for c in [0.02, 0.05, 0.08] {
        let std = SolutionPair::new(c, Regime::A, DualVariant::Standard).unwrap();
        let alt = SolutionPair::new(c, Regime::A, DualVariant::Alternative).unwrap();
        let rs = full_verify(&std, GRID);
        let ra = full_verify(&alt, GRID);
        let same = (rs.dual_objective - ra.dual_objective).abs() <= 1e-6
            && (rs.primal_objective - ra.primal_objective).abs() <= 1e-6;
        if !(ra.certified() && same) {
            return outcome(false, format!("c={c}:\n{ra}"));
        }
        notes.push(format!("c={c}: {:.9}", ra.dual_objective));
    }
    outcome(true, notes.join("; "))
}

fn criterion_5() -> Outcome {
    let mut notes = Vec::new();
    for c in [0.078, 0.085, 0.09] {
        let u = build_primal(c, Regime::A).unwrap();
        let witness = matches!(extract_menu(&u), Ok(MenuExtraction::NonConvex { .. }));
        let opt = opt_value(c).unwrap();
        let gap_b = opt - brev(c).unwrap();
        let gap_d = opt - best_deterministic(c).revenue;
        notes.push(format!("c={c}: opt-brev={gap_b:.3e} opt-drev={gap_d:.3e}"));
        if !(witness && gap_b > 0.0 && gap_d > 0.0) {
            return outcome(
                false,
                format!("{} (non-convex witness: {witness})", notes.join("; ")),
            );
        }
    }
    outcome(true, notes.join("; "))
}

fn criterion_6() -> Outcome {
    let d = best_deterministic(0.0);
    let passed = (d.item_price - 2.0 / 3.0).abs() <= 1e-4
        && (d.bundle_price - (4.0 - 2f64.sqrt()) / 3.0).abs() <= 1e-4
        && (d.revenue - 0.549_194).abs() <= 1e-5;
    outcome(
        passed,
        format!(
            "prices ({:.7}, {:.7}), revenue {:.9}",
            d.item_price, d.bundle_price, d.revenue
        ),
    )
}

fn criterion_7() -> Outcome {
    let points = sweep_points(0.0, cbar(), 5e-4).unwrap();
    let rows = run_sweep(&points, &SweepConfig::default()).unwrap();
    let (b, d, r) = max_ratios(&rows);
    let floor_ok = rows.iter().all(|row| {
        row.ratio_bundle >= 1.0 - 1e-9
            && row.ratio_det >= 1.0 - 1e-9
            && row.ratio_rand >= 1.0 - 1e-9
    });
    outcome(
        floor_ok && b <= 1.0091 && d <= 1.0021 && r <= 1.001,
        format!(
            "{} points: max bundle {b:.6}, det {d:.6}, rand {r:.6}",
            rows.len()
        ),
    )
}

fn criterion_8() -> Outcome {
    let mut notes = Vec::new();
    let mut passed = true;
    for c in [0.0, 0.05, 1.0] {
        let target = relaxed_optimum(c).unwrap();
        let errs: Vec<f64> = [20, 40, 80]
            .iter()
            .map(|&n| (oracle_value(c, n).unwrap() - target).abs())
            .collect();
        let ok = errs[2] <= 0.02 && errs[0] >= errs[1] && errs[1] >= errs[2];
        passed &= ok;
        notes.push(format!(
            "c={c}: |err| {:.2e} {:.2e} {:.2e}",
            errs[0], errs[1], errs[2]
        ));
    }
    outcome(passed, notes.join("; "))
}

fn criterion_9() -> Outcome {
    let mut rng = StdRng::seed_from_u64(9);
    let mut worst: f64 = 0.0;
    for _ in 0..200 {
        let c = rng.gen_range(0.0..=cbar());
        let a = params_a(c).unwrap();
        let (r1, r2) = a.identity_residuals();
        worst = worst
            .max(r1.abs())
            .max(r2.abs())
            .max(a.stripe_end_value().abs());
    }
    for k in 0..400 {
        let c = if k < 200 {
            rng.gen_range(0.0..=cbar())
        } else {
            rng.gen_range(cbar()..=3.0)
        };
        let p = params_b(c).unwrap().p;
        worst = worst
            .max((bundle_revenue(p, c) - brev(c).unwrap()).abs())
            .max(bundle_foc_residual(p, c).abs());
    }
    outcome(worst <= 1e-9, format!("max residual {worst:.3e}"))
}

fn criterion_10() -> Outcome {
    let mut worst: f64 = 0.0;
    for c in [0.0, 0.02, 0.05, 0.08, cbar()] {
        let r = primal_objective_routes(&build_primal(c, Regime::A).unwrap()).unwrap();
        worst = worst.max((r.direct - r.boundary).abs());
    }
    for c in [cbar(), 0.2, 0.5, 1.0, 2.0] {
        let r = primal_objective_routes(&build_primal(c, Regime::B).unwrap()).unwrap();
        worst = worst.max((r.direct - r.boundary).abs());
    }
    let mut rng = StdRng::seed_from_u64(10);
    for _ in 0..100 {
        let c = rng.gen_range(0.0..2.0);
        let k = rng.gen_range(1..=6);
        let pieces: Vec<Affine> = (0..k)
            .map(|_| {
                let (g1, g2) = (rng.gen_range(0.0..=1.0), rng.gen_range(0.0..=1.0));
                Affine::new(-rng.gen_range(0.0..=2.0 * c + 2.0), g1, g2)
            })
            .chain(std::iter::once(Affine::ZERO))
            .collect();
        let u = PiecewiseField::upper_envelope(c, &pieces).unwrap();
        let r = primal_objective_routes(&u).unwrap();
        worst = worst.max((r.direct - r.boundary).abs());
    }
    outcome(
        worst <= 1e-9,
        format!("max |direct - boundary| {worst:.3e}"),
    )
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("certificate optimality, regime A", criterion_1),
        ("certificate optimality, regime B", criterion_2),
        ("threshold sharpness", criterion_3),
        ("alternative dual", criterion_4),
        ("convexity gap", criterion_5),
        ("c = 0 deterministic endpoint", criterion_6),
        ("approximation ratio bounds", criterion_7),
        ("LP oracle convergence", criterion_8),
        ("identity suite", criterion_9),
        ("boundary-form equivalence", criterion_10),
    ];
    let mut failures = 0;
    for (k, (name, run)) in criteria.iter().enumerate() {
        let o = run();
        if !o.passed {
            failures += 1;
        }
        println!(
            "criterion {:>2} {} {name}: {}",
            k + 1,
            if o.passed { "PASS" } else { "FAIL" },
            o.detail
        );
    }
    println!(
        "acceptance: {} of {} criteria passed",
        criteria.len() - failures,
        criteria.len()
    );
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
