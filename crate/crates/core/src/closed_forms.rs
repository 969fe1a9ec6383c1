//! Scalar closed forms for the two solution regimes.
//!
//! Regime A covers `0 <= c <= cbar()`, where the relaxed optimum is attained
//! by a non-convex utility; regime B covers `c >= cbar()`, where full
//! bundling is optimal.

use std::f64::consts::SQRT_2;
use std::fmt;

use crate::error::{Error, Result};

/// Slack allowed when deciding regime membership at the threshold itself.
const REGIME_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Regime {
    A,
    B,
}

impl Regime {
    /// The regime whose certificate applies at `c`. At `c = cbar()` both do;
    /// A is returned.
    pub fn for_offset(c: f64) -> Regime {
        if c <= cbar() {
            Regime::A
        } else {
            Regime::B
        }
    }
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Regime::A => write!(f, "A"),
            Regime::B => write!(f, "B"),
        }
    }
}

/// Regime threshold `sqrt(15 - 8 sqrt 2) - 2 sqrt 2 + 1`.
pub fn cbar() -> f64 {
    (15.0 - 8.0 * SQRT_2).sqrt() - 2.0 * SQRT_2 + 1.0
}

fn check_finite(c: f64) -> Result<()> {
    if c.is_finite() {
        Ok(())
    } else {
        Err(Error::NonFinite("valuation offset c"))
    }
}

/// `sqrt(c (2 + 3c))`, factored so that it vanishes cleanly at `c = 0`.
fn root_term(c: f64) -> f64 {
    c.sqrt() * (2.0 + 3.0 * c).sqrt()
}

/// Breakpoints of the regime-A primal/dual pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegimeAParams {
    pub c: f64,
    pub q: f64,
    pub p: f64,
    pub h: f64,
    pub b: f64,
    pub r: f64,
    pub d: f64,
    /// `c + 1 - r`, the denominator of `phi`.
    pub phi_denominator: f64,
}

impl RegimeAParams {
    /// Evaluates the formulas without checking the regime. Used to probe the
    /// ordering chain just outside its validity range.
    pub fn evaluate(c: f64) -> RegimeAParams {
        let top = c + 1.0;
        let q = 2.0 * top / 3.0;
        let p = (4.0 - SQRT_2) / 3.0 * top;
        let s = root_term(c.max(0.0));
        let r = (2.0 + c + s) / 3.0;
        let d = (2.0 * c + s) / 3.0;
        RegimeAParams {
            c,
            q,
            p,
            h: p / 2.0,
            b: p - q,
            r,
            d,
            phi_denominator: top - r,
        }
    }

    /// `c <= d <= b <= q <= r <= c + 1`, each step allowed to fail by `tol`.
    pub fn chain_holds(&self, tol: f64) -> bool {
        let chain = [self.c, self.d, self.b, self.q, self.r, self.c + 1.0];
        chain.windows(2).all(|w| w[0] <= w[1] + tol)
    }

    /// Residuals of `r - q = d - c` and `p = q + b`.
    pub fn identity_residuals(&self) -> (f64, f64) {
        (
            (self.r - self.q) - (self.d - self.c),
            self.p - (self.q + self.b),
        )
    }

    /// `c + integral_c^d (3 - phi(t)) dt`, the value of the first dual at the
    /// end of the upper critical stripe. Zero throughout regime A.
    pub fn stripe_end_value(&self) -> f64 {
        let w = self.d - self.c;
        let top = self.c + 1.0;
        self.c + 3.0 * w - (top * w - 1.5 * w * w) / self.phi_denominator
    }
}

/// Regime-A parameters; errors outside `[0, cbar()]`.
pub fn params_a(c: f64) -> Result<RegimeAParams> {
    check_finite(c)?;
    if !(0.0..=cbar() + REGIME_SLACK).contains(&c) {
        return Err(Error::OutOfRegime {
            c,
            regime: Regime::A,
        });
    }
    Ok(RegimeAParams::evaluate(c))
}

/// Breakpoints of the full-bundling pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegimeBParams {
    pub c: f64,
    /// Optimal bundle price.
    pub p: f64,
    pub q: f64,
    pub h: f64,
}

impl RegimeBParams {
    /// False when `c < cbar()`: the parameters still evaluate, but the
    /// associated dual is not a certificate there.
    pub fn certified_range(&self) -> bool {
        self.c >= cbar() - REGIME_SLACK
    }
}

/// Regime-B parameters. Accepts any finite `c >= 0`; check
/// [`RegimeBParams::certified_range`] before treating the pair as optimal.
pub fn params_b(c: f64) -> Result<RegimeBParams> {
    check_finite(c)?;
    if c < 0.0 {
        return Err(Error::OutOfRegime {
            c,
            regime: Regime::B,
        });
    }
    let p = (4.0 * c + (4.0 * c * c + 6.0).sqrt()) / 3.0;
    Ok(RegimeBParams {
        c,
        p,
        q: p - c,
        h: p / 2.0,
    })
}

/// `phi(x) = (c + 1 - 3 (x - c)) / (c + 1 - r)`.
pub fn phi(x1: f64, params: &RegimeAParams) -> Result<f64> {
    if params.phi_denominator.abs() < 1e-300 {
        return Err(Error::DivisionByZero("c + 1 - r"));
    }
    let c = params.c;
    Ok((c + 1.0 - 3.0 * (x1 - c)) / params.phi_denominator)
}

/// Value of the relaxed (convexity-dropped) program in regime A.
pub fn opt_value(c: f64) -> Result<f64> {
    check_finite(c)?;
    if !(0.0..=cbar() + REGIME_SLACK).contains(&c) {
        return Err(Error::OutOfRegime {
            c,
            regime: Regime::A,
        });
    }
    let s = root_term(c);
    let c2 = c * c;
    let c3 = c2 * c;
    Ok(2.0 / 27.0
        * ((SQRT_2 - 4.0) * c3
            + 3.0 * (s + SQRT_2 + 1.0) * c2
            + (2.0 * s + 3.0 * SQRT_2 + 12.0) * c
            + SQRT_2
            + 6.0))
}

/// Best full-bundling revenue.
pub fn brev(c: f64) -> Result<f64> {
    check_finite(c)?;
    if c < 0.0 {
        return Err(Error::InvalidArgument(format!(
            "brev needs c >= 0, got {c}"
        )));
    }
    let t = 2.0 * c * c + 3.0;
    Ok(2.0 / 27.0 * (-4.0 * c * c * c + SQRT_2 * (t * t * t).sqrt() + 18.0 * c))
}

/// Relaxed optimum for any `c >= 0`: `opt_value` in regime A, `brev` beyond.
pub fn relaxed_optimum(c: f64) -> Result<f64> {
    match Regime::for_offset(c) {
        Regime::A => opt_value(c),
        Regime::B => brev(c),
    }
}

/// Probability that `x1 + x2 >= s` for `x` uniform on `[c, c+1]^2`.
pub fn bundle_acceptance(s: f64, c: f64) -> f64 {
    let t = s - 2.0 * c;
    if t <= 0.0 {
        1.0
    } else if t <= 1.0 {
        1.0 - t * t / 2.0
    } else if t <= 2.0 {
        (2.0 - t) * (2.0 - t) / 2.0
    } else {
        0.0
    }
}

/// Expected revenue of a take-it-or-leave-it bundle price `s`.
pub fn bundle_revenue(s: f64, c: f64) -> f64 {
    s * bundle_acceptance(s, c)
}

/// Left side of the cubic first-order condition for the bundle price.
pub fn bundle_foc_residual(s: f64, c: f64) -> f64 {
    let t = 2.0 * c * c + 3.0;
    27.0 * s * s * s - 108.0 * s * s * c + s * (108.0 * c * c - 54.0) - 16.0 * c * c * c
        + 4.0 * SQRT_2 * (t * t * t).sqrt()
        + 72.0 * c
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Brute-force maximisation of the bundle revenue on a fine grid.
    fn grid_argmax_bundle(c: f64) -> (f64, f64) {
        let steps = 400_000;
        let mut best = (0.0, f64::NEG_INFINITY);
        for k in 0..=steps {
            let s = 2.0 * c + k as f64 / steps as f64;
            let rev = s * (1.0 - (s - 2.0 * c).powi(2) / 2.0);
            if rev > best.1 {
                best = (s, rev);
            }
        }
        best
    }

    #[test]
    fn threshold_value() {
        assert!((cbar() - 0.091_544_620_1).abs() < 1e-9);
        let a = RegimeAParams::evaluate(cbar());
        assert!((a.d - a.b).abs() < 1e-9);
        assert!(a.chain_holds(1e-12));
    }

    #[test]
    fn bundle_price_continuous_at_threshold() {
        let a = RegimeAParams::evaluate(cbar());
        let b = params_b(cbar()).unwrap();
        assert!((a.p - b.p).abs() < 1e-9);
        // The limiting breakpoint coincides with the regime-B stripe start.
        assert!((a.r - b.q).abs() < 1e-9);
        assert!((a.p - (a.r + a.c)).abs() < 1e-9);
    }

    #[test]
    fn chain_breaks_above_threshold() {
        let a = RegimeAParams::evaluate(cbar() + 1e-3);
        assert!(a.d > a.b);
        assert!(!a.chain_holds(0.0));
        assert!(matches!(
            params_a(cbar() + 1e-3),
            Err(Error::OutOfRegime { .. })
        ));
        assert!(params_a(-0.01).is_err());
    }

    #[test]
    fn params_a_at_zero() {
        let a = params_a(0.0).unwrap();
        assert!((a.q - 2.0 / 3.0).abs() < 1e-15);
        assert!((a.p - 0.861929).abs() < 1e-6);
        assert!((a.r - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(a.d, 0.0);
    }

    #[test]
    fn params_a_at_005() {
        let a = params_a(0.05).unwrap();
        assert!((a.q - 0.7).abs() < 1e-12);
        assert!((a.p - 0.905026).abs() < 1e-6);
        assert!((a.b - 0.205026).abs() < 1e-6);
        assert!((a.r - 0.792624).abs() < 1e-6);
        assert!((a.d - 0.142624).abs() < 1e-6);
        let (e1, e2) = a.identity_residuals();
        assert!(e1.abs() < 1e-12 && e2.abs() < 1e-12);
    }

    #[test]
    fn params_b_examples() {
        let b = params_b(0.5).unwrap();
        assert!((b.p - 1.548584).abs() < 1e-6);
        assert!((b.q - 1.048584).abs() < 1e-6);
        assert!((b.h - 0.774292).abs() < 1e-6);
        let b0 = params_b(0.0).unwrap();
        assert!((b0.p - 6f64.sqrt() / 3.0).abs() < 1e-15);
        let (s, _) = grid_argmax_bundle(0.0);
        assert!((b0.p - s).abs() < 1e-5);
        assert!(!b0.certified_range());
        let b1 = params_b(1.0).unwrap();
        assert!((b1.p - (4.0 + 10f64.sqrt()) / 3.0).abs() < 1e-12);
        assert!(bundle_foc_residual(b1.p, 1.0).abs() < 1e-9);
    }

    #[test]
    fn phi_values() {
        let a = params_a(0.0).unwrap();
        assert!((phi(0.0, &a).unwrap() - 3.0).abs() < 1e-12);
        let a = params_a(0.05).unwrap();
        assert!((phi(a.d, &a).unwrap() - 3.0).abs() < 1e-12);
        assert!(a.stripe_end_value().abs() < 1e-9);
    }

    #[test]
    fn stripe_identity_matches_simpson_quadrature() {
        let a = params_a(0.05).unwrap();
        let n = 1000;
        let w = (a.d - a.c) / n as f64;
        let f = |t: f64| 3.0 - phi(t, &a).unwrap();
        let mut acc = f(a.c) + f(a.d);
        for k in 1..n {
            let t = a.c + k as f64 * w;
            acc += if k % 2 == 1 { 4.0 } else { 2.0 } * f(t);
        }
        let integral = acc * w / 3.0;
        assert!((a.c + integral).abs() < 1e-12);
        assert!((a.stripe_end_value() - (a.c + integral)).abs() < 1e-12);
    }

    #[test]
    fn opt_values() {
        // (2/27)(sqrt 2 + 6) by direct evaluation.
        assert!((opt_value(0.0).unwrap() - 0.549201005).abs() < 1e-9);
        assert!((opt_value(0.05).unwrap() - 0.613287).abs() < 1e-6);
        assert!((opt_value(cbar()).unwrap() - brev(cbar()).unwrap()).abs() < 1e-9);
        assert!(opt_value(0.2).is_err());
    }

    #[test]
    fn brev_values() {
        let (_, best) = grid_argmax_bundle(0.0);
        assert!((brev(0.0).unwrap() - 2.0 * 6f64.sqrt() / 9.0).abs() < 1e-15);
        assert!((brev(0.0).unwrap() - best).abs() < 1e-9);
        let p = params_b(0.05).unwrap().p;
        assert!((brev(0.05).unwrap() - bundle_revenue(p, 0.05)).abs() < 1e-12);
        assert!((brev(0.05).unwrap() - 0.612322078).abs() < 1e-9);
        let (_, best) = grid_argmax_bundle(1.0);
        assert!((brev(1.0).unwrap() - best).abs() < 1e-9);
    }

    #[test]
    fn gap_strict_on_upper_part_of_regime_a() {
        let lo = 0.078;
        let hi = cbar() - 1e-4;
        for k in 0..=200 {
            let c = lo + (hi - lo) * k as f64 / 200.0;
            assert!(brev(c).unwrap() < opt_value(c).unwrap(), "c = {c}");
        }
    }

    #[test]
    fn derivative_self_consistency() {
        // Central differences at two step sizes agree; smoke test of smoothness.
        for &c in &[0.01, 0.04, 0.08] {
            for f in [opt_value as fn(f64) -> Result<f64>, brev] {
                let d1 = (f(c + 1e-6).unwrap() - f(c - 1e-6).unwrap()) / 2e-6;
                let d2 = (f(c + 1e-4).unwrap() - f(c - 1e-4).unwrap()) / 2e-4;
                assert!((d1 - d2).abs() <= 1e-4 * d2.abs());
            }
        }
    }

    #[test]
    fn regime_selection() {
        assert_eq!(Regime::for_offset(0.0), Regime::A);
        assert_eq!(Regime::for_offset(cbar()), Regime::A);
        assert_eq!(Regime::for_offset(0.5), Regime::B);
        assert_eq!(relaxed_optimum(0.5).unwrap(), brev(0.5).unwrap());
    }

    mod props {
        use super::super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn identities_on_regime_a(c in 0.0..=0.0915342f64) {
                let a = params_a(c).unwrap();
                let (e1, e2) = a.identity_residuals();
                prop_assert!(e1.abs() < 1e-12 && e2.abs() < 1e-12);
                prop_assert!(a.chain_holds(1e-12));
                prop_assert!(a.stripe_end_value().abs() < 1e-9);
            }

            #[test]
            fn brev_routes_agree(c in 0.0..3.0f64) {
                let p = params_b(c).unwrap().p;
                prop_assert!((brev(c).unwrap() - bundle_revenue(p, c)).abs() < 1e-12);
                prop_assert!(bundle_foc_residual(p, c).abs() <= 1e-9 * (1.0 + c * c * c));
            }
        }
    }
}
