//! Primal utility and dual certificate fields for both regimes.

use std::fmt;

use crate::closed_forms::{self, Regime, RegimeAParams, RegimeBParams};
use crate::error::{Error, Result};
use crate::fields::{
    Affine, Anchor, Axis, GradientSpec, HalfPlane as H, PiecewiseField, Point, Region, Square,
};
use crate::mechanisms::{Menu, MenuOption};

/// Regions thinner than this (by area) are dropped at construction.
const DEGENERATE_AREA: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DualVariant {
    Standard,
    Alternative,
}

impl fmt::Display for DualVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DualVariant::Standard => write!(f, "standard"),
            DualVariant::Alternative => write!(f, "alternative"),
        }
    }
}

/// A primal utility together with a candidate dual certificate.
#[derive(Debug, Clone, PartialEq)]
pub struct SolutionPair {
    pub u: PiecewiseField,
    pub z1: PiecewiseField,
    pub z2: PiecewiseField,
    pub regime: Regime,
    pub variant: DualVariant,
    pub c: f64,
}

impl SolutionPair {
    /// The pair for `regime` at `c`; errors when `c` is outside the regime's
    /// certified range.
    pub fn new(c: f64, regime: Regime, variant: DualVariant) -> Result<SolutionPair> {
        let u = build_primal(c, regime)?;
        let (z1, z2) = build_dual(c, regime, variant)?;
        Ok(SolutionPair {
            u,
            z1,
            z2,
            regime,
            variant,
            c,
        })
    }

    /// Same construction with the range check skipped. The result is only a
    /// candidate and is expected to fail verification outside the range.
    pub fn forced(c: f64, regime: Regime, variant: DualVariant) -> Result<SolutionPair> {
        check_c(c)?;
        let u = primal_unchecked(c, regime)?;
        let (z1, z2) = dual_unchecked(c, regime, variant)?;
        Ok(SolutionPair {
            u,
            z1,
            z2,
            regime,
            variant,
            c,
        })
    }

    /// The certified pair for whichever regime contains `c`.
    pub fn for_offset(c: f64, variant: DualVariant) -> Result<SolutionPair> {
        SolutionPair::new(c, Regime::for_offset(c), variant)
    }
}

fn check_c(c: f64) -> Result<()> {
    if !c.is_finite() {
        return Err(Error::NonFinite("valuation offset c"));
    }
    if c < 0.0 {
        return Err(Error::InvalidArgument(format!(
            "c must be nonnegative, got {c}"
        )));
    }
    Ok(())
}

fn check_regime(c: f64, regime: Regime) -> Result<()> {
    check_c(c)?;
    let ok = match regime {
        Regime::A => closed_forms::params_a(c).is_ok(),
        Regime::B => params_b_checked(c).is_ok(),
    };
    if ok {
        Ok(())
    } else {
        Err(Error::OutOfRegime { c, regime })
    }
}

fn params_b_checked(c: f64) -> Result<RegimeBParams> {
    let b = closed_forms::params_b(c)?;
    if !b.certified_range() {
        return Err(Error::OutOfRegime {
            c,
            regime: Regime::B,
        });
    }
    Ok(b)
}

/// Primal utility of the regime. Regime B is the full-bundle utility
/// `max{0, x1 + x2 - p}`.
pub fn build_primal(c: f64, regime: Regime) -> Result<PiecewiseField> {
    check_regime(c, regime)?;
    primal_unchecked(c, regime)
}

/// The dual pair `(z1, z2)` with `z2` the mirror image of `z1`.
pub fn build_dual(
    c: f64,
    regime: Regime,
    variant: DualVariant,
) -> Result<(PiecewiseField, PiecewiseField)> {
    check_regime(c, regime)?;
    dual_unchecked(c, regime, variant)
}

fn primal_unchecked(c: f64, regime: Regime) -> Result<PiecewiseField> {
    let pieces = match regime {
        Regime::A => primal_pieces_a(&RegimeAParams::evaluate(c)),
        Regime::B => primal_pieces_b(&closed_forms::params_b(c)?),
    };
    let square = Square::new(c);
    let pieces = pieces
        .into_iter()
        .filter(|(r, _)| r.area(&square) > DEGENERATE_AREA)
        .collect();
    PiecewiseField::from_affine_pieces(c, pieces)
}

fn dual_unchecked(
    c: f64,
    regime: Regime,
    variant: DualVariant,
) -> Result<(PiecewiseField, PiecewiseField)> {
    let (specs, split) = match (regime, variant) {
        (Regime::A, v) => {
            let a = RegimeAParams::evaluate(c);
            (dual_specs_a(&a, v), a.r)
        }
        (Regime::B, DualVariant::Standard) => {
            let b = closed_forms::params_b(c)?;
            (dual_specs_b(&b), b.q)
        }
        (Regime::B, DualVariant::Alternative) => {
            return Err(Error::InvalidArgument(
                "the alternative dual exists only in regime A".into(),
            ))
        }
    };
    let square = Square::new(c);
    let specs = specs
        .into_iter()
        .filter(|s| s.region.area(&square) > DEGENERATE_AREA)
        .collect();
    let top = c + 1.0;
    let anchors = vec![
        Anchor::constant(c, split, 0.0),
        Anchor::constant(split, top, c),
    ];
    let z1 = PiecewiseField::new(c, Axis::X1, specs, anchors)?;
    let z2 = z1.transposed();
    Ok((z1, z2))
}

fn region(label: &str, hs: Vec<H>) -> Region {
    Region::new(label, hs)
}

fn primal_pieces_b(b: &RegimeBParams) -> Vec<(Region, Affine)> {
    vec![
        (region("white", vec![H::sum_le(b.p)]), Affine::ZERO),
        (
            region("bundle", vec![H::sum_ge(b.p)]),
            Affine::new(-b.p, 1.0, 1.0),
        ),
    ]
}

fn primal_pieces_a(a: &RegimeAParams) -> Vec<(Region, Affine)> {
    let (c, d, b, q, p, r) = (a.c, a.d, a.b, a.q, a.p, a.r);
    let edge = r + c;
    vec![
        (
            region("white-left", vec![H::x1_le(d), H::sum_le(edge)]),
            Affine::ZERO,
        ),
        (
            region(
                "white-bottom",
                vec![H::x2_le(d), H::x1_ge(d), H::sum_le(edge)],
            ),
            Affine::ZERO,
        ),
        (
            region(
                "white-mid",
                vec![
                    H::x1_ge(d),
                    H::x2_ge(d),
                    H::x1_le(q),
                    H::x2_le(q),
                    H::sum_le(p),
                ],
            ),
            Affine::ZERO,
        ),
        (
            region("left-band", vec![H::x1_le(d), H::sum_ge(edge)]),
            Affine::new(-edge, 1.0, 1.0),
        ),
        (
            region("bottom-band", vec![H::x2_le(d), H::sum_ge(edge)]),
            Affine::new(-edge, 1.0, 1.0),
        ),
        (
            region("item-2", vec![H::x1_ge(d), H::x1_le(b), H::x2_ge(q)]),
            Affine::new(-q, 0.0, 1.0),
        ),
        (
            region("item-1", vec![H::x2_ge(d), H::x2_le(b), H::x1_ge(q)]),
            Affine::new(-q, 1.0, 0.0),
        ),
        (
            region("bundle", vec![H::x1_ge(b), H::x2_ge(b), H::sum_ge(p)]),
            Affine::new(-p, 1.0, 1.0),
        ),
    ]
}

fn g(label: &str, hs: Vec<H>, value: Affine) -> GradientSpec {
    GradientSpec::along_x1(region(label, hs), value)
}

fn k(v: f64) -> Affine {
    Affine::constant(v)
}

/// `∂z1/∂x1` on the regime-A regions. Both variants share everything left of
/// `x1 = b` and below `x2 = b`.
fn dual_specs_a(a: &RegimeAParams, variant: DualVariant) -> Vec<GradientSpec> {
    let (c, d, b, q, p, r, h) = (a.c, a.d, a.b, a.q, a.p, a.r, a.h);
    let top = c + 1.0;
    let edge = r + c;
    let m = a.phi_denominator;
    // phi(x) = (top + 3c)/m - 3x/m
    let phi_x1 = Affine::new((top + 3.0 * c) / m, -3.0 / m, 0.0);
    let phi_x2 = Affine::new((top + 3.0 * c) / m, 0.0, -3.0 / m);
    let mut specs = vec![
        g("white-left", vec![H::x1_le(d), H::sum_le(edge)], k(0.0)),
        g(
            "white-bottom",
            vec![H::x2_le(d), H::x1_ge(d), H::sum_le(edge)],
            k(0.0),
        ),
        g(
            "white-mid",
            vec![
                H::x1_ge(d),
                H::x2_ge(d),
                H::x1_le(q),
                H::x2_le(q),
                H::sum_le(p),
            ],
            k(0.0),
        ),
        g(
            "left-low",
            vec![H::x1_le(d), H::x2_le(r), H::sum_ge(edge)],
            k(0.0),
        ),
        g(
            "left-top",
            vec![H::x1_le(d), H::x2_ge(r)],
            phi_x1.scaled(-1.0).shifted(3.0),
        ),
        g(
            "bottom-low",
            vec![H::x2_le(d), H::x1_le(r), H::sum_ge(edge)],
            k(3.0),
        ),
        g("bottom-right", vec![H::x2_le(d), H::x1_ge(r)], phi_x2),
        g(
            "item-2",
            vec![H::x1_ge(d), H::x1_le(b), H::x2_ge(q)],
            k(0.0),
        ),
        g(
            "item-1",
            vec![H::x2_ge(d), H::x2_le(b), H::x1_ge(q)],
            k(3.0),
        ),
    ];
    match variant {
        DualVariant::Standard => {
            let slope = 4.5 / top;
            specs.extend([
                g(
                    "ramp-top",
                    vec![H::x1_ge(b), H::x1_le(q), H::x2_ge(q)],
                    Affine::new(-slope * b, slope, 0.0),
                ),
                g(
                    "ramp-right",
                    vec![H::x2_ge(b), H::x2_le(q), H::x1_ge(q)],
                    Affine::new(3.0 + slope * b, 0.0, -slope),
                ),
                g("corner", vec![H::x1_ge(q), H::x2_ge(q)], k(1.5)),
                g(
                    "triangle",
                    vec![
                        H::x1_ge(b),
                        H::x2_ge(b),
                        H::x1_le(q),
                        H::x2_le(q),
                        H::sum_ge(p),
                    ],
                    k(1.5),
                ),
            ]);
        }
        DualVariant::Alternative => {
            specs.extend(split_bundle_specs(b, h, q, p, top, 9.0 / top));
        }
    }
    specs
}

/// The bundle area cut at `h` into a left column, bottom row, centre box,
/// side boxes and corner; shared by the regime-B dual and the alternative
/// regime-A dual. `lo` is the left/bottom edge of the area.
fn split_bundle_specs(lo: f64, h: f64, q: f64, p: f64, top: f64, slope: f64) -> Vec<GradientSpec> {
    let m = top / 3.0;
    let delta = (1.5 * (top - h) - top) / m;
    vec![
        g(
            "top-ramp",
            vec![H::x1_ge(lo), H::x1_le(h), H::x2_ge(q)],
            Affine::new(-slope * lo, slope, 0.0),
        ),
        g(
            "left-mid",
            vec![
                H::x1_ge(lo),
                H::x1_le(h),
                H::x2_ge(h),
                H::x2_le(q),
                H::sum_ge(p),
            ],
            k(0.0),
        ),
        g(
            "bottom-mid",
            vec![
                H::x2_ge(lo),
                H::x2_le(h),
                H::x1_ge(h),
                H::x1_le(q),
                H::sum_ge(p),
            ],
            k(3.0),
        ),
        g(
            "right-ramp",
            vec![H::x2_ge(lo), H::x2_le(h), H::x1_ge(q)],
            Affine::new(3.0 + slope * lo, 0.0, -slope),
        ),
        g(
            "centre",
            vec![H::x1_ge(h), H::x1_le(q), H::x2_ge(h), H::x2_le(q)],
            k(1.5),
        ),
        g("corner", vec![H::x1_ge(q), H::x2_ge(q)], k(1.5)),
        g(
            "top-box",
            vec![H::x1_ge(h), H::x1_le(q), H::x2_ge(q)],
            k(1.5 + delta),
        ),
        g(
            "right-box",
            vec![H::x1_ge(q), H::x2_ge(h), H::x2_le(q)],
            k(1.5 - delta),
        ),
    ]
}

fn dual_specs_b(bp: &RegimeBParams) -> Vec<GradientSpec> {
    let (c, p, q, h) = (bp.c, bp.p, bp.q, bp.h);
    let top = c + 1.0;
    let m = top - q;
    let delta = (1.5 * (top - h) - top) / m;
    // f(x) = 3 - (top - 3(x - c))/m on the left column.
    let f = Affine::new(3.0 - (top + 3.0 * c) / m, 3.0 / m, 0.0);
    vec![
        g("white", vec![H::sum_le(p)], k(0.0)),
        g("top-ramp", vec![H::x1_le(h), H::x2_ge(q)], f),
        g(
            "left-mid",
            vec![H::x1_le(h), H::x2_ge(h), H::x2_le(q), H::sum_ge(p)],
            k(0.0),
        ),
        g(
            "bottom-mid",
            vec![H::x2_le(h), H::x1_ge(h), H::x1_le(q), H::sum_ge(p)],
            k(3.0),
        ),
        g(
            "right-ramp",
            vec![H::x2_le(h), H::x1_ge(q)],
            Affine::new((top + 3.0 * c) / m, 0.0, -3.0 / m),
        ),
        g(
            "centre",
            vec![H::x1_ge(h), H::x1_le(q), H::x2_ge(h), H::x2_le(q)],
            k(1.5),
        ),
        g("corner", vec![H::x1_ge(q), H::x2_ge(q)], k(1.5)),
        g(
            "top-box",
            vec![H::x1_ge(h), H::x1_le(q), H::x2_ge(q)],
            k(1.5 + delta),
        ),
        g(
            "right-box",
            vec![H::x1_ge(q), H::x2_ge(h), H::x2_le(q)],
            k(1.5 - delta),
        ),
    ]
}

/// Result of reading a menu off a utility.
#[derive(Debug, Clone, PartialEq)]
pub enum MenuExtraction {
    /// `u` is the upper envelope of its pieces' affine extensions.
    Convex(Menu),
    /// `u(at)` falls short of the extension of region `region` by `excess`.
    NonConvex {
        at: Point,
        region: String,
        excess: f64,
    },
}

impl MenuExtraction {
    pub fn menu(&self) -> Option<&Menu> {
        match self {
            MenuExtraction::Convex(m) => Some(m),
            MenuExtraction::NonConvex { .. } => None,
        }
    }
}

/// Reads the (allocation, payment) pairs off a constant-gradient utility
/// and checks it against their upper envelope on a dense grid.
pub fn extract_menu(u: &PiecewiseField) -> Result<MenuExtraction> {
    let square = u.square();
    let mut options: Vec<(MenuOption, String)> = Vec::new();
    for spec in u.specs() {
        let (g1, g2) = match (spec.g1, spec.g2) {
            (Some(a), Some(b)) if a.is_constant() && b.is_constant() => (a.alpha, b.alpha),
            _ => return Err(Error::NonConstantGradient(spec.region.label.clone())),
        };
        let Some(at) = spec.region.centroid(&square) else {
            continue;
        };
        let t = g1 * at.x1 + g2 * at.x2 - u.value(at)?;
        options.push((MenuOption::new(g1, g2, t), spec.region.label.clone()));
    }

    const N: usize = 200;
    let (lo, step) = (square.lo(), 1.0 / N as f64);
    let mut worst: Option<(f64, Point, usize)> = None;
    for i in 0..=N {
        for j in 0..=N {
            let x = Point::new(lo + i as f64 * step, lo + j as f64 * step);
            let v = u.value(x)?;
            for (k, (o, _)) in options.iter().enumerate() {
                let excess = o.utility(x) - v;
                if excess > 1e-9 && worst.is_none_or(|w| excess > w.0) {
                    worst = Some((excess, x, k));
                }
            }
        }
    }
    Ok(match worst {
        Some((excess, at, k)) => MenuExtraction::NonConvex {
            at,
            region: options[k].1.clone(),
            excess,
        },
        None => MenuExtraction::Convex(Menu::new(options.into_iter().map(|(o, _)| o).collect())),
    })
}
