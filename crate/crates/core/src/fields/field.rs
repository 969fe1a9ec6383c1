//! Scalar fields given by per-region affine gradients plus anchor values on
//! one edge of the square.
//!
//! The value at `x` is the anchor value at the projection of `x` onto the
//! anchor edge plus the exact line integral of the gradient component along
//! the integration axis. Integrands are affine per region, so every segment
//! integral is a closed-form quadratic.

use crate::error::{Error, Result};
use crate::fields::geometry::{HalfPlane, Point, Region, Square};

/// Row segments shorter than this are ignored.
const SEG_EPS: f64 = 1e-14;
/// Uncovered stretches of a row up to this length are attributed to rounding.
const GAP_TOL: f64 = 1e-10;
/// Tolerance used to decide which regions contain a point.
const CONTAIN_TOL: f64 = 1e-12;

/// `alpha + beta1 x1 + beta2 x2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Affine {
    pub alpha: f64,
    pub beta1: f64,
    pub beta2: f64,
}

impl Affine {
    pub const ZERO: Affine = Affine::constant(0.0);

    pub const fn new(alpha: f64, beta1: f64, beta2: f64) -> Affine {
        Affine {
            alpha,
            beta1,
            beta2,
        }
    }

    pub const fn constant(alpha: f64) -> Affine {
        Affine::new(alpha, 0.0, 0.0)
    }

    pub fn eval(&self, p: Point) -> f64 {
        self.alpha + self.beta1 * p.x1 + self.beta2 * p.x2
    }

    pub fn is_constant(&self) -> bool {
        self.beta1 == 0.0 && self.beta2 == 0.0
    }

    pub fn transposed(&self) -> Affine {
        Affine::new(self.alpha, self.beta2, self.beta1)
    }

    pub fn scaled(&self, k: f64) -> Affine {
        Affine::new(k * self.alpha, k * self.beta1, k * self.beta2)
    }

    pub fn shifted(&self, k: f64) -> Affine {
        Affine::new(self.alpha + k, self.beta1, self.beta2)
    }

    pub fn is_finite(&self) -> bool {
        self.alpha.is_finite() && self.beta1.is_finite() && self.beta2.is_finite()
    }
}

/// Axis along which a field is absolutely continuous.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    X1,
    X2,
}

impl Axis {
    pub fn other(self) -> Axis {
        match self {
            Axis::X1 => Axis::X2,
            Axis::X2 => Axis::X1,
        }
    }
}

/// Gradient of a field on one region. A dual variable is only absolutely
/// continuous along its own axis, so the other component may be unknown.
#[derive(Debug, Clone, PartialEq)]
pub struct GradientSpec {
    pub region: Region,
    pub g1: Option<Affine>,
    pub g2: Option<Affine>,
}

impl GradientSpec {
    pub fn new(region: Region, g1: Option<Affine>, g2: Option<Affine>) -> GradientSpec {
        GradientSpec { region, g1, g2 }
    }

    /// Constant gradient `(g1, g2)`.
    pub fn constant(region: Region, g1: f64, g2: f64) -> GradientSpec {
        GradientSpec::new(
            region,
            Some(Affine::constant(g1)),
            Some(Affine::constant(g2)),
        )
    }

    /// Only the `x1` component is specified.
    pub fn along_x1(region: Region, g1: Affine) -> GradientSpec {
        GradientSpec::new(region, Some(g1), None)
    }

    pub fn component(&self, axis: Axis) -> Option<Affine> {
        match axis {
            Axis::X1 => self.g1,
            Axis::X2 => self.g2,
        }
    }

    pub fn transposed(&self) -> GradientSpec {
        GradientSpec {
            region: self.region.transposed(),
            g1: self.g2.map(|a| a.transposed()),
            g2: self.g1.map(|a| a.transposed()),
        }
    }
}

/// Anchor value `alpha + slope * t` on the stretch `from <= t <= to` of the
/// anchor edge, where `t` is the transverse coordinate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Anchor {
    pub from: f64,
    pub to: f64,
    pub alpha: f64,
    pub slope: f64,
}

impl Anchor {
    pub fn constant(from: f64, to: f64, value: f64) -> Anchor {
        Anchor {
            from,
            to,
            alpha: value,
            slope: 0.0,
        }
    }

    pub fn value(&self, t: f64) -> f64 {
        self.alpha + self.slope * t
    }
}

/// Value and (where defined) gradient of a field at a point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldSample {
    pub value: f64,
    pub g1: Option<f64>,
    pub g2: Option<f64>,
}

impl FieldSample {
    pub fn along(&self, axis: Axis) -> Option<f64> {
        match axis {
            Axis::X1 => self.g1,
            Axis::X2 => self.g2,
        }
    }
}

/// One piece of the value profile along a line parallel to the integration
/// axis: `v(t) = start + a (t - lo) + b (t^2 - lo^2) / 2` on `[lo, hi]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProfilePiece {
    pub lo: f64,
    pub hi: f64,
    pub start: f64,
    pub a: f64,
    pub b: f64,
    pub spec: usize,
}

impl ProfilePiece {
    pub fn value_at(&self, t: f64) -> f64 {
        self.start + self.a * (t - self.lo) + 0.5 * self.b * (t * t - self.lo * self.lo)
    }

    pub fn end_value(&self) -> f64 {
        self.value_at(self.hi)
    }

    /// Exact minimum on the piece and where it is attained.
    pub fn minimum(&self) -> (f64, f64) {
        let mut best = (self.start, self.lo);
        let end = self.end_value();
        if end < best.0 {
            best = (end, self.hi);
        }
        if self.b != 0.0 {
            let t = -self.a / self.b;
            if t > self.lo && t < self.hi {
                let v = self.value_at(t);
                if v < best.0 {
                    best = (v, t);
                }
            }
        }
        best
    }
}

/// A scalar field on `[c, c+1]^2`. Immutable once built.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseField {
    c: f64,
    axis: Axis,
    specs: Vec<GradientSpec>,
    anchors: Vec<Anchor>,
    /// Regions in (along, transverse) coordinates.
    local: Vec<Region>,
}

fn local_regions(axis: Axis, specs: &[GradientSpec]) -> Vec<Region> {
    specs
        .iter()
        .map(|s| match axis {
            Axis::X1 => s.region.clone(),
            Axis::X2 => s.region.transposed(),
        })
        .collect()
}

impl PiecewiseField {
    /// `specs` and `anchors` are given in the field's own coordinates; the
    /// anchor edge is `x_axis = c` and anchors are parameterised by the other
    /// coordinate. Every spec must carry the component along `axis`.
    pub fn new(
        c: f64,
        axis: Axis,
        specs: Vec<GradientSpec>,
        mut anchors: Vec<Anchor>,
    ) -> Result<PiecewiseField> {
        if !c.is_finite() {
            return Err(Error::NonFinite("field offset"));
        }
        for s in &specs {
            match s.component(axis) {
                Some(a) if a.is_finite() => {}
                Some(_) => return Err(Error::NonFinite("gradient coefficient")),
                None => {
                    return Err(Error::InvalidArgument(format!(
                        "region `{}` lacks the integration-axis gradient",
                        s.region.label
                    )))
                }
            }
        }
        anchors.sort_by(|a, b| a.from.total_cmp(&b.from));
        let local = local_regions(axis, &specs);
        Ok(PiecewiseField {
            c,
            axis,
            specs,
            anchors,
            local,
        })
    }

    /// Builds an `x1`-axis field from regions on which the value is affine.
    /// Gradients are the constant slopes of each piece and the anchors are
    /// read off the pieces touching `x1 = c`.
    pub fn from_affine_pieces(c: f64, pieces: Vec<(Region, Affine)>) -> Result<PiecewiseField> {
        let square = Square::new(c);
        let mut anchors = Vec::new();
        let mut specs = Vec::with_capacity(pieces.len());
        for (region, value) in pieces {
            let poly = region.polygon(&square);
            let on_edge: Vec<f64> = poly
                .iter()
                .filter(|p| (p.x1 - c).abs() <= 1e-12)
                .map(|p| p.x2)
                .collect();
            if on_edge.len() >= 2 {
                let lo = on_edge.iter().cloned().fold(f64::INFINITY, f64::min);
                let hi = on_edge.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                if hi - lo > 1e-12 {
                    anchors.push(Anchor {
                        from: lo,
                        to: hi,
                        alpha: value.alpha + value.beta1 * c,
                        slope: value.beta2,
                    });
                }
            }
            specs.push(GradientSpec::constant(region, value.beta1, value.beta2));
        }
        PiecewiseField::new(c, Axis::X1, specs, anchors)
    }

    /// The convex field `max_i f_i` of distinct affine functions.
    pub fn upper_envelope(c: f64, affines: &[Affine]) -> Result<PiecewiseField> {
        let mut distinct: Vec<Affine> = Vec::with_capacity(affines.len());
        for a in affines {
            if !a.is_finite() {
                return Err(Error::NonFinite("envelope coefficient"));
            }
            if !distinct.contains(a) {
                distinct.push(*a);
            }
        }
        let square = Square::new(c);
        let pieces = distinct
            .iter()
            .enumerate()
            .map(|(i, fi)| {
                let hs = distinct
                    .iter()
                    .enumerate()
                    .filter(|&(j, _)| j != i)
                    .map(|(_, fj)| {
                        HalfPlane::le(
                            fj.beta1 - fi.beta1,
                            fj.beta2 - fi.beta2,
                            fi.alpha - fj.alpha,
                        )
                    })
                    .collect();
                (Region::new(format!("piece-{i}"), hs), *fi)
            })
            .filter(|(r, _)| r.area(&square) > 1e-14)
            .collect();
        PiecewiseField::from_affine_pieces(c, pieces)
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn axis(&self) -> Axis {
        self.axis
    }

    pub fn specs(&self) -> &[GradientSpec] {
        &self.specs
    }

    pub fn anchors(&self) -> &[Anchor] {
        &self.anchors
    }

    pub fn square(&self) -> Square {
        Square::new(self.c)
    }

    /// Mirror image `f^T(x1, x2) = f(x2, x1)`, integrated along the other axis.
    pub fn transposed(&self) -> PiecewiseField {
        let axis = self.axis.other();
        let specs: Vec<GradientSpec> = self.specs.iter().map(GradientSpec::transposed).collect();
        PiecewiseField {
            c: self.c,
            axis,
            local: local_regions(axis, &specs),
            specs,
            anchors: self.anchors.clone(),
        }
    }

    /// Copy with one region's gradient replaced; used to corrupt fields in
    /// tests and diagnostics.
    pub fn with_spec(&self, index: usize, spec: GradientSpec) -> Result<PiecewiseField> {
        let mut specs = self.specs.clone();
        specs[index] = spec;
        PiecewiseField::new(self.c, self.axis, specs, self.anchors.clone())
    }

    /// Every boundary line a value or gradient may jump across: region edges
    /// plus the lines through anchor breakpoints.
    pub fn break_lines(&self) -> Vec<HalfPlane> {
        let mut lines: Vec<HalfPlane> = self
            .specs
            .iter()
            .flat_map(|s| s.region.half_planes.iter().copied())
            .collect();
        for a in &self.anchors {
            for t in [a.from, a.to] {
                lines.push(match self.axis {
                    Axis::X1 => HalfPlane::x2_le(t),
                    Axis::X2 => HalfPlane::x1_le(t),
                });
            }
        }
        lines
    }

    /// Split `x` into (along, transverse) coordinates.
    fn local(&self, x: Point) -> (f64, f64) {
        match self.axis {
            Axis::X1 => (x.x1, x.x2),
            Axis::X2 => (x.x2, x.x1),
        }
    }

    fn global(&self, along: f64, transverse: f64) -> Point {
        match self.axis {
            Axis::X1 => Point::new(along, transverse),
            Axis::X2 => Point::new(transverse, along),
        }
    }

    fn anchor_value(&self, t: f64) -> f64 {
        self.anchors
            .iter()
            .find(|a| t >= a.from - 1e-12 && t <= a.to + 1e-12)
            .map(|a| a.value(t))
            .unwrap_or(0.0)
    }

    /// Exact value profile along the line through the anchor edge at
    /// transverse coordinate `t`, from the anchor edge to the opposite edge.
    pub fn profile(&self, t: f64) -> Result<Vec<ProfilePiece>> {
        let lo = self.c;
        let hi = self.c + 1.0;
        let mut raw: Vec<(f64, f64, usize)> = Vec::new();
        for (k, region) in self.local.iter().enumerate() {
            if let Some((s0, s1)) = region.row_interval(t, lo, hi) {
                if s1 - s0 > SEG_EPS {
                    raw.push((s0, s1, k));
                }
            }
        }
        raw.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.2.cmp(&b.2)));

        let mut pieces = Vec::with_capacity(raw.len());
        let mut cursor = lo;
        let mut value = self.anchor_value(t);
        for (s0, s1, k) in raw {
            if s1 <= cursor + SEG_EPS {
                continue;
            }
            if s0 > cursor + GAP_TOL {
                let p = self.global(cursor, t);
                return Err(Error::Unpartitioned { x1: p.x1, x2: p.x2 });
            }
            let along = self.specs[k]
                .component(self.axis)
                .expect("checked at construction");
            // Integrand in local coordinates: a + b * s.
            let (b, cross) = match self.axis {
                Axis::X1 => (along.beta1, along.beta2),
                Axis::X2 => (along.beta2, along.beta1),
            };
            let piece = ProfilePiece {
                lo: cursor,
                hi: s1,
                start: value,
                a: along.alpha + cross * t,
                b,
                spec: k,
            };
            value = piece.end_value();
            cursor = s1;
            pieces.push(piece);
        }
        if hi - cursor > GAP_TOL {
            let p = self.global(cursor, t);
            return Err(Error::Unpartitioned { x1: p.x1, x2: p.x2 });
        }
        Ok(pieces)
    }

    /// Field value at `x`.
    pub fn value(&self, x: Point) -> Result<f64> {
        let (s, t) = self.local(x);
        if s <= self.c {
            return Ok(self.anchor_value(t));
        }
        let pieces = self.profile(t)?;
        let mut v = self.anchor_value(t);
        for piece in &pieces {
            if s <= piece.hi {
                return Ok(piece.value_at(s.max(piece.lo)));
            }
            v = piece.end_value();
        }
        Ok(v)
    }

    /// Value plus the gradient components of the containing region. At a
    /// boundary between regions with different gradients the components are
    /// `None`.
    pub fn evaluate(&self, x: Point) -> Result<FieldSample> {
        let value = self.value(x)?;
        let (g1, g2) = self.gradient(x);
        Ok(FieldSample { value, g1, g2 })
    }

    fn gradient(&self, x: Point) -> (Option<f64>, Option<f64>) {
        let mut found: Option<(Option<f64>, Option<f64>)> = None;
        for spec in &self.specs {
            if !spec.region.contains(x, CONTAIN_TOL) {
                continue;
            }
            let g = (spec.g1.map(|a| a.eval(x)), spec.g2.map(|a| a.eval(x)));
            match found {
                None => found = Some(g),
                Some(prev) => {
                    let same = |u: Option<f64>, v: Option<f64>| match (u, v) {
                        (Some(u), Some(v)) => (u - v).abs() <= 1e-12,
                        (None, None) => true,
                        _ => false,
                    };
                    if !(same(prev.0, g.0) && same(prev.1, g.1)) {
                        return (None, None);
                    }
                }
            }
        }
        found.unwrap_or((None, None))
    }

    /// The spec whose region contains `x` most deeply. Every point of the
    /// square has one once the regions partition it.
    pub fn dominant_spec(&self, x: Point) -> Option<&GradientSpec> {
        self.specs
            .iter()
            .map(|s| (s.region.min_slack(x), s))
            .filter(|(slack, _)| *slack >= -CONTAIN_TOL)
            .max_by(|a, b| a.0.total_cmp(&b.0))
            .map(|(_, s)| s)
    }

    /// Exact minimum of the field along the line at transverse coordinate
    /// `t`, with the point where it is attained.
    pub fn line_minimum(&self, t: f64) -> Result<(f64, Point)> {
        let pieces = self.profile(t)?;
        let mut best = (self.anchor_value(t), self.global(self.c, t));
        for piece in &pieces {
            let (v, s) = piece.minimum();
            if v < best.0 {
                best = (v, self.global(s, t));
            }
        }
        Ok(best)
    }

    /// Largest distance by which `x` clears every region boundary; zero or
    /// negative on a boundary line.
    pub fn boundary_clearance(&self, x: Point) -> f64 {
        self.specs
            .iter()
            .flat_map(|s| s.region.half_planes.iter())
            .map(|h| h.distance(x))
            .fold(f64::INFINITY, f64::min)
    }
}
