//! Convex polygonal regions of the valuation square, stored as half-plane
//! intersections.

/// Vertices closer than this are merged after clipping.
const VERTEX_EPS: f64 = 1e-13;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point {
    pub x1: f64,
    pub x2: f64,
}

impl Point {
    pub const fn new(x1: f64, x2: f64) -> Point {
        Point { x1, x2 }
    }

    pub fn transposed(self) -> Point {
        Point::new(self.x2, self.x1)
    }

    pub fn is_finite(self) -> bool {
        self.x1.is_finite() && self.x2.is_finite()
    }
}

/// `a1 x1 + a2 x2 <= b`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HalfPlane {
    pub a1: f64,
    pub a2: f64,
    pub b: f64,
}

impl HalfPlane {
    pub const fn le(a1: f64, a2: f64, b: f64) -> HalfPlane {
        HalfPlane { a1, a2, b }
    }

    /// `a1 x1 + a2 x2 >= b`.
    pub fn ge(a1: f64, a2: f64, b: f64) -> HalfPlane {
        HalfPlane {
            a1: -a1,
            a2: -a2,
            b: -b,
        }
    }

    pub fn x1_le(v: f64) -> HalfPlane {
        HalfPlane::le(1.0, 0.0, v)
    }

    pub fn x1_ge(v: f64) -> HalfPlane {
        HalfPlane::ge(1.0, 0.0, v)
    }

    pub fn x2_le(v: f64) -> HalfPlane {
        HalfPlane::le(0.0, 1.0, v)
    }

    pub fn x2_ge(v: f64) -> HalfPlane {
        HalfPlane::ge(0.0, 1.0, v)
    }

    pub fn sum_le(v: f64) -> HalfPlane {
        HalfPlane::le(1.0, 1.0, v)
    }

    pub fn sum_ge(v: f64) -> HalfPlane {
        HalfPlane::ge(1.0, 1.0, v)
    }

    /// `b - a.x`; nonnegative inside.
    pub fn slack(&self, p: Point) -> f64 {
        self.b - self.a1 * p.x1 - self.a2 * p.x2
    }

    /// Euclidean distance from `p` to the boundary line.
    pub fn distance(&self, p: Point) -> f64 {
        self.slack(p).abs() / self.a1.hypot(self.a2)
    }

    pub fn transposed(&self) -> HalfPlane {
        HalfPlane::le(self.a2, self.a1, self.b)
    }

    pub fn flipped(&self) -> HalfPlane {
        HalfPlane::le(-self.a1, -self.a2, -self.b)
    }

    pub fn is_trivial(&self) -> bool {
        self.a1 == 0.0 && self.a2 == 0.0
    }

    /// Intersection of the two boundary lines, if they are not parallel.
    pub fn intersect_lines(&self, other: &HalfPlane) -> Option<Point> {
        let det = self.a1 * other.a2 - self.a2 * other.a1;
        let scale = self.a1.hypot(self.a2) * other.a1.hypot(other.a2);
        if det.abs() <= 1e-14 * scale {
            return None;
        }
        Some(Point::new(
            (self.b * other.a2 - self.a2 * other.b) / det,
            (self.a1 * other.b - self.b * other.a1) / det,
        ))
    }
}

/// The valuation square `[c, c+1]^2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Square {
    pub c: f64,
}

impl Square {
    pub fn new(c: f64) -> Square {
        Square { c }
    }

    pub fn lo(&self) -> f64 {
        self.c
    }

    pub fn hi(&self) -> f64 {
        self.c + 1.0
    }

    pub fn polygon(&self) -> Vec<Point> {
        let (lo, hi) = (self.lo(), self.hi());
        vec![
            Point::new(lo, lo),
            Point::new(hi, lo),
            Point::new(hi, hi),
            Point::new(lo, hi),
        ]
    }

    pub fn contains(&self, p: Point, tol: f64) -> bool {
        p.x1 >= self.lo() - tol
            && p.x1 <= self.hi() + tol
            && p.x2 >= self.lo() - tol
            && p.x2 <= self.hi() + tol
    }

    pub fn region(&self) -> Region {
        Region::new(
            "square",
            vec![
                HalfPlane::x1_ge(self.lo()),
                HalfPlane::x1_le(self.hi()),
                HalfPlane::x2_ge(self.lo()),
                HalfPlane::x2_le(self.hi()),
            ],
        )
    }
}

/// A convex region `{x : a.x <= b for every half-plane}`, implicitly clipped
/// to the valuation square it is used with.
#[derive(Debug, Clone, PartialEq)]
pub struct Region {
    pub half_planes: Vec<HalfPlane>,
    pub label: String,
}

impl Region {
    pub fn new(label: impl Into<String>, half_planes: Vec<HalfPlane>) -> Region {
        Region {
            half_planes,
            label: label.into(),
        }
    }

    pub fn contains(&self, p: Point, tol: f64) -> bool {
        self.half_planes.iter().all(|h| h.slack(p) >= -tol)
    }

    /// Smallest slack over the half-planes; positive in the open interior.
    pub fn min_slack(&self, p: Point) -> f64 {
        self.half_planes
            .iter()
            .map(|h| h.slack(p))
            .fold(f64::INFINITY, f64::min)
    }

    /// Vertices (counter-clockwise) of the region clipped to `square`.
    pub fn polygon(&self, square: &Square) -> Vec<Point> {
        clip_polygon(&square.polygon(), &self.half_planes)
    }

    pub fn area(&self, square: &Square) -> f64 {
        polygon_area(&self.polygon(square))
    }

    pub fn centroid(&self, square: &Square) -> Option<Point> {
        polygon_centroid(&self.polygon(square))
    }

    pub fn intersection(&self, other: &Region) -> Region {
        let mut half_planes = self.half_planes.clone();
        half_planes.extend_from_slice(&other.half_planes);
        Region::new(format!("{}&{}", self.label, other.label), half_planes)
    }

    pub fn transposed(&self) -> Region {
        Region {
            half_planes: self.half_planes.iter().map(HalfPlane::transposed).collect(),
            label: format!("{}^T", self.label),
        }
    }

    /// Parameter interval `[lo, hi]` of the horizontal line at height `x2`
    /// that lies in the region, intersected with `[t0, t1]`.
    pub fn row_interval(&self, x2: f64, t0: f64, t1: f64) -> Option<(f64, f64)> {
        let (mut lo, mut hi) = (t0, t1);
        for h in &self.half_planes {
            let rhs = h.b - h.a2 * x2;
            if h.a1 > 0.0 {
                hi = hi.min(rhs / h.a1);
            } else if h.a1 < 0.0 {
                lo = lo.max(rhs / h.a1);
            } else if rhs < 0.0 {
                return None;
            }
            if lo > hi {
                return None;
            }
        }
        Some((lo, hi))
    }
}

/// Sutherland-Hodgman clipping of a convex polygon by half-planes.
pub fn clip_polygon(polygon: &[Point], half_planes: &[HalfPlane]) -> Vec<Point> {
    let mut current = polygon.to_vec();
    let mut next = Vec::with_capacity(current.len() + 4);
    for h in half_planes {
        if current.is_empty() {
            break;
        }
        next.clear();
        clip_into(&current, h, &mut next);
        std::mem::swap(&mut current, &mut next);
    }
    dedup_vertices(&mut current);
    if current.len() < 3 {
        current.clear();
    }
    current
}

fn clip_into(polygon: &[Point], h: &HalfPlane, out: &mut Vec<Point>) {
    if h.is_trivial() {
        if h.b >= 0.0 {
            out.extend_from_slice(polygon);
        }
        return;
    }
    let n = polygon.len();
    for k in 0..n {
        let p = polygon[k];
        let q = polygon[(k + 1) % n];
        let sp = h.slack(p);
        let sq = h.slack(q);
        if sp >= 0.0 {
            out.push(p);
        }
        if (sp > 0.0 && sq < 0.0) || (sp < 0.0 && sq > 0.0) {
            let t = sp / (sp - sq);
            out.push(Point::new(
                p.x1 + t * (q.x1 - p.x1),
                p.x2 + t * (q.x2 - p.x2),
            ));
        }
    }
}

fn dedup_vertices(polygon: &mut Vec<Point>) {
    let close = |a: &Point, b: &Point| {
        (a.x1 - b.x1).abs() <= VERTEX_EPS && (a.x2 - b.x2).abs() <= VERTEX_EPS
    };
    polygon.dedup_by(|a, b| close(a, b));
    while polygon.len() > 1 && close(&polygon[0], &polygon[polygon.len() - 1]) {
        polygon.pop();
    }
}

/// Shoelace area (absolute value).
pub fn polygon_area(polygon: &[Point]) -> f64 {
    signed_area(polygon).abs()
}

fn signed_area(polygon: &[Point]) -> f64 {
    let n = polygon.len();
    if n < 3 {
        return 0.0;
    }
    let mut acc = 0.0;
    for k in 0..n {
        let p = polygon[k];
        let q = polygon[(k + 1) % n];
        acc += p.x1 * q.x2 - q.x1 * p.x2;
    }
    acc / 2.0
}

pub fn polygon_centroid(polygon: &[Point]) -> Option<Point> {
    let a = signed_area(polygon);
    if a.abs() < 1e-300 {
        return None;
    }
    let n = polygon.len();
    let (mut cx, mut cy) = (0.0, 0.0);
    for k in 0..n {
        let p = polygon[k];
        let q = polygon[(k + 1) % n];
        let cross = p.x1 * q.x2 - q.x1 * p.x2;
        cx += (p.x1 + q.x1) * cross;
        cy += (p.x2 + q.x2) * cross;
    }
    Some(Point::new(cx / (6.0 * a), cy / (6.0 * a)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn clip_square_by_diagonal() {
        let sq = Square::new(0.0);
        let r = Region::new("below", vec![HalfPlane::sum_le(1.0)]);
        assert!((r.area(&sq) - 0.5).abs() < 1e-15);
        let cen = r.centroid(&sq).unwrap();
        assert!((cen.x1 - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn empty_and_degenerate_regions() {
        let sq = Square::new(0.0);
        let r = Region::new("none", vec![HalfPlane::x1_le(-0.5)]);
        assert!(r.polygon(&sq).is_empty());
        let line = Region::new("line", vec![HalfPlane::x1_le(0.3), HalfPlane::x1_ge(0.3)]);
        assert_eq!(line.area(&sq), 0.0);
    }

    #[test]
    fn row_interval_of_triangle() {
        let r = Region::new(
            "tri",
            vec![
                HalfPlane::sum_ge(1.0),
                HalfPlane::x1_le(0.8),
                HalfPlane::x2_le(0.9),
            ],
        );
        let (lo, hi) = r.row_interval(0.5, 0.0, 1.0).unwrap();
        assert!((lo - 0.5).abs() < 1e-15 && (hi - 0.8).abs() < 1e-15);
        assert!(r.row_interval(0.95, 0.0, 1.0).is_none());
    }

    #[test]
    fn line_intersection() {
        let p = HalfPlane::sum_le(1.0)
            .intersect_lines(&HalfPlane::x1_ge(0.25))
            .unwrap();
        assert!((p.x1 - 0.25).abs() < 1e-15 && (p.x2 - 0.75).abs() < 1e-15);
        assert!(HalfPlane::x1_le(0.0)
            .intersect_lines(&HalfPlane::x1_ge(1.0))
            .is_none());
    }
}
