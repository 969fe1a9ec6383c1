//! Region-aware product Gauss quadrature over the valuation square.
//!
//! The square is cut into horizontal strips at every height where the
//! arrangement of break lines changes (line intersections, horizontal lines),
//! and every row inside a strip is cut at each line crossing. Within a cell
//! every field involved is a fixed polynomial, so a Gauss rule of adequate
//! order is exact up to rounding.

use crate::fields::field::PiecewiseField;
use crate::fields::geometry::{HalfPlane, Point, Square};

const BREAK_EPS: f64 = 1e-13;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct QuadratureConfig {
    /// Equal subdivisions of every cell in each direction.
    pub subdivisions_per_region: usize,
    /// Points of the Gauss-Legendre rule per direction (1..=5).
    pub order: usize,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        QuadratureConfig {
            subdivisions_per_region: 1,
            order: 3,
        }
    }
}

/// Gauss-Legendre nodes and weights on `[-1, 1]`.
fn gauss_rule(order: usize) -> (&'static [f64], &'static [f64]) {
    const N1: [f64; 1] = [0.0];
    const W1: [f64; 1] = [2.0];
    const N2: [f64; 2] = [-0.577_350_269_189_625_8, 0.577_350_269_189_625_8];
    const W2: [f64; 2] = [1.0, 1.0];
    const N3: [f64; 3] = [-0.774_596_669_241_483_4, 0.0, 0.774_596_669_241_483_4];
    const W3: [f64; 3] = [5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0];
    const N4: [f64; 4] = [
        -0.861_136_311_594_052_6,
        -0.339_981_043_584_856_3,
        0.339_981_043_584_856_3,
        0.861_136_311_594_052_6,
    ];
    const W4: [f64; 4] = [
        0.347_854_845_137_453_9,
        0.652_145_154_862_546_1,
        0.652_145_154_862_546_1,
        0.347_854_845_137_453_9,
    ];
    const N5: [f64; 5] = [
        -0.906_179_845_938_664,
        -0.538_469_310_105_683,
        0.0,
        0.538_469_310_105_683,
        0.906_179_845_938_664,
    ];
    const W5: [f64; 5] = [
        0.236_926_885_056_189_1,
        0.478_628_670_499_366_5,
        0.568_888_888_888_888_9,
        0.478_628_670_499_366_5,
        0.236_926_885_056_189_1,
    ];
    match order {
        0 | 1 => (&N1, &W1),
        2 => (&N2, &W2),
        3 => (&N3, &W3),
        4 => (&N4, &W4),
        _ => (&N5, &W5),
    }
}

fn sorted_breaks(mut v: Vec<f64>, lo: f64, hi: f64) -> Vec<f64> {
    v.push(lo);
    v.push(hi);
    v.retain(|t| t.is_finite() && *t >= lo && *t <= hi);
    v.sort_by(f64::total_cmp);
    v.dedup_by(|a, b| (*a - *b).abs() <= BREAK_EPS);
    v
}

/// Integrate `f` over `[lo, hi]` split at `breaks`.
fn integrate_1d(breaks: &[f64], config: &QuadratureConfig, mut f: impl FnMut(f64) -> f64) -> f64 {
    let (nodes, weights) = gauss_rule(config.order);
    let sub = config.subdivisions_per_region.max(1);
    let mut total = 0.0;
    for w in breaks.windows(2) {
        let len = w[1] - w[0];
        if len <= BREAK_EPS {
            continue;
        }
        let h = len / sub as f64;
        for k in 0..sub {
            let a = w[0] + k as f64 * h;
            let mid = a + h / 2.0;
            let mut acc = 0.0;
            for (x, wt) in nodes.iter().zip(weights) {
                acc += wt * f(mid + x * h / 2.0);
            }
            total += acc * h / 2.0;
        }
    }
    total
}

/// Quadrature over the square `[c, c+1]^2` aware of a set of break lines.
#[derive(Debug, Clone)]
pub struct Quadrature {
    square: Square,
    lines: Vec<HalfPlane>,
    config: QuadratureConfig,
    outer: Vec<f64>,
    verticals: Vec<f64>,
}

impl Quadrature {
    pub fn new(square: Square, lines: Vec<HalfPlane>, config: QuadratureConfig) -> Quadrature {
        let lines: Vec<HalfPlane> = lines.into_iter().filter(|l| !l.is_trivial()).collect();
        let (lo, hi) = (square.lo(), square.hi());
        let mut points: Vec<Point> = Vec::new();
        let edges = square.region().half_planes;
        for (i, a) in lines.iter().enumerate() {
            for b in lines[i + 1..].iter().chain(edges.iter()) {
                if let Some(p) = a.intersect_lines(b) {
                    if square.contains(p, 1e-12) {
                        points.push(p);
                    }
                }
            }
        }
        let mut ys: Vec<f64> = points.iter().map(|p| p.x2).collect();
        let mut xs: Vec<f64> = points.iter().map(|p| p.x1).collect();
        for l in &lines {
            if l.a1 == 0.0 {
                ys.push(l.b / l.a2);
            }
            if l.a2 == 0.0 {
                xs.push(l.b / l.a1);
            }
        }
        Quadrature {
            square,
            outer: sorted_breaks(ys, lo, hi),
            verticals: xs,
            lines,
            config,
        }
    }

    /// Quadrature aware of all break lines of `fields`.
    pub fn for_fields(c: f64, fields: &[&PiecewiseField], config: QuadratureConfig) -> Quadrature {
        let lines = fields.iter().flat_map(|f| f.break_lines()).collect();
        Quadrature::new(Square::new(c), lines, config)
    }

    /// Plain quadrature with no interior break lines.
    pub fn plain(c: f64, config: QuadratureConfig) -> Quadrature {
        Quadrature::new(Square::new(c), Vec::new(), config)
    }

    fn row_breaks(&self, x2: f64) -> Vec<f64> {
        let mut v = self.verticals.clone();
        for l in &self.lines {
            if l.a1 != 0.0 && l.a2 != 0.0 {
                v.push((l.b - l.a2 * x2) / l.a1);
            }
        }
        sorted_breaks(v, self.square.lo(), self.square.hi())
    }

    /// Double integral of `f` over the square.
    pub fn integrate(&self, mut f: impl FnMut(Point) -> f64) -> f64 {
        let outer = self.outer.clone();
        integrate_1d(&outer, &self.config, |x2| {
            let row = self.row_breaks(x2);
            integrate_1d(&row, &self.config, |x1| f(Point::new(x1, x2)))
        })
    }

    /// Integral of `f` along one edge of the square, parameterised by the
    /// free coordinate `t`. `fixed_axis_is_x1` selects the edges `x1 = v`.
    pub fn integrate_edge(
        &self,
        fixed_axis_is_x1: bool,
        value: f64,
        mut f: impl FnMut(Point) -> f64,
    ) -> f64 {
        let mut v = Vec::new();
        for l in &self.lines {
            let (a_fixed, a_free) = if fixed_axis_is_x1 {
                (l.a1, l.a2)
            } else {
                (l.a2, l.a1)
            };
            if a_free != 0.0 {
                v.push((l.b - a_fixed * value) / a_free);
            }
        }
        let breaks = sorted_breaks(v, self.square.lo(), self.square.hi());
        integrate_1d(&breaks, &self.config, |t| {
            if fixed_axis_is_x1 {
                f(Point::new(value, t))
            } else {
                f(Point::new(t, value))
            }
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_area_and_linear_moment() {
        let q = Quadrature::plain(0.0, QuadratureConfig::default());
        assert!((q.integrate(|_| 1.0) - 1.0).abs() < 1e-15);
        assert!((q.integrate(|p| p.x1 + p.x2) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn kinked_integrand_exact_with_break_line() {
        // max(0, x1 + x2 - 1) over [0,1]^2 = 1/6
        let lines = vec![HalfPlane::sum_le(1.0)];
        let q = Quadrature::new(Square::new(0.0), lines, QuadratureConfig::default());
        let v = q.integrate(|p| (p.x1 + p.x2 - 1.0).max(0.0));
        assert!((v - 1.0 / 6.0).abs() < 1e-15);
        let e = q.integrate_edge(true, 1.0, |p| (p.x1 + p.x2 - 1.0).max(0.0));
        assert!((e - 0.5).abs() < 1e-15);
    }

    #[test]
    fn gauss_rules_integrate_their_degree() {
        for order in 1..=5 {
            let cfg = QuadratureConfig {
                subdivisions_per_region: 1,
                order,
            };
            let deg = 2 * order as i32 - 1;
            let v = integrate_1d(&[0.0, 1.0], &cfg, |t| t.powi(deg));
            assert!(
                (v - 1.0 / (deg as f64 + 1.0)).abs() < 1e-14,
                "order {order}"
            );
        }
    }
}
