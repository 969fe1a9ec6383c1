//! Feasibility, complementarity and objective checks for a primal/dual pair.

use std::fmt;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fields::{PiecewiseField, Point, Quadrature, QuadratureConfig, Square};
use crate::solutions::SolutionPair;

/// Constraint slack attributed to rounding.
pub const FEASIBILITY_TOL: f64 = 1e-9;
/// Values above this count as strictly positive for complementarity.
pub const POSITIVE_TOL: f64 = 1e-9;
/// Largest duality gap of a certified pair.
pub const GAP_TOL: f64 = 1e-6;
/// Interior samples closer than this to a region boundary are skipped.
pub const SAMPLE_INSET: f64 = 1e-7;
/// Default samples per side.
pub const DEFAULT_GRID: usize = 200;

/// Offset of the lines sampled next to region vertices.
const VERTEX_OFFSET: f64 = 1e-9;

/// Direct and integrated-by-parts objective routes may differ by this much
/// before the result is rejected.
const ROUTE_TOL: f64 = 1e-6;

/// Outcome of one family of checks.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckResult {
    pub passed: bool,
    /// Largest violation found (zero when none).
    pub max_violation: f64,
    pub worst_point: Option<Point>,
    /// Name of the constraint attaining `max_violation`.
    pub worst_constraint: Option<&'static str>,
}

impl CheckResult {
    fn new() -> CheckResult {
        CheckResult {
            passed: true,
            max_violation: 0.0,
            worst_point: None,
            worst_constraint: None,
        }
    }

    fn record(&mut self, violation: f64, at: Point, constraint: &'static str) {
        let v = if violation.is_nan() {
            f64::INFINITY
        } else {
            violation
        };
        if v > self.max_violation {
            self.max_violation = v;
            self.worst_point = Some(at);
            self.worst_constraint = Some(constraint);
        }
    }

    fn evaluation_failure(&mut self, err: &Error, fallback: Point, constraint: &'static str) {
        let at = match err {
            Error::Unpartitioned { x1, x2 } => Point::new(*x1, *x2),
            _ => fallback,
        };
        self.record(f64::INFINITY, at, constraint);
    }

    fn merge(mut self, other: CheckResult) -> CheckResult {
        if other.max_violation > self.max_violation {
            self.max_violation = other.max_violation;
            self.worst_point = other.worst_point;
            self.worst_constraint = other.worst_constraint;
        }
        self
    }

    fn finish(mut self, tol: f64) -> CheckResult {
        self.passed = self.max_violation <= tol;
        self
    }
}

impl fmt::Display for CheckResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} (max violation {:.3e}",
            if self.passed { "pass" } else { "FAIL" },
            self.max_violation
        )?;
        if let (Some(p), Some(name)) = (self.worst_point, self.worst_constraint) {
            if self.max_violation > 0.0 {
                write!(f, ", {name} at ({:.9}, {:.9})", p.x1, p.x2)?;
            }
        }
        write!(f, ")")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PrimalCheck {
    pub result: CheckResult,
    /// Smallest gradient component seen; reported, not enforced.
    pub min_gradient: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerificationReport {
    pub primal_feasible: CheckResult,
    pub min_primal_gradient: f64,
    pub dual_feasible: CheckResult,
    pub complementarity: CheckResult,
    pub primal_objective: f64,
    pub dual_objective: f64,
    /// `dual_objective - primal_objective`.
    pub duality_gap: f64,
    pub sample_grid: usize,
}

impl VerificationReport {
    pub fn certified(&self) -> bool {
        self.primal_feasible.passed
            && self.dual_feasible.passed
            && self.complementarity.passed
            && self.duality_gap.abs() <= GAP_TOL
    }
}

impl fmt::Display for VerificationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "sample grid        {0}x{0}", self.sample_grid)?;
        writeln!(f, "primal feasible    {}", self.primal_feasible)?;
        writeln!(f, "min primal grad    {:.9}", self.min_primal_gradient)?;
        writeln!(f, "dual feasible      {}", self.dual_feasible)?;
        writeln!(f, "complementarity    {}", self.complementarity)?;
        writeln!(f, "primal objective   {:.9}", self.primal_objective)?;
        writeln!(f, "dual objective     {:.9}", self.dual_objective)?;
        writeln!(f, "duality gap        {:.3e}", self.duality_gap)?;
        write!(
            f,
            "verdict            {}",
            if self.certified() {
                "certified optimal"
            } else {
                "NOT certified"
            }
        )
    }
}

/// Both routes to the primal objective.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PrimalObjective {
    /// Quadrature of `∇u·x - u`.
    pub direct: f64,
    /// Edge integrals weighted by `c+1` and `c`, minus three times the
    /// area integral.
    pub boundary: f64,
}

pub fn primal_objective_routes(u: &PiecewiseField) -> Result<PrimalObjective> {
    let c = u.c();
    let quad = Quadrature::for_fields(c, &[u], QuadratureConfig::default());
    let mut failure: Option<Error> = None;
    let mut eval = |x: Point| -> f64 {
        match u.value(x) {
            Ok(v) => v,
            Err(e) => {
                failure.get_or_insert(e);
                f64::NAN
            }
        }
    };
    let area = quad.integrate(&mut eval);
    let top = c + 1.0;
    let edges = top
        * (quad.integrate_edge(true, top, &mut eval) + quad.integrate_edge(false, top, &mut eval))
        - c * (quad.integrate_edge(true, c, &mut eval) + quad.integrate_edge(false, c, &mut eval));
    let direct = quad.integrate(|x| {
        let v = eval(x);
        match u.dominant_spec(x) {
            Some(spec) => {
                let g1 = spec.g1.map_or(f64::NAN, |a| a.eval(x));
                let g2 = spec.g2.map_or(f64::NAN, |a| a.eval(x));
                g1 * x.x1 + g2 * x.x2 - v
            }
            None => f64::NAN,
        }
    });
    if let Some(e) = failure {
        return Err(e);
    }
    let routes = PrimalObjective {
        direct,
        boundary: edges - 3.0 * area,
    };
    if !routes.direct.is_finite() || !routes.boundary.is_finite() {
        return Err(Error::NonFinite("primal objective"));
    }
    Ok(routes)
}

/// Primal objective by the boundary form, after checking it against the
/// direct quadrature.
pub fn primal_objective(u: &PiecewiseField) -> Result<f64> {
    let r = primal_objective_routes(u)?;
    if (r.direct - r.boundary).abs() > ROUTE_TOL {
        return Err(Error::Inconsistent {
            direct: r.direct,
            boundary: r.boundary,
        });
    }
    Ok(r.boundary)
}

/// `∫∫ z1 + z2` over the square.
pub fn dual_objective(z1: &PiecewiseField, z2: &PiecewiseField) -> Result<f64> {
    let quad = Quadrature::for_fields(z1.c(), &[z1, z2], QuadratureConfig::default());
    let mut failure = None;
    let v = quad.integrate(|x| match (z1.value(x), z2.value(x)) {
        (Ok(a), Ok(b)) => a + b,
        (Err(e), _) | (_, Err(e)) => {
            failure.get_or_insert(e);
            0.0
        }
    });
    match failure {
        Some(e) => Err(e),
        None => Ok(v),
    }
}

/// Midpoints of an `n x n` grid clear of every boundary of `fields`, plus
/// the centroids of their regions.
pub fn interior_samples(fields: &[&PiecewiseField], n: usize) -> Vec<Point> {
    let c = fields[0].c();
    let square = Square::new(c);
    let clear = |x: Point| {
        fields
            .iter()
            .all(|f| f.boundary_clearance(x) >= SAMPLE_INSET)
    };
    let step = 1.0 / n as f64;
    let mut pts: Vec<Point> = (0..n * n)
        .map(|k| {
            Point::new(
                c + ((k / n) as f64 + 0.5) * step,
                c + ((k % n) as f64 + 0.5) * step,
            )
        })
        .filter(|&x| clear(x))
        .collect();
    for f in fields {
        for s in f.specs() {
            if let Some(x) = s.region.centroid(&square) {
                if clear(x) {
                    pts.push(x);
                }
            }
        }
    }
    pts
}

/// Midpoints of `n` equal pieces of an edge, plus one-sided offsets of the
/// heights of all region vertices of `field` so that every piece is
/// visited. Lines through vertices themselves may carry an anchor jump.
fn line_positions(field: &PiecewiseField, n: usize) -> Vec<f64> {
    let c = field.c();
    let square = field.square();
    let mut ts: Vec<f64> = (0..n).map(|k| c + (k as f64 + 0.5) / n as f64).collect();
    for s in field.specs() {
        for v in s.region.polygon(&square) {
            let t = match field.axis() {
                crate::fields::Axis::X1 => v.x2,
                crate::fields::Axis::X2 => v.x1,
            };
            for off in [-VERTEX_OFFSET, VERTEX_OFFSET] {
                ts.push((t + off).clamp(c, c + 1.0));
            }
        }
    }
    ts.sort_by(f64::total_cmp);
    ts.dedup();
    ts
}

/// `f >= 0` on the whole square, via exact minima along lines.
pub fn check_nonnegativity(field: &PiecewiseField, n: usize, name: &'static str) -> CheckResult {
    nonnegativity(field, n, name).finish(FEASIBILITY_TOL)
}

fn nonnegativity(field: &PiecewiseField, n: usize, name: &'static str) -> CheckResult {
    line_positions(field, n)
        .par_iter()
        .map(|&t| {
            let mut r = CheckResult::new();
            match field.line_minimum(t) {
                Ok((m, at)) => r.record(-m, at, name),
                Err(e) => r.evaluation_failure(&e, Point::new(field.c(), t), name),
            }
            r
        })
        .reduce(CheckResult::new, CheckResult::merge)
}

/// Gradient bounds `∂u/∂xj <= 1` at interior samples and `u >= 0` along
/// lines.
pub fn check_primal(u: &PiecewiseField, n: usize) -> PrimalCheck {
    let samples = interior_samples(&[u], n);
    let (grad, min_gradient) = samples
        .par_iter()
        .map(|&x| {
            let mut r = CheckResult::new();
            let mut lo = f64::INFINITY;
            match u.evaluate(x) {
                Ok(s) => {
                    for g in [s.g1, s.g2].into_iter().flatten() {
                        r.record(g - 1.0, x, "gradient <= 1");
                        lo = lo.min(g);
                    }
                }
                Err(e) => r.evaluation_failure(&e, x, "gradient <= 1"),
            }
            (r, lo)
        })
        .reduce(
            || (CheckResult::new(), f64::INFINITY),
            |a, b| (a.0.merge(b.0), a.1.min(b.1)),
        );
    let result = grad
        .merge(nonnegativity(u, n, "u >= 0"))
        .finish(FEASIBILITY_TOL);
    PrimalCheck {
        result,
        min_gradient,
    }
}

/// Edge sample positions.
fn edge_positions(c: f64, n: usize) -> Vec<f64> {
    let mut ts: Vec<f64> = (0..n).map(|k| c + (k as f64 + 0.5) / n as f64).collect();
    ts.extend([c, c + 1.0]);
    ts
}

/// Divergence bound, nonnegativity and the four edge conditions.
pub fn check_dual(z1: &PiecewiseField, z2: &PiecewiseField, n: usize) -> CheckResult {
    let c = z1.c();
    let top = c + 1.0;
    let samples = interior_samples(&[z1, z2], n);
    let interior = samples
        .par_iter()
        .map(|&x| {
            let mut r = CheckResult::new();
            match (z1.evaluate(x), z2.evaluate(x)) {
                (Ok(a), Ok(b)) => {
                    if let (Some(g1), Some(g2)) = (a.g1, b.g2) {
                        r.record(g1 + g2 - 3.0, x, "divergence <= 3");
                    }
                }
                (Err(e), _) | (_, Err(e)) => r.evaluation_failure(&e, x, "divergence <= 3"),
            }
            r
        })
        .reduce(CheckResult::new, CheckResult::merge);

    let mut edges = CheckResult::new();
    for t in edge_positions(c, n) {
        let checks: [(Point, &PiecewiseField, f64, &'static str); 4] = [
            (Point::new(c, t), z1, 1.0, "z1(c, .) <= c"),
            (Point::new(t, c), z2, 1.0, "z2(., c) <= c"),
            (Point::new(top, t), z1, -1.0, "z1(c+1, .) >= c+1"),
            (Point::new(t, top), z2, -1.0, "z2(., c+1) >= c+1"),
        ];
        for (x, f, sign, name) in checks {
            let bound = if sign > 0.0 { c } else { top };
            match f.value(x) {
                Ok(v) => edges.record(sign * (v - bound), x, name),
                Err(e) => edges.evaluation_failure(&e, x, name),
            }
        }
    }
    interior
        .merge(edges)
        .merge(nonnegativity(z1, n, "z1 >= 0"))
        .merge(nonnegativity(z2, n, "z2 >= 0"))
        .finish(FEASIBILITY_TOL)
}

/// Exact complementarity: wherever `u > 0` the divergence (interior) or the
/// edge condition (boundary) is tight, and wherever `zj > 0` the primal
/// gradient in direction `j` is one.
pub fn check_complementarity(pair: &SolutionPair, n: usize) -> CheckResult {
    let (u, z1, z2) = (&pair.u, &pair.z1, &pair.z2);
    let c = pair.c;
    let top = c + 1.0;
    let samples = interior_samples(&[u, z1, z2], n);
    let interior = samples
        .par_iter()
        .map(|&x| {
            let mut r = CheckResult::new();
            match (u.evaluate(x), z1.evaluate(x), z2.evaluate(x)) {
                (Ok(su), Ok(s1), Ok(s2)) => {
                    if su.value > POSITIVE_TOL {
                        if let (Some(g1), Some(g2)) = (s1.g1, s2.g2) {
                            r.record((g1 + g2 - 3.0).abs(), x, "u > 0 => divergence = 3");
                        }
                    }
                    if s1.value > POSITIVE_TOL {
                        if let Some(g) = su.g1 {
                            r.record((g - 1.0).abs(), x, "z1 > 0 => du/dx1 = 1");
                        }
                    }
                    if s2.value > POSITIVE_TOL {
                        if let Some(g) = su.g2 {
                            r.record((g - 1.0).abs(), x, "z2 > 0 => du/dx2 = 1");
                        }
                    }
                }
                (Err(e), _, _) | (_, Err(e), _) | (_, _, Err(e)) => {
                    r.evaluation_failure(&e, x, "complementarity")
                }
            }
            r
        })
        .reduce(CheckResult::new, CheckResult::merge);

    let mut edges = CheckResult::new();
    for t in edge_positions(c, n) {
        let checks: [(Point, &PiecewiseField, f64, &'static str); 4] = [
            (Point::new(c, t), z1, c, "u > 0 => z1(c, .) = c"),
            (Point::new(t, c), z2, c, "u > 0 => z2(., c) = c"),
            (Point::new(top, t), z1, top, "u > 0 => z1(c+1, .) = c+1"),
            (Point::new(t, top), z2, top, "u > 0 => z2(., c+1) = c+1"),
        ];
        for (x, f, bound, name) in checks {
            match (u.value(x), f.value(x)) {
                (Ok(uv), Ok(v)) => {
                    if uv > POSITIVE_TOL {
                        edges.record((v - bound).abs(), x, name);
                    }
                }
                (Err(e), _) | (_, Err(e)) => edges.evaluation_failure(&e, x, name),
            }
        }
    }
    interior.merge(edges).finish(FEASIBILITY_TOL)
}

/// Runs every check on an `n x n` sample grid.
pub fn full_verify(pair: &SolutionPair, n: usize) -> VerificationReport {
    let primal = check_primal(&pair.u, n);
    let dual_feasible = check_dual(&pair.z1, &pair.z2, n);
    let complementarity = check_complementarity(pair, n);
    let primal_objective = primal_objective(&pair.u).unwrap_or(f64::NAN);
    let dual_objective = dual_objective(&pair.z1, &pair.z2).unwrap_or(f64::NAN);
    VerificationReport {
        primal_feasible: primal.result,
        min_primal_gradient: primal.min_gradient,
        dual_feasible,
        complementarity,
        primal_objective,
        dual_objective,
        duality_gap: dual_objective - primal_objective,
        sample_grid: n,
    }
}
