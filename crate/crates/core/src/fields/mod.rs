//! Polygonal regions, piecewise affine-gradient fields and quadrature.

mod field;
mod geometry;
mod quadrature;

pub use field::{Affine, Anchor, Axis, FieldSample, GradientSpec, PiecewiseField, ProfilePiece};
pub use geometry::{
    clip_polygon, polygon_area, polygon_centroid, HalfPlane, Point, Region, Square,
};
pub use quadrature::{Quadrature, QuadratureConfig};

/// Outcome of checking that a list of regions tiles the square.
#[derive(Debug, Clone, PartialEq)]
pub struct PartitionReport {
    pub total_area: f64,
    pub square_area: f64,
    /// `(i, j, area)` for every pair with a positive-area overlap.
    pub overlaps: Vec<(usize, usize, f64)>,
    pub max_overlap: f64,
    pub passed: bool,
}

/// Compares the summed region areas with the square's area and measures
/// pairwise overlaps. Passes iff both discrepancies are at most `1e-9`.
pub fn partition_check(specs: &[GradientSpec], square: &Region) -> PartitionReport {
    let frame = bounding_square(square);
    let clipped: Vec<Vec<Point>> = specs
        .iter()
        .map(|s| {
            clip_polygon(
                &frame.polygon(),
                &square.intersection(&s.region).half_planes,
            )
        })
        .collect();
    let total_area: f64 = clipped.iter().map(|p| polygon_area(p)).sum();
    let square_area = square.area(&frame);
    let mut overlaps = Vec::new();
    let mut max_overlap: f64 = 0.0;
    for i in 0..specs.len() {
        if clipped[i].is_empty() {
            continue;
        }
        for j in i + 1..specs.len() {
            if clipped[j].is_empty() {
                continue;
            }
            let inter = clip_polygon(&clipped[i], &specs[j].region.half_planes);
            let a = polygon_area(&inter);
            if a > 1e-13 {
                overlaps.push((i, j, a));
            }
            max_overlap = max_overlap.max(a);
        }
    }
    PartitionReport {
        passed: (total_area - square_area).abs() <= 1e-9 && max_overlap <= 1e-9,
        total_area,
        square_area,
        overlaps,
        max_overlap,
    }
}

/// The valuation square containing `region` (which is expected to be the
/// square itself or a subset of one).
fn bounding_square(region: &Region) -> Square {
    let lo = region
        .half_planes
        .iter()
        .filter(|h| h.a2 == 0.0 && h.a1 < 0.0)
        .map(|h| h.b / h.a1)
        .fold(f64::NEG_INFINITY, f64::max);
    Square::new(if lo.is_finite() { lo } else { 0.0 })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_piece(p: f64, flip: bool) -> Vec<GradientSpec> {
        let upper = if flip {
            HalfPlane::sum_le(p)
        } else {
            HalfPlane::sum_ge(p)
        };
        vec![
            GradientSpec::constant(Region::new("zero", vec![HalfPlane::sum_le(p)]), 0.0, 0.0),
            GradientSpec::constant(Region::new("bundle", vec![upper]), 1.0, 1.0),
        ]
    }

    #[test]
    fn line_cut_partitions() {
        let sq = Square::new(0.5);
        let rep = partition_check(&two_piece(1.55, false), &sq.region());
        assert!(rep.passed, "{rep:?}");
        assert!((rep.total_area - 1.0).abs() < 1e-12);
    }

    #[test]
    fn flipped_inequality_fails() {
        let sq = Square::new(0.5);
        let specs = two_piece(1.55, true);
        let region_area = specs[0].region.area(&sq);
        let rep = partition_check(&specs, &sq.region());
        assert!(!rep.passed);
        assert!((rep.max_overlap - region_area).abs() < 1e-12);
    }
}
