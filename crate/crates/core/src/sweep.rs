//! Approximation-ratio sweeps over the offset `c`.

use std::io::{self, Write};

use rayon::prelude::*;

use crate::closed_forms::{brev, relaxed_optimum};
use crate::error::{Error, Result};
use crate::lp_oracle::oracle_value;
use crate::mechanisms::{best_deterministic, best_symmetric_menu};

pub const CSV_HEADER: &str = "c,opt,brev,drev,rrev,lp_value,ratio_bundle,ratio_det,ratio_rand";

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub c: f64,
    pub opt: f64,
    pub brev: f64,
    /// Best symmetric deterministic menu.
    pub drev: f64,
    /// Best menu of the symmetric four-option family.
    pub rrev: f64,
    pub lp_value: Option<f64>,
    pub ratio_bundle: f64,
    pub ratio_det: f64,
    pub ratio_rand: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SweepConfig {
    pub seed: u64,
    /// Grid resolution of an optional LP column.
    pub lp_grid: Option<usize>,
}

/// `from + k * step` for every `k` with the point at most `to` (up to
/// `1e-12`).
pub fn sweep_points(from: f64, to: f64, step: f64) -> Result<Vec<f64>> {
    if !(from.is_finite() && to.is_finite() && step.is_finite()) {
        return Err(Error::NonFinite("sweep bounds"));
    }
    if from < 0.0 || to < from || step <= 0.0 {
        return Err(Error::InvalidArgument(format!(
            "sweep needs 0 <= from <= to and step > 0 (got {from}, {to}, {step})"
        )));
    }
    let count = ((to - from) / step + 1e-9).floor() as usize;
    Ok((0..=count)
        .map(|k| from + k as f64 * step)
        .filter(|&c| c <= to + 1e-12)
        .collect())
}

pub fn sweep_row(c: f64, config: &SweepConfig) -> Result<SweepRow> {
    let opt = relaxed_optimum(c)?;
    let brev = brev(c)?;
    let drev = best_deterministic(c).revenue;
    let rrev = best_symmetric_menu(c, 4, config.seed)?.revenue;
    let lp_value = config.lp_grid.map(|n| oracle_value(c, n)).transpose()?;
    Ok(SweepRow {
        c,
        opt,
        brev,
        drev,
        rrev,
        lp_value,
        ratio_bundle: opt / brev,
        ratio_det: opt / drev,
        ratio_rand: opt / rrev,
    })
}

/// Rows in the order of `points`, computed in parallel.
pub fn run_sweep(points: &[f64], config: &SweepConfig) -> Result<Vec<SweepRow>> {
    points.par_iter().map(|&c| sweep_row(c, config)).collect()
}

/// `x` with nine significant digits.
pub fn format_sig(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let magnitude = x.abs().log10().floor() as i32;
    if !(-4..9).contains(&magnitude) {
        return format!("{x:.8e}");
    }
    let decimals = (8 - magnitude).max(0) as usize;
    format!("{x:.decimals$}")
}

pub fn write_csv<W: Write>(rows: &[SweepRow], mut out: W) -> io::Result<()> {
    writeln!(out, "{CSV_HEADER}")?;
    for r in rows {
        let lp = r.lp_value.map(format_sig).unwrap_or_default();
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{}",
            format_sig(r.c),
            format_sig(r.opt),
            format_sig(r.brev),
            format_sig(r.drev),
            format_sig(r.rrev),
            lp,
            format_sig(r.ratio_bundle),
            format_sig(r.ratio_det),
            format_sig(r.ratio_rand),
        )?;
    }
    Ok(())
}

/// Column maxima of the three ratios.
pub fn max_ratios(rows: &[SweepRow]) -> (f64, f64, f64) {
    rows.iter().fold(
        (f64::NEG_INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY),
        |m, r| {
            (
                m.0.max(r.ratio_bundle),
                m.1.max(r.ratio_det),
                m.2.max(r.ratio_rand),
            )
        },
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn points_include_the_end() {
        let p = sweep_points(0.0, 0.0915, 0.0005).unwrap();
        assert_eq!(p.len(), 184);
        assert!((p[183] - 0.0915).abs() < 1e-12);
        assert_eq!(sweep_points(0.1, 0.1, 0.5).unwrap(), vec![0.1]);
        assert!(sweep_points(0.2, 0.1, 0.1).is_err());
        assert!(sweep_points(0.0, 0.1, 0.0).is_err());
    }

    #[test]
    fn significant_digits() {
        assert_eq!(format_sig(1.0), "1.00000000");
        assert_eq!(format_sig(0.549_201_005_3), "0.549201005");
        assert_eq!(format_sig(12.5), "12.5000000");
        assert_eq!(format_sig(0.0), "0");
    }

    #[test]
    fn endpoint_row() {
        let r = sweep_row(0.0, &SweepConfig::default()).unwrap();
        assert!((r.ratio_bundle - 1.008_947).abs() < 1e-5);
        assert!((r.ratio_det - 1.0).abs() < 1e-5);
        assert!(r.ratio_rand >= 1.0 - 1e-9);
        let mut buf = Vec::new();
        write_csv(&[r], &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with(CSV_HEADER));
        assert_eq!(text.lines().nth(1).unwrap().split(',').count(), 9);
    }
}
