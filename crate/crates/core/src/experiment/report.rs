use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use super::bounds::{theoretical_bounds, BoundsReport};
use super::stats::{estimate_diversity, DiversityEstimate, Layer};
use super::sweep::{CurvePoint, ErrorCurve};
use crate::channel::BlockShape;
use crate::{Error, Result};

/// Column order of curve CSV files.
pub const CURVE_COLUMNS: [&str; 11] = [
    "snr_db",
    "trials",
    "errors_high",
    "errors_low",
    "outage",
    "p_high",
    "p_low",
    "ci_lo_high",
    "ci_hi_high",
    "ci_lo_low",
    "ci_hi_low",
];

// 17 significant digits round-trip every f64
fn sci(x: f64) -> String {
    format!("{x:.16e}")
}

/// Writes the per-point counts and estimates as CSV.
pub fn write_curve_csv<W: Write>(out: W, curve: &ErrorCurve) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CURVE_COLUMNS)?;
    for p in &curve.points {
        w.write_record([
            sci(p.snr_db),
            p.trials.to_string(),
            p.errors_high.to_string(),
            p.errors_low.to_string(),
            p.outage.to_string(),
            sci(p.p_high),
            sci(p.p_low),
            sci(p.ci_high.0),
            sci(p.ci_high.1),
            sci(p.ci_low.0),
            sci(p.ci_low.1),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a curve CSV. Columns may appear in any order; extra columns are
/// ignored and missing ones are reported together.
pub fn read_curve_csv<R: Read>(input: R) -> Result<ErrorCurve> {
    let mut r = csv::Reader::from_reader(input);
    let headers = r.headers()?.clone();
    let mut pos = [0usize; 11];
    let mut missing = Vec::new();
    for (i, col) in CURVE_COLUMNS.iter().enumerate() {
        match headers.iter().position(|h| h.trim() == *col) {
            Some(j) => pos[i] = j,
            None => missing.push(col.to_string()),
        }
    }
    if !missing.is_empty() {
        return Err(Error::MissingColumns(missing));
    }

    let mut points = Vec::new();
    for (line, rec) in r.records().enumerate() {
        let rec = rec?;
        let field = |i: usize| rec.get(pos[i]).unwrap_or("").trim();
        let bad = |i: usize| Error::Io(format!("row {}: cannot parse {} = {:?}", line + 1, CURVE_COLUMNS[i], field(i)));
        let f = |i: usize| field(i).parse::<f64>().map_err(|_| bad(i));
        let u = |i: usize| field(i).parse::<u64>().map_err(|_| bad(i));
        let mut p = CurvePoint::from_counts(f(0)?, u(1)?, u(2)?, u(3)?, u(4)?);
        p.p_high = f(5)?;
        p.p_low = f(6)?;
        p.ci_high = (f(7)?, f(8)?);
        p.ci_low = (f(9)?, f(10)?);
        points.push(p);
    }
    Ok(ErrorCurve { points })
}

/// Fitted slopes of a two-layer run next to its single-layer baseline.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RefinementSummary {
    pub high: DiversityEstimate,
    pub low: DiversityEstimate,
    pub baseline: DiversityEstimate,
    pub bracket_high: BoundsReport,
    pub bracket_low: BoundsReport,
    pub tolerance: f64,
    /// `|d̂_H - d̂_baseline| ≤ tolerance`: embedding a low layer did not cost
    /// the high layer any diversity.
    pub high_matches_baseline: bool,
    pub high_in_bracket: bool,
    pub low_in_bracket: bool,
}

/// Compares a superposition run against a single-layer baseline on the same
/// SNR grid. `r_h`, `r_l` are effective rates.
pub fn refinement_report(
    layered: &ErrorCurve,
    baseline: &ErrorCurve,
    window_db: (f64, f64),
    r_h: f64,
    r_l: f64,
    shape: BlockShape,
    tolerance: f64,
) -> Result<RefinementSummary> {
    if layered.snr_grid_db() != baseline.snr_grid_db() {
        return Err(Error::GridMismatch);
    }
    let high = estimate_diversity(layered, window_db, Layer::High)?;
    let low = estimate_diversity(layered, window_db, Layer::Low)?;
    let base = estimate_diversity(baseline, window_db, Layer::High)?;
    let (bracket_high, bracket_low) = theoretical_bounds(r_h, r_l, shape)?;
    let within = |d: f64, b: &BoundsReport| d >= b.lower - tolerance && d <= b.upper + tolerance;
    Ok(RefinementSummary {
        high_matches_baseline: (high.slope - base.slope).abs() <= tolerance,
        high_in_bracket: within(high.slope, &bracket_high),
        low_in_bracket: within(low.slope, &bracket_low),
        high,
        low,
        baseline: base,
        bracket_high,
        bracket_low,
        tolerance,
    })
}
