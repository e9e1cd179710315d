use num_rational::Rational64;
use serde::{Deserialize, Serialize};

use crate::channel::BlockShape;
use crate::{Error, Result};

/// Diversity bracket `[lower, upper]` for one layer at aggregate rate `rate`.
///
/// `lower = M_r(ν+1)(1 - (N+ν)/N · r)` is what zero-padded QAM achieves;
/// `upper = M_r(ν+1)(1 - r)` is the matched-filter limit. The low layer is
/// evaluated at `r_H + r_L`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundsReport {
    pub lower: f64,
    pub upper: f64,
    pub rate: f64,
    pub nu: usize,
    pub n_data: usize,
    pub m_rx: usize,
}

/// The same bracket in exact rational arithmetic.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ExactBracket {
    pub lower: Rational64,
    pub upper: Rational64,
}

fn bracket(rate: f64, shape: BlockShape) -> BoundsReport {
    let d0 = (shape.m_rx() * shape.n_taps()) as f64;
    let stretch = shape.block_len() as f64 / shape.n_data() as f64;
    BoundsReport {
        lower: d0 * (1.0 - stretch * rate),
        upper: d0 * (1.0 - rate),
        rate,
        nu: shape.nu(),
        n_data: shape.n_data(),
        m_rx: shape.m_rx(),
    }
}

/// Brackets for the high layer (rate `r_h`) and the low layer (rate
/// `r_h + r_l`). Rates must be non-negative with `r_h + r_l ≤ N/(N+ν)`.
pub fn theoretical_bounds(r_h: f64, r_l: f64, shape: BlockShape) -> Result<(BoundsReport, BoundsReport)> {
    let limit = shape.n_data() as f64 / shape.block_len() as f64;
    let total = r_h + r_l;
    if !(r_h >= 0.0 && r_l >= 0.0) || !(total <= limit + 1e-12) {
        return Err(Error::RateOutOfRange { total, limit });
    }
    Ok((bracket(r_h, shape), bracket(total, shape)))
}

fn exact(rate: Rational64, shape: BlockShape) -> ExactBracket {
    let d0 = Rational64::from_integer((shape.m_rx() * shape.n_taps()) as i64);
    let stretch = Rational64::new(shape.block_len() as i64, shape.n_data() as i64);
    let one = Rational64::from_integer(1);
    ExactBracket {
        lower: d0 * (one - stretch * rate),
        upper: d0 * (one - rate),
    }
}

/// [`theoretical_bounds`] over rationals, for exact checks.
pub fn theoretical_bounds_exact(
    r_h: Rational64,
    r_l: Rational64,
    shape: BlockShape,
) -> Result<(ExactBracket, ExactBracket)> {
    let zero = Rational64::from_integer(0);
    let limit = Rational64::new(shape.n_data() as i64, shape.block_len() as i64);
    let total = r_h + r_l;
    if r_h < zero || r_l < zero || total > limit {
        return Err(Error::RateOutOfRange {
            total: *total.numer() as f64 / *total.denom() as f64,
            limit: *limit.numer() as f64 / *limit.denom() as f64,
        });
    }
    Ok((exact(r_h, shape), exact(total, shape)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn examples() {
        let siso = BlockShape::siso(3, 1).unwrap();
        let (h, _) = theoretical_bounds(0.25, 0.0, siso).unwrap();
        assert!((h.lower - 4.0 / 3.0).abs() < 1e-15 && (h.upper - 1.5).abs() < 1e-15);

        let (h, l) = theoretical_bounds(0.0, 0.0, siso).unwrap();
        assert_eq!((h.lower, h.upper, l.lower, l.upper), (2.0, 2.0, 2.0, 2.0));

        let simo = BlockShape::new(3, 1, 2).unwrap();
        let (_, l) = theoretical_bounds(0.1, 0.2, simo).unwrap();
        assert!((l.lower - 2.4).abs() < 1e-12 && (l.upper - 2.8).abs() < 1e-12);

        assert!(matches!(
            theoretical_bounds(0.5, 0.5, siso),
            Err(Error::RateOutOfRange { .. })
        ));
        assert!(theoretical_bounds(-0.1, 0.0, siso).is_err());
    }

    #[test]
    fn exact_examples() {
        let siso = BlockShape::siso(3, 1).unwrap();
        let (h, _) = theoretical_bounds_exact(Rational64::new(1, 4), Rational64::from_integer(0), siso).unwrap();
        assert_eq!(h.lower, Rational64::new(4, 3));
        assert_eq!(h.upper, Rational64::new(3, 2));
        assert!(theoretical_bounds_exact(Rational64::new(1, 2), Rational64::new(1, 2), siso).is_err());
        assert!(theoretical_bounds_exact(Rational64::new(3, 8), Rational64::new(3, 8), siso).is_ok());
    }
}
