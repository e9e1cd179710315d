use serde::{Deserialize, Serialize};

use super::sweep::ErrorCurve;
use crate::{Error, Result};

/// Two-sided 95% normal quantile.
pub const WILSON_Z: f64 = 1.959_963_984_540_054;

/// Points with fewer errors than this are left out of slope fits.
pub const MIN_FIT_ERRORS: u64 = 10;

/// Wilson score interval for `k` successes in `n` trials.
pub fn wilson_interval(k: u64, n: u64, z: f64) -> (f64, f64) {
    if n == 0 {
        return (0.0, 1.0);
    }
    let nf = n as f64;
    let p = k as f64 / nf;
    let z2 = z * z;
    let denom = 1.0 + z2 / nf;
    let center = (p + z2 / (2.0 * nf)) / denom;
    let half = z * (p * (1.0 - p) / nf + z2 / (4.0 * nf * nf)).sqrt() / denom;
    ((center - half).max(0.0).min(p), (center + half).min(1.0).max(p))
}

/// Half-width of the Wilson interval in units of `z`: one standard error.
pub fn wilson_stderr(k: u64, n: u64) -> f64 {
    let (lo, hi) = wilson_interval(k, n, WILSON_Z);
    (hi - lo) / (2.0 * WILSON_Z)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Layer {
    High,
    Low,
}

/// Fitted diversity order `d̂ = -Δlog10 P / Δ(SNR_dB/10)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiversityEstimate {
    pub slope: f64,
    pub stderr: f64,
    pub fit_window_db: (f64, f64),
    pub points_used: usize,
}

/// Weighted least-squares slope of `log10 p̂` against `SNR_dB/10`.
///
/// Uses the points inside `window_db` (inclusive) with at least
/// [`MIN_FIT_ERRORS`] errors. Each point is weighted by `k/(1-p̂)`, the
/// inverse of the delta-method variance of `ln p̂`. The standard error comes
/// from the weighted residuals and is zero for a two-point fit.
pub fn estimate_diversity(curve: &ErrorCurve, window_db: (f64, f64), layer: Layer) -> Result<DiversityEstimate> {
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    let mut ws = Vec::new();
    for pt in &curve.points {
        if pt.snr_db < window_db.0 || pt.snr_db > window_db.1 {
            continue;
        }
        let (k, p) = match layer {
            Layer::High => (pt.errors_high, pt.p_high),
            Layer::Low => (pt.errors_low, pt.p_low),
        };
        if k < MIN_FIT_ERRORS || p <= 0.0 {
            continue;
        }
        xs.push(pt.snr_db / 10.0);
        ys.push(p.log10());
        ws.push(k as f64 / (1.0 - p).max(f64::EPSILON));
    }
    if xs.len() < 2 {
        return Err(Error::InsufficientData(format!(
            "{} usable point(s) in [{}, {}] dB; need 2 with at least {} errors",
            xs.len(),
            window_db.0,
            window_db.1,
            MIN_FIT_ERRORS
        )));
    }

    let wsum: f64 = ws.iter().sum();
    let xbar = xs.iter().zip(&ws).map(|(x, w)| x * w).sum::<f64>() / wsum;
    let ybar = ys.iter().zip(&ws).map(|(y, w)| y * w).sum::<f64>() / wsum;
    let sxx: f64 = xs.iter().zip(&ws).map(|(x, w)| w * (x - xbar).powi(2)).sum();
    let sxy: f64 = xs
        .iter()
        .zip(&ys)
        .zip(&ws)
        .map(|((x, y), w)| w * (x - xbar) * (y - ybar))
        .sum();
    let b = sxy / sxx;
    let a = ybar - b * xbar;

    let dof = xs.len() as f64 - 2.0;
    let stderr = if dof > 0.0 {
        let ssr: f64 = xs
            .iter()
            .zip(&ys)
            .zip(&ws)
            .map(|((x, y), w)| w * (y - a - b * x).powi(2))
            .sum();
        (ssr / dof / sxx).sqrt()
    } else {
        0.0
    };

    Ok(DiversityEstimate {
        slope: -b,
        stderr,
        fit_window_db: window_db,
        points_used: xs.len(),
    })
}
