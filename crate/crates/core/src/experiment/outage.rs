use rayon::prelude::*;

use super::config::db_to_linear;
use super::sweep::{CurvePoint, ErrorCurve};
use crate::channel::{sample_channel, BlockShape, ChannelRealization};
use crate::rng::trial_rng;
use crate::{Error, Result};

/// Whether every tap on every antenna satisfies `|h|² ≤ snr^(-exponent)`.
///
/// With `exponent = 1 - r̃` this is the outage set that dominates the error
/// probability of a rate-`r̃` layer; its probability behaves like
/// `snr^(-M_r(ν+1)·exponent)`.
pub fn classify_outage(ch: &ChannelRealization, snr: f64, exponent: f64) -> bool {
    let level = snr.powf(-exponent);
    ch.rows().flatten().all(|h| h.norm_sqr() <= level)
}

/// Empirical outage probability on an SNR grid, from `draws` channels per
/// point. The outage count lands in `errors_high` so the curve can be fed to
/// the slope fit directly. Draw `t` at point `i` uses the stream
/// `(master_seed, i, t)`, so the result does not depend on the thread count.
pub fn outage_curve(
    shape: BlockShape,
    snr_grid_db: &[f64],
    exponent: f64,
    draws: u64,
    master_seed: u64,
) -> Result<ErrorCurve> {
    if draws == 0 || snr_grid_db.is_empty() {
        return Err(Error::InvalidConfig("outage curve needs draws and an SNR grid".into()));
    }
    let points = snr_grid_db
        .iter()
        .enumerate()
        .map(|(i, &db)| {
            let snr = db_to_linear(db);
            let hits: u64 = (0..draws)
                .into_par_iter()
                .map(|t| {
                    let ch = sample_channel(&mut trial_rng(master_seed, i as u64, t), shape);
                    classify_outage(&ch, snr, exponent) as u64
                })
                .sum();
            CurvePoint::from_counts(db, draws, hits, 0, hits)
        })
        .collect();
    Ok(ErrorCurve { points })
}
