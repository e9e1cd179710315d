use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{db_to_linear, Scheme, SweepConfig};
use super::outage::classify_outage;
use super::stats::{wilson_interval, WILSON_Z};
use crate::channel::{apply_channel, sample_channel, BlockShape};
use crate::codec::{encode_block, make_qam, Constellation, SuperpositionCode};
use crate::detection::{matched_filter_detect, ml_detect, sic_decode};
use crate::rng::trial_rng;
use crate::Result;

/// Trials per work item. Fixed so the stopping point never depends on the
/// worker count.
const BATCH: u64 = 256;
/// Work items evaluated between stopping-rule checks.
const ROUND: u64 = 32;

/// Tallies for one SNR point.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub snr_db: f64,
    pub trials: u64,
    pub errors_high: u64,
    pub errors_low: u64,
    /// Trials whose channel fell in the high layer's outage set.
    pub outage: u64,
    pub p_high: f64,
    pub p_low: f64,
    pub ci_high: (f64, f64),
    pub ci_low: (f64, f64),
    /// Trials in the low layer's outage set (superposition only).
    #[serde(default)]
    pub outage_low: u64,
    /// High-layer errors that happened inside the outage set.
    #[serde(default)]
    pub errors_high_in_outage: u64,
    #[serde(default)]
    pub errors_low_in_outage: u64,
    #[serde(default)]
    pub size_high: usize,
    #[serde(default)]
    pub size_low: usize,
    /// Realized `log2(M_H)/log2(snr)`.
    #[serde(default)]
    pub rate_exponent_high: f64,
    #[serde(default)]
    pub rate_exponent_low: f64,
}

impl CurvePoint {
    /// Fills the derived estimates from the raw counts.
    pub fn from_counts(snr_db: f64, trials: u64, errors_high: u64, errors_low: u64, outage: u64) -> Self {
        let n = trials.max(1) as f64;
        CurvePoint {
            snr_db,
            trials,
            errors_high,
            errors_low,
            outage,
            p_high: errors_high as f64 / n,
            p_low: errors_low as f64 / n,
            ci_high: wilson_interval(errors_high, trials, WILSON_Z),
            ci_low: wilson_interval(errors_low, trials, WILSON_Z),
            outage_low: 0,
            errors_high_in_outage: 0,
            errors_low_in_outage: 0,
            size_high: 0,
            size_low: 0,
            rate_exponent_high: 0.0,
            rate_exponent_low: 0.0,
        }
    }
}

/// Per-point error statistics for a whole sweep.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ErrorCurve {
    pub points: Vec<CurvePoint>,
}

impl ErrorCurve {
    pub fn snr_grid_db(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.snr_db).collect()
    }
}

#[derive(Clone, Copy, Default)]
struct Tally {
    trials: u64,
    errors_high: u64,
    errors_low: u64,
    outage: u64,
    outage_low: u64,
    errors_high_in_outage: u64,
    errors_low_in_outage: u64,
}

impl Tally {
    fn add(&mut self, o: &Tally) {
        self.trials += o.trials;
        self.errors_high += o.errors_high;
        self.errors_low += o.errors_low;
        self.outage += o.outage;
        self.outage_low += o.outage_low;
        self.errors_high_in_outage += o.errors_high_in_outage;
        self.errors_low_in_outage += o.errors_low_in_outage;
    }
}

/// Everything a trial needs at one SNR point.
struct PointPlan {
    index: u64,
    snr: f64,
    high: Constellation,
    code: Option<SuperpositionCode>,
    outage_exp_high: f64,
    outage_exp_low: f64,
}

fn random_indices<R: Rng>(rng: &mut R, n: usize, size: usize) -> Vec<usize> {
    (0..n).map(|_| rng.random_range(0..size)).collect()
}

fn run_trial(cfg: &SweepConfig, plan: &PointPlan, trial: u64) -> Result<Tally> {
    let shape: BlockShape = cfg.shape;
    let mut rng = trial_rng(cfg.master_seed, plan.index, trial);
    let ch = sample_channel(&mut rng, shape);
    let n = shape.n_data();

    let (err_high, err_low) = match cfg.scheme {
        Scheme::SingleLayerMl => {
            let sym = random_indices(&mut rng, n, plan.high.size());
            let x = encode_block(&sym, &plan.high, shape)?;
            let y = apply_channel(&x, &ch, 1.0, &mut rng)?;
            let d = ml_detect(&y, &ch, &plan.high, cfg.search_budget)?;
            (d.high_indices != sym, false)
        }
        Scheme::MatchedFilter => {
            let burst_ch = ch.with_n_data(1)?;
            let burst_shape = burst_ch.shape();
            let sym = random_indices(&mut rng, n, plan.high.size());
            let mut wrong = false;
            for &s in &sym {
                let x = encode_block(&[s], &plan.high, burst_shape)?;
                let y = apply_channel(&x, &burst_ch, 1.0, &mut rng)?;
                wrong |= matched_filter_detect(&y, &burst_ch, &plan.high)? != s;
            }
            (wrong, false)
        }
        Scheme::SuperpositionSic => {
            let code = plan.code.as_ref().expect("superposition plan has a code");
            let high = random_indices(&mut rng, n, code.high.size());
            let low = random_indices(&mut rng, n, code.low.size());
            let cw = code.superpose(&high, &low, shape)?;
            let y = apply_channel(&cw.time_block, &ch, 1.0, &mut rng)?;
            let d = sic_decode(&y, &ch, code, cfg.search_budget)?;
            (d.high_indices != high, d.low_indices.as_deref() != Some(&low[..]))
        }
    };

    let in_outage = classify_outage(&ch, plan.snr, plan.outage_exp_high);
    let in_outage_low = cfg.scheme == Scheme::SuperpositionSic
        && classify_outage(&ch, plan.snr, plan.outage_exp_low);
    Ok(Tally {
        trials: 1,
        errors_high: err_high as u64,
        errors_low: err_low as u64,
        outage: in_outage as u64,
        outage_low: in_outage_low as u64,
        errors_high_in_outage: (err_high && in_outage) as u64,
        errors_low_in_outage: (err_low && in_outage_low) as u64,
    })
}

fn run_batch(cfg: &SweepConfig, plan: &PointPlan, batch: u64) -> Result<Tally> {
    let start = batch * BATCH;
    let end = (start + BATCH).min(cfg.trials.max_trials);
    let mut tally = Tally::default();
    for t in start..end {
        tally.add(&run_trial(cfg, plan, t)?);
    }
    Ok(tally)
}

fn plan_point(cfg: &SweepConfig, index: usize) -> Result<PointPlan> {
    let snr = db_to_linear(cfg.snr_grid_db[index]);
    let (r_h, r_l) = cfg.rate_mode.rate_exponents();
    let (m_h, _) = cfg.rate_mode.sizes(snr);
    let code = match cfg.layer_config(snr) {
        Some(lc) => Some(SuperpositionCode::new(lc)?),
        None => None,
    };
    let high = match &code {
        Some(c) => c.high.clone(),
        None => make_qam(m_h, snr)?,
    };
    let beta = cfg.beta.unwrap_or(0.0);
    Ok(PointPlan {
        index: index as u64,
        snr,
        high,
        code,
        outage_exp_high: 1.0 - r_h,
        outage_exp_low: 1.0 - r_l - beta,
    })
}

fn run_point(cfg: &SweepConfig, index: usize) -> Result<CurvePoint> {
    let plan = plan_point(cfg, index)?;
    let layers = cfg.scheme.layers();
    let n_batches = cfg.trials.max_trials.div_ceil(BATCH);
    let target = cfg.trials.target_errors;
    let done = |t: &Tally| {
        let errs = if layers == 2 {
            t.errors_high.min(t.errors_low)
        } else {
            t.errors_high
        };
        errs >= target
    };

    let mut total = Tally::default();
    let mut next = 0;
    'rounds: while next < n_batches {
        let end = (next + ROUND).min(n_batches);
        let tallies: Vec<Tally> = (next..end)
            .into_par_iter()
            .map(|b| run_batch(cfg, &plan, b))
            .collect::<Result<_>>()?;
        for t in &tallies {
            total.add(t);
            if done(&total) {
                break 'rounds;
            }
        }
        next = end;
    }

    let mut point = CurvePoint::from_counts(
        cfg.snr_grid_db[index],
        total.trials,
        total.errors_high,
        total.errors_low,
        total.outage,
    );
    point.outage_low = total.outage_low;
    point.errors_high_in_outage = total.errors_high_in_outage;
    point.errors_low_in_outage = total.errors_low_in_outage;
    point.size_high = plan.high.size();
    point.rate_exponent_high = plan.high.rate_exponent(plan.snr);
    if let Some(code) = &plan.code {
        point.size_low = code.low.size();
        point.rate_exponent_low = code.low.rate_exponent(plan.snr);
    }
    Ok(point)
}

/// Runs every SNR point of `cfg` on a pool of `workers` threads.
///
/// Each trial draws from its own stream keyed by `(master_seed, point,
/// trial)` and batches are merged in index order, so the curve is identical
/// for any `workers`.
pub fn run_sweep(cfg: &SweepConfig, workers: usize) -> Result<ErrorCurve> {
    let cfg = cfg.clone().resolved()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| crate::Error::InvalidConfig(format!("thread pool: {e}")))?;
    pool.install(|| {
        let points = (0..cfg.snr_grid_db.len())
            .map(|i| run_point(&cfg, i))
            .collect::<Result<_>>()?;
        Ok(ErrorCurve { points })
    })
}
