use serde::{Deserialize, Serialize};

use crate::channel::BlockShape;
use crate::codec::{effective_rate, size_for_rate, LayerConfig};
use crate::detection::DEFAULT_SEARCH_BUDGET;
use crate::{Error, Result};

/// Transmission scheme and matching receiver.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    /// Zero-padded QAM, exhaustive ML over the block.
    SingleLayerMl,
    /// One symbol per `ν+1` slots, matched-filter detection per symbol.
    MatchedFilter,
    /// Two superposed QAM layers, two-stage SIC.
    SuperpositionSic,
}

impl Scheme {
    pub fn layers(&self) -> usize {
        match self {
            Scheme::SuperpositionSic => 2,
            _ => 1,
        }
    }
}

/// How constellation sizes are chosen at each SNR.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RateMode {
    /// Same constellation(s) at every SNR point.
    Fixed {
        high_size: usize,
        #[serde(default = "default_size")]
        low_size: usize,
    },
    /// `M = 2^round(log2 snr^r̃)` per point; `r̃ = 0` falls back to `fixed_size`.
    Scaling {
        r_tilde_h: f64,
        #[serde(default)]
        r_tilde_l: f64,
        #[serde(default = "default_size")]
        fixed_size: usize,
    },
}

fn default_size() -> usize {
    4
}

impl RateMode {
    /// Target raw rate exponents `(r̃_H, r̃_L)`; zero in fixed mode.
    pub fn rate_exponents(&self) -> (f64, f64) {
        match *self {
            RateMode::Fixed { .. } => (0.0, 0.0),
            RateMode::Scaling { r_tilde_h, r_tilde_l, .. } => (r_tilde_h, r_tilde_l),
        }
    }

    /// Constellation sizes `(M_H, M_L)` at linear `snr`.
    pub fn sizes(&self, snr: f64) -> (usize, usize) {
        match *self {
            RateMode::Fixed { high_size, low_size } => (high_size, low_size),
            RateMode::Scaling {
                r_tilde_h,
                r_tilde_l,
                fixed_size,
            } => (
                size_for_rate(snr, r_tilde_h, fixed_size),
                size_for_rate(snr, r_tilde_l, fixed_size),
            ),
        }
    }
}

/// Per-point stopping rule.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrialBudget {
    pub max_trials: u64,
    /// Stop a point once every layer has at least this many block errors.
    #[serde(default = "default_target_errors")]
    pub target_errors: u64,
}

fn default_target_errors() -> u64 {
    200
}

fn default_budget() -> u64 {
    DEFAULT_SEARCH_BUDGET
}

/// Everything that determines an [`ErrorCurve`](super::ErrorCurve).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub shape: BlockShape,
    pub scheme: Scheme,
    pub rate_mode: RateMode,
    /// Low-layer power exponent; superposition only. Defaults to `r̃_H + 0.1`.
    #[serde(default)]
    pub beta: Option<f64>,
    pub snr_grid_db: Vec<f64>,
    pub trials: TrialBudget,
    pub master_seed: u64,
    /// Slope-fit window in dB. Defaults to the top half of the grid.
    #[serde(default)]
    pub fit_window_db: Option<(f64, f64)>,
    #[serde(default = "default_budget")]
    pub search_budget: u64,
}

impl SweepConfig {
    /// Checks the configuration and fills in derived defaults.
    pub fn resolved(mut self) -> Result<Self> {
        let invalid = |msg: String| Err(Error::InvalidConfig(msg));
        if self.snr_grid_db.is_empty() {
            return invalid("snr_grid_db is empty".into());
        }
        if self.snr_grid_db.iter().any(|v| !v.is_finite()) {
            return invalid("snr_grid_db must be finite".into());
        }
        if self.snr_grid_db.windows(2).any(|w| w[0] >= w[1]) {
            return invalid("snr_grid_db must be strictly ascending".into());
        }
        if self.snr_grid_db[0] <= 0.0 {
            return invalid("snr_grid_db values must be above 0 dB".into());
        }
        if self.trials.max_trials == 0 {
            return invalid("trials.max_trials must be at least 1".into());
        }
        if self.trials.target_errors == 0 {
            return invalid("trials.target_errors must be at least 1".into());
        }

        let (r_h, r_l) = self.rate_mode.rate_exponents();
        if !(0.0..1.0).contains(&r_h) || r_l < 0.0 {
            return invalid(format!("rate exponents out of range: r_tilde_h = {r_h}, r_tilde_l = {r_l}"));
        }
        match self.rate_mode {
            RateMode::Fixed { high_size, low_size } => {
                for s in [high_size, low_size] {
                    if s < 2 || !s.is_power_of_two() {
                        return Err(Error::NotPowerOfTwo(s));
                    }
                }
            }
            RateMode::Scaling { fixed_size, .. } => {
                if fixed_size < 2 || !fixed_size.is_power_of_two() {
                    return Err(Error::NotPowerOfTwo(fixed_size));
                }
            }
        }

        let shape = self.shape;
        let limit = shape.n_data() as f64 / shape.block_len() as f64;
        let total = effective_rate(r_h, shape)
            + if self.scheme == Scheme::SuperpositionSic {
                effective_rate(r_l, shape)
            } else {
                0.0
            };
        if total > limit + 1e-12 {
            return Err(Error::RateOutOfRange { total, limit });
        }

        match self.scheme {
            Scheme::SuperpositionSic => {
                let beta = *self.beta.get_or_insert(r_h + 0.1);
                if !(beta > 0.0 && beta <= 1.0) {
                    return invalid(format!("beta must be in (0,1], got {beta}"));
                }
                if beta <= r_h {
                    return Err(Error::PowerSplit { beta, r_tilde_h: r_h });
                }
            }
            _ => {
                if self.beta.is_some() {
                    return invalid("beta only applies to superposition_sic".into());
                }
                if r_l != 0.0 {
                    return invalid("r_tilde_l only applies to superposition_sic".into());
                }
            }
        }

        if self.fit_window_db.is_none() {
            let g = &self.snr_grid_db;
            self.fit_window_db = Some((g[(g.len() - 1) / 2], g[g.len() - 1]));
        }
        if let Some((lo, hi)) = self.fit_window_db {
            if !(lo <= hi) {
                return invalid(format!("fit window ({lo}, {hi}) is empty"));
            }
        }

        // exhaustive search must fit at the largest constellation in the sweep
        let snr_max = db_to_linear(*self.snr_grid_db.last().unwrap());
        let (m_h, m_l) = self.rate_mode.sizes(snr_max);
        let n = match self.scheme {
            Scheme::MatchedFilter => 1,
            _ => shape.n_data(),
        };
        let mut largest = m_h;
        if self.scheme == Scheme::SuperpositionSic {
            largest = largest.max(m_l);
        }
        let candidates = (largest as u128).checked_pow(n as u32).unwrap_or(u128::MAX);
        if candidates > self.search_budget as u128 {
            return Err(Error::BudgetExceeded {
                candidates,
                budget: self.search_budget,
            });
        }
        Ok(self)
    }

    /// Layer setup at one SNR point (superposition only).
    pub fn layer_config(&self, snr: f64) -> Option<LayerConfig> {
        if self.scheme != Scheme::SuperpositionSic {
            return None;
        }
        let (r_tilde_h, r_tilde_l) = self.rate_mode.rate_exponents();
        let (fixed_high, fixed_low) = match self.rate_mode {
            RateMode::Fixed { high_size, low_size } => (high_size, low_size),
            RateMode::Scaling { fixed_size, .. } => (fixed_size, fixed_size),
        };
        Some(LayerConfig {
            r_tilde_h,
            r_tilde_l,
            beta: self.beta.unwrap_or(r_tilde_h + 0.1),
            snr,
            fixed_high,
            fixed_low,
            low_muted: false,
        })
    }
}

pub(crate) fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}
