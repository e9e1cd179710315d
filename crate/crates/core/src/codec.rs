//! QAM constellations, zero-padded block encoding and two-layer superposition.
//!
//! Index order is Gray: the high bits of an index select the in-phase level,
//! the low bits the quadrature level, each through a reflected Gray code, and
//! level position 0 is the most negative amplitude. Index 0 of 4-QAM is
//! therefore `(-1-j)/√2` at unit power.

use serde::{Deserialize, Serialize};

use crate::channel::BlockShape;
use crate::{Error, Result, C64};

/// A finite QAM alphabet scaled to a given average power.
#[derive(Clone, Debug, PartialEq)]
pub struct Constellation {
    points: Vec<C64>,
    avg_power: f64,
    min_dist_sq: f64,
}

impl Constellation {
    pub fn points(&self) -> &[C64] {
        &self.points
    }

    pub fn size(&self) -> usize {
        self.points.len()
    }

    pub fn avg_power(&self) -> f64 {
        self.avg_power
    }

    pub fn min_dist_sq(&self) -> f64 {
        self.min_dist_sq
    }

    /// `max |x|` over the alphabet.
    pub fn peak_amplitude(&self) -> f64 {
        self.points.iter().map(|p| p.norm()).fold(0.0, f64::max)
    }

    pub fn point(&self, index: usize) -> Result<C64> {
        self.points.get(index).copied().ok_or(Error::SymbolOutOfRange {
            index,
            size: self.size(),
        })
    }

    /// Rate exponent actually carried at `snr`: `log2(M) / log2(snr)`.
    pub fn rate_exponent(&self, snr: f64) -> f64 {
        (self.size() as f64).log2() / snr.log2()
    }
}

fn gray_to_binary(mut g: usize) -> usize {
    let mut b = g;
    while g > 1 {
        g >>= 1;
        b ^= g;
    }
    b
}

/// Builds `M`-QAM at average power `power`.
///
/// `M` must be a power of two. Even `log2 M` gives a square grid; odd gives a
/// `2^a × 2^b` rectangle with `a = b + 1` (so `M = 2` is BPSK on the real axis).
pub fn make_qam(size: usize, power: f64) -> Result<Constellation> {
    if size < 2 || !size.is_power_of_two() {
        return Err(Error::NotPowerOfTwo(size));
    }
    if !(power >= 0.0) || !power.is_finite() {
        return Err(Error::InvalidLayer(format!("constellation power must be >= 0, got {power}")));
    }
    let bits = size.trailing_zeros() as usize;
    let q_bits = bits / 2;
    let i_bits = bits - q_bits;
    let (i_levels, q_levels) = (1usize << i_bits, 1usize << q_bits);

    // mean energy of the unscaled odd-integer grid
    let raw_energy = ((i_levels * i_levels - 1) + (q_levels * q_levels - 1)) as f64 / 3.0;
    let scale = (power / raw_energy).sqrt();
    let amplitude = |pos: usize, levels: usize| (2.0 * pos as f64 - (levels as f64 - 1.0)) * scale;

    let points = (0..size)
        .map(|idx| {
            let i_pos = gray_to_binary(idx >> q_bits);
            let q_pos = gray_to_binary(idx & (q_levels - 1));
            C64::new(amplitude(i_pos, i_levels), amplitude(q_pos, q_levels))
        })
        .collect();

    Ok(Constellation {
        points,
        avg_power: power,
        min_dist_sq: 4.0 * scale * scale,
    })
}

/// Constellation size for rate exponent `r̃` at `snr`: `2^round(log2 snr^r̃)`,
/// at least 2. `r̃ = 0` selects the fixed-rate size instead.
pub fn size_for_rate(snr: f64, r_tilde: f64, fixed_size: usize) -> usize {
    if r_tilde == 0.0 {
        return fixed_size;
    }
    let bits = (r_tilde * snr.log2()).round().max(1.0);
    1usize << (bits as u32)
}

/// Maps `N` indices to a length `N+ν` block ending in `ν` zeros.
pub fn encode_block(symbols: &[usize], c: &Constellation, shape: BlockShape) -> Result<Vec<C64>> {
    if symbols.len() != shape.n_data() {
        return Err(Error::LengthMismatch {
            expected: shape.n_data(),
            got: symbols.len(),
        });
    }
    let mut block = Vec::with_capacity(shape.block_len());
    for &s in symbols {
        block.push(c.point(s)?);
    }
    block.resize(shape.block_len(), C64::new(0.0, 0.0));
    Ok(block)
}

/// Effective multiplexing rate `r = r̃·N/(N+ν)` after the padding loss.
pub fn effective_rate(r_tilde: f64, shape: BlockShape) -> f64 {
    r_tilde * shape.n_data() as f64 / shape.block_len() as f64
}

/// Power split and rates of the two layers.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LayerConfig {
    /// High-layer raw rate exponent `r̃_H`; 0 means fixed size `fixed_high`.
    pub r_tilde_h: f64,
    /// Low-layer raw rate exponent `r̃_L`; 0 means fixed size `fixed_low`.
    pub r_tilde_l: f64,
    /// Low-layer power exponent: the low layer gets `snr^(1-β)`.
    pub beta: f64,
    /// Linear SNR, which is also the high-layer power.
    pub snr: f64,
    pub fixed_high: usize,
    pub fixed_low: usize,
    /// Zero power on the low layer, reducing to single-layer transmission.
    #[serde(default)]
    pub low_muted: bool,
}

impl LayerConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.r_tilde_h >= 0.0 && self.r_tilde_h < 1.0) {
            return Err(Error::InvalidLayer(format!("r_tilde_h must be in [0,1), got {}", self.r_tilde_h)));
        }
        if !(self.r_tilde_l >= 0.0) {
            return Err(Error::InvalidLayer(format!("r_tilde_l must be >= 0, got {}", self.r_tilde_l)));
        }
        if !(self.beta > 0.0 && self.beta <= 1.0) {
            return Err(Error::InvalidLayer(format!("beta must be in (0,1], got {}", self.beta)));
        }
        if self.beta <= self.r_tilde_h {
            return Err(Error::PowerSplit {
                beta: self.beta,
                r_tilde_h: self.r_tilde_h,
            });
        }
        if !(self.snr > 1.0) {
            return Err(Error::InvalidLayer(format!("snr must exceed 1, got {}", self.snr)));
        }
        Ok(())
    }

    pub fn high_power(&self) -> f64 {
        self.snr
    }

    pub fn low_power(&self) -> f64 {
        if self.low_muted {
            0.0
        } else {
            self.snr.powf(1.0 - self.beta)
        }
    }

    pub fn high_size(&self) -> usize {
        size_for_rate(self.snr, self.r_tilde_h, self.fixed_high)
    }

    pub fn low_size(&self) -> usize {
        size_for_rate(self.snr, self.r_tilde_l, self.fixed_low)
    }
}

/// One superposed, zero-padded block and the indices that produced it.
#[derive(Clone, Debug, PartialEq)]
pub struct LayeredCodeword {
    pub high_symbols: Vec<usize>,
    pub low_symbols: Vec<usize>,
    pub time_block: Vec<C64>,
}

/// The pair of layer constellations for one configuration.
#[derive(Clone, Debug, PartialEq)]
pub struct SuperpositionCode {
    pub config: LayerConfig,
    pub high: Constellation,
    pub low: Constellation,
}

impl SuperpositionCode {
    pub fn new(config: LayerConfig) -> Result<Self> {
        config.validate()?;
        Ok(SuperpositionCode {
            high: make_qam(config.high_size(), config.high_power())?,
            low: make_qam(config.low_size(), config.low_power())?,
            config,
        })
    }

    /// `x[n] = x_H[n] + x_L[n]` for `n < N`, then `ν` zeros.
    pub fn superpose(&self, high: &[usize], low: &[usize], shape: BlockShape) -> Result<LayeredCodeword> {
        let xh = encode_block(high, &self.high, shape)?;
        let xl = encode_block(low, &self.low, shape)?;
        Ok(LayeredCodeword {
            high_symbols: high.to_vec(),
            low_symbols: low.to_vec(),
            time_block: xh.iter().zip(&xl).map(|(a, b)| a + b).collect(),
        })
    }

    /// `d_min^H - 2·max|x_L|`. Positive means no low-layer symbol can push a
    /// superposed point across a high-layer decision boundary.
    pub fn distance_margin(&self) -> f64 {
        self.high.min_dist_sq().sqrt() - 2.0 * self.low.peak_amplitude()
    }
}

/// Builds the layer constellations for `cfg` and superposes one block.
pub fn superpose(cfg: LayerConfig, high: &[usize], low: &[usize], shape: BlockShape) -> Result<LayeredCodeword> {
    SuperpositionCode::new(cfg)?.superpose(high, low, shape)
}
