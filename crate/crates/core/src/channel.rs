//! Quasi-static Rayleigh ISI channel.
//!
//! A block of `N` data symbols is followed by `ν` zeros and sent through a
//! `ν+1` tap channel that stays fixed for the whole block:
//!
//! ```text
//! y[n] = h_0 x[n] + h_1 x[n-1] + ... + h_ν x[n-ν] + z[n],   z[n] ~ CN(0, 1)
//! ```
//!
//! Because of the zero padding, the linear convolution over the `N+ν`
//! received samples equals multiplication by the `(N+ν)×(N+ν)` circulant
//! matrix built from the taps. Both routes are provided ([`convolve`] and
//! [`circulant_multiply`]) and the tests hold them against each other.
//!
//! Noise always has unit variance; SNR lives entirely in the constellation
//! power.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::{Error, Result, C64};

/// Block geometry: `N` data symbols, memory `ν`, `M_r` receive antennas.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "RawShape", into = "RawShape")]
pub struct BlockShape {
    n_data: usize,
    nu: usize,
    m_rx: usize,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawShape {
    n_data: usize,
    nu: usize,
    #[serde(default = "one")]
    m_rx: usize,
}

fn one() -> usize {
    1
}

impl TryFrom<RawShape> for BlockShape {
    type Error = Error;

    fn try_from(raw: RawShape) -> Result<Self> {
        BlockShape::new(raw.n_data, raw.nu, raw.m_rx)
    }
}

impl From<BlockShape> for RawShape {
    fn from(s: BlockShape) -> Self {
        RawShape {
            n_data: s.n_data,
            nu: s.nu,
            m_rx: s.m_rx,
        }
    }
}

impl BlockShape {
    pub fn new(n_data: usize, nu: usize, m_rx: usize) -> Result<Self> {
        if n_data == 0 {
            return Err(Error::InvalidShape("n_data must be at least 1".into()));
        }
        if m_rx == 0 {
            return Err(Error::InvalidShape("m_rx must be at least 1".into()));
        }
        Ok(BlockShape { n_data, nu, m_rx })
    }

    pub fn siso(n_data: usize, nu: usize) -> Result<Self> {
        Self::new(n_data, nu, 1)
    }

    pub fn n_data(&self) -> usize {
        self.n_data
    }

    pub fn nu(&self) -> usize {
        self.nu
    }

    pub fn m_rx(&self) -> usize {
        self.m_rx
    }

    /// Transmitted block length `N+ν`.
    pub fn block_len(&self) -> usize {
        self.n_data + self.nu
    }

    /// Taps per antenna, `ν+1`.
    pub fn n_taps(&self) -> usize {
        self.nu + 1
    }

    /// Same geometry with a different antenna count.
    pub fn with_m_rx(&self, m_rx: usize) -> Result<Self> {
        Self::new(self.n_data, self.nu, m_rx)
    }
}

/// One draw of the channel: an `M_r × (ν+1)` tap matrix, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct ChannelRealization {
    shape: BlockShape,
    taps: Vec<C64>,
}

impl ChannelRealization {
    /// Builds a realization from explicit taps, one row per antenna.
    pub fn from_rows(shape: BlockShape, rows: &[Vec<C64>]) -> Result<Self> {
        if rows.len() != shape.m_rx() {
            return Err(Error::LengthMismatch {
                expected: shape.m_rx(),
                got: rows.len(),
            });
        }
        let mut taps = Vec::with_capacity(shape.m_rx() * shape.n_taps());
        for row in rows {
            if row.len() != shape.n_taps() {
                return Err(Error::LengthMismatch {
                    expected: shape.n_taps(),
                    got: row.len(),
                });
            }
            if row.iter().any(|h| !h.re.is_finite() || !h.im.is_finite()) {
                return Err(Error::InvalidShape("taps must be finite".into()));
            }
            taps.extend_from_slice(row);
        }
        Ok(ChannelRealization { shape, taps })
    }

    /// Single-antenna convenience constructor.
    pub fn siso(shape: BlockShape, taps: &[C64]) -> Result<Self> {
        Self::from_rows(shape, &[taps.to_vec()])
    }

    pub fn shape(&self) -> BlockShape {
        self.shape
    }

    /// Taps seen by antenna `p`.
    pub fn taps(&self, p: usize) -> &[C64] {
        let k = self.shape.n_taps();
        &self.taps[p * k..(p + 1) * k]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[C64]> {
        self.taps.chunks(self.shape.n_taps())
    }

    /// Same taps viewed under a different block length (e.g. a single-symbol
    /// burst for the matched-filter receiver).
    pub fn with_n_data(&self, n_data: usize) -> Result<Self> {
        Ok(ChannelRealization {
            shape: BlockShape::new(n_data, self.shape.nu(), self.shape.m_rx())?,
            taps: self.taps.clone(),
        })
    }

    /// `max_l |h_l|²` on antenna `p`.
    pub fn max_tap_power(&self, p: usize) -> f64 {
        self.taps(p).iter().map(|h| h.norm_sqr()).fold(0.0, f64::max)
    }

    /// `Σ_p Σ_m |h_m^{(p)}|²`.
    pub fn energy(&self) -> f64 {
        self.taps.iter().map(|h| h.norm_sqr()).sum()
    }
}

/// Received samples, `M_r × (N+ν)` row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct ReceivedBlock {
    shape: BlockShape,
    samples: Vec<C64>,
}

impl ReceivedBlock {
    pub fn from_rows(shape: BlockShape, rows: &[Vec<C64>]) -> Result<Self> {
        if rows.len() != shape.m_rx() {
            return Err(Error::LengthMismatch {
                expected: shape.m_rx(),
                got: rows.len(),
            });
        }
        let mut samples = Vec::with_capacity(shape.m_rx() * shape.block_len());
        for row in rows {
            if row.len() != shape.block_len() {
                return Err(Error::LengthMismatch {
                    expected: shape.block_len(),
                    got: row.len(),
                });
            }
            samples.extend_from_slice(row);
        }
        Ok(ReceivedBlock { shape, samples })
    }

    pub fn shape(&self) -> BlockShape {
        self.shape
    }

    pub fn row(&self, p: usize) -> &[C64] {
        let l = self.shape.block_len();
        &self.samples[p * l..(p + 1) * l]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[C64]> {
        self.samples.chunks(self.shape.block_len())
    }
}

/// One `CN(0,1)` sample: real and imaginary parts each of variance 1/2.
pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    C64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// Draws i.i.d. `CN(0,1)` taps for every antenna.
pub fn sample_channel<R: Rng + ?Sized>(rng: &mut R, shape: BlockShape) -> ChannelRealization {
    let taps = (0..shape.m_rx() * shape.n_taps())
        .map(|_| complex_gaussian(rng))
        .collect();
    ChannelRealization { shape, taps }
}

fn check_padding(x: &[C64], shape: BlockShape) -> Result<()> {
    if x.len() != shape.block_len() {
        return Err(Error::LengthMismatch {
            expected: shape.block_len(),
            got: x.len(),
        });
    }
    if let Some(i) = x[shape.n_data()..].iter().position(|v| *v != C64::new(0.0, 0.0)) {
        return Err(Error::PaddingViolation {
            index: shape.n_data() + i,
            nu: shape.nu(),
        });
    }
    Ok(())
}

/// Linear convolution `Σ_m h_m x[n-m]` truncated to `x.len()` samples.
pub fn convolve(x: &[C64], taps: &[C64]) -> Vec<C64> {
    (0..x.len())
        .map(|n| {
            taps.iter()
                .enumerate()
                .take(n + 1)
                .map(|(m, h)| h * x[n - m])
                .sum()
        })
        .collect()
}

/// The `len × len` circulant matrix with first column `(h_0, …, h_ν, 0, …)`,
/// row-major: `H[r][c] = h_{(r-c) mod len}`.
pub fn circulant(taps: &[C64], len: usize) -> Vec<C64> {
    assert!(taps.len() <= len, "more taps than block length");
    let mut h = vec![C64::new(0.0, 0.0); len * len];
    for r in 0..len {
        for c in 0..len {
            let m = (r + len - c) % len;
            if m < taps.len() {
                h[r * len + c] = taps[m];
            }
        }
    }
    h
}

/// `H·x` with `H = circulant(taps, x.len())`.
pub fn circulant_multiply(x: &[C64], taps: &[C64]) -> Vec<C64> {
    let len = x.len();
    let h = circulant(taps, len);
    h.chunks(len)
        .map(|row| row.iter().zip(x).map(|(a, b)| a * b).sum())
        .collect()
}

/// Sends one zero-padded block through the channel and adds `noise_std·CN(0,1)`.
///
/// Rejects blocks whose last `ν` entries are not exactly zero.
pub fn apply_channel<R: Rng + ?Sized>(
    x_block: &[C64],
    ch: &ChannelRealization,
    noise_std: f64,
    rng: &mut R,
) -> Result<ReceivedBlock> {
    let shape = ch.shape();
    check_padding(x_block, shape)?;
    let mut samples = Vec::with_capacity(shape.m_rx() * shape.block_len());
    for taps in ch.rows() {
        samples.extend(convolve(x_block, taps));
    }
    if noise_std > 0.0 {
        for s in &mut samples {
            *s += complex_gaussian(rng) * noise_std;
        }
    }
    Ok(ReceivedBlock { shape, samples })
}

/// Noiseless received block computed through the circulant matrix instead of
/// the convolution.
pub fn apply_channel_circulant(x_block: &[C64], ch: &ChannelRealization) -> Result<ReceivedBlock> {
    let shape = ch.shape();
    check_padding(x_block, shape)?;
    let samples = ch
        .rows()
        .flat_map(|taps| circulant_multiply(x_block, taps))
        .collect();
    Ok(ReceivedBlock { shape, samples })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::trial_rng;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    #[test]
    fn identity_channel() {
        let shape = BlockShape::siso(3, 1).unwrap();
        let ch = ChannelRealization::siso(shape, &[c(1.0), c(0.0)]).unwrap();
        let mut rng = trial_rng(0, 0, 0);
        let y = apply_channel(&[c(1.0), c(0.0), c(0.0), c(0.0)], &ch, 0.0, &mut rng).unwrap();
        assert_eq!(y.row(0), &[c(1.0), c(0.0), c(0.0), c(0.0)]);
    }

    #[test]
    fn difference_channel_by_hand() {
        let shape = BlockShape::siso(3, 1).unwrap();
        let ch = ChannelRealization::siso(shape, &[c(1.0), c(-1.0)]).unwrap();
        let x = [c(1.0), c(2.0), c(3.0), c(0.0)];
        let mut rng = trial_rng(0, 0, 0);
        let y = apply_channel(&x, &ch, 0.0, &mut rng).unwrap();
        assert_eq!(y.row(0), &[c(1.0), c(1.0), c(1.0), c(-3.0)]);
        let yc = apply_channel_circulant(&x, &ch).unwrap();
        assert_eq!(yc.row(0), y.row(0));
    }

    #[test]
    fn rejects_unpadded_block() {
        let shape = BlockShape::siso(3, 1).unwrap();
        let ch = ChannelRealization::siso(shape, &[c(1.0), c(0.5)]).unwrap();
        let mut rng = trial_rng(0, 0, 0);
        let err = apply_channel(&[c(1.0), c(2.0), c(3.0), c(4.0)], &ch, 0.0, &mut rng).unwrap_err();
        assert_eq!(err, Error::PaddingViolation { index: 3, nu: 1 });
        assert!(matches!(
            apply_channel(&[c(1.0)], &ch, 0.0, &mut rng),
            Err(Error::LengthMismatch { .. })
        ));
    }

    #[test]
    fn shape_contract() {
        let shape = BlockShape::new(4, 2, 2).unwrap();
        let ch = sample_channel(&mut trial_rng(1, 0, 0), shape);
        assert_eq!(ch.rows().count(), 2);
        assert!(ch.rows().all(|r| r.len() == 3));
        assert_eq!(shape.block_len(), 6);
        assert!(BlockShape::new(0, 1, 1).is_err());
        assert!(BlockShape::new(1, 1, 0).is_err());
        assert!(BlockShape::new(1, 0, 1).is_ok());
    }

    #[test]
    fn sampling_is_deterministic() {
        let shape = BlockShape::new(3, 2, 2).unwrap();
        let a = sample_channel(&mut trial_rng(42, 0, 9), shape);
        let b = sample_channel(&mut trial_rng(42, 0, 9), shape);
        assert_eq!(a, b);
    }

    #[test]
    fn shape_serde_validates() {
        let s: BlockShape = serde_json::from_str(r#"{"n_data":3,"nu":1}"#).unwrap();
        assert_eq!(s, BlockShape::siso(3, 1).unwrap());
        assert!(serde_json::from_str::<BlockShape>(r#"{"n_data":0,"nu":1}"#).is_err());
    }
}
