//! Receivers: exhaustive ML block detection, the matched-filter burst
//! receiver, and two-stage successive cancellation for superposed layers.
//!
//! Block detection works on a stacked linear model `obs ≈ B·x`. In the
//! frequency domain each antenna contributes `ỹ = Q*·y` and
//! `B = diag(Λ)·Q̃*`, with `Q̃*` the first `N` columns of the unitary DFT; in
//! the time domain `B` is the first `N` columns of the circulant channel. The
//! DFT is unitary, so both give the same metric for every candidate. All
//! `N+ν` rows of every antenna are used.

use crate::channel::{ChannelRealization, ReceivedBlock};
use crate::codec::{Constellation, SuperpositionCode};
use crate::spectral::{dft, frequency_response, theta_pow};
use crate::{Error, Result, C64};

/// Largest number of candidate blocks an exhaustive search will visit.
pub const DEFAULT_SEARCH_BUDGET: u64 = 1_000_000;

#[derive(Clone, Debug, PartialEq)]
pub struct DetectionResult {
    pub high_indices: Vec<usize>,
    /// Present only for two-layer decoding.
    pub low_indices: Option<Vec<usize>>,
    /// Squared residual of the winning candidate (last stage for SIC).
    pub metric: f64,
    /// Candidates whose metric exactly equalled the running best.
    pub ties_broken: u64,
}

/// `obs ≈ B·x` with `B` stored column-major.
#[derive(Clone, Debug)]
pub struct LinearModel {
    rows: usize,
    cols: usize,
    columns: Vec<C64>,
    observation: Vec<C64>,
}

impl LinearModel {
    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn column(&self, c: usize) -> &[C64] {
        &self.columns[c * self.rows..(c + 1) * self.rows]
    }

    pub fn observation(&self) -> &[C64] {
        &self.observation
    }

    /// `‖obs - B·x‖²` for the given symbol values.
    pub fn metric(&self, x: &[C64]) -> f64 {
        let mut r = self.observation.clone();
        for (c, v) in x.iter().enumerate() {
            for (ri, b) in r.iter_mut().zip(self.column(c)) {
                *ri -= b * v;
            }
        }
        r.iter().map(|v| v.norm_sqr()).sum()
    }

    /// Replaces the observation with `obs - B·x`.
    pub fn subtract(&mut self, x: &[C64]) {
        for (c, v) in x.iter().enumerate() {
            let col = c * self.rows;
            for r in 0..self.rows {
                let b = self.columns[col + r];
                self.observation[r] -= b * v;
            }
        }
    }
}

/// Frequency-domain model: `ỹ^{(p)} = Q*y^{(p)}`, `B^{(p)} = diag(Λ^{(p)})·Q̃*`.
pub fn frequency_model(received: &ReceivedBlock, ch: &ChannelRealization) -> LinearModel {
    let shape = ch.shape();
    let len = shape.block_len();
    let n = shape.n_data();
    let rows = shape.m_rx() * len;
    let fr = frequency_response(ch);
    let scale = 1.0 / (len as f64).sqrt();

    let mut columns = vec![C64::new(0.0, 0.0); rows * n];
    for (p, lambdas) in fr.rows().enumerate() {
        for c in 0..n {
            for k in 0..len {
                columns[c * rows + p * len + k] = lambdas[k] * theta_pow(k * c, len) * scale;
            }
        }
    }
    let observation = received.rows().flat_map(dft).collect();
    LinearModel {
        rows,
        cols: n,
        columns,
        observation,
    }
}

/// Time-domain model: the first `N` columns of each antenna's circulant.
pub fn time_model(received: &ReceivedBlock, ch: &ChannelRealization) -> LinearModel {
    let shape = ch.shape();
    let len = shape.block_len();
    let n = shape.n_data();
    let rows = shape.m_rx() * len;
    let mut columns = vec![C64::new(0.0, 0.0); rows * n];
    for (p, taps) in ch.rows().enumerate() {
        for c in 0..n {
            // column c holds the taps starting at row c; c + ν < len, no wrap
            for (m, h) in taps.iter().enumerate() {
                columns[c * rows + p * len + c + m] = *h;
            }
        }
    }
    LinearModel {
        rows,
        cols: n,
        columns,
        observation: received.rows().flatten().copied().collect(),
    }
}

fn check_budget(size: usize, n: usize, budget: u64) -> Result<()> {
    let candidates = (size as u128).checked_pow(n as u32).unwrap_or(u128::MAX);
    if candidates > budget as u128 {
        return Err(Error::BudgetExceeded { candidates, budget });
    }
    Ok(())
}

/// Exhaustive minimum-distance search over `points^cols`.
///
/// Candidates are visited in lexicographic index order and only a strictly
/// smaller metric replaces the incumbent, so exact ties resolve to the
/// lexicographically lowest sequence.
pub fn exhaustive_search(model: &LinearModel, points: &[C64], budget: u64) -> Result<(Vec<usize>, f64, u64)> {
    let n = model.cols;
    let m = points.len();
    let rows = model.rows;
    check_budget(m, n, budget)?;
    if n == 0 {
        let metric = model.observation.iter().map(|v| v.norm_sqr()).sum();
        return Ok((Vec::new(), metric, 0));
    }

    // contrib[(c*m + s)*rows + r] = B[r][c]·point_s
    let mut contrib = vec![C64::new(0.0, 0.0); n * m * rows];
    for c in 0..n {
        let col = model.column(c);
        for (s, p) in points.iter().enumerate() {
            let base = (c * m + s) * rows;
            for r in 0..rows {
                contrib[base + r] = col[r] * p;
            }
        }
    }

    // residual[d] = obs - Σ_{c<d} contrib[c][idx[c]], for d = 0..n-1; the
    // last digit is swept inline
    let last = n - 1;
    let mut residual = vec![C64::new(0.0, 0.0); n * rows];
    residual[..rows].copy_from_slice(&model.observation);
    let mut idx = vec![0usize; n];
    let refill = |residual: &mut [C64], idx: &[usize], from: usize| {
        for d in from..last {
            let base = (d * m + idx[d]) * rows;
            let (done, rest) = residual.split_at_mut((d + 1) * rows);
            let prev = &done[d * rows..];
            for r in 0..rows {
                rest[r] = prev[r] - contrib[base + r];
            }
        }
    };
    refill(&mut residual, &idx, 0);

    let mut best = f64::INFINITY;
    let mut best_idx = idx.clone();
    let mut ties = 0u64;
    loop {
        let prefix = &residual[last * rows..];
        for s in 0..m {
            let c = &contrib[(last * m + s) * rows..][..rows];
            let metric: f64 = prefix.iter().zip(c).map(|(a, b)| (a - b).norm_sqr()).sum();
            if metric < best {
                best = metric;
                idx[last] = s;
                best_idx.copy_from_slice(&idx);
            } else if metric == best {
                ties += 1;
            }
        }

        let mut d = last;
        loop {
            if d == 0 {
                return Ok((best_idx, best, ties));
            }
            d -= 1;
            idx[d] += 1;
            if idx[d] < m {
                break;
            }
            idx[d] = 0;
        }
        refill(&mut residual, &idx, d);
    }
}

/// Exhaustive ML detection in the frequency domain over all `M^N` blocks.
pub fn ml_detect(
    received: &ReceivedBlock,
    ch: &ChannelRealization,
    c: &Constellation,
    budget: u64,
) -> Result<DetectionResult> {
    let model = frequency_model(received, ch);
    let (high_indices, metric, ties_broken) = exhaustive_search(&model, c.points(), budget)?;
    Ok(DetectionResult {
        high_indices,
        low_indices: None,
        metric,
        ties_broken,
    })
}

/// Same search with the time-domain metric `‖y - H·x‖²`.
pub fn ml_detect_time(
    received: &ReceivedBlock,
    ch: &ChannelRealization,
    c: &Constellation,
    budget: u64,
) -> Result<DetectionResult> {
    let model = time_model(received, ch);
    let (high_indices, metric, ties_broken) = exhaustive_search(&model, c.points(), budget)?;
    Ok(DetectionResult {
        high_indices,
        low_indices: None,
        metric,
        ties_broken,
    })
}

/// Single-symbol burst receiver: `argmin_s ‖y - h·s‖²` over all antennas.
///
/// `burst` must hold `ν+1` samples per antenna: one symbol followed by `ν`
/// zeros, so every tap delivers its own copy of the symbol.
pub fn matched_filter_detect(burst: &ReceivedBlock, ch: &ChannelRealization, c: &Constellation) -> Result<usize> {
    let n_taps = ch.shape().n_taps();
    if burst.shape().block_len() != n_taps || burst.shape().m_rx() != ch.shape().m_rx() {
        return Err(Error::LengthMismatch {
            expected: n_taps,
            got: burst.shape().block_len(),
        });
    }
    // ‖y - h s‖² = ‖y‖² - 2 Re(s* h^H y) + |s|² ‖h‖²; only the last two vary with s
    let mut corr = C64::new(0.0, 0.0);
    let mut gain = 0.0;
    for (taps, y) in ch.rows().zip(burst.rows()) {
        for (h, v) in taps.iter().zip(y) {
            corr += h.conj() * v;
            gain += h.norm_sqr();
        }
    }
    let mut best = (f64::INFINITY, 0);
    for (i, s) in c.points().iter().enumerate() {
        let metric = s.norm_sqr() * gain - 2.0 * (s.conj() * corr).re;
        if metric < best.0 {
            best = (metric, i);
        }
    }
    Ok(best.1)
}

/// Two-stage decoding of a superposed block.
///
/// Stage 1 searches the high layer treating the low layer as noise. Stage 2
/// subtracts the stage-1 decision (right or wrong) and searches the low layer.
pub fn sic_decode(
    received: &ReceivedBlock,
    ch: &ChannelRealization,
    code: &SuperpositionCode,
    budget: u64,
) -> Result<DetectionResult> {
    let n = ch.shape().n_data();
    check_budget(code.high.size(), n, budget)?;
    check_budget(code.low.size(), n, budget)?;

    let mut model = frequency_model(received, ch);
    let (high, _, ties_high) = exhaustive_search(&model, code.high.points(), budget)?;
    let x_high: Vec<C64> = high.iter().map(|&i| code.high.points()[i]).collect();
    model.subtract(&x_high);
    let (low, metric, ties_low) = exhaustive_search(&model, code.low.points(), budget)?;
    Ok(DetectionResult {
        high_indices: high,
        low_indices: Some(low),
        metric,
        ties_broken: ties_high + ties_low,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{apply_channel, sample_channel, BlockShape};
    use crate::codec::{encode_block, make_qam, LayerConfig};
    use crate::rng::trial_rng;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    #[test]
    fn noiseless_recovery() {
        let shape = BlockShape::siso(3, 1).unwrap();
        let qam = make_qam(4, 10.0).unwrap();
        for t in 0..50 {
            let mut rng = trial_rng(3, 0, t);
            let ch = sample_channel(&mut rng, shape);
            let sym = [(t % 4) as usize, ((t / 4) % 4) as usize, 2];
            let x = encode_block(&sym, &qam, shape).unwrap();
            let y = apply_channel(&x, &ch, 0.0, &mut rng).unwrap();
            let d = ml_detect(&y, &ch, &qam, DEFAULT_SEARCH_BUDGET).unwrap();
            assert_eq!(d.high_indices, sym);
            assert!(d.metric < 1e-20);
        }
    }

    #[test]
    fn difference_channel_noiseless() {
        // Λ_0 = 0 but three other rows survive
        let shape = BlockShape::siso(3, 1).unwrap();
        let ch = ChannelRealization::siso(shape, &[c(1.0), c(-1.0)]).unwrap();
        let qam = make_qam(4, 1.0).unwrap();
        let x = encode_block(&[1, 3, 2], &qam, shape).unwrap();
        let y = apply_channel(&x, &ch, 0.0, &mut trial_rng(0, 0, 0)).unwrap();
        assert_eq!(ml_detect(&y, &ch, &qam, 1000).unwrap().high_indices, vec![1, 3, 2]);
        assert_eq!(ml_detect_time(&y, &ch, &qam, 1000).unwrap().high_indices, vec![1, 3, 2]);
    }

    #[test]
    fn budget_guard() {
        let shape = BlockShape::siso(3, 1).unwrap();
        let ch = sample_channel(&mut trial_rng(0, 0, 0), shape);
        let qam = make_qam(16, 1.0).unwrap();
        let x = encode_block(&[0, 0, 0], &qam, shape).unwrap();
        let y = apply_channel(&x, &ch, 1.0, &mut trial_rng(0, 0, 1)).unwrap();
        assert_eq!(
            ml_detect(&y, &ch, &qam, 4095).unwrap_err(),
            Error::BudgetExceeded { candidates: 4096, budget: 4095 }
        );
    }

    #[test]
    fn ties_resolve_lexicographically() {
        // zero channel: every candidate has the same metric
        let shape = BlockShape::siso(2, 1).unwrap();
        let ch = ChannelRealization::siso(shape, &[c(0.0), c(0.0)]).unwrap();
        let qam = make_qam(4, 1.0).unwrap();
        let y = ReceivedBlock::from_rows(shape, &[vec![c(0.3); 3]]).unwrap();
        let d = ml_detect_time(&y, &ch, &qam, 100).unwrap();
        assert_eq!(d.high_indices, vec![0, 0]);
        assert_eq!(d.ties_broken, 15);
    }

    #[test]
    fn matched_filter_noiseless() {
        let shape = BlockShape::new(1, 1, 2).unwrap();
        let qam = make_qam(16, 5.0).unwrap();
        let mut rng = trial_rng(5, 0, 0);
        let ch = sample_channel(&mut rng, shape);
        for s in 0..16 {
            let x = encode_block(&[s], &qam, shape).unwrap();
            let y = apply_channel(&x, &ch, 0.0, &mut rng).unwrap();
            assert_eq!(matched_filter_detect(&y, &ch, &qam).unwrap(), s);
        }
    }

    #[test]
    fn matched_filter_flat() {
        let shape = BlockShape::siso(1, 1).unwrap();
        let ch = ChannelRealization::siso(shape, &[c(1.0), c(0.0)]).unwrap();
        let qam = make_qam(4, 2.0).unwrap();
        let y = ReceivedBlock::from_rows(shape, &[vec![C64::new(0.9, -1.2), c(0.0)]]).unwrap();
        // nearest point to 0.9 - 1.2j among (±1 ± j)
        let want = qam
            .points()
            .iter()
            .position(|p| *p == C64::new(1.0, -1.0))
            .unwrap();
        assert_eq!(matched_filter_detect(&y, &ch, &qam).unwrap(), want);
    }

    #[test]
    fn sic_flat_noiseless() {
        let shape = BlockShape::siso(3, 1).unwrap();
        let ch = ChannelRealization::siso(shape, &[c(1.0), c(0.0)]).unwrap();
        let code = SuperpositionCode::new(LayerConfig {
            r_tilde_h: 0.0,
            r_tilde_l: 0.0,
            beta: 0.5,
            snr: 100.0,
            fixed_high: 4,
            fixed_low: 4,
            low_muted: false,
        })
        .unwrap();
        for t in 0..64 {
            let high = [t % 4, (t / 4) % 4, (t / 16) % 4];
            let low = [(t + 1) % 4, (t / 2) % 4, (t / 3) % 4];
            let cw = code.superpose(&high, &low, shape).unwrap();
            let y = apply_channel(&cw.time_block, &ch, 0.0, &mut trial_rng(0, 0, 0)).unwrap();
            let d = sic_decode(&y, &ch, &code, 1000).unwrap();
            assert_eq!(d.high_indices, high);
            assert_eq!(d.low_indices.as_deref(), Some(&low[..]));
        }
    }
}
