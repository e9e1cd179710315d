//! Frequency-domain view of the zero-padded ISI channel.
//!
//! With `θ = exp(-2πj/(N+ν))` the circulant channel matrix factors as
//! `H = Q·diag(Λ)·Q*`, where `Q*` is the unitary DFT (entries `θ^{kn}/√(N+ν)`)
//! and
//!
//! ```text
//! Λ_k = Σ_{m=0..ν} h_m θ^{km},   k = 0, …, N+ν-1.
//! ```
//!
//! `Λ(z) = Σ h_m z^m` is a degree-`ν` polynomial, so any `ν+1` of the `Λ_k`
//! determine `h` through a Vandermonde system. Inverting that system gives,
//! for every subset `K` of `ν+1` frequencies and every tap `l`,
//!
//! ```text
//! |h_l|² ≤ ‖a^{(l)}(K)‖² · Σ_{k∈K} |Λ_k|²
//! ```
//!
//! where `a^{(l)}(K)` is row `l` of the inverse. Taking the worst case over all
//! subsets yields a shape-only constant `C_max`, and with it a deterministic
//! statement: fewer than `ν+1` frequencies can have
//! `|Λ_k|² < max_l |h_l|² / ((ν+1)·C_max)`. [`check_structural_lemma`]
//! verifies exactly that.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::io::Write;
use std::sync::{Mutex, OnceLock};

use itertools::Itertools;

use crate::channel::{BlockShape, ChannelRealization};
use crate::{Error, Result, C64};

/// Largest subset count [`structural_bound_constant`] will enumerate.
pub const ENUMERATION_LIMIT: u128 = 1_000_000;

/// `θ^e` for `θ = exp(-2πj/len)`, with the exponent reduced mod `len` first.
pub fn theta_pow(e: usize, len: usize) -> C64 {
    let r = (e % len) as f64;
    C64::from_polar(1.0, -2.0 * PI * r / len as f64)
}

/// Unitary DFT matrix `F[k][n] = θ^{kn}/√len`, row-major. This is `Q*`.
pub fn unitary_dft(len: usize) -> Vec<C64> {
    let scale = 1.0 / (len as f64).sqrt();
    let mut f = Vec::with_capacity(len * len);
    for k in 0..len {
        for n in 0..len {
            f.push(theta_pow(k * n, len) * scale);
        }
    }
    f
}

/// `F·x` for the unitary DFT, evaluated directly.
pub fn dft(x: &[C64]) -> Vec<C64> {
    let len = x.len();
    let scale = 1.0 / (len as f64).sqrt();
    (0..len)
        .map(|k| {
            x.iter()
                .enumerate()
                .map(|(n, v)| v * theta_pow(k * n, len))
                .sum::<C64>()
                * scale
        })
        .collect()
}

/// Per-antenna `Λ_k^{(p)}`, `M_r × (N+ν)` row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct FrequencyResponse {
    shape: BlockShape,
    lambdas: Vec<C64>,
}

impl FrequencyResponse {
    pub fn shape(&self) -> BlockShape {
        self.shape
    }

    pub fn row(&self, p: usize) -> &[C64] {
        let l = self.shape.block_len();
        &self.lambdas[p * l..(p + 1) * l]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[C64]> {
        self.lambdas.chunks(self.shape.block_len())
    }

    /// `|Λ_k^{(p)}|²` for antenna `p`.
    pub fn powers(&self, p: usize) -> Vec<f64> {
        self.row(p).iter().map(|l| l.norm_sqr()).collect()
    }
}

/// Evaluates the tap polynomial on the `N+ν` roots of unity, for every antenna.
pub fn frequency_response(ch: &ChannelRealization) -> FrequencyResponse {
    let shape = ch.shape();
    let len = shape.block_len();
    let mut lambdas = Vec::with_capacity(shape.m_rx() * len);
    for taps in ch.rows() {
        for k in 0..len {
            lambdas.push(
                taps.iter()
                    .enumerate()
                    .map(|(m, h)| h * theta_pow(k * m, len))
                    .sum(),
            );
        }
    }
    FrequencyResponse { shape, lambdas }
}

/// Sets `F` and `G` for one antenna.
#[derive(Clone, Debug, PartialEq)]
pub struct TapClassification {
    /// `F = {k : |Λ_k|² < threshold}`.
    pub small_set: Vec<usize>,
    /// `G = {k : |Λ_k|² ≥ delta·max_l |h_l|²}`.
    pub good_set: Vec<usize>,
    pub threshold: f64,
    pub delta: f64,
    block_len: usize,
}

impl TapClassification {
    /// `G^c`, ascending.
    pub fn weak_set(&self) -> Vec<usize> {
        (0..self.block_len)
            .filter(|k| self.good_set.binary_search(k).is_err())
            .collect()
    }
}

/// Classifies the frequency taps of antenna `p`.
pub fn classify_antenna(
    fr: &FrequencyResponse,
    ch: &ChannelRealization,
    p: usize,
    threshold: f64,
    delta: f64,
) -> TapClassification {
    let powers = fr.powers(p);
    let floor = delta * ch.max_tap_power(p);
    TapClassification {
        small_set: (0..powers.len()).filter(|&k| powers[k] < threshold).collect(),
        good_set: (0..powers.len()).filter(|&k| powers[k] >= floor).collect(),
        threshold,
        delta,
        block_len: powers.len(),
    }
}

/// Classifies every antenna; requires `threshold > 0` and `0 < delta < 1`.
pub fn classify_taps(
    fr: &FrequencyResponse,
    ch: &ChannelRealization,
    threshold: f64,
    delta: f64,
) -> Result<Vec<TapClassification>> {
    if !(threshold > 0.0) || !(delta > 0.0 && delta < 1.0) {
        return Err(Error::InvalidConfig(format!(
            "classification needs threshold > 0 and 0 < delta < 1 (got {threshold}, {delta})"
        )));
    }
    Ok((0..ch.shape().m_rx())
        .map(|p| classify_antenna(fr, ch, p, threshold, delta))
        .collect())
}

/// `Γ_min` and `Γ_max`: the extreme `|Λ_k|²` over the good set of one antenna.
pub fn gamma_extremes(fr: &FrequencyResponse, p: usize, cls: &TapClassification) -> Option<(f64, f64)> {
    let powers = fr.powers(p);
    let mut it = cls.good_set.iter().map(|&k| powers[k]);
    let first = it.next()?;
    Some(it.fold((first, first), |(lo, hi), v| (lo.min(v), hi.max(v))))
}

/// Rows kept by the selection matrix `S`: the `N` strongest frequencies of
/// antenna `p`, ascending. The `ν` weakest are the ones the argument discards.
pub fn selection_rows(fr: &FrequencyResponse, p: usize) -> Vec<usize> {
    let powers = fr.powers(p);
    let mut order: Vec<usize> = (0..powers.len()).collect();
    order.sort_by(|&a, &b| powers[b].total_cmp(&powers[a]).then(a.cmp(&b)));
    let mut keep = order[..fr.shape().n_data()].to_vec();
    keep.sort_unstable();
    keep
}

/// A `(ν+1)`-frequency Vandermonde system and its exact inverse.
#[derive(Clone, Debug, PartialEq)]
pub struct VandermondeSystem {
    pub indices: Vec<usize>,
    /// `V[i][m] = θ^{k_i m}`, row-major `(ν+1)×(ν+1)`.
    pub v_matrix: Vec<C64>,
    /// `A = V⁻¹`, row-major; row `l` is `a^{(l)}`.
    pub inverse: Vec<C64>,
    /// `‖a^{(l)}‖²` for each `l`.
    pub row_norms_sq: Vec<f64>,
}

impl VandermondeSystem {
    pub fn order(&self) -> usize {
        self.indices.len()
    }

    /// Row `a^{(l)}` of the inverse.
    pub fn inverse_row(&self, l: usize) -> &[C64] {
        let n = self.order();
        &self.inverse[l * n..(l + 1) * n]
    }

    pub fn max_row_norm_sq(&self) -> f64 {
        self.row_norms_sq.iter().copied().fold(0.0, f64::max)
    }
}

/// Builds `V` for the frequency set `indices` and inverts it.
///
/// The inverse comes from Lagrange interpolation on the nodes
/// `z_i = θ^{k_i}`: column `j` of `V⁻¹` holds the monomial coefficients of
/// `L_j(z) = Π_{i≠j} (z - z_i)/(z_j - z_i)`.
pub fn vandermonde_system(indices: &[usize], shape: BlockShape) -> Result<VandermondeSystem> {
    let n = shape.n_taps();
    let len = shape.block_len();
    if indices.len() != n {
        return Err(Error::WrongSubsetSize {
            expected: n,
            got: indices.len(),
        });
    }
    for (i, &k) in indices.iter().enumerate() {
        if k >= len {
            return Err(Error::IndexOutOfRange { index: k, len });
        }
        if indices[..i].contains(&k) {
            return Err(Error::DuplicateIndex(k));
        }
    }

    let nodes: Vec<C64> = indices.iter().map(|&k| theta_pow(k, len)).collect();
    let mut v_matrix = Vec::with_capacity(n * n);
    for &k in indices {
        for m in 0..n {
            v_matrix.push(theta_pow(k * m, len));
        }
    }

    let mut inverse = vec![C64::new(0.0, 0.0); n * n];
    for j in 0..n {
        // coefficients of Π_{i≠j}(z - z_i), ascending powers
        let mut poly = vec![C64::new(1.0, 0.0)];
        let mut denom = C64::new(1.0, 0.0);
        for (i, &zi) in nodes.iter().enumerate() {
            if i == j {
                continue;
            }
            let mut next = vec![C64::new(0.0, 0.0); poly.len() + 1];
            for (d, &c) in poly.iter().enumerate() {
                next[d + 1] += c;
                next[d] -= c * zi;
            }
            poly = next;
            denom *= nodes[j] - zi;
        }
        for (m, c) in poly.into_iter().enumerate() {
            inverse[m * n + j] = c / denom;
        }
    }

    let row_norms_sq = inverse
        .chunks(n)
        .map(|row| row.iter().map(|a| a.norm_sqr()).sum())
        .collect();

    Ok(VandermondeSystem {
        indices: indices.to_vec(),
        v_matrix,
        inverse,
        row_norms_sq,
    })
}

/// Recovers `h = V⁻¹·Λ̆` from the `Λ` values at `vs.indices` (same order).
pub fn reconstruct_taps(vs: &VandermondeSystem, lambda_subset: &[C64]) -> Result<Vec<C64>> {
    let n = vs.order();
    if lambda_subset.len() != n {
        return Err(Error::LengthMismatch {
            expected: n,
            got: lambda_subset.len(),
        });
    }
    Ok(vs
        .inverse
        .chunks(n)
        .map(|row| row.iter().zip(lambda_subset).map(|(a, l)| a * l).sum())
        .collect())
}

fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1u128, |acc, i| acc * (n - i) as u128 / (i as u128 + 1))
}

fn bound_cache() -> &'static Mutex<HashMap<(usize, usize), f64>> {
    static CACHE: OnceLock<Mutex<HashMap<(usize, usize), f64>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// `C_max`: the largest `‖a^{(l)}(K)‖²` over every `(ν+1)`-subset `K` of the
/// `N+ν` frequencies and every row `l`.
///
/// Depends only on `(N+ν, ν)` and is cached. Cyclically shifting `K`
/// multiplies the rows of `V⁻¹` by unit-modulus constants, so only subsets
/// containing frequency 0 are enumerated.
pub fn structural_bound_constant(shape: BlockShape) -> Result<f64> {
    let len = shape.block_len();
    let k = shape.n_taps();
    let count = binomial(len, k);
    if count > ENUMERATION_LIMIT {
        return Err(Error::EnumerationTooLarge {
            n: len,
            k,
            count,
            limit: ENUMERATION_LIMIT,
        });
    }
    let key = (len, shape.nu());
    let mut cache = bound_cache().lock().unwrap_or_else(|e| e.into_inner());
    if let Some(&c) = cache.get(&key) {
        return Ok(c);
    }
    let mut c_max: f64 = 0.0;
    for rest in (1..len).combinations(k - 1) {
        let mut subset = Vec::with_capacity(k);
        subset.push(0);
        subset.extend(rest);
        let vs = vandermonde_system(&subset, shape)?;
        c_max = c_max.max(vs.max_row_norm_sq());
    }
    cache.insert(key, c_max);
    Ok(c_max)
}

/// Relative comparability factor `1/((ν+1)·C_max)` used for the good set.
pub fn structural_delta(shape: BlockShape) -> Result<f64> {
    Ok(1.0 / (shape.n_taps() as f64 * structural_bound_constant(shape)?))
}

/// Outcome of the structural check on one antenna.
#[derive(Clone, Debug, PartialEq)]
pub struct AntennaCheck {
    pub antenna: usize,
    /// `max_l |h_l|² / ((ν+1)·C_max)`.
    pub cutoff: f64,
    /// Frequencies strictly below the cutoff.
    pub below: Vec<usize>,
    /// The allowed maximum, `ν`.
    pub bound: usize,
}

impl AntennaCheck {
    pub fn count_below(&self) -> usize {
        self.below.len()
    }

    pub fn pass(&self) -> bool {
        self.below.len() <= self.bound
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LemmaReport {
    pub c_max: f64,
    pub antennas: Vec<AntennaCheck>,
}

impl LemmaReport {
    pub fn pass(&self) -> bool {
        self.antennas.iter().all(AntennaCheck::pass)
    }

    /// Antennas that broke the bound, with the offending frequency sets.
    pub fn violations(&self) -> impl Iterator<Item = &AntennaCheck> {
        self.antennas.iter().filter(|a| !a.pass())
    }
}

/// Checks that at most `ν` frequencies per antenna fall below
/// `max_l |h_l|² / ((ν+1)·C_max)`.
///
/// If `ν+1` of them did, summing over that subset would give
/// `Σ_{k∈K} |Λ_k|² < max_l |h_l|² / C_max`, contradicting the Vandermonde
/// bound. A failure therefore means a bug, not bad luck.
///
/// For `M_r > 1` the check runs independently per antenna. Under the complement
/// of the all-taps-small outage event at least one antenna has a large tap, so
/// that antenna keeps `N` strong frequencies.
pub fn check_structural_lemma(ch: &ChannelRealization) -> Result<LemmaReport> {
    let shape = ch.shape();
    let c_max = structural_bound_constant(shape)?;
    let fr = frequency_response(ch);
    let antennas = (0..shape.m_rx())
        .map(|p| {
            let cutoff = ch.max_tap_power(p) / (shape.n_taps() as f64 * c_max);
            let below = fr
                .powers(p)
                .iter()
                .enumerate()
                .filter(|(_, &v)| v < cutoff)
                .map(|(k, _)| k)
                .collect();
            AntennaCheck {
                antenna: p,
                cutoff,
                below,
                bound: shape.nu(),
            }
        })
        .collect();
    Ok(LemmaReport { c_max, antennas })
}

/// Writes `(trial, report)` pairs as CSV with columns
/// `trial,antenna,count_below,bound,pass`.
pub fn write_lemma_csv<'a, W, I>(out: W, rows: I) -> Result<()>
where
    W: Write,
    I: IntoIterator<Item = (u64, &'a LemmaReport)>,
{
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["trial", "antenna", "count_below", "bound", "pass"])?;
    for (trial, report) in rows {
        for a in &report.antennas {
            w.write_record([
                trial.to_string(),
                a.antenna.to_string(),
                a.count_below().to_string(),
                a.bound.to_string(),
                a.pass().to_string(),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}
