//! Diversity-embedded transmission over quasi-static Rayleigh ISI channels.
//!
//! The crate simulates zero-padded QAM and two-layer superposed QAM sent
//! through a `ν+1` tap fading channel, detects them with exhaustive
//! maximum-likelihood and successive-cancellation receivers, and estimates
//! the resulting diversity orders by Monte Carlo.
//!
//! Modules, bottom-up:
//!
//! - [`channel`]: tap sampling, zero-padded convolution and the circulant model.
//! - [`spectral`]: the DFT diagonal, tap classification, and the Vandermonde
//!   apparatus behind the deterministic "at least `N` strong taps" check.
//! - [`codec`]: Gray-labelled QAM, rate-to-size mapping and superposition.
//! - [`detection`]: exhaustive ML (time and frequency domain), the
//!   matched-filter receiver and two-stage SIC.
//! - [`experiment`]: SNR sweeps, outage classification, slope fits and the
//!   closed-form diversity brackets.
//!
//! The guide under `book/` walks through the same material with runnable
//! snippets; those snippets are compiled as doctests of this crate.

pub mod channel;
pub mod codec;
pub mod detection;
mod error;
pub mod experiment;
pub mod rng;
pub mod spectral;

pub use error::{Error, Result};

/// Complex baseband sample.
pub type C64 = num_complex::Complex<f64>;

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/channel-model.md")]
    mod channel_model {}
    #[doc = include_str!("../../../book/src/frequency-domain.md")]
    mod frequency_domain {}
    #[doc = include_str!("../../../book/src/structural-lemma.md")]
    mod structural_lemma {}
    #[doc = include_str!("../../../book/src/superposition.md")]
    mod superposition {}
    #[doc = include_str!("../../../book/src/detection.md")]
    mod detection {}
    #[doc = include_str!("../../../book/src/experiments.md")]
    mod experiments {}
}
