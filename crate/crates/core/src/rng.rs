//! Counter-based random streams.
//!
//! Every trial gets its own ChaCha stream keyed by `(master_seed, point,
//! trial)`, so results never depend on which worker ran which trial.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Random stream for one trial of one sweep point.
pub fn trial_rng(master_seed: u64, point: u64, trial: u64) -> ChaCha8Rng {
    let mut seed = [0u8; 32];
    seed[..8].copy_from_slice(&master_seed.to_le_bytes());
    seed[8..16].copy_from_slice(&point.to_le_bytes());
    let mut rng = ChaCha8Rng::from_seed(seed);
    rng.set_stream(trial);
    rng
}
