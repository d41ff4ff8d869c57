//! Counter-based random substreams.
//!
//! Every random quantity of trial `t` comes from its own ChaCha8 stream keyed
//! by `(seed, domain)` with stream number `t`. Results therefore do not depend
//! on which worker runs a trial or in what order, and two sweeps with the same
//! seed see the same channels, bits and noise (paired comparisons).

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u8)]
pub enum Domain {
    /// Run-level LoS phasors.
    Los = 1,
    Channel = 2,
    Bits = 3,
    Noise = 4,
}

pub fn substream(seed: u64, domain: Domain, trial: u64) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    key[8] = domain as u8;
    let mut rng = ChaCha8Rng::from_seed(key);
    rng.set_stream(trial);
    rng
}
