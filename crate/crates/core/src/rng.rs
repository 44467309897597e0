//! Per-replicate random streams.
//!
//! Every replicate owns two ChaCha8 streams keyed by `(master seed, replicate
//! index)`: the 256-bit key holds the master seed in bytes 0..8 and the
//! replicate index in bytes 8..16 (little endian, remaining bytes zero), and
//! the ChaCha stream id selects the purpose. Distinct keys give independent
//! streams, so results do not depend on which thread runs which replicate.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// What a stream is used for. The discriminant is the ChaCha stream id.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum StreamPurpose {
    /// Draws used to seed `d_hat(0)` before the first iteration.
    Initialization = 1,
    /// Action and reward draws of the main loop.
    Iteration = 2,
}

pub fn replicate_rng(master_seed: u64, replicate: u64, purpose: StreamPurpose) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&master_seed.to_le_bytes());
    key[8..16].copy_from_slice(&replicate.to_le_bytes());
    let mut rng = ChaCha8Rng::from_seed(key);
    rng.set_stream(purpose as u64);
    rng
}

/// A 64-bit label for a replicate, handy in output files. Not used for seeding.
pub fn replicate_seed(master_seed: u64, replicate: u64) -> u64 {
    splitmix64(master_seed ^ splitmix64(replicate))
}

fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
