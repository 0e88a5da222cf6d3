//! Counter-based random substreams.
//!
//! Every random draw in a run comes from a ChaCha8 stream addressed by
//! `(seed, purpose, step, index)`: the first three form the key, `index`
//! selects the 64-bit stream id. A particle's mutation at step `p` therefore
//! reads the same numbers whatever thread runs it and in whatever order,
//! which is what makes runs independent of the worker count.

use rand::RngCore;
use rand_chacha::ChaCha8Rng;
use rand::SeedableRng;

pub use rand_chacha::ChaCha8Rng as StreamRng;

/// What a substream is used for. Distinct purposes never share a key.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Purpose {
    Init = 1,
    Mutate = 2,
    Resample = 3,
    Annealing = 4,
    Repeat = 5,
}

const DOMAIN: u64 = 0x7065_726d_736d_6301; // "permsmc\x01"

pub fn substream(seed: u64, purpose: Purpose, step: u64, index: u64) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    key[8..16].copy_from_slice(&(purpose as u64).to_le_bytes());
    key[16..24].copy_from_slice(&step.to_le_bytes());
    key[24..].copy_from_slice(&DOMAIN.to_le_bytes());
    let mut rng = ChaCha8Rng::from_seed(key);
    rng.set_stream(index);
    rng
}

/// Seed of the `repeat`-th independent run derived from a master seed.
pub fn repeat_seed(master: u64, repeat: u64) -> u64 {
    substream(master, Purpose::Repeat, 0, repeat).next_u64()
}
