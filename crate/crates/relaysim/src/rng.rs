//! Seedable random-number streams.
//!
//! Every random quantity in a simulation is drawn from a ChaCha8 stream whose
//! 256-bit key is the SHA-256 digest of the master seed followed by a list of
//! integer tags (SNR index, frame index, link index, purpose). Distinct tag
//! lists give statistically independent streams, so adding a link or changing
//! the worker count never perturbs the numbers drawn for another component.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

/// The generator used throughout the crate.
pub type SimRng = ChaCha8Rng;

/// Tag values naming the purpose of a stream.
pub mod purpose {
    pub const CHANNEL: u64 = 1;
    pub const NOISE: u64 = 2;
    pub const DATA: u64 = 3;
}

/// Derives the independent stream identified by `(seed, tags)`.
pub fn substream(seed: u64, tags: &[u64]) -> SimRng {
    let mut hasher = Sha256::new();
    hasher.update(b"relaysim-stream-v1");
    hasher.update(seed.to_le_bytes());
    for tag in tags {
        hasher.update(tag.to_le_bytes());
    }
    let digest = hasher.finalize();
    let mut key = [0u8; 32];
    key.copy_from_slice(&digest);
    SimRng::from_seed(key)
}

/// Derives a 64-bit child seed from `(seed, tags)`.
pub fn child_seed(seed: u64, tags: &[u64]) -> u64 {
    use rand::RngCore;
    substream(seed, tags).next_u64()
}
