//! Deterministic random streams keyed by experiment coordinates.

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use sha2::{Digest, Sha256};

/// Independent stream domains so circuit generation, layout shuffles and shot
/// sampling never share random numbers.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Domain {
    Circuit = 1,
    Layout = 2,
    Shots = 3,
}

/// A reproducible pseudorandom stream for one `(seed, domain, index)` key.
///
/// Identical keys always produce identical streams, whatever thread they run on.
pub type RngStream = ChaCha20Rng;

pub fn stream(base_seed: u64, domain: Domain, index: u64) -> RngStream {
    substream(base_seed, domain, index, 0)
}

/// Stream for a sub-unit (for example one shot) of the keyed item.
pub fn substream(base_seed: u64, domain: Domain, index: u64, sub: u64) -> RngStream {
    let mut h = Sha256::new();
    h.update(base_seed.to_le_bytes());
    h.update((domain as u64).to_le_bytes());
    h.update(index.to_le_bytes());
    let key: [u8; 32] = h.finalize().into();
    let mut rng = ChaCha20Rng::from_seed(key);
    rng.set_stream(sub);
    rng
}
