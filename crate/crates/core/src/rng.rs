//! Seeded random streams for experiments.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

/// Generator used for every random draw in the crate.
pub type SeededRng = ChaCha8Rng;

pub fn seeded_rng(seed: u64) -> SeededRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Seed for one grid point: a hash of the master seed, the family name, the
/// sample index, the chain length and the sector charge.
pub fn derive_seed(master: u64, family: &str, sample: u64, chain_length: u64, charge: i64) -> u64 {
    let mut h = Sha256::new();
    h.update(master.to_le_bytes());
    h.update((family.len() as u64).to_le_bytes());
    h.update(family.as_bytes());
    h.update(sample.to_le_bytes());
    h.update(chain_length.to_le_bytes());
    h.update(charge.to_le_bytes());
    let digest = h.finalize();
    let mut bytes = [0u8; 8];
    bytes.copy_from_slice(&digest[..8]);
    u64::from_le_bytes(bytes)
}
