//! Seed derivation. Every random decision in the pipeline draws from a
//! stream derived from one global seed and a stable label, so stages and
//! pairs can be replayed independently.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

/// First 8 bytes (little endian) of `SHA-256(seed_le || label)`.
pub fn derive_seed(global_seed: u64, label: &str) -> u64 {
    let mut h = Sha256::new();
    h.update(global_seed.to_le_bytes());
    h.update(label.as_bytes());
    let digest = h.finalize();
    let mut bytes = [0u8; 8];
    bytes.copy_from_slice(&digest[..8]);
    u64::from_le_bytes(bytes)
}

pub fn stream(global_seed: u64, label: &str) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(global_seed, label))
}
