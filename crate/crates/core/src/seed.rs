//! Stage-labeled seed derivation.
//!
//! Every pipeline stage draws its randomness from a `ChaCha8` generator seeded
//! by `derive_seed(master, label)`. One top-level seed therefore reproduces the
//! whole pipeline, while distinct stages stay statistically independent.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

/// Derives a stage seed from the master seed and a stage label.
///
/// The derivation is SHA-256 over the little-endian master seed followed by
/// the label bytes, truncated to the first eight bytes.
pub fn derive_seed(master: u64, label: &str) -> u64 {
    let mut hasher = Sha256::new();
    hasher.update(master.to_le_bytes());
    hasher.update(label.as_bytes());
    let digest = hasher.finalize();
    u64::from_le_bytes(digest[..8].try_into().expect("digest is 32 bytes"))
}

/// Seeded generator for one pipeline stage.
pub fn stage_rng(master: u64, label: &str) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(master, label))
}
