//! Deterministic, platform-independent RNG derivation.
//!
//! Every stochastic stage derives its generator by hashing a list of string
//! parts (run seed, scenario label, iteration, stage tag), so results never
//! depend on thread scheduling or iteration order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

/// 32-byte seed from the SHA-256 of the `\x1f`-joined parts.
pub fn derive_seed(parts: &[&str]) -> [u8; 32] {
    let mut hasher = Sha256::new();
    for (i, part) in parts.iter().enumerate() {
        if i > 0 {
            hasher.update([0x1fu8]);
        }
        hasher.update(part.as_bytes());
    }
    hasher.finalize().into()
}

/// ChaCha8 generator seeded from the hashed parts.
pub fn derive_rng(parts: &[&str]) -> ChaCha8Rng {
    ChaCha8Rng::from_seed(derive_seed(parts))
}
