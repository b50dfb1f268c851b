//! Seeded random streams.
//!
//! All randomness is drawn from ChaCha8 (`rand_chacha`), which produces the
//! same stream on every platform. A master seed is split into named
//! substreams (`"generate"`, `"split"`, `"boot"`, ...) by selecting the ChaCha
//! stream id from a stable hash of the name, so adding draws to one stage
//! never shifts another.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type SeededRng = ChaCha8Rng;

fn fnv1a(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in bytes {
        h ^= u64::from(*b);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

/// Generator for the named stage of a run seeded with `seed`.
pub fn stream(seed: u64, name: &str) -> SeededRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(fnv1a(name.as_bytes()));
    rng
}

/// Generator for item `index` of a named stage (bootstrap replicate, ...).
pub fn substream(seed: u64, name: &str, index: u64) -> SeededRng {
    let mut key = name.as_bytes().to_vec();
    key.push(b'#');
    key.extend_from_slice(&index.to_le_bytes());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(fnv1a(&key));
    rng
}
