//! Deterministic random streams.
//!
//! Every Monte Carlo trial owns a generator derived from `(seed, stream, trial)`,
//! so a trial can be replayed in isolation and results do not depend on how
//! trials are split across worker threads.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type TrialRng = ChaCha8Rng;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Generator for one trial of one stream.
pub fn trial_rng(seed: u64, stream: u64, trial: u64) -> TrialRng {
    let mut key = [0u8; 32];
    let words = [
        splitmix64(seed),
        splitmix64(seed ^ splitmix64(stream)),
        splitmix64(trial.wrapping_add(0x5851_F42D_4C95_7F2D)),
        splitmix64(stream.rotate_left(17) ^ trial),
    ];
    for (chunk, w) in key.chunks_exact_mut(8).zip(words) {
        chunk.copy_from_slice(&w.to_le_bytes());
    }
    ChaCha8Rng::from_seed(key)
}

/// Generator for a named, non-trial purpose (scenario generation and similar).
pub fn stream_rng(seed: u64, stream: u64) -> TrialRng {
    trial_rng(seed, stream, u64::MAX)
}

/// Well-known stream identifiers.
pub mod streams {
    pub const WSN_DEPLOYMENT: u64 = 1;
    pub const JAMMER_DEPLOYMENT: u64 = 2;
    pub const CALIBRATION_H0: u64 = 10;
    pub const VALIDATION_H0: u64 = 11;
    pub const DETECTION_H1: u64 = 12;
    pub const EQUIVALENCE_H0: u64 = 20;
    pub const EQUIVALENCE_H1: u64 = 21;
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn streams_are_reproducible_and_distinct() {
        let a: u64 = trial_rng(7, 1, 3).random();
        let b: u64 = trial_rng(7, 1, 3).random();
        let c: u64 = trial_rng(7, 1, 4).random();
        let d: u64 = trial_rng(7, 2, 3).random();
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert_ne!(a, d);
    }
}
