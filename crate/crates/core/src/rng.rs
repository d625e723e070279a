//! Seed derivation for reproducible, order-independent trials.
//!
//! Every random stream is a ChaCha8 generator seeded from a 64-bit key. Keys
//! are derived by folding `(master_seed, point, trial, stream)` through the
//! SplitMix64 finalizer:
//!
//! ```text
//! h0 = mix(master_seed)
//! h1 = mix(h0 ^ point)
//! h2 = mix(h1 ^ trial)
//! key = mix(h2 ^ stream)
//! ```
//!
//! where `mix(z)` adds the golden-ratio increment `0x9E3779B97F4A7C15` and
//! applies the standard SplitMix64 avalanche. This function is part of the
//! reproducibility contract and must not change.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type TrialRng = ChaCha8Rng;

/// Independent random streams within one trial.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Stream {
    Partition = 1,
    Graph = 2,
    Features = 3,
    PowerIteration = 4,
}

pub fn splitmix64(z: u64) -> u64 {
    let mut z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn derive_seed(master_seed: u64, point: u64, trial: u64, stream: Stream) -> u64 {
    let h = splitmix64(master_seed);
    let h = splitmix64(h ^ point);
    let h = splitmix64(h ^ trial);
    splitmix64(h ^ stream as u64)
}

pub fn rng_from_seed(seed: u64) -> TrialRng {
    ChaCha8Rng::seed_from_u64(seed)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn splitmix_reference_values() {
        // first outputs of the reference SplitMix64 generator seeded with 0
        assert_eq!(splitmix64(0), 0xE220_A839_7B1D_CDAF);
        assert_eq!(splitmix64(0x9E37_79B9_7F4A_7C15), 0x6E78_9E6A_A1B9_65F4);
    }

    #[test]
    fn streams_and_trials_differ() {
        let a = derive_seed(7, 0, 0, Stream::Graph);
        assert_ne!(a, derive_seed(7, 0, 1, Stream::Graph));
        assert_ne!(a, derive_seed(7, 0, 0, Stream::Features));
        assert_ne!(a, derive_seed(7, 1, 0, Stream::Graph));
        assert_ne!(a, derive_seed(8, 0, 0, Stream::Graph));
        assert_eq!(a, derive_seed(7, 0, 0, Stream::Graph));
    }
}
