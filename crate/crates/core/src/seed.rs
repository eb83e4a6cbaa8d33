//! Derived-seed scheme. Every random stream in the pipeline is keyed by the
//! master seed, a stream tag, and an ordinal, so rounds can run in any order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Independent random streams drawn from one master seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Stream {
    Holdout = 1,
    RoundRepeats = 2,
    RoundNegatives = 3,
    Classifier = 4,
    FullClassifier = 5,
    Generation = 6,
    Prompts = 7,
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

pub fn derive_seed(master: u64, stream: Stream, ordinal: u64) -> u64 {
    let a = splitmix64(master);
    let b = splitmix64(a ^ (stream as u64).wrapping_mul(0xD6E8_FEB8_6659_FD93));
    splitmix64(b ^ ordinal)
}

pub fn rng_for(master: u64, stream: Stream, ordinal: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(master, stream, ordinal))
}
