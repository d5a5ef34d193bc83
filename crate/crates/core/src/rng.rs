//! Reproducible random streams.
//!
//! Every random draw in the crate comes from a ChaCha20 stream addressed by
//! `(key, stream index)`. ChaCha is counter-based, so replicate `b` gets the
//! same numbers no matter which worker thread runs it or in what order.
//! Sub-keys for independent purposes (data generation, permutations, ...)
//! are derived with a SplitMix64 finalizer over `(seed, domain)`.
//!
//! Reproducibility is pinned to the exact `rand`/`rand_chacha` versions in
//! the crate manifest; see [`RNG_ID`].

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

/// Identifier of the generator and its pinned crate versions.
pub const RNG_ID: &str = "chacha20 (rand_chacha 0.3.1, rand 0.8.5, rand_distr 0.4.3)";

pub type StreamRng = ChaCha20Rng;

/// Independent generator for stream `index` under `key`.
pub fn stream(key: u64, index: u64) -> StreamRng {
    let mut rng = ChaCha20Rng::seed_from_u64(key);
    rng.set_stream(index);
    rng
}

/// Domain tags for [`derive_key`].
pub mod domain {
    pub const PERMUTATION: u64 = 0x7065_726d;
    pub const SCENARIO: u64 = 0x7363_656e;
    pub const SCALES: u64 = 0x7363_616c;
    pub const SAMPLE: u64 = 0x7361_6d70;
}

/// Mixes `seed`, a domain tag and an index into a new 64-bit key.
pub fn derive_key(seed: u64, domain: u64, index: u64) -> u64 {
    splitmix64(splitmix64(seed ^ splitmix64(domain)) ^ index)
}

fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
