//! Seed splitting.
//!
//! Every random draw in a run descends from one root seed. Child seeds are
//! derived by mixing the parent with a stream label through SplitMix64, so
//! the scheme `root -> iteration -> generator -> sample` is a pure function
//! of the root and never depends on scheduling order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Stream labels used by the refinement loop.
pub mod stream {
    pub const GENERATOR_INIT: u64 = 0x4745_4e49;
    pub const DISCRIMINATOR_INIT: u64 = 0x4449_5349;
    pub const PROBE: u64 = 0x5052_4f42;
    pub const ITERATION: u64 = 0x4954_4552;
    pub const REINIT: u64 = 0x5245_494e;
    pub const RANDOM_SEARCH: u64 = 0x5241_4e44;
    pub const BENCH_SEED: u64 = 0x4245_4e43;
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Derive a child seed from `parent` for the stream `label`.
pub fn derive(parent: u64, label: u64) -> u64 {
    splitmix64(splitmix64(parent) ^ label.rotate_left(17))
}

/// Derive along a path of labels, e.g. `[ITERATION, 12, 2]`.
pub fn derive_path(root: u64, path: &[u64]) -> u64 {
    path.iter().fold(root, |seed, &label| derive(seed, label))
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
