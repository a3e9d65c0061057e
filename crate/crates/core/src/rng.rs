//! Deterministic RNG stream derivation.
//!
//! Every stochastic sub-task (a replicate, an assignment draw, one reveal
//! step, one conditional completion) derives its own ChaCha stream from the
//! top-level seed and a path of integer tags. Work items therefore produce
//! identical random draws no matter how the surrounding loops are scheduled,
//! which keeps all outputs byte-identical under any thread count.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Tag namespaces for stream derivation. Each distinct sampling site uses its
/// own leading tag so streams never collide across call sites.
pub mod tags {
    pub const MASTER_COL: u64 = 1;
    pub const EPSILON: u64 = 2;
    pub const BETA_STAR: u64 = 3;
    pub const ASSIGNMENT: u64 = 4;
    pub const REVEAL: u64 = 5;
    pub const SUBSAMPLE_I: u64 = 6;
    pub const COMPLETION: u64 = 7;
    pub const BIAS_ASSIGNMENT: u64 = 8;
    pub const BIAS_PAIR: u64 = 9;
    pub const REPLICATE: u64 = 10;
    pub const CI: u64 = 11;
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Derive an independent RNG from `seed` and an order-sensitive tag path.
pub fn derive_rng(seed: u64, path: &[u64]) -> ChaCha8Rng {
    let mut state = splitmix64(seed ^ 0x6a09_e667_f3bc_c908);
    for &tag in path {
        state = splitmix64(state ^ splitmix64(tag.wrapping_add(0x9e37_79b9)));
    }
    ChaCha8Rng::seed_from_u64(state)
}

/// Uniform random subset of size `k` from `0..m`, returned sorted.
pub fn sample_subset(rng: &mut impl Rng, m: usize, k: usize) -> Vec<usize> {
    assert!(k <= m, "subset size exceeds population");
    let mut idx: Vec<usize> = (0..m).collect();
    // Partial Fisher-Yates: after i steps the first i entries are a uniform
    // ordered sample without replacement.
    for i in 0..k {
        let j = rng.random_range(i..m);
        idx.swap(i, j);
    }
    let mut out = idx[..k].to_vec();
    out.sort_unstable();
    out
}

/// Uniform random subset of size `k` drawn from the given item slice.
pub fn sample_from(rng: &mut impl Rng, items: &[usize], k: usize) -> Vec<usize> {
    let picks = sample_subset(rng, items.len(), k);
    picks.into_iter().map(|p| items[p]).collect()
}

/// Shuffle a vector in place (uniform permutation).
pub fn shuffle(rng: &mut impl Rng, items: &mut [usize]) {
    items.shuffle(rng);
}
