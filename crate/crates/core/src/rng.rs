//! Deterministic substreams for parallel Monte Carlo.
//!
//! Every stream is a ChaCha8 generator, which is counter based: the 256-bit
//! key is expanded from `(seed, domain)` with SplitMix64, and the 64-bit
//! ChaCha stream id carries the substream index. Two calls with the same
//! triple produce the same sequence regardless of which thread asks, so
//! results never depend on scheduling.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Stream = ChaCha8Rng;

/// Reward draws for a replication.
pub const LANE_REWARDS: u64 = 0;
/// Posterior draws (or any other policy-side randomness) for a replication.
pub const LANE_POLICY: u64 = 1;

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Stable 64-bit FNV-1a hash, used to turn labels into domain ids.
pub fn domain_id(label: &str) -> u64 {
    label.bytes().fold(0xcbf2_9ce4_8422_2325u64, |h, b| {
        (h ^ u64::from(b)).wrapping_mul(0x0000_0100_0000_01b3)
    })
}

/// Independent stream for `(seed, domain, index)`.
pub fn substream(seed: u64, domain: u64, index: u64) -> Stream {
    let mut state = seed;
    let mixed = splitmix64(&mut state) ^ domain;
    let mut state = mixed;
    let mut key = [0u8; 32];
    for chunk in key.chunks_exact_mut(8) {
        chunk.copy_from_slice(&splitmix64(&mut state).to_le_bytes());
    }
    let mut rng = ChaCha8Rng::from_seed(key);
    rng.set_stream(index);
    rng
}

/// Stream for one lane of one replication: index `replication * 2 + lane`.
pub fn replication_stream(seed: u64, domain: u64, replication: u64, lane: u64) -> Stream {
    debug_assert!(lane < 2);
    substream(seed, domain, replication * 2 + lane)
}
