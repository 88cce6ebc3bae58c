//! Seed derivation.
//!
//! Every random stream in the crate is keyed by a root seed mixed with
//! stream-specific words (a hashed user id, a step or run counter, a trial
//! number). Streams therefore never depend on the order in which users or
//! bisections are processed.

/// One round of the SplitMix64 finalizer.
#[inline]
pub fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

/// Mixes `parts` into `root`: each word is XORed into the running state,
/// which is then re-finalized.
pub fn derive(root: u64, parts: &[u64]) -> u64 {
    parts.iter().fold(splitmix64(root), |state, &p| splitmix64(state ^ p))
}

/// 64-bit FNV-1a of a string. Stable across platforms and releases.
pub fn hash_str(s: &str) -> u64 {
    s.bytes().fold(0xcbf2_9ce4_8422_2325, |h, b| {
        (h ^ u64::from(b)).wrapping_mul(0x0000_0100_0000_01b3)
    })
}

/// Order-sensitive hash of an index list.
pub fn hash_indices(indices: &[usize]) -> u64 {
    indices
        .iter()
        .fold(splitmix64(indices.len() as u64), |h, &i| splitmix64(h ^ i as u64))
}

// Stream tags, kept distinct so that two streams with the same counters
// never coincide.
pub(crate) const STREAM_USER: u64 = 0x7573_6572;
pub(crate) const STREAM_BASELINE: u64 = 0x6261_7365;
pub(crate) const STREAM_RANDOM_K: u64 = 0x7261_6e6b;
