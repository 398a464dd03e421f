//! Deterministic RNG stream derivation.
//!
//! Every tree node / trial derives its own ChaCha stream from a hash of
//! (seed, path, attempt), so results do not depend on evaluation order and
//! parallel runs reproduce bit-for-bit.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha12Rng;

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e3779b97f4a7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d049bb133111eb);
    x ^ (x >> 31)
}

/// Mix a sequence of words into a single 64-bit value.
pub fn mix(words: &[u64]) -> u64 {
    let mut h = 0x243f6a8885a308d3u64;
    for &w in words {
        h = splitmix64(h ^ splitmix64(w));
    }
    h
}

/// Derive an independent stream for a (seed, path, attempt) triple.
///
/// `path` identifies a tree node: by convention bit-packed left/right moves
/// with a leading 1 sentinel, but any injective encoding works.
pub fn derive(seed: u64, path: u64, attempt: u64) -> ChaCha12Rng {
    let mut key = [0u8; 32];
    let a = mix(&[seed, path, attempt]);
    let b = mix(&[a, seed ^ 0x5851f42d4c957f2d]);
    let c = mix(&[b, path ^ 0x14057b7ef767814f]);
    let d = mix(&[c, attempt ^ 0xda942042e4dd58b5]);
    key[..8].copy_from_slice(&a.to_le_bytes());
    key[8..16].copy_from_slice(&b.to_le_bytes());
    key[16..24].copy_from_slice(&c.to_le_bytes());
    key[24..32].copy_from_slice(&d.to_le_bytes());
    ChaCha12Rng::from_seed(key)
}

/// Child path codes for a binary tree walk.
pub fn child_path(path: u64, right: bool) -> u64 {
    (path << 1) | right as u64
}
