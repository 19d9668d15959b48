//! Owen nested uniform scrambling of base-2 digits.

use super::prng::{derive_key, mix64};

/// Key for scrambling one coordinate of a point set.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ScrambleKey {
    base: u64,
}

impl ScrambleKey {
    pub fn new(seed: u64, dimension: usize) -> Self {
        Self {
            base: derive_key(seed, dimension as u64),
        }
    }

    /// Pseudo-random bits tied to the digit position and the digit prefix above it.
    #[inline]
    fn bits(&self, position: u32, prefix: u32) -> u64 {
        mix64(self.base ^ mix64(((position as u64) << 32) | prefix as u64))
    }
}

/// Scrambles the 32 leading base-2 digits of `digits`.
///
/// Digit `k` (counted from the most significant) is flipped by a bit that
/// depends only on the key and the `k` original digits above it.
pub fn owen_scramble(digits: u32, key: ScrambleKey) -> u32 {
    let mut out = digits;
    for k in 0..32u32 {
        let prefix = if k == 0 { 0 } else { digits >> (32 - k) };
        let flip = (key.bits(k, prefix) >> 63) as u32;
        out ^= flip << (31 - k);
    }
    out
}

/// Scrambled coordinate in `(0,1)`, with 20 further random digits below the
/// 32 scrambled ones so the value is never exactly 0.
#[inline]
pub fn scrambled_unit(digits: u32, key: ScrambleKey) -> f64 {
    let high = owen_scramble(digits, key) as u64;
    let low = key.bits(32, digits) >> 44;
    (((high << 20) | low) as f64 + 0.5) * (1.0 / (1u64 << 52) as f64)
}
