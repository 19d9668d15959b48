//! Counter-based SplitMix64.
//!
//! Output `k` (zero based) for key `seed` is the `k`-th value of the sequential
//! SplitMix64 generator started from state `seed`:
//!
//! ```text
//! z = seed + (k + 1) * 0x9E3779B97F4A7C15      (wrapping)
//! z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
//! z = (z ^ (z >> 27)) * 0x94D049BB133111EB
//! z ^ (z >> 31)
//! ```
//!
//! Test vectors: seed 0 gives `0xe220a8397b1dcdaf`, `0x6e789e6aa1b965f4`,
//! `0x06c45d188009454f`; seed 42 gives `0xbdd732262feb6e95`, `0x28efe333b266f103`.

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

#[inline]
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// The `counter`-th SplitMix64 output for `seed`.
#[inline]
pub fn splitmix64(seed: u64, counter: u64) -> u64 {
    mix64(seed.wrapping_add(counter.wrapping_add(1).wrapping_mul(GOLDEN)))
}

/// Derives an independent key from a parent key and a stream label.
#[inline]
pub fn derive_key(seed: u64, label: u64) -> u64 {
    mix64(seed ^ mix64(label.wrapping_add(GOLDEN)))
}

/// Maps 64 random bits to the open interval `(0,1)` using the top 52 bits.
#[inline]
pub fn to_open_unit(bits: u64) -> f64 {
    ((bits >> 12) as f64 + 0.5) * (1.0 / (1u64 << 52) as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matches_reference_vectors() {
        assert_eq!(splitmix64(0, 0), 0xe220a8397b1dcdaf);
        assert_eq!(splitmix64(0, 1), 0x6e789e6aa1b965f4);
        assert_eq!(splitmix64(0, 2), 0x06c45d188009454f);
        assert_eq!(splitmix64(42, 0), 0xbdd732262feb6e95);
        assert_eq!(splitmix64(42, 1), 0x28efe333b266f103);
    }

    #[test]
    fn open_unit_stays_inside() {
        assert!(to_open_unit(0) > 0.0);
        assert!(to_open_unit(u64::MAX) < 1.0);
    }
}
