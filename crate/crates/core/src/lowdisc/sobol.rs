//! Sobol direction numbers and Gray-code point construction.
//!
//! The embedded table (`data/sobol_joe_kuo_1024.txt`) holds one line per
//! dimension: `dimension degree polynomial m_1 .. m_degree`, where `polynomial`
//! is the full primitive polynomial as an integer (leading and constant terms
//! included). Dimension 1 has degree 0 and yields the base-2 van der Corput
//! sequence. The SHA-256 of the file is recorded in `data/SHA256SUMS`.

use std::sync::OnceLock;

use crate::{Error, Result};

/// Number of output bits per coordinate.
pub const SOBOL_BITS: usize = 32;

pub(crate) const TABLE_TEXT: &str = include_str!("../../data/sobol_joe_kuo_1024.txt");

/// One dimension of the direction-number table.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DirectionEntry {
    pub degree: u32,
    pub polynomial: u64,
    pub initial: Vec<u32>,
}

#[derive(Debug, Clone)]
pub struct DirectionNumberTable {
    entries: Vec<DirectionEntry>,
}

impl DirectionNumberTable {
    /// Parses the plain-text table format.
    pub fn parse(text: &str) -> Result<Self> {
        let mut entries = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let bad = |what: &str| {
                Error::invalid(format!("direction table line {}: {what}", lineno + 1))
            };
            let fields: Vec<u64> = line
                .split_whitespace()
                .map(|f| f.parse::<u64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|_| bad("non-integer field"))?;
            if fields.len() < 3 {
                return Err(bad("too few fields"));
            }
            let (dim, degree, polynomial) = (fields[0], fields[1] as u32, fields[2]);
            if dim as usize != entries.len() + 1 {
                return Err(bad("dimensions out of order"));
            }
            if fields.len() != 3 + degree as usize {
                return Err(bad("initial direction count does not match degree"));
            }
            if polynomial >> degree != 1 || polynomial & 1 != 1 {
                return Err(bad("polynomial does not match degree"));
            }
            let initial: Vec<u32> = fields[3..].iter().map(|&m| m as u32).collect();
            for (k, &m) in initial.iter().enumerate() {
                // m_k must be odd and below 2^k
                if m % 2 == 0 || (m as u64) >= (1u64 << (k + 1)) {
                    return Err(bad("invalid initial direction integer"));
                }
            }
            entries.push(DirectionEntry {
                degree,
                polynomial,
                initial,
            });
        }
        if entries.is_empty() {
            return Err(Error::invalid("direction table is empty"));
        }
        Ok(Self { entries })
    }

    /// The table shipped with the crate (1024 dimensions).
    pub fn embedded() -> &'static DirectionNumberTable {
        static TABLE: OnceLock<DirectionNumberTable> = OnceLock::new();
        TABLE.get_or_init(|| {
            DirectionNumberTable::parse(TABLE_TEXT).expect("embedded Sobol table is well formed")
        })
    }

    pub fn capacity(&self) -> usize {
        self.entries.len()
    }

    pub fn entry(&self, dim: usize) -> Option<&DirectionEntry> {
        self.entries.get(dim)
    }

    /// Direction integers `v_1..v_32` for zero-based dimension `dim`, scaled to 32 bits.
    pub fn direction_vectors(&self, dim: usize) -> Result<[u32; SOBOL_BITS]> {
        let entry = self.entries.get(dim).ok_or(Error::Capacity {
            requested: dim + 1,
            capacity: self.entries.len(),
        })?;
        let mut m = [0u64; SOBOL_BITS];
        let s = entry.degree as usize;
        if s == 0 {
            m = [1; SOBOL_BITS];
        } else {
            for (k, &init) in entry.initial.iter().enumerate().take(SOBOL_BITS) {
                m[k] = init as u64;
            }
            // interior coefficients a_1..a_{s-1}, a_1 most significant
            let a = (entry.polynomial >> 1) & ((1u64 << (s - 1)) - 1);
            for i in s..SOBOL_BITS {
                let mut mi = m[i - s] ^ (m[i - s] << s);
                for k in 1..s {
                    if (a >> (s - 1 - k)) & 1 == 1 {
                        mi ^= m[i - k] << k;
                    }
                }
                m[i] = mi;
            }
        }
        let mut v = [0u32; SOBOL_BITS];
        for (k, vk) in v.iter_mut().enumerate() {
            *vk = (m[k] << (SOBOL_BITS - 1 - k)) as u32;
        }
        Ok(v)
    }
}

/// Sobol coordinate at Gray-code position `index`, as a 32-bit fraction.
#[inline]
pub fn sobol_bits(directions: &[u32; SOBOL_BITS], index: u64) -> u32 {
    let mut gray = index ^ (index >> 1);
    let mut x = 0u32;
    let mut k = 0;
    while gray != 0 && k < SOBOL_BITS {
        if gray & 1 == 1 {
            x ^= directions[k];
        }
        gray >>= 1;
        k += 1;
    }
    x
}

#[cfg(test)]
mod tests {
    use super::*;

    // scipy.stats.qmc.Sobol(d=1024, scramble=False), points 1..16, dimensions
    // 1, 2, 3, 10, 100, 512, 1024, scaled by 2^32.
    const SCIPY_SOBOL: [[u32; 7]; 16] = [
        [2147483648, 2147483648, 2147483648, 2147483648, 2147483648, 2147483648, 2147483648],
        [3221225472, 1073741824, 1073741824, 3221225472, 3221225472, 3221225472, 3221225472],
        [1073741824, 3221225472, 3221225472, 1073741824, 1073741824, 1073741824, 1073741824],
        [1610612736, 1610612736, 2684354560, 2684354560, 3758096384, 1610612736, 3758096384],
        [3758096384, 3758096384, 536870912, 536870912, 1610612736, 3758096384, 1610612736],
        [2684354560, 536870912, 3758096384, 1610612736, 536870912, 2684354560, 536870912],
        [536870912, 2684354560, 1610612736, 3758096384, 2684354560, 536870912, 2684354560],
        [805306368, 1342177280, 4026531840, 1342177280, 4026531840, 805306368, 268435456],
        [2952790016, 3489660928, 1879048192, 3489660928, 1879048192, 2952790016, 2415919104],
        [4026531840, 268435456, 2952790016, 2415919104, 805306368, 4026531840, 3489660928],
        [1879048192, 2415919104, 805306368, 268435456, 2952790016, 1879048192, 1342177280],
        [1342177280, 805306368, 1342177280, 4026531840, 268435456, 1342177280, 4026531840],
        [3489660928, 2952790016, 3489660928, 1879048192, 2415919104, 3489660928, 1879048192],
        [2415919104, 1879048192, 268435456, 805306368, 3489660928, 2415919104, 805306368],
        [268435456, 4026531840, 2415919104, 2952790016, 1342177280, 268435456, 2952790016],
        [402653184, 2013265920, 2013265920, 671088640, 134217728, 3623878656, 3892314112],
    ];

    #[test]
    fn matches_reference_implementation() {
        let table = DirectionNumberTable::embedded();
        let dims = [0usize, 1, 2, 9, 99, 511, 1023];
        for (col, &d) in dims.iter().enumerate() {
            let v = table.direction_vectors(d).unwrap();
            for (row, expected) in SCIPY_SOBOL.iter().enumerate() {
                assert_eq!(sobol_bits(&v, row as u64 + 1), expected[col], "dim {d} idx {row}");
            }
        }
    }

    #[test]
    fn first_dimension_is_van_der_corput() {
        let table = DirectionNumberTable::embedded();
        assert_eq!(table.entry(0).unwrap().degree, 0);
        let v = table.direction_vectors(0).unwrap();
        // van der Corput in Gray-code order visits the same set per 2^k block
        let mut seen: Vec<u32> = (0..16).map(|i| sobol_bits(&v, i)).collect();
        seen.sort();
        let expected: Vec<u32> = (0..16u32).map(|i| i << 28).collect();
        assert_eq!(seen, expected);
    }

    #[test]
    fn capacity_covers_1024() {
        let table = DirectionNumberTable::embedded();
        assert!(table.capacity() >= 1024);
        assert!(matches!(
            table.direction_vectors(table.capacity()),
            Err(Error::Capacity { .. })
        ));
    }

    #[test]
    fn parse_rejects_malformed_lines() {
        assert!(DirectionNumberTable::parse("1 0 1\n3 1 3 1\n").is_err());
        assert!(DirectionNumberTable::parse("1 0 1\n2 1 3 2\n").is_err());
        assert!(DirectionNumberTable::parse("1 0 1\n2 2 3 1 1\n").is_err());
        assert!(DirectionNumberTable::parse("# only comments\n").is_err());
        assert!(DirectionNumberTable::parse("1 0 1\n2 1 3 1\n").is_ok());
    }
}
