use crate::{Error, Result};

fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

/// First `count` primes, in increasing order.
pub fn first_primes(count: usize) -> Vec<u64> {
    let mut primes = Vec::with_capacity(count);
    let mut candidate = 2u64;
    while primes.len() < count {
        if primes
            .iter()
            .take_while(|&&p| p * p <= candidate)
            .all(|&p| candidate % p != 0)
        {
            primes.push(candidate);
        }
        candidate += 1;
    }
    primes
}

/// Base-`base` digit reversal of `index` across the radix point.
///
/// The reversed digits and the denominator are formed as integers and divided
/// once, so small cases return the correctly rounded rational.
pub fn radical_inverse(index: u64, base: u64) -> Result<f64> {
    if !is_prime(base) {
        return Err(Error::invalid(format!(
            "radical inverse base must be a prime >= 2, got {base}"
        )));
    }
    Ok(radical_inverse_unchecked(index, base))
}

#[inline]
pub(crate) fn radical_inverse_unchecked(mut index: u64, base: u64) -> f64 {
    let b = base as u128;
    let mut reversed: u128 = 0;
    let mut denom: u128 = 1;
    while index > 0 {
        reversed = reversed * b + (index % base) as u128;
        denom *= b;
        index /= base;
    }
    // two roundings can land on 1.0 once the digits exceed f64 precision
    (reversed as f64 / denom as f64).min(ONE_BELOW)
}

const ONE_BELOW: f64 = 1.0 - f64::EPSILON / 2.0;

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hand_values() {
        assert_eq!(radical_inverse(0, 2).unwrap(), 0.0);
        assert_eq!(radical_inverse(1, 2).unwrap(), 0.5);
        // 3 = 10 in base 3, reversed 0.01
        assert_eq!(radical_inverse(3, 3).unwrap(), 1.0 / 9.0);
        assert_eq!(radical_inverse(6, 2).unwrap(), 3.0 / 8.0);
        assert_eq!(radical_inverse(5, 5).unwrap(), 1.0 / 25.0);
    }

    #[test]
    fn rejects_bad_bases() {
        for base in [0, 1, 4, 9, 15] {
            assert!(matches!(
                radical_inverse(3, base),
                Err(Error::InvalidArgument(_))
            ));
        }
    }

    #[test]
    fn primes() {
        assert_eq!(first_primes(8), vec![2, 3, 5, 7, 11, 13, 17, 19]);
    }

    #[test]
    fn never_reaches_one() {
        for base in [2, 3, 7, 101] {
            for i in [u64::MAX, u64::MAX - 1, 1 << 40, 12345678901] {
                let v = radical_inverse(i, base).unwrap();
                assert!((0.0..1.0).contains(&v), "{base} {i} {v}");
            }
        }
    }
}
