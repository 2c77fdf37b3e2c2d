//! Small integer helpers shared by the construction modules.

use crate::error::{Error, Result};

pub fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n.is_multiple_of(2) {
        return n == 2;
    }
    let mut d = 3;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 2;
    }
    true
}

/// Rejects anything that is not an odd prime.
pub fn check_prime(p: u32) -> Result<()> {
    if p >= 3 && is_prime(p as u64) {
        Ok(())
    } else {
        Err(Error::InvalidPrime(p as u64))
    }
}

/// Exponent of the largest power of `p` dividing `x`. `x` must be nonzero.
pub fn nu(x: u64, p: u64) -> u32 {
    debug_assert!(x != 0);
    let mut x = x;
    let mut k = 0;
    while x.is_multiple_of(p) {
        x /= p;
        k += 1;
    }
    k
}

pub fn checked_pow(base: u64, exp: u32) -> Result<u64> {
    base.checked_pow(exp).ok_or(Error::Overflow("power"))
}

/// The `index`-th element of S_p(0): the base-(p-1) digits of `index`
/// read back in base p.
pub fn s0_term(index: u64, p: u32) -> u64 {
    let (p, q) = (p as u64, p as u64 - 1);
    let (mut n, mut place, mut out) = (index, 1u64, 0u64);
    while n > 0 {
        out += (n % q) * place;
        n /= q;
        place *= p;
    }
    out
}

/// First `count` terms of S_p(0).
pub fn s0_prefix(count: usize, p: u32) -> Vec<u64> {
    (0..count as u64).map(|i| s0_term(i, p)).collect()
}

pub fn sorted_unique(values: &[u64]) -> Vec<u64> {
    let mut v = values.to_vec();
    v.sort_unstable();
    v.dedup();
    v
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn primes() {
        assert!(check_prime(3).is_ok());
        assert!(check_prime(5).is_ok());
        assert!(check_prime(2).is_err());
        assert!(check_prime(9).is_err());
        assert!(check_prime(1).is_err());
    }

    #[test]
    fn valuation() {
        assert_eq!(nu(12, 3), 1);
        assert_eq!(nu(9, 3), 2);
        assert_eq!(nu(11, 3), 0);
        assert_eq!(nu(250, 5), 3);
    }

    #[test]
    fn s0_digits() {
        assert_eq!(s0_prefix(9, 3), vec![0, 1, 3, 4, 9, 10, 12, 13, 27]);
        assert_eq!(s0_prefix(5, 5), vec![0, 1, 2, 3, 5]);
    }
}
