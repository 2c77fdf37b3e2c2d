//! Arithmetic-progression witnesses and the primitive predicates built on
//! them: p-freeness, covering, and their modulo-N forms.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::arith::{check_prime, sorted_unique};
use crate::error::{Error, Result};

/// A concrete p-term progression, listed in progression order.
///
/// With `modulus` unset the elements are an integer progression with
/// `difference > 0`. With `modulus = Some(n)` consecutive elements are
/// congruent to the previous one plus `difference` modulo `n`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ApWitness {
    pub elements: Vec<u64>,
    pub difference: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub modulus: Option<u64>,
}

impl ApWitness {
    fn integer(bottom: u64, difference: u64, len: usize) -> Self {
        let elements = (0..len as u64).map(|j| bottom + j * difference).collect();
        ApWitness { elements, difference, modulus: None }
    }

    /// Checks the progression law the witness claims.
    pub fn is_consistent(&self) -> bool {
        match self.modulus {
            None => {
                self.difference > 0 && self.elements.windows(2).all(|w| w[0].checked_add(self.difference) == Some(w[1]))
            }
            Some(n) => {
                let d = self.difference % n;
                d != 0
                    && self
                        .elements
                        .windows(2)
                        .all(|w| (w[0] as u128 + d as u128) % n as u128 == w[1] as u128 % n as u128)
            }
        }
    }
}

impl fmt::Display for ApWitness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.elements.iter().map(u64::to_string).collect();
        write!(f, "({}) d={}", parts.join(", "), self.difference)?;
        if let Some(n) = self.modulus {
            write!(f, " mod {n}")?;
        }
        Ok(())
    }
}

fn contains(sorted: &[u64], x: u64) -> bool {
    sorted.binary_search(&x).is_ok()
}

/// Finds a p-term arithmetic progression inside `set`.
///
/// Among all progressions the one with the smallest top element is
/// returned, ties broken by the smallest difference.
pub fn find_p_ap(set: &[u64], p: u32) -> Result<Option<ApWitness>> {
    check_prime(p)?;
    let s = sorted_unique(set);
    let steps = p as u64 - 1;
    for (ti, &top) in s.iter().enumerate() {
        // y = top - d runs downward so d runs upward
        for &y in s[..ti].iter().rev() {
            let d = top - y;
            if d.checked_mul(steps).is_none_or(|span| span > top) {
                break;
            }
            if (2..=steps).all(|j| contains(&s, top - j * d)) {
                return Ok(Some(ApWitness::integer(top - steps * d, d, p as usize)));
            }
        }
    }
    Ok(None)
}

/// Returns a witness that `x` is covered by `set`: elements
/// `x_1 < ... < x_{p-1}` of `set` such that `x_1, ..., x_{p-1}, x` is a
/// p-AP. The witness with the smallest difference is reported.
pub fn is_covered(x: u64, set: &[u64], p: u32) -> Result<Option<ApWitness>> {
    check_prime(p)?;
    let s = sorted_unique(set);
    Ok(covered_in_sorted(x, &s, p))
}

pub(crate) fn covered_in_sorted(x: u64, s: &[u64], p: u32) -> Option<ApWitness> {
    let steps = p as u64 - 1;
    let below = s.partition_point(|&v| v < x);
    for &y in s[..below].iter().rev() {
        let d = x - y;
        if d.checked_mul(steps).is_none_or(|span| span > x) {
            break;
        }
        if (2..=steps).all(|j| contains(s, x - j * d)) {
            return Some(ApWitness::integer(x - steps * d, d, p as usize));
        }
    }
    None
}

pub(crate) fn check_residues(set: &[u64], modulus: u64) -> Result<Vec<u64>> {
    if modulus == 0 {
        return Err(Error::ZeroModulus);
    }
    let s = sorted_unique(set);
    if let Some(&r) = s.iter().find(|&&r| r >= modulus) {
        return Err(Error::ResidueOutOfRange { residue: r, modulus });
    }
    Ok(s)
}

/// Returns a witness that residue `x` is p-covered by `set` modulo `modulus`:
/// `x_1 < ... < x_{p-1}` in `set` with common difference `d` such that
/// `x ≡ x_{p-1} + d (mod modulus)`.
///
/// Because every `x_i` lies in `0..modulus`, consecutive differences that
/// agree modulo `modulus` are equal integers, so the `x_i` form an integer
/// progression with `0 < d < modulus`.
pub fn is_covered_mod(x: u64, set: &[u64], modulus: u64, p: u32) -> Result<Option<ApWitness>> {
    check_prime(p)?;
    let s = check_residues(set, modulus)?;
    if x >= modulus {
        return Err(Error::ResidueOutOfRange { residue: x, modulus });
    }
    Ok(covered_mod_in_sorted(x, &s, modulus, p))
}

pub(crate) fn covered_mod_in_sorted(x: u64, s: &[u64], modulus: u64, p: u32) -> Option<ApWitness> {
    let inner = p as u64 - 2;
    for &y in s {
        let d = (x + modulus - y) % modulus;
        if d == 0 || inner * d > y {
            continue;
        }
        if (1..=inner).all(|j| contains(s, y - j * d)) {
            let mut elements: Vec<u64> = (0..=inner).rev().map(|j| y - j * d).collect();
            elements.push(x);
            return Some(ApWitness { elements, difference: d, modulus: Some(modulus) });
        }
    }
    None
}

/// Looks for a p-term progression modulo `modulus` inside `set` with
/// nonzero difference. Tuples with repeated residues (possible when the
/// difference has a nontrivial gcd with the modulus) count as violations.
pub fn p_free_mod(set: &[u64], modulus: u64, p: u32) -> Result<Option<ApWitness>> {
    check_prime(p)?;
    let s = check_residues(set, modulus)?;
    Ok(mod_progression_in_sorted(&s, modulus, p))
}

pub(crate) fn mod_progression_in_sorted(s: &[u64], modulus: u64, p: u32) -> Option<ApWitness> {
    let n = modulus as u128;
    if p == 3 {
        for &z in s {
            for &y in s {
                if z == y {
                    continue;
                }
                let x = ((2 * y as u128 + n - z as u128) % n) as u64;
                if contains(s, x) {
                    let d = (y + modulus - z) % modulus;
                    return Some(ApWitness { elements: vec![z, y, x], difference: d, modulus: Some(modulus) });
                }
            }
        }
        return None;
    }
    for &first in s {
        'diff: for d in 1..modulus {
            let mut elements = Vec::with_capacity(p as usize);
            elements.push(first);
            let mut cur = first;
            for _ in 1..p {
                cur = ((cur as u128 + d as u128) % n) as u64;
                if !contains(s, cur) {
                    continue 'diff;
                }
                elements.push(cur);
            }
            return Some(ApWitness { elements, difference: d, modulus: Some(modulus) });
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_three_ap() {
        let w = find_p_ap(&[0, 1, 2], 3).unwrap().unwrap();
        assert_eq!(w.elements, vec![0, 1, 2]);
        assert_eq!(w.difference, 1);
    }

    #[test]
    fn minimal_five_ap() {
        let w = find_p_ap(&[0, 1, 2, 3, 4], 5).unwrap().unwrap();
        assert_eq!(w.elements, vec![0, 1, 2, 3, 4]);
    }

    #[test]
    fn s0_prefix_is_free() {
        let s = crate::arith::s0_prefix(16, 3);
        assert_eq!(find_p_ap(&s, 3).unwrap(), None);
    }

    #[test]
    fn tie_break_smallest_top_then_difference() {
        // 0,2,4 (top 4) and 3,4,5 (top 5) and 1,3,5 (top 5, d=2)
        let w = find_p_ap(&[0, 1, 2, 3, 4, 5], 3).unwrap().unwrap();
        assert_eq!(w.elements, vec![0, 1, 2]);
        let w = find_p_ap(&[1, 3, 4, 5], 3).unwrap().unwrap();
        assert_eq!(w.elements, vec![3, 4, 5]);
    }

    #[test]
    fn covered_examples() {
        assert_eq!(is_covered(5, &[1, 3], 3).unwrap().unwrap().elements, vec![1, 3, 5]);
        assert_eq!(is_covered(2, &[0, 1], 3).unwrap().unwrap().elements, vec![0, 1, 2]);
        assert_eq!(is_covered(9, &[0, 1, 3, 4], 3).unwrap(), None);
    }

    #[test]
    fn covered_mod_examples() {
        let w = is_covered_mod(5, &[0, 1, 7, 8], 10, 3).unwrap().unwrap();
        assert_eq!(w.elements, vec![1, 8, 5]);
        assert!(w.is_consistent());
        let w = is_covered_mod(1, &[0, 2], 3, 3).unwrap().unwrap();
        assert_eq!(w.elements, vec![0, 2, 1]);
        let w = is_covered_mod(2, &[0, 1], 100, 3).unwrap().unwrap();
        assert_eq!(w.elements, vec![0, 1, 2]);
    }

    #[test]
    fn covered_mod_requires_increasing_pair() {
        // 9 ≡ 2*0 - 1 but that pair has z > y
        assert_eq!(is_covered_mod(9, &[0, 1], 10, 3).unwrap(), None);
    }

    #[test]
    fn covered_mod_rejects_out_of_range() {
        assert!(matches!(is_covered_mod(1, &[0, 12], 10, 3), Err(Error::ResidueOutOfRange { residue: 12, .. })));
        assert!(is_covered_mod(10, &[0], 10, 3).is_err());
    }

    #[test]
    fn p_free_mod_examples() {
        assert_eq!(p_free_mod(&[0, 1, 7, 8], 10, 3).unwrap(), None);
        let w = p_free_mod(&[0, 1, 2], 9, 3).unwrap().unwrap();
        assert_eq!(w.elements, vec![0, 1, 2]);
        // degenerate progression through N/2
        let w = p_free_mod(&[0, 1, 5], 8, 3).unwrap().unwrap();
        assert_eq!(w.elements, vec![1, 5, 1]);
        assert_eq!(w.difference, 4);
        assert!(w.is_consistent());
    }

    #[test]
    fn p_free_mod_five() {
        assert_eq!(p_free_mod(&[0, 1, 2, 3], 5, 5).unwrap(), None);
        assert!(p_free_mod(&[0, 1, 2, 3, 4], 7, 5).unwrap().is_some());
    }

    #[test]
    fn rejects_bad_prime() {
        assert!(matches!(find_p_ap(&[0, 1], 4), Err(Error::InvalidPrime(4))));
        assert!(find_p_ap(&[0, 1], 2).is_err());
    }
}
