//! Brute-force reference implementations written directly from the
//! definitions, sharing no code with the library.

#![allow(dead_code)]

use std::collections::BTreeSet;

/// Some `a, a+d, .., a+(p-1)d` inside `set` with `d >= 1`.
pub fn has_ap(set: &BTreeSet<u64>, p: u64) -> bool {
    let max = match set.iter().next_back() {
        Some(&m) => m,
        None => return false,
    };
    for &a in set {
        for d in 1..=max {
            if a + (p - 1) * d > max {
                break;
            }
            if (1..p).all(|j| set.contains(&(a + j * d))) {
                return true;
            }
        }
    }
    false
}

/// `x - (p-1)d, .., x - d` all in `set` for some `d >= 1`.
pub fn covered(x: u64, set: &BTreeSet<u64>, p: u64) -> bool {
    (1..=x / (p - 1)).any(|d| (1..p).all(|j| set.contains(&(x - j * d))))
}

/// Modular p-free set modulo `n`, straight from the definition: no
/// progression with nonzero difference mod `n` (terms may repeat), and
/// every other residue is the next term of an increasing progression of
/// `p-1` members.
pub fn modular(set: &BTreeSet<u64>, n: u64, p: u64) -> bool {
    if !set.contains(&0) || set.iter().any(|&x| x >= n) {
        return false;
    }
    for &a in set {
        for d in 1..n {
            if (1..p).all(|j| set.contains(&((a + j * d) % n))) {
                return false;
            }
        }
    }
    (0..n).all(|x| {
        set.contains(&x)
            || set.iter().any(|&first| {
                (1..n).any(|d| {
                    first + (p - 2) * d < n
                        && (0..p - 1).all(|j| set.contains(&(first + j * d)))
                        && (first + (p - 1) * d) % n == x
                })
            })
    })
}

/// Greedy sequence by testing each candidate against every progression.
pub fn greedy(generators: &[u64], p: u64, count: usize) -> Vec<u64> {
    let mut set: BTreeSet<u64> = generators.iter().copied().collect();
    let mut x = *set.iter().next_back().unwrap();
    while set.len() < count {
        x += 1;
        if !covered(x, &set, p) {
            set.insert(x);
        }
    }
    set.into_iter().collect()
}

/// Integers whose base-`p` digits all lie in `0..p-1`.
pub fn restricted_digits(x: u64, p: u64) -> bool {
    let mut x = x;
    while x > 0 {
        if x % p == p - 1 {
            return false;
        }
        x /= p;
    }
    true
}

/// All modular sets modulo `n` by enumerating subsets containing 0.
pub fn all_modular_sets(n: u64, p: u64) -> Vec<Vec<u64>> {
    let mut out = Vec::new();
    for mask in 0u64..(1 << (n - 1)) {
        let set: BTreeSet<u64> = std::iter::once(0).chain((1..n).filter(|&r| mask >> (r - 1) & 1 == 1)).collect();
        if modular(&set, n, p) {
            out.push(set.into_iter().collect());
        }
    }
    out.sort();
    out
}
