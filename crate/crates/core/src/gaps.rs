//! The large-gap family `A_m` and gap measurement.
//!
//! `A_m` is the set of subset sums of `{2, 6, 11}·2^i·29^(m-i)` for
//! `0 <= i <= m`. It is a modular set modulo `29^(m+1)` whose Stanley
//! sequence has smallest recurring gap `2^(m+1)`.

use num_bigint::BigUint;
use serde::{Deserialize, Serialize};

use crate::arith::checked_pow;
use crate::error::{Error, Result};
use crate::modular::ModularSet;
use crate::sequence::Sequence;

const BASE: [u64; 3] = [2, 6, 11];
const BASE_MAX: u64 = 19;
const FAMILY_MODULUS: u64 = 29;

/// Largest `m` whose verification runs by default.
pub const VERIFY_MAX_M: u32 = 2;
/// Largest `m` constructed explicitly; `|A_m| = 8^(m+1)`.
pub const FAMILY_MAX_M: u32 = 6;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GapFamily {
    pub m: u32,
    pub set: ModularSet,
    /// Whether the set was run through the modular verifier. Larger
    /// members rest on the inductive construction.
    pub verified: bool,
}

/// Builds `A_m`, verifying it when `m <= VERIFY_MAX_M`.
pub fn gap_family(m: u32) -> Result<GapFamily> {
    if m > FAMILY_MAX_M {
        return Err(Error::Precondition(format!("A_{m} has 8^{} elements; the limit is m = {FAMILY_MAX_M}", m + 1)));
    }
    let modulus = checked_pow(FAMILY_MODULUS, m + 1)?;
    let mut sums = vec![0u64];
    for i in 0..=m {
        let scale = checked_pow(2, i)? * checked_pow(FAMILY_MODULUS, m - i)?;
        for g in BASE {
            let b = g * scale;
            sums.extend(sums.clone().into_iter().map(|s| s + b));
        }
    }
    sums.sort_unstable();
    let before = sums.len();
    sums.dedup();
    if sums.len() != before {
        return Err(Error::TheoremContradiction(format!("A_{m} has repeated subset sums")));
    }
    if *sums.last().unwrap() >= modulus {
        return Err(Error::TheoremContradiction(format!("A_{m} does not fit below 29^{}", m + 1)));
    }
    let (set, verified) = if m <= VERIFY_MAX_M {
        let set = ModularSet::new(&sums, modulus, 3).map_err(|e| match e {
            Error::NotModular { reason, .. } => Error::TheoremContradiction(format!("A_{m} is not modular: {reason}")),
            e => e,
        })?;
        (set, true)
    } else {
        (ModularSet::trusted(sums, modulus, 3), false)
    };
    Ok(GapFamily { m, set, verified })
}

/// `max(A_m) = Σ 19·2^i·29^(m-i)` against `29^(m+1)`, in exact arithmetic
/// for any `m`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MaxBound {
    pub max: BigUint,
    pub modulus: BigUint,
}

impl MaxBound {
    pub fn holds(&self) -> bool {
        self.max < self.modulus
    }
}

pub fn family_max_bound(m: u32) -> MaxBound {
    let two = BigUint::from(2u32);
    let base = BigUint::from(FAMILY_MODULUS);
    let max = (0..=m).map(|i| BigUint::from(BASE_MAX) * two.pow(i) * base.pow(m - i)).sum();
    MaxBound { max, modulus: base.pow(m + 1) }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GapProfile {
    pub min_gap_tail: u64,
    /// The minimum gap occurs in both `[n/4, n/2)` and `[n/2, n)`.
    pub recurring: bool,
    pub burn_in: usize,
    pub horizon: usize,
}

/// Smallest `a[i+1] - a[i]` with `i >= burn_in`.
pub fn gap_profile(seq: &Sequence, burn_in: usize) -> Result<GapProfile> {
    let n = seq.len();
    if n <= 2 * burn_in || n < 4 {
        return Err(Error::HorizonTooSmall { have: n, need: (2 * burn_in + 1).max(4) });
    }
    let gaps: Vec<u64> = seq.terms.windows(2).map(|w| w[1] - w[0]).collect();
    let min_gap_tail = *gaps[burn_in..].iter().min().unwrap();
    let last = gaps.len();
    let occurs = |lo: usize, hi: usize| gaps[lo..hi.min(last)].contains(&min_gap_tail);
    let recurring = occurs(n / 4, n / 2) && occurs(n / 2, n);
    Ok(GapProfile { min_gap_tail, recurring, burn_in, horizon: n })
}
