//! Greedy p-Stanley sequences.

use serde::{Deserialize, Serialize};

use crate::arith::{check_prime, sorted_unique};
use crate::error::{Error, Result};
use crate::sieve::CoverageSieve;
use crate::witness::find_p_ap;

/// A prefix of the p-Stanley sequence generated by `generators`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Sequence {
    pub p: u32,
    pub generators: Vec<u64>,
    pub terms: Vec<u64>,
}

impl Sequence {
    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn term(&self, i: usize) -> u64 {
        self.terms[i]
    }

    /// Regenerates the same sequence out to `count` terms.
    pub fn extended(&self, count: usize) -> Result<Sequence> {
        if count <= self.terms.len() {
            let mut s = self.clone();
            s.terms.truncate(count.max(self.generators.len()));
            return Ok(s);
        }
        greedy_stanley(&self.generators, self.p, count)
    }

    /// Prefix of the terms strictly below `bound`.
    pub fn below(&self, bound: u64) -> &[u64] {
        let end = self.terms.partition_point(|&t| t < bound);
        &self.terms[..end]
    }
}

/// First `count` terms of S_p(A): starting from the sorted generator set,
/// repeatedly append the smallest integer above the last term that keeps
/// the set free of p-term progressions.
pub fn greedy_stanley(generators: &[u64], p: u32, count: usize) -> Result<Sequence> {
    check_prime(p)?;
    let gens = sorted_unique(generators);
    if gens.is_empty() {
        return Err(Error::EmptySet);
    }
    if count < gens.len() {
        return Err(Error::CountTooSmall { requested: count, generators: gens.len() });
    }
    if let Some(witness) = find_p_ap(&gens, p)? {
        return Err(Error::NotPFree { p, witness });
    }
    let mut sieve = CoverageSieve::new(p)?;
    for &g in &gens {
        sieve.push(g)?;
    }
    let mut last = *gens.last().unwrap();
    while sieve.terms().len() < count {
        last = sieve.next_free(last);
        sieve.push(last)?;
    }
    Ok(Sequence { p, generators: gens, terms: sieve.terms().to_vec() })
}
