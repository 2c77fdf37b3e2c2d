//! Incremental coverage sieve behind the greedy generator.
//!
//! Terms are accepted in increasing order, so every progression that gains
//! an element when `a` is accepted has `a` as its largest accepted member
//! and its top at `a + d` for some earlier term `a - d`. Marking those tops
//! on acceptance keeps `covered` exact for every value.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Default)]
struct BitTable {
    words: Vec<u64>,
}

impl BitTable {
    fn capacity(&self) -> u64 {
        self.words.len() as u64 * 64
    }

    fn get(&self, i: u64) -> bool {
        let w = (i / 64) as usize;
        w < self.words.len() && self.words[w] >> (i % 64) & 1 == 1
    }

    fn set(&mut self, i: u64) {
        self.words[(i / 64) as usize] |= 1 << (i % 64);
    }

    /// Doubles until `needed` sits below 7/8 of the allocation.
    fn reserve(&mut self, needed: u64) {
        let mut cap = self.capacity().max(64);
        while needed >= cap / 8 * 7 {
            cap *= 2;
        }
        if cap > self.capacity() {
            self.words.resize((cap / 64) as usize, 0);
        }
    }
}

/// Accepted terms plus the set of values they cover.
#[derive(Debug, Clone)]
pub struct CoverageSieve {
    p: u32,
    terms: Vec<u64>,
    members: BitTable,
    covered: BitTable,
    frontier: u64,
}

impl CoverageSieve {
    pub fn new(p: u32) -> Result<Self> {
        crate::arith::check_prime(p)?;
        Ok(CoverageSieve {
            p,
            terms: Vec::new(),
            members: BitTable::default(),
            covered: BitTable::default(),
            frontier: 0,
        })
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn terms(&self) -> &[u64] {
        &self.terms
    }

    /// Highest value for which `covered` is guaranteed complete. Tops of
    /// progressions over accepted terms never exceed twice the last term.
    pub fn frontier(&self) -> u64 {
        self.frontier
    }

    pub fn contains(&self, x: u64) -> bool {
        self.members.get(x)
    }

    pub fn is_covered(&self, x: u64) -> bool {
        self.covered.get(x)
    }

    /// Accepts `a`, which must exceed every accepted term.
    pub fn push(&mut self, a: u64) -> Result<()> {
        if let Some(&last) = self.terms.last() {
            if a <= last {
                return Err(Error::NotIncreasing { previous: last, next: a });
            }
        }
        let top = a.checked_mul(2).ok_or(Error::Overflow("sieve frontier"))?;
        self.members.reserve(a);
        self.covered.reserve(top);
        self.members.set(a);
        let inner = self.p as u64 - 2;
        for &prev in &self.terms {
            let d = a - prev;
            // remaining members a - 2d, ..., a - (p-2)d
            if inner * d > a {
                continue;
            }
            if (2..=inner).all(|j| self.members.get(a - j * d)) {
                self.covered.set(a + d);
            }
        }
        self.terms.push(a);
        self.frontier = top;
        Ok(())
    }

    /// Smallest value above `after` that is neither accepted nor covered.
    pub fn next_free(&self, after: u64) -> u64 {
        let mut x = after + 1;
        while self.covered.get(x) || self.members.get(x) {
            x += 1;
        }
        x
    }
}
