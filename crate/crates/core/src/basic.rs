//! Basic sequences: the values `Σ δ_k b_k` with digits `δ_k ∈ {0, .., p-2}`
//! over a basis `B = (b_k)`, generalizing base-p digits restricted to
//! `0..p-1`.
//!
//! A basis is stored as a finite head `b_0, .., b_{k0-1}` followed by the
//! geometric tail `b_{k0+j} = t·p^j`. The theorem hypotheses (`p^k` exactly
//! divides `b_k`, and `b_k = p^k` eventually) are sufficient for the subset
//! sums to form a Stanley sequence; bases that fail them may still be
//! genuine, such as `(1, 7, 10, 30, ..)` for `S(0,1,7)`.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::arith::{check_prime, checked_pow, nu, sorted_unique};
use crate::error::{Error, Result};
use crate::modular::{lift, omega, ModularSet};
use crate::sequence::greedy_stanley;
use crate::witness::ApWitness;

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "BasisRepr")]
pub struct Basis {
    pub p: u32,
    pub head: Vec<u64>,
    pub tail_start: u64,
}

#[derive(Deserialize)]
struct BasisRepr {
    #[serde(default = "default_p")]
    p: u32,
    #[serde(default)]
    head: Vec<u64>,
    tail_start: u64,
}

fn default_p() -> u32 {
    3
}

impl TryFrom<BasisRepr> for Basis {
    type Error = Error;

    fn try_from(r: BasisRepr) -> Result<Self> {
        Basis::new(r.p, r.head, r.tail_start)
    }
}

impl Basis {
    pub fn new(p: u32, head: Vec<u64>, tail_start: u64) -> Result<Self> {
        check_prime(p)?;
        if let Some(index) = head.iter().position(|&b| b == 0) {
            return Err(Error::InvalidBasis { index, reason: "basis elements must be positive".into() });
        }
        if tail_start == 0 {
            return Err(Error::InvalidBasis { index: head.len(), reason: "tail start must be positive".into() });
        }
        Ok(Basis { p, head, tail_start })
    }

    /// `1, p, p², ..`, the basis of `S_p(0)`.
    pub fn powers(p: u32) -> Result<Self> {
        Basis::new(p, vec![], 1)
    }

    pub fn k0(&self) -> usize {
        self.head.len()
    }

    pub fn element(&self, k: usize) -> Result<u64> {
        match self.head.get(k) {
            Some(&b) => Ok(b),
            None => {
                let j = u32::try_from(k - self.head.len()).map_err(|_| Error::Overflow("basis index"))?;
                checked_pow(self.p as u64, j)?.checked_mul(self.tail_start).ok_or(Error::Overflow("basis element"))
            }
        }
    }

    /// `b_0, .., b_{m-1}`.
    pub fn prefix(&self, m: usize) -> Result<Vec<u64>> {
        (0..m).map(|k| self.element(k)).collect()
    }
}

/// Outcome of checking the theorem hypotheses.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BasisValidation {
    pub valid: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub failing_index: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
}

/// Checks `ν_p(b_k) = k` for every head entry and `t = p^{k0}`. These are
/// sufficient conditions only; a basis failing them may still generate a
/// Stanley sequence.
pub fn validate_basis(basis: &Basis) -> BasisValidation {
    let p = basis.p as u64;
    let fail = |index: usize, reason: String| BasisValidation {
        valid: false,
        failing_index: Some(index),
        reason: Some(reason),
    };
    for (k, &b) in basis.head.iter().enumerate() {
        let v = nu(b, p);
        if v != k as u32 {
            return fail(k, format!("largest power of {p} dividing b_{k} = {b} is {p}^{v}, expected {p}^{k}"));
        }
    }
    let k0 = basis.k0();
    match checked_pow(p, k0 as u32) {
        Ok(want) if want == basis.tail_start => BasisValidation { valid: true, failing_index: None, reason: None },
        _ => fail(k0, format!("tail starts at b_{k0} = {}, expected {p}^{k0}", basis.tail_start)),
    }
}

fn require_valid(basis: &Basis) -> Result<()> {
    let v = validate_basis(basis);
    match v.failing_index {
        None => Ok(()),
        Some(index) => Err(Error::InvalidBasis { index, reason: v.reason.unwrap_or_default() }),
    }
}

/// All sums `Σ δ_k e_k` over `elements` (given as `(k, b_k)`) that do not
/// exceed `cap`, sorted. Two digit vectors with equal sums are an error.
fn sums_up_to(elements: &[(usize, u64)], p: u32, cap: u64) -> Result<Vec<u64>> {
    let width = elements.iter().map(|&(k, _)| k + 1).max().unwrap_or(0);
    let mut seen: HashMap<u64, Vec<u32>> = HashMap::new();
    let mut digits = vec![0u32; width];
    fn walk(
        i: usize,
        sum: u64,
        elements: &[(usize, u64)],
        p: u32,
        cap: u64,
        digits: &mut Vec<u32>,
        seen: &mut HashMap<u64, Vec<u32>>,
    ) -> Result<()> {
        if i == elements.len() {
            if let Some(first) = seen.insert(sum, digits.clone()) {
                return Err(Error::SumCollision { value: sum, first, second: digits.clone() });
            }
            return Ok(());
        }
        let (k, b) = elements[i];
        let mut s = sum;
        for d in 0..p - 1 {
            digits[k] = d;
            walk(i + 1, s, elements, p, cap, digits, seen)?;
            match s.checked_add(b) {
                Some(next) if next <= cap => s = next,
                _ => break,
            }
        }
        digits[k] = 0;
        Ok(())
    }
    walk(0, 0, elements, p, cap, &mut digits, &mut seen)?;
    let mut out: Vec<u64> = seen.into_keys().collect();
    out.sort_unstable();
    Ok(out)
}

/// Sorted digit sums over `b_0, .., b_{m-1}`, all of them.
pub fn head_sums(basis: &Basis, m: usize) -> Result<Vec<u64>> {
    let elements: Vec<(usize, u64)> = basis.prefix(m)?.into_iter().enumerate().collect();
    sums_up_to(&elements, basis.p, u64::MAX)
}

/// The `count` smallest basis sums in increasing order.
///
/// Works on any basis; a collision between two digit vectors is reported
/// with both vectors.
pub fn basis_sequence(basis: &Basis, count: usize) -> Result<Vec<u64>> {
    let mut cap = basis.head.iter().copied().max().unwrap_or(1).max(basis.tail_start);
    loop {
        let mut elements: Vec<(usize, u64)> =
            basis.head.iter().copied().enumerate().filter(|&(_, b)| b <= cap).collect();
        for k in basis.k0().. {
            let b = basis.element(k)?;
            if b > cap {
                break;
            }
            elements.push((k, b));
        }
        let sums = sums_up_to(&elements, basis.p, cap)?;
        if sums.len() >= count {
            return Ok(sums[..count].to_vec());
        }
        cap = cap.checked_mul(2).ok_or(Error::Overflow("basis sequence cap"))?;
    }
}

/// Smallest `m ≥ k0` with `Σ_{k<m} (p-2)·b_k < p^m`, and `N = p^m`. The
/// head sums below `m` then form a modular set modulo `N`.
pub fn truncation(basis: &Basis) -> Result<(usize, u64)> {
    require_valid(basis)?;
    let inner = basis.p as u64 - 2;
    let mut total: u64 =
        basis.head.iter().try_fold(0u64, |acc, &b| acc.checked_add(b)).ok_or(Error::Overflow("head sum"))?;
    for m in basis.k0().. {
        let n = checked_pow(basis.p as u64, m as u32)?;
        if total.checked_mul(inner).ok_or(Error::Overflow("head sum"))? < n {
            return Ok((m, n));
        }
        total = total.checked_add(basis.element(m)?).ok_or(Error::Overflow("head sum"))?;
    }
    unreachable!()
}

/// The modular set `{Σ_{k<m} δ_k b_k}` modulo `p^m` at the truncation index.
pub fn truncated_set(basis: &Basis) -> Result<ModularSet> {
    let (m, n) = truncation(basis)?;
    ModularSet::new(&head_sums(basis, m)?, n, basis.p).map_err(|e| match e {
        Error::NotModular { reason, .. } => {
            Error::TheoremContradiction(format!("truncation modulo {n} is not modular: {reason}"))
        }
        e => e,
    })
}

/// Builds a covering progression for residue `x` by fixing base-p digits of
/// `x` from the lowest up, for a theorem-valid basis truncated at
/// `N = p^m` (see [`truncation`]).
///
/// At step `j` the coefficient `e_j ∈ 0..p` of `b_j` is chosen so that
/// `Σ e_i b_i` agrees with `x` in digit `j`; earlier digits are untouched
/// since `p^j | b_j`. A coefficient below `p-1` becomes a shared digit of
/// all `p-1` members, and `p-1` becomes digits `0, 1, .., p-2` across the
/// members, contributing `b_j` to the common difference.
pub fn cover_witness_digits(x: u64, basis: &Basis) -> Result<ApWitness> {
    let (m, n) = truncation(basis)?;
    if x >= n {
        return Err(Error::ResidueOutOfRange { residue: x, modulus: n });
    }
    let p = basis.p as u64;
    let b = basis.prefix(m)?;
    let (nn, pp) = (n as u128, p as u128);
    let mut coef = vec![0u64; m];
    let mut cur: u128 = 0;
    for j in 0..m {
        let diff = (x as u128 + nn - cur % nn) % nn;
        let digit = (diff / pp.pow(j as u32) % pp) as u64;
        let unit = (b[j] / p.pow(j as u32)) % p;
        let e = digit * inverse_mod(unit, p) % p;
        coef[j] = e;
        cur += e as u128 * b[j] as u128;
    }
    if coef.iter().all(|&e| e < p - 1) {
        return Err(Error::Precondition(format!("{x} is a subset sum of the truncated basis and needs no cover")));
    }
    let difference: u64 = (0..m).filter(|&j| coef[j] == p - 1).map(|j| b[j]).sum();
    let mut elements: Vec<u64> =
        (0..p - 1).map(|i| (0..m).map(|j| if coef[j] == p - 1 { i * b[j] } else { coef[j] * b[j] }).sum()).collect();
    elements.push(x);
    let w = ApWitness { elements, difference, modulus: Some(n) };
    if !w.is_consistent() {
        return Err(Error::TheoremContradiction(format!("digit fixing produced an inconsistent witness {w}")));
    }
    Ok(w)
}

fn inverse_mod(a: u64, p: u64) -> u64 {
    (1..p).find(|&y| a * y % p == 1).expect("unit modulo a prime")
}

/// Generators whose greedy Stanley sequence is the basic sequence: the
/// basic sequence up to and including its first term above ω of the
/// truncated modular set.
pub fn greedy_generators(basis: &Basis) -> Result<Vec<u64>> {
    let set = truncated_set(basis)?;
    let w = omega(set.residues(), basis.p)?;
    let mut count = set.len().max(1);
    loop {
        let seq = basis_sequence(basis, count)?;
        if let Some(pos) = seq.iter().position(|&a| a as i64 > w) {
            return Ok(seq[..=pos].to_vec());
        }
        count *= 2;
    }
}

/// A completion of a 3-free set: a basis whose sequence starts with the
/// set, and the finite generator set of that regular sequence.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Completion {
    pub basis: Basis,
    pub c: u64,
    pub set: Vec<u64>,
}

/// Completes `{0, a_1, .., a_n}` when the `ν_3(a_i)` are pairwise distinct
/// and `a_1 + a_2 > a_n`. The basis takes `a_i` at index `ν_3(a_i)`,
/// `c·3^j` at the other indices with `3^j < a_n`, and `3^j` beyond, where
/// `c` is the smallest integer above `a_n` prime to 3.
pub fn complete(set: &[u64]) -> Result<Completion> {
    let s = sorted_unique(set);
    if s.first() != Some(&0) {
        return Err(Error::MissingZero);
    }
    let a = &s[1..];
    let mut by_nu: HashMap<u32, u64> = HashMap::new();
    for &x in a {
        if let Some(prev) = by_nu.insert(nu(x, 3), x) {
            return Err(Error::Precondition(format!("{prev} and {x} share the same power of 3")));
        }
    }
    if a.len() >= 2 && a[0] + a[1] <= a[a.len() - 1] {
        return Err(Error::Precondition(format!(
            "a_1 + a_2 = {} does not exceed a_n = {}",
            a[0] + a[1],
            a[a.len() - 1]
        )));
    }
    let top = a.last().copied().unwrap_or(0);
    let c = (top + 1..).find(|x| x % 3 != 0).unwrap();
    let mut head = Vec::new();
    let mut j = 0u32;
    loop {
        let pj = checked_pow(3, j)?;
        if pj > top {
            break;
        }
        head.push(match by_nu.get(&j) {
            Some(&x) => x,
            None => c.checked_mul(pj).ok_or(Error::Overflow("c * 3^j"))?,
        });
        j += 1;
    }
    let basis = Basis::new(3, head, checked_pow(3, j)?)?;
    let prefix = basis_sequence(&basis, s.len())?;
    if prefix != s {
        return Err(Error::TheoremContradiction(format!("completion basis starts {prefix:?}, not {s:?}")));
    }
    let completion = truncated_set(&basis)?.residues().to_vec();
    let horizon = (4 * completion.len()).max(128);
    if greedy_stanley(&completion, 3, horizon)?.terms != basis_sequence(&basis, horizon)? {
        return Err(Error::TheoremContradiction("completion set does not regenerate the basic sequence".into()));
    }
    Ok(Completion { basis, c, set: completion })
}

/// `α·A + N·S_B` as a modular set modulo `p^ℓ·N`, ℓ the smallest level at or
/// above `k0` whose truncation fits and verifies. `S_B` truncated at level
/// ℓ is the set of digit sums over `b_0, .., b_{ℓ-1}`.
pub fn scale_basic(set: &ModularSet, alpha: u64, basis: &Basis) -> Result<ModularSet> {
    if set.p() != basis.p {
        return Err(Error::MixedPrime(set.p(), basis.p));
    }
    require_valid(basis)?;
    lift(set, alpha, basis.k0() as u32, |level| head_sums(basis, level as usize))
}
