//! Modular sets: verification, structure expansion, coprime scaling, the
//! product of two modular sets, and conversion of independent sequences.
//!
//! A modular set modulo `N` is a residue set `A ⊆ {0, .., N-1}` containing
//! 0 that has no p-term progression modulo `N` (nonzero difference, repeated
//! residues allowed) and p-covers every other residue modulo `N`, where the
//! covering members must be increasing as integers. Its Stanley sequence is
//! `A + N·S_p(0)`.
//!
//! Every constructor in this module re-verifies its output; nothing is
//! returned on the strength of the theorem alone.

use std::fmt;
use std::str::FromStr;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::arith::{check_prime, checked_pow, gcd, s0_prefix, s0_term, sorted_unique};
use crate::error::{Error, Result};
use crate::sequence::{greedy_stanley, Sequence};
use crate::structure::detect_independent;
use crate::witness::{check_residues, covered_in_sorted, find_p_ap, mod_progression_in_sorted, ApWitness};

/// Outcome of checking a candidate residue set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub valid: bool,
    pub freeness_witness: Option<ApWitness>,
    pub uncovered: Vec<u64>,
    pub timing: Duration,
}

/// Verifies that `residues` form a modular p-free set modulo `modulus`.
///
/// A set missing 0 is rejected with [`Error::MissingZero`] rather than
/// reported as invalid.
pub fn verify_modular_set(residues: &[u64], modulus: u64, p: u32) -> Result<VerificationReport> {
    check_prime(p)?;
    let s = check_residues(residues, modulus)?;
    if s.first() != Some(&0) {
        return Err(Error::MissingZero);
    }
    let start = Instant::now();
    let (freeness_witness, covered) = if p == 3 { pair_tables(&s, modulus) } else { tuple_tables(&s, modulus, p) };
    let mut member = vec![false; modulus as usize];
    for &r in &s {
        member[r as usize] = true;
    }
    let uncovered: Vec<u64> = (0..modulus).filter(|&x| !member[x as usize] && !covered[x as usize]).collect();
    Ok(VerificationReport {
        valid: freeness_witness.is_none() && uncovered.is_empty(),
        freeness_witness,
        uncovered,
        timing: start.elapsed(),
    })
}

/// One pass over ordered pairs: any `2y - z` landing in the set is a
/// freeness violation, and `z < y` pairs mark their residue covered.
fn pair_tables(s: &[u64], modulus: u64) -> (Option<ApWitness>, Vec<bool>) {
    let n = modulus as u128;
    let mut member = vec![false; modulus as usize];
    for &r in s {
        member[r as usize] = true;
    }
    let mut covered = vec![false; modulus as usize];
    let mut witness = None;
    for &z in s {
        for &y in s {
            if z == y {
                continue;
            }
            let x = ((2 * y as u128 + n - z as u128) % n) as usize;
            if z < y {
                covered[x] = true;
            }
            if witness.is_none() && member[x] {
                witness = Some(ApWitness {
                    elements: vec![z, y, x as u64],
                    difference: (y + modulus - z) % modulus,
                    modulus: Some(modulus),
                });
            }
        }
    }
    (witness, covered)
}

fn tuple_tables(s: &[u64], modulus: u64, p: u32) -> (Option<ApWitness>, Vec<bool>) {
    let witness = mod_progression_in_sorted(s, modulus, p);
    let mut covered = vec![false; modulus as usize];
    let inner = p as u64 - 2;
    for &y in s {
        for d in 1..modulus {
            if inner * d > y {
                break;
            }
            if (1..=inner).all(|j| s.binary_search(&(y - j * d)).is_ok()) {
                covered[((y + d) % modulus) as usize] = true;
            }
        }
    }
    (witness, covered)
}

/// A verified modular p-free set.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "ModularSetRepr")]
pub struct ModularSet {
    p: u32,
    modulus: u64,
    residues: Vec<u64>,
}

#[derive(Deserialize)]
struct ModularSetRepr {
    #[serde(default = "default_p")]
    p: u32,
    modulus: u64,
    residues: Vec<u64>,
}

fn default_p() -> u32 {
    3
}

impl TryFrom<ModularSetRepr> for ModularSet {
    type Error = Error;

    fn try_from(r: ModularSetRepr) -> Result<Self> {
        ModularSet::new(&r.residues, r.modulus, r.p)
    }
}

impl ModularSet {
    /// Verifies and wraps `residues`.
    pub fn new(residues: &[u64], modulus: u64, p: u32) -> Result<Self> {
        let report = verify_modular_set(residues, modulus, p)?;
        if !report.valid {
            let reason = match (&report.freeness_witness, report.uncovered.first()) {
                (Some(w), _) => format!("progression {w}"),
                (None, Some(x)) => format!("{} uncovered residues, first {x}", report.uncovered.len()),
                (None, None) => unreachable!(),
            };
            return Err(Error::NotModular { modulus, reason, report: Box::new(report) });
        }
        Ok(ModularSet { p, modulus, residues: sorted_unique(residues) })
    }

    /// Wraps residues whose validity was established some other way.
    pub(crate) fn trusted(residues: Vec<u64>, modulus: u64, p: u32) -> Self {
        ModularSet { p, modulus, residues }
    }

    /// `{0}` modulo 1, the identity for [`product`].
    pub fn identity(p: u32) -> Result<Self> {
        check_prime(p)?;
        Ok(ModularSet { p, modulus: 1, residues: vec![0] })
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    pub fn residues(&self) -> &[u64] {
        &self.residues
    }

    pub fn len(&self) -> usize {
        self.residues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.residues.is_empty()
    }

    pub fn max(&self) -> u64 {
        *self.residues.last().unwrap()
    }
}

impl fmt::Display for ModularSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.residues.iter().map(u64::to_string).collect();
        if self.p == 3 {
            write!(f, "mod {}: {}", self.modulus, parts.join(","))
        } else {
            write!(f, "mod {} p={}: {}", self.modulus, self.p, parts.join(","))
        }
    }
}

impl FromStr for ModularSet {
    type Err = Error;

    /// Parses `mod 61: 0,6,13` or `mod 25 p=5: 0,3,4`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Precondition(format!("cannot parse modular set from {s:?}"));
        let rest = s.trim().strip_prefix("mod").ok_or_else(bad)?;
        let (head, body) = rest.split_once(':').ok_or_else(bad)?;
        let mut words = head.split_whitespace();
        let modulus: u64 = words.next().ok_or_else(bad)?.parse().map_err(|_| bad())?;
        let p = match words.next() {
            Some(w) => w.strip_prefix("p=").ok_or_else(bad)?.parse().map_err(|_| bad())?,
            None => 3,
        };
        let residues = crate::parse_list(body).map_err(|_| bad())?;
        ModularSet::new(&residues, modulus, p)
    }
}

/// First `count` terms of `A + N·S_p(0)`.
///
/// Since every residue is below `N`, the terms are ordered by the `S_p(0)`
/// index first and the residue second.
pub fn expand(set: &ModularSet, count: usize) -> Sequence {
    let k = set.len();
    let terms = (0..count).map(|i| set.residues[i % k] + set.modulus * s0_term((i / k) as u64, set.p)).collect();
    Sequence { p: set.p, generators: set.residues.clone(), terms }
}

/// Finds the smallest level `ℓ ≥ start` at which
/// `alpha·A + N·block(ℓ)` fits below `p^ℓ·N` and verifies as modular
/// modulo `p^ℓ·N`. A bound-satisfying level that fails to verify moves on
/// to the next one; after `MAX_RETRIES` such failures the construction is
/// reported as contradicting its theorem.
pub(crate) fn lift<F>(set: &ModularSet, alpha: u64, start: u32, mut block: F) -> Result<ModularSet>
where
    F: FnMut(u32) -> Result<Vec<u64>>,
{
    const MAX_RETRIES: u32 = 3;
    const MAX_LEVEL: u32 = 40;
    let (n, p) = (set.modulus, set.p);
    if alpha == 0 || gcd(alpha, n) != 1 {
        return Err(Error::NotCoprime { alpha, modulus: n });
    }
    let scaled: Vec<u64> = set
        .residues
        .iter()
        .map(|&a| a.checked_mul(alpha).ok_or(Error::Overflow("alpha * residue")))
        .collect::<Result<_>>()?;
    let mut failures = Vec::new();
    for level in start..=MAX_LEVEL {
        let modulus = checked_pow(p as u64, level)?.checked_mul(n).ok_or(Error::Overflow("p^l * N"))?;
        let sums = block(level)?;
        let top = scaled.last().unwrap() + n * sums.last().copied().unwrap_or(0);
        if top >= modulus {
            continue;
        }
        let residues =
            sorted_unique(&sums.iter().flat_map(|&s| scaled.iter().map(move |&a| a + n * s)).collect::<Vec<_>>());
        match ModularSet::new(&residues, modulus, p) {
            Ok(m) => return Ok(m),
            Err(Error::NotModular { reason, .. }) => {
                failures.push(format!("l={level}: {reason}"));
                if failures.len() as u32 > MAX_RETRIES {
                    break;
                }
            }
            Err(e) => return Err(e),
        }
    }
    Err(Error::TheoremContradiction(format!(
        "no verifying level for alpha={alpha} over modulus {n}: {}",
        failures.join("; ")
    )))
}

/// Coprime scaling: the modular set `alpha·A + N·S_ℓ` modulo `p^ℓ·N`, where
/// `S_ℓ` is the first `(p-1)^ℓ` terms of `S_p(0)` and `ℓ` is the smallest
/// level that fits and verifies. The expansion of the result equals
/// `alpha·A + N·S_p(0)`.
pub fn scale(set: &ModularSet, alpha: u64) -> Result<ModularSet> {
    let p = set.p;
    lift(set, alpha, 0, |level| {
        let count = checked_pow(p as u64 - 1, level)? as usize;
        Ok(s0_prefix(count, p))
    })
}

/// `A ⊗ B = A + M·B`, a modular set modulo `M·N`.
pub fn product(left: &ModularSet, right: &ModularSet) -> Result<ModularSet> {
    if left.p != right.p {
        return Err(Error::MixedPrime(left.p, right.p));
    }
    let m = left.modulus;
    let modulus = m.checked_mul(right.modulus).ok_or(Error::Overflow("M * N"))?;
    let residues: Vec<u64> =
        right.residues.iter().flat_map(|&b| left.residues.iter().map(move |&a| a + m * b)).collect();
    ModularSet::new(&residues, modulus, left.p)
}

/// ω(A): the largest integer that is neither in S_p(A) nor p-covered by it,
/// or −1 if there is none.
///
/// Every non-member above max(A) was rejected by the greedy rule and is
/// therefore covered, and the members of S_p(A) below max(A) are exactly the
/// generators. So ω(A) is the largest x < max(A) outside A that A does not
/// cover, and no generation is needed.
pub fn omega(generators: &[u64], p: u32) -> Result<i64> {
    check_prime(p)?;
    let gens = sorted_unique(generators);
    if gens.is_empty() {
        return Err(Error::EmptySet);
    }
    if let Some(witness) = find_p_ap(&gens, p)? {
        return Err(Error::NotPFree { p, witness });
    }
    let top = *gens.last().unwrap();
    Ok((0..top)
        .rev()
        .find(|&x| gens.binary_search(&x).is_err() && covered_in_sorted(x, &gens, p).is_none())
        .map_or(-1, |x| x as i64))
}

/// Converts an independent sequence to a modular set `S(A) ∩ [0, N)` with
/// `N = p^ℓ·ρ`, ρ the repeat factor.
///
/// The smallest ℓ whose truncation verifies is returned. The level that
/// satisfies `N - max(A') > ω(A)` and `max(A') > ω(A)` is guaranteed to
/// work, so failing there is reported as a contradiction.
pub fn independent_to_modular(seq: &Sequence, kappa: Option<u32>) -> Result<ModularSet> {
    let p = seq.p;
    let report = detect_independent(seq)?.ok_or(Error::NotIndependent { horizon: seq.len() })?;
    let detected = report.kappa.expect("independent report carries kappa");
    let kappa = match kappa {
        Some(k) if k < detected => {
            return Err(Error::Precondition(format!("kappa {k} is below the minimal kappa {detected}")))
        }
        Some(k) => k,
        None => detected,
    };
    let index = checked_pow(p as u64 - 1, kappa)? as usize;
    let mut seq = seq.extended(seq.len().max(index + 1))?;
    let rho = seq.term(index);
    let omega = omega(&seq.generators, p)?;
    for level in 0..=40 {
        let modulus = checked_pow(p as u64, level)?.checked_mul(rho).ok_or(Error::Overflow("p^l * rho"))?;
        while *seq.terms.last().unwrap() < modulus {
            seq = seq.extended(seq.len() * 2)?;
        }
        let truncated = seq.below(modulus).to_vec();
        let top = *truncated.last().unwrap() as i64;
        let bound_holds = modulus as i64 - top > omega && top > omega;
        match ModularSet::new(&truncated, modulus, p) {
            Ok(m) => return Ok(m),
            Err(Error::NotModular { reason, .. }) if bound_holds => {
                return Err(Error::TheoremContradiction(format!(
                    "truncation modulo {modulus} satisfies the omega bound but is not modular: {reason}"
                )))
            }
            Err(Error::NotModular { .. }) => continue,
            Err(e) => return Err(e),
        }
    }
    Err(Error::TheoremContradiction("no verifying truncation found".into()))
}

/// Greedy generation from a modular set's residues; by the structure
/// theorem this equals [`expand`].
pub fn greedy_from(set: &ModularSet, count: usize) -> Result<Sequence> {
    greedy_stanley(&set.residues, set.p, count.max(set.len()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(residues: &[u64], modulus: u64) -> ModularSet {
        ModularSet::new(residues, modulus, 3).unwrap()
    }

    #[test]
    fn verify_examples() {
        assert!(verify_modular_set(&[0, 1, 7, 8], 10, 3).unwrap().valid);
        let row1 = [0, 6, 13, 14, 16, 17, 27, 29, 30, 35, 36, 49, 50];
        assert!(verify_modular_set(&row1, 61, 3).unwrap().valid);
    }

    #[test]
    fn verify_reports_uncovered() {
        // pairs with z < y reach only 2*1 - 0 = 2
        let r = verify_modular_set(&[0, 1], 10, 3).unwrap();
        assert!(!r.valid);
        assert_eq!(r.freeness_witness, None);
        assert_eq!(r.uncovered, vec![3, 4, 5, 6, 7, 8, 9]);
    }

    #[test]
    fn verify_requires_zero() {
        assert!(matches!(verify_modular_set(&[1, 2], 10, 3), Err(Error::MissingZero)));
        assert!(matches!(verify_modular_set(&[0, 10], 10, 3), Err(Error::ResidueOutOfRange { .. })));
    }

    #[test]
    fn verify_degenerate_progression() {
        let r = verify_modular_set(&[0, 1, 5], 8, 3).unwrap();
        assert!(!r.valid);
        assert!(r.freeness_witness.is_some());
    }

    #[test]
    fn expand_examples() {
        let s = expand(&m(&[0, 1, 7, 8], 10), 16);
        assert_eq!(s.terms, vec![0, 1, 7, 8, 10, 11, 17, 18, 30, 31, 37, 38, 40, 41, 47, 48]);
        let s = expand(&m(&[0], 1), 8);
        assert_eq!(s.terms, vec![0, 1, 3, 4, 9, 10, 12, 13]);
    }

    #[test]
    fn expand_p5() {
        let a = [0, 3, 4, 5, 6, 8, 9, 10, 11, 13, 14, 15, 16, 18, 19, 21];
        let set = ModularSet::new(&a, 25, 5).unwrap();
        let s = expand(&set, 32);
        let mut want = a.to_vec();
        want.extend(a.iter().map(|x| x + 25));
        assert_eq!(s.terms, want);
    }

    #[test]
    fn scale_by_nine() {
        let scaled = scale(&m(&[0, 1, 7, 8], 10), 9).unwrap();
        assert_eq!(scaled.modulus(), 270);
        assert_eq!(expand(&scaled, 15).terms, vec![0, 9, 10, 19, 30, 39, 40, 49, 63, 72, 73, 82, 90, 93, 99]);
    }

    #[test]
    fn scale_identity_and_small() {
        let base = m(&[0, 1, 7, 8], 10);
        assert_eq!(scale(&base, 1).unwrap(), base);
        let s = scale(&m(&[0, 2], 3), 2).unwrap();
        assert_eq!((s.residues(), s.modulus()), (&[0, 3, 4, 7][..], 9));
    }

    #[test]
    fn scale_rejects_shared_factor() {
        assert!(matches!(scale(&m(&[0, 1, 7, 8], 10), 4), Err(Error::NotCoprime { .. })));
    }

    #[test]
    fn product_examples() {
        let a = m(&[0, 1, 7, 8], 10);
        let b = m(&[0, 2], 3);
        let ab = product(&a, &b).unwrap();
        assert_eq!((ab.residues(), ab.modulus()), (&[0, 1, 7, 8, 20, 21, 27, 28][..], 30));
        assert_eq!(product(&a, &ModularSet::identity(3).unwrap()).unwrap(), a);
        let bb = product(&b, &b).unwrap();
        assert_eq!((bb.residues(), bb.modulus()), (&[0, 2, 6, 8][..], 9));
    }

    #[test]
    fn product_is_not_commutative() {
        let a = m(&[0, 1, 7, 8], 10);
        let b = m(&[0, 2], 3);
        assert_ne!(product(&a, &b).unwrap().residues(), product(&b, &a).unwrap().residues());
    }

    #[test]
    fn product_rejects_mixed_p() {
        let a = m(&[0, 2], 3);
        let b = ModularSet::identity(5).unwrap();
        assert!(matches!(product(&a, &b), Err(Error::MixedPrime(3, 5))));
    }

    #[test]
    fn omega_examples() {
        assert_eq!(omega(&[0], 3).unwrap(), -1);
        assert_eq!(omega(&[0, 2], 3).unwrap(), 1);
        assert_eq!(omega(&[0, 1], 3).unwrap(), -1);
        assert_eq!(omega(&[0, 1, 7], 3).unwrap(), 6);
    }

    #[test]
    fn independent_conversion() {
        let s = greedy_stanley(&[0, 1, 7], 3, 64).unwrap();
        let set = independent_to_modular(&s, None).unwrap();
        assert_eq!((set.residues(), set.modulus()), (&[0, 1, 7, 8][..], 10));
        let s0 = greedy_stanley(&[0], 3, 32).unwrap();
        let set = independent_to_modular(&s0, None).unwrap();
        assert_eq!((set.residues(), set.modulus()), (&[0][..], 1));
        let s014 = greedy_stanley(&[0, 1, 4], 3, 17).unwrap();
        assert!(matches!(independent_to_modular(&s014, None), Err(Error::NotIndependent { .. })));
    }

    #[test]
    fn text_round_trip() {
        let a = m(&[0, 1, 7, 8], 10);
        assert_eq!(a.to_string(), "mod 10: 0,1,7,8");
        assert_eq!("mod 10: 0,1,7,8".parse::<ModularSet>().unwrap(), a);
        let b: ModularSet = "mod 25 p=5: 0,3,4,5,6,8,9,10,11,13,14,15,16,18,19,21".parse().unwrap();
        assert_eq!(b.p(), 5);
        assert_eq!(b.to_string().parse::<ModularSet>().unwrap(), b);
    }

    #[test]
    fn json_schema() {
        let a = m(&[0, 1, 7, 8], 10);
        let json = serde_json::to_string(&a).unwrap();
        assert_eq!(json, r#"{"p":3,"modulus":10,"residues":[0,1,7,8]}"#);
        assert_eq!(serde_json::from_str::<ModularSet>(&json).unwrap(), a);
        assert!(serde_json::from_str::<ModularSet>(r#"{"p":3,"modulus":10,"residues":[0,1]}"#).is_err());
    }
}
