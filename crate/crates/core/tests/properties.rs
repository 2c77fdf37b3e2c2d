mod common;

use std::collections::BTreeSet;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use stanley::arith::s0_prefix;
use stanley::basic::{
    basis_sequence, cover_witness_digits, greedy_generators, head_sums, truncated_set, truncation, validate_basis,
    Basis,
};
use stanley::data::table_sets;
use stanley::gaps::{family_max_bound, gap_family, gap_profile};
use stanley::modular::{expand, product, scale, verify_modular_set, ModularSet};
use stanley::search::{scale_residues, search_modular_sets, SearchTask};
use stanley::sieve::CoverageSieve;
use stanley::structure::{build_pseudomodular, detect, detect_modular_params, StructureKind, StructureReport};
use stanley::{detect_independent, find_p_ap, greedy_stanley, is_covered, p_free_mod, Sequence};

fn free_set(max: u64, len: usize, p: u32) -> impl Strategy<Value = Vec<u64>> {
    prop::collection::btree_set(1..=max, 0..len).prop_filter_map("not p-free", move |s| {
        let v: Vec<u64> = std::iter::once(0).chain(s).collect();
        find_p_ap(&v, p).unwrap().is_none().then_some(v)
    })
}

fn set_of(v: &[u64]) -> BTreeSet<u64> {
    v.iter().copied().collect()
}

fn searched_sets() -> Vec<ModularSet> {
    (1..=40).flat_map(|n| search_modular_sets(&SearchTask::new(n)).unwrap()).collect()
}

/// Verified p = 3 modular sets with modulus at most 200.
fn small_modular_sets() -> Vec<ModularSet> {
    let mut pool = searched_sets();
    pool.extend(table_sets().unwrap().into_iter().filter(|s| s.modulus() <= 200));
    pool.push(gap_family(0).unwrap().set);
    let base = pool.clone();
    for a in &base {
        for b in &base {
            if a.modulus() * b.modulus() <= 200 {
                pool.push(product(a, b).unwrap());
            }
        }
    }
    pool.sort_by(|a, b| (a.modulus(), a.residues()).cmp(&(b.modulus(), b.residues())));
    pool.dedup();
    pool
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn greedy_is_deterministic(gens in free_set(30, 5, 3), n in 8usize..120, m in 1usize..120) {
        let long = greedy_stanley(&gens, 3, n.max(gens.len())).unwrap();
        let short = greedy_stanley(&gens, 3, m.min(n).max(gens.len())).unwrap();
        prop_assert_eq!(&long.terms[..short.len()], &short.terms[..]);
    }

    #[test]
    fn greedy_matches_reference(gens in free_set(25, 5, 3)) {
        let s = greedy_stanley(&gens, 3, 150).unwrap();
        prop_assert_eq!(s.terms, common::greedy(&gens, 3, 150));
    }

    #[test]
    fn greedy_matches_reference_p5(gens in free_set(25, 6, 5)) {
        let s = greedy_stanley(&gens, 5, 150).unwrap();
        prop_assert_eq!(s.terms, common::greedy(&gens, 5, 150));
    }

    #[test]
    fn greedy_skips_only_covered(gens in free_set(20, 4, 3)) {
        let s = greedy_stanley(&gens, 3, 120).unwrap();
        for i in gens.len()..s.len() {
            let prefix = &s.terms[..i];
            for c in s.terms[i - 1] + 1..s.terms[i] {
                let w = is_covered(c, prefix, 3).unwrap().expect("skipped value must be covered");
                prop_assert!(w.is_consistent());
                prop_assert_eq!(*w.elements.last().unwrap(), c);
            }
        }
    }

    #[test]
    fn freeness_matches_reference_p3(set in prop::collection::btree_set(0..=200u64, 0..30)) {
        let v: Vec<u64> = set.iter().copied().collect();
        let w = find_p_ap(&v, 3).unwrap();
        prop_assert_eq!(w.is_some(), common::has_ap(&set, 3));
        if let Some(w) = w {
            prop_assert!(w.is_consistent() && w.elements.iter().all(|e| set.contains(e)));
        }
    }

    #[test]
    fn freeness_matches_reference_p5(set in prop::collection::btree_set(0..=120u64, 0..45)) {
        let v: Vec<u64> = set.iter().copied().collect();
        prop_assert_eq!(find_p_ap(&v, 5).unwrap().is_some(), common::has_ap(&set, 5));
    }

    #[test]
    fn covering_matches_reference(set in prop::collection::btree_set(0..=200u64, 0..25), x in 0..=400u64) {
        let v: Vec<u64> = set.iter().copied().collect();
        prop_assert_eq!(is_covered(x, &v, 3).unwrap().is_some(), common::covered(x, &set, 3));
        prop_assert_eq!(is_covered(x % 121, &v, 5).unwrap().is_some(), common::covered(x % 121, &set, 5));
    }

    #[test]
    fn sieve_marks_are_exact(gens in free_set(60, 8, 3), extra in 0usize..60, p in prop::sample::select(vec![3u32, 5])) {
        let terms = greedy_stanley(&gens, 3, gens.len() + extra).unwrap().terms;
        let mut sieve = CoverageSieve::new(p).unwrap();
        for &t in &terms {
            sieve.push(t).unwrap();
        }
        for x in 0..=sieve.frontier() {
            prop_assert_eq!(sieve.is_covered(x), is_covered(x, &terms, p).unwrap().is_some());
        }
    }
}

#[test]
fn freeness_exhaustive_small_sets() {
    for mask in 0u32..(1 << 15) {
        let set: BTreeSet<u64> = (0..15u64).filter(|&i| mask >> i & 1 == 1).collect();
        let v: Vec<u64> = set.iter().copied().collect();
        assert_eq!(find_p_ap(&v, 3).unwrap().is_some(), common::has_ap(&set, 3), "{v:?}");
        if mask < 1 << 12 {
            assert_eq!(find_p_ap(&v, 5).unwrap().is_some(), common::has_ap(&set, 5), "{v:?}");
        }
        for x in 0..30 {
            assert_eq!(is_covered(x, &v, 3).unwrap().is_some(), common::covered(x, &set, 3));
        }
    }
}

#[test]
fn digit_lemma() {
    let s = greedy_stanley(&[0], 3, 1 << 10).unwrap();
    let want: Vec<u64> = (0..).filter(|&x| common::restricted_digits(x, 3)).take(1 << 10).collect();
    assert_eq!(s.terms, want);
    let s = greedy_stanley(&[0], 5, 4usize.pow(6)).unwrap();
    let want: Vec<u64> = (0..).filter(|&x| common::restricted_digits(x, 5)).take(4usize.pow(6)).collect();
    assert_eq!(s.terms, want);
}

#[test]
fn expansion_equals_greedy() {
    let pool = small_modular_sets();
    assert!(pool.len() > 150);
    for m in &pool {
        let n = 64.max(2 * m.len());
        assert_eq!(expand(m, n).terms, greedy_stanley(m.residues(), 3, n).unwrap().terms, "{m}");
    }
}

#[test]
fn modulus_promotion() {
    for m in small_modular_sets() {
        let n = m.modulus();
        for level in 1..=2u32 {
            let lifted: Vec<u64> = s0_prefix(2usize.pow(level), 3)
                .iter()
                .flat_map(|&s| m.residues().iter().map(move |&a| a + n * s))
                .collect();
            let report = verify_modular_set(&lifted, n * 3u64.pow(level), 3).unwrap();
            assert!(report.valid, "{m} at level {level}");
        }
    }
}

#[test]
fn scale_by_one_is_identity_on_expansions() {
    for m in small_modular_sets() {
        let s = scale(&m, 1).unwrap();
        assert_eq!(expand(&s, 64).terms, expand(&m, 64).terms);
    }
}

#[test]
fn product_associativity() {
    let pool: Vec<ModularSet> = small_modular_sets().into_iter().filter(|m| m.modulus() <= 30).collect();
    let mut rng = rand::rngs::StdRng::seed_from_u64(11);
    for _ in 0..25 {
        let pick = |rng: &mut rand::rngs::StdRng| pool[rng.gen_range(0..pool.len())].clone();
        let (a, b, c) = (pick(&mut rng), pick(&mut rng), pick(&mut rng));
        let left = product(&product(&a, &b).unwrap(), &c).unwrap();
        let right = product(&a, &product(&b, &c).unwrap()).unwrap();
        assert_eq!(left, right);
        assert_eq!(left.modulus(), a.modulus() * b.modulus() * c.modulus());
    }
}

#[test]
fn table_sets_are_not_independent_sized() {
    for m in table_sets().unwrap() {
        assert!(verify_modular_set(m.residues(), m.modulus(), 3).unwrap().valid);
        assert!(!m.len().is_power_of_two());
    }
}

#[test]
fn modular_detection_round_trip() {
    for m in small_modular_sets() {
        let seq = expand(&m, 8 * m.len());
        let r = detect_modular_params(&seq).unwrap().unwrap_or_else(|| panic!("{m}"));
        let ratio = m.len() / r.m;
        assert!(m.len() % r.m == 0 && ratio.is_power_of_two(), "{m}: m={}", r.m);
    }
}

/// Replays a report's recurrences with p = 3 arithmetic, independently of
/// the detector.
fn replay(report: &StructureReport, seq: &Sequence) -> bool {
    let a = &seq.terms;
    let core: Vec<u64> = match &report.core {
        Some(c) if report.kind == StructureKind::Pseudomodular || report.kind == StructureKind::Regular => {
            greedy_stanley(&c.generators, 3, a.len()).unwrap().terms
        }
        _ => a.clone(),
    };
    let mut k = report.first_level;
    loop {
        let block = report.m << k;
        let start = block - report.sigma;
        if start >= a.len() {
            return true;
        }
        if a[start] as i64 != 2 * a[start - 1] as i64 - report.lambda + 1 {
            return false;
        }
        for i in 0..block {
            if start + i < a.len() && a[start + i] != a[start] + core[i] {
                return false;
            }
        }
        k += 1;
    }
}

#[test]
fn detection_reports_replay() {
    let mut rng = rand::rngs::StdRng::seed_from_u64(5);
    let mut structured = 0;
    let mut cases: Vec<Vec<u64>> =
        vec![vec![0], vec![0, 1, 4], vec![0, 1, 7], vec![0, 1, 4, 5, 12, 14, 15, 31], vec![0, 3], vec![0, 2, 5]];
    while cases.len() < 60 {
        let v: Vec<u64> = std::iter::once(0).chain((0..rng.gen_range(1..4)).map(|_| rng.gen_range(1..30))).collect();
        let v = stanley::arith::sorted_unique(&v);
        if find_p_ap(&v, 3).unwrap().is_none() {
            cases.push(v);
        }
    }
    for gens in cases {
        let seq = greedy_stanley(&gens, 3, 512).unwrap();
        let r = detect(&seq).unwrap();
        if r.is_structured() {
            structured += 1;
            assert!(replay(&r, &seq), "{gens:?}: {r:?}");
        }
    }
    assert!(structured >= 5);
}

#[test]
fn pseudomodular_builds_are_free() {
    let cores = [ModularSet::identity(3).unwrap(), ModularSet::new(&[0, 1, 7, 8], 10, 3).unwrap()];
    for core in &cores {
        let seq = expand(core, 64);
        let lambda = detect_modular_params(&seq).unwrap().unwrap().lambda;
        for k in 1..=3u32 {
            let m = detect_modular_params(&seq).unwrap().unwrap().m;
            let high = seq.terms[m * ((1 << k) - 1)] as i64 - lambda;
            for c in lambda..=high.min(lambda + 12) {
                let built = build_pseudomodular(core, 0, k, c as u64).unwrap();
                assert!(find_p_ap(&built.generators, 3).unwrap().is_none());
            }
        }
    }
}

fn random_basis(rng: &mut rand::rngs::StdRng, p: u32, max_head: u64) -> Basis {
    let pp = p as u64;
    let k0 = rng.gen_range(0..=4usize);
    let head = (0..k0)
        .map(|k| loop {
            let scale = pp.pow(k as u32);
            let u = rng.gen_range(1..=(max_head / scale).max(1));
            if u % pp != 0 {
                break u * scale;
            }
        })
        .collect::<Vec<_>>();
    let k0 = head.len();
    Basis::new(p, head, pp.pow(k0 as u32)).unwrap()
}

#[test]
fn basic_sequences_are_greedy_and_independent() {
    let mut rng = rand::rngs::StdRng::seed_from_u64(3);
    for _ in 0..40 {
        let b = random_basis(&mut rng, 3, 10_000);
        assert!(validate_basis(&b).valid);
        let g = greedy_generators(&b).unwrap();
        let (level, _) = truncation(&b).unwrap();
        let n = (4 * g.len()).max(1 << (level + 2));
        let seq = basis_sequence(&b, n).unwrap();
        assert_eq!(greedy_stanley(&g, 3, n).unwrap().terms, seq, "{b:?}");
        let s = Sequence { p: 3, generators: g, terms: seq };
        assert!(detect_independent(&s).unwrap().is_some(), "{b:?}");
    }
}

#[test]
fn digit_covering_and_distinct_sums() {
    let mut rng = rand::rngs::StdRng::seed_from_u64(9);
    for p in [3u32, 5] {
        for _ in 0..15 {
            let b = random_basis(&mut rng, p, if p == 3 { 300 } else { 150 });
            let sums = head_sums(&b, b.k0()).unwrap();
            assert_eq!(sums.len(), (p as usize - 1).pow(b.k0() as u32));
            let set = truncated_set(&b).unwrap();
            if set.modulus() > 5000 {
                continue;
            }
            for x in 0..set.modulus() {
                if set.residues().binary_search(&x).is_ok() {
                    continue;
                }
                let w = cover_witness_digits(x, &b).unwrap();
                let n = set.modulus() as u128;
                let d = w.difference as u128;
                assert!(w.elements.windows(2).all(|e| (e[0] as u128 + d) % n == e[1] as u128 % n));
                assert!(w.elements[..p as usize - 1].iter().all(|e| set.residues().binary_search(e).is_ok()));
                assert!(w.elements[..p as usize - 1].windows(2).all(|e| e[0] < e[1]));
            }
        }
    }
}

#[test]
fn gap_family_invariants() {
    for m in 0..=1u32 {
        let f = gap_family(m).unwrap();
        assert!(f.verified);
        let seq = expand(&f.set, 1024);
        assert_eq!(gap_profile(&seq, 256).unwrap().min_gap_tail, 2 << m);
    }
    for m in 0..=4u32 {
        let f = gap_family(m).unwrap();
        assert!(f.set.max() < f.set.modulus());
        assert_eq!(f.set.len(), 8usize.pow(m + 1));
    }
    for m in 0..60 {
        assert!(family_max_bound(m).holds());
    }
}

#[test]
fn modular_sequences_have_recurring_gaps() {
    for m in small_modular_sets() {
        let seq = expand(&m, 64 * m.len());
        let g = gap_profile(&seq, seq.len() / 4).unwrap();
        assert!(g.recurring, "{m}");
    }
}

#[test]
fn search_matches_reference_enumeration() {
    for n in 1..=12u64 {
        let got: Vec<Vec<u64>> =
            search_modular_sets(&SearchTask::new(n)).unwrap().iter().map(|s| s.residues().to_vec()).collect();
        assert_eq!(got, common::all_modular_sets(n, 3), "N={n}");
    }
    for n in 1..=9u64 {
        let mut t = SearchTask::new(n);
        t.p = 5;
        let got: Vec<Vec<u64>> = search_modular_sets(&t).unwrap().iter().map(|s| s.residues().to_vec()).collect();
        assert_eq!(got, common::all_modular_sets(n, 5), "p=5 N={n}");
    }
}

#[test]
fn search_results_satisfy_reference_definition() {
    for m in searched_sets() {
        assert!(common::modular(&set_of(m.residues()), m.modulus(), 3), "{m}");
    }
}

#[test]
fn unit_scaling_keeps_freeness_but_not_covering() {
    let mut covering_broken = 0;
    for m in searched_sets() {
        let n = m.modulus();
        for alpha in (1..n).filter(|&a| stanley::arith::gcd(a, n) == 1) {
            let image = scale_residues(m.residues(), alpha, n);
            assert!(p_free_mod(&image, n, 3).unwrap().is_none(), "{m} * {alpha}");
            if !verify_modular_set(&image, n, 3).unwrap().valid {
                covering_broken += 1;
            }
        }
    }
    assert!(covering_broken > 0);
    let image = scale_residues(&[0, 1, 7, 8], 3, 10);
    assert_eq!(image, vec![0, 1, 3, 4]);
    assert!(!verify_modular_set(&image, 10, 3).unwrap().valid);
}
