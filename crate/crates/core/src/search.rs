//! Exhaustive search for modular sets and the `S_p(0, m)` generator scan.
//!
//! The search decides residues `1, 2, .., N-1` in increasing order. For
//! p = 3 it keeps two tables over residues: `hit[x]` counts ordered pairs
//! `(z, y)` of distinct chosen residues with `2y - z ≡ x`, which decides
//! freeness, and `cov[x]` counts the pairs with `z < y`, which is covering.
//! A branch dies when an excluded residue is uncovered and no pair with a
//! larger, undecided `y` could still reach it. Larger primes check
//! freeness incrementally and covering at the leaves.
//!
//! Work is split into prefixes (decisions for the first few residues) that
//! run independently; the merged output is sorted, so it does not depend on
//! scheduling.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;
use std::sync::atomic::{AtomicBool, AtomicU64, Ordering};
use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::arith::{check_prime, gcd};
use crate::error::{Error, Result};
use crate::modular::ModularSet;
use crate::sequence::greedy_stanley;
use crate::structure::{detect_modular_params, StructureReport};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchTask {
    pub modulus: u64,
    #[serde(default = "default_p")]
    pub p: u32,
    #[serde(default = "one")]
    pub size_min: usize,
    #[serde(default)]
    pub size_max: Option<usize>,
    #[serde(default)]
    pub symmetry_reduction: bool,
    #[serde(default)]
    pub limit: Option<usize>,
}

fn default_p() -> u32 {
    3
}

fn one() -> usize {
    1
}

impl SearchTask {
    pub fn new(modulus: u64) -> Self {
        SearchTask { modulus, p: 3, size_min: 1, size_max: None, symmetry_reduction: false, limit: None }
    }

    pub fn with_size(mut self, size: usize) -> Self {
        self.size_min = size;
        self.size_max = Some(size);
        self
    }

    fn size_max(&self) -> usize {
        self.size_max.unwrap_or(self.modulus as usize)
    }

    fn validate(&self) -> Result<()> {
        check_prime(self.p)?;
        if self.modulus == 0 {
            return Err(Error::ZeroModulus);
        }
        if self.modulus > u32::MAX as u64 {
            return Err(Error::Unsupported("search modulus above 2^32"));
        }
        let n = self.modulus as usize;
        if self.size_min < 1 || self.size_min > self.size_max() || self.size_max() > n {
            return Err(Error::Precondition(format!(
                "size bounds {}..={} must lie within 1..={n}",
                self.size_min,
                self.size_max()
            )));
        }
        Ok(())
    }
}

/// Node and wall-clock limits. Unset fields are unlimited.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Budget {
    pub max_nodes: Option<u64>,
    pub max_millis: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchOutcome {
    pub task: SearchTask,
    /// Sorted, symmetry-reduced when requested, truncated to the limit.
    pub results: Vec<ModularSet>,
    /// Every set found, sorted, before reduction.
    pub found: Vec<ModularSet>,
    /// False when the budget ran out; `pending` then lists unfinished prefixes.
    pub complete: bool,
    pub pending: Vec<Vec<u64>>,
    pub nodes: u64,
    pub elapsed_ms: u64,
}

/// Resumable search state.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub task: SearchTask,
    pub pending: Vec<Vec<u64>>,
    pub results: Vec<ModularSet>,
}

impl SearchOutcome {
    pub fn checkpoint(&self) -> Checkpoint {
        Checkpoint { task: self.task.clone(), pending: self.pending.clone(), results: self.found.clone() }
    }
}

impl Checkpoint {
    pub fn save(&self, path: &Path) -> Result<()> {
        let mut f = std::fs::File::create(path)?;
        serde_json::to_writer_pretty(&mut f, self)?;
        f.write_all(b"\n")?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        Ok(serde_json::from_reader(std::io::BufReader::new(std::fs::File::open(path)?))?)
    }
}

/// Exhaustive search without a budget.
pub fn search_modular_sets(task: &SearchTask) -> Result<Vec<ModularSet>> {
    Ok(search_with_budget(task, Budget::default())?.results)
}

pub fn search_with_budget(task: &SearchTask, budget: Budget) -> Result<SearchOutcome> {
    task.validate()?;
    let prefixes = split(task);
    run(task, prefixes, Vec::new(), budget)
}

/// Continues a budgeted search from its checkpoint.
pub fn resume(checkpoint: &Checkpoint, budget: Budget) -> Result<SearchOutcome> {
    checkpoint.task.validate()?;
    let prefixes = checkpoint.pending.iter().map(|p| p.iter().map(|&r| r as usize).collect()).collect();
    run(&checkpoint.task, prefixes, checkpoint.results.clone(), budget)
}

const SPLIT_DEPTH: usize = 10;
const FLUSH_EVERY: u64 = 1 << 12;

struct Shared {
    nodes: AtomicU64,
    abort: AtomicBool,
    budget: Budget,
    flush_every: u64,
    start: Instant,
}

impl Shared {
    fn new(budget: Budget) -> Self {
        let flush_every = budget.max_nodes.map_or(FLUSH_EVERY, |m| m.clamp(1, FLUSH_EVERY));
        Shared { nodes: AtomicU64::new(0), abort: AtomicBool::new(false), budget, flush_every, start: Instant::now() }
    }
}

impl Shared {
    fn flush(&self, local: &mut u64) -> bool {
        let total = self.nodes.fetch_add(*local, Ordering::Relaxed) + *local;
        *local = 0;
        let over_nodes = self.budget.max_nodes.is_some_and(|m| total > m);
        let over_time = self.budget.max_millis.is_some_and(|m| self.start.elapsed() > Duration::from_millis(m));
        if over_nodes || over_time {
            self.abort.store(true, Ordering::Relaxed);
        }
        self.abort.load(Ordering::Relaxed)
    }
}

/// A prefix and, if it finished within budget, the residue sets under it.
type PrefixOutcome = (Vec<usize>, Option<Vec<Vec<usize>>>);

fn run(
    task: &SearchTask,
    prefixes: Vec<Vec<usize>>,
    mut found: Vec<ModularSet>,
    budget: Budget,
) -> Result<SearchOutcome> {
    let shared = Shared::new(budget);
    let outcomes: Vec<PrefixOutcome> = prefixes
        .into_par_iter()
        .map(|prefix| {
            let mut search = Dfs::new(task, &shared);
            let done = search.run_prefix(&prefix);
            (prefix, done.then(|| std::mem::take(&mut search.found)))
        })
        .collect();
    let mut pending = Vec::new();
    for (prefix, sets) in outcomes {
        match sets {
            Some(sets) => {
                for s in sets {
                    let residues: Vec<u64> = s.into_iter().map(|r| r as u64).collect();
                    found.push(ModularSet::new(&residues, task.modulus, task.p).map_err(|e| {
                        Error::TheoremContradiction(format!("search emitted an unverified set {residues:?}: {e}"))
                    })?);
                }
            }
            None => pending.push(prefix.into_iter().map(|r| r as u64).collect()),
        }
    }
    found.sort_by(|a, b| a.residues().cmp(b.residues()));
    found.dedup();
    let mut results = if task.symmetry_reduction { reduce_by_scaling(&found) } else { found.clone() };
    if let Some(limit) = task.limit {
        results.truncate(limit);
    }
    Ok(SearchOutcome {
        task: task.clone(),
        results,
        found,
        complete: pending.is_empty(),
        pending,
        nodes: shared.nodes.load(Ordering::Relaxed),
        elapsed_ms: shared.start.elapsed().as_millis() as u64,
    })
}

/// Decision prefixes over residues `1..=SPLIT_DEPTH` that survive pruning.
fn split(task: &SearchTask) -> Vec<Vec<usize>> {
    let shared = Shared::new(Budget::default());
    let mut dfs = Dfs::new(task, &shared);
    let depth = (SPLIT_DEPTH + 1).min(dfs.n);
    let mut out = Vec::new();
    dfs.collect_prefixes(1, depth, &mut out);
    out
}

struct Dfs<'a> {
    n: usize,
    p: u32,
    size_min: usize,
    size_max: usize,
    member: Vec<bool>,
    elems: Vec<usize>,
    excluded: Vec<usize>,
    hit: Vec<u32>,
    cov: Vec<u32>,
    found: Vec<Vec<usize>>,
    local_nodes: u64,
    cut: bool,
    shared: &'a Shared,
}

impl<'a> Dfs<'a> {
    fn new(task: &SearchTask, shared: &'a Shared) -> Self {
        let n = task.modulus as usize;
        let mut dfs = Dfs {
            n,
            p: task.p,
            size_min: task.size_min,
            size_max: task.size_max(),
            member: vec![false; n],
            elems: Vec::new(),
            excluded: Vec::new(),
            hit: vec![0; n],
            cov: vec![0; n],
            found: Vec::new(),
            local_nodes: 0,
            cut: false,
            shared,
        };
        dfs.add(0);
        dfs
    }

    fn wrap(&self, v: i64) -> usize {
        v.rem_euclid(self.n as i64) as usize
    }

    fn can_add(&self, r: usize) -> bool {
        if self.p != 3 {
            return self.can_add_general(r);
        }
        if self.hit[r] > 0 {
            return false;
        }
        self.elems.iter().all(|&a| {
            let (a, ri) = (a as i64, r as i64);
            let up = self.wrap(2 * ri - a);
            let down = self.wrap(2 * a - ri);
            !self.member[up] && !self.member[down] && down != r
        })
    }

    /// Every p-term progression modulo `n` through `r`, with `r` counted as
    /// a member, must leave some term outside the set.
    fn can_add_general(&self, r: usize) -> bool {
        let p = self.p as i64;
        for d in 1..self.n as i64 {
            for j in 0..p {
                let all = (0..p).filter(|&i| i != j).all(|i| {
                    let x = self.wrap(r as i64 + (i - j) * d);
                    x == r || self.member[x]
                });
                if all {
                    return false;
                }
            }
        }
        true
    }

    fn add(&mut self, r: usize) {
        if self.p == 3 {
            for i in 0..self.elems.len() {
                let a = self.elems[i] as i64;
                let up = self.wrap(2 * r as i64 - a);
                let down = self.wrap(2 * a - r as i64);
                self.hit[up] += 1;
                self.hit[down] += 1;
                self.cov[up] += 1;
            }
        }
        self.member[r] = true;
        self.elems.push(r);
    }

    fn remove_last(&mut self) {
        let r = self.elems.pop().unwrap();
        self.member[r] = false;
        if self.p == 3 {
            for i in 0..self.elems.len() {
                let a = self.elems[i] as i64;
                let up = self.wrap(2 * r as i64 - a);
                let down = self.wrap(2 * a - r as i64);
                self.hit[up] -= 1;
                self.hit[down] -= 1;
                self.cov[up] -= 1;
            }
        }
    }

    /// Whether some pair `(z, y)` with `y >= pos` undecided and `z < y`
    /// either chosen or undecided could still cover `x`.
    fn coverable(&self, x: usize, pos: usize) -> bool {
        (pos..self.n).any(|y| {
            let z = self.wrap(2 * y as i64 - x as i64);
            z < y && (self.member[z] || z >= pos)
        })
    }

    /// Node-entry pruning shared by both phases.
    fn viable(&self, pos: usize) -> bool {
        let remaining = self.n - pos;
        if self.elems.len() + remaining < self.size_min {
            return false;
        }
        if self.p == 3 {
            return self.excluded.iter().all(|&x| self.cov[x] > 0 || self.coverable(x, pos));
        }
        true
    }

    fn at_leaf(&mut self) {
        if self.elems.len() < self.size_min {
            return;
        }
        let ok = if self.p == 3 {
            (0..self.n).all(|x| self.member[x] || self.cov[x] > 0)
        } else {
            let residues: Vec<u64> = self.elems.iter().map(|&r| r as u64).collect();
            crate::modular::verify_modular_set(&residues, self.n as u64, self.p).is_ok_and(|r| r.valid)
        };
        if ok {
            self.found.push(self.elems.clone());
        }
    }

    fn collect_prefixes(&mut self, pos: usize, depth: usize, out: &mut Vec<Vec<usize>>) {
        if !self.viable(pos) {
            return;
        }
        if pos == depth {
            out.push(self.elems[1..].to_vec());
            return;
        }
        self.branch(pos, |s, next| s.collect_prefixes(next, depth, out));
    }

    /// Tries `pos` in the set, then out of it.
    fn branch<F: FnMut(&mut Self, usize)>(&mut self, pos: usize, mut f: F) {
        if self.elems.len() < self.size_max && self.can_add(pos) {
            self.add(pos);
            f(self, pos + 1);
            self.remove_last();
        }
        self.excluded.push(pos);
        f(self, pos + 1);
        self.excluded.pop();
    }

    /// Replays a prefix and searches below it. Returns false if the budget
    /// stopped the subtree early.
    fn run_prefix(&mut self, prefix: &[usize]) -> bool {
        let depth = (SPLIT_DEPTH + 1).min(self.n);
        for pos in 1..depth {
            if prefix.contains(&pos) {
                self.add(pos);
            } else {
                self.excluded.push(pos);
            }
        }
        self.dfs(depth);
        !self.cut
    }

    fn dfs(&mut self, pos: usize) {
        self.local_nodes += 1;
        if self.local_nodes >= self.shared.flush_every {
            self.shared.flush(&mut self.local_nodes);
        }
        if self.shared.abort.load(Ordering::Relaxed) {
            self.cut = true;
            return;
        }
        if !self.viable(pos) {
            return;
        }
        if pos == self.n {
            self.at_leaf();
            return;
        }
        self.branch(pos, |s, next| s.dfs(next));
    }
}

impl Drop for Dfs<'_> {
    fn drop(&mut self) {
        if self.local_nodes > 0 {
            let mut n = self.local_nodes;
            self.shared.flush(&mut n);
        }
    }
}

/// Sorted image of `set` under `x ↦ αx mod N`.
pub fn scale_residues(set: &[u64], alpha: u64, modulus: u64) -> Vec<u64> {
    let mut out: Vec<u64> = set.iter().map(|&x| ((x as u128 * alpha as u128) % modulus as u128) as u64).collect();
    out.sort_unstable();
    out
}

/// Groups sets whose images under some unit multiplier coincide and keeps
/// the lexicographically smallest found member of each group.
///
/// Multiplying by a unit preserves freeness modulo N but not the ordered
/// covering condition, so groups are formed only from sets that were
/// actually found; no representative stands in for a set that fails.
pub fn reduce_by_scaling(found: &[ModularSet]) -> Vec<ModularSet> {
    let mut groups: BTreeMap<Vec<u64>, ModularSet> = BTreeMap::new();
    for set in found {
        let n = set.modulus();
        let key = (1..n.max(2))
            .filter(|&a| gcd(a, n) == 1)
            .map(|a| scale_residues(set.residues(), a, n))
            .min()
            .unwrap_or_else(|| set.residues().to_vec());
        groups
            .entry(key)
            .and_modify(|best| {
                if set.residues() < best.residues() {
                    *best = set.clone();
                }
            })
            .or_insert_with(|| set.clone());
    }
    let mut out: Vec<ModularSet> = groups.into_values().collect();
    out.sort_by(|a, b| a.residues().cmp(b.residues()));
    out
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CensusRow {
    pub cardinality: usize,
    pub count: usize,
    pub example: String,
}

/// Number of sets per cardinality with the smallest set as an example.
pub fn census(sets: &[ModularSet]) -> Vec<CensusRow> {
    let mut rows: BTreeMap<usize, (usize, &ModularSet)> = BTreeMap::new();
    for s in sets {
        rows.entry(s.len())
            .and_modify(|(count, ex)| {
                *count += 1;
                if s.residues() < ex.residues() {
                    *ex = s;
                }
            })
            .or_insert((1, s));
    }
    rows.into_iter()
        .map(|(cardinality, (count, ex))| CensusRow {
            cardinality,
            count,
            example: ex.residues().iter().map(u64::to_string).collect::<Vec<_>>().join(","),
        })
        .collect()
}

pub fn write_census_csv<W: std::io::Write>(rows: &[CensusRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for row in rows {
        w.serialize(row).map_err(|e| Error::Io(std::io::Error::other(e)))?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScanEntry {
    pub m: u64,
    pub modular: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub report: Option<StructureReport>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

/// Generates `S_p(0, m)` for `1 <= m <= m_max` out to `horizon` terms and
/// records which show modular structure. Failures for one `m` are kept in
/// its entry.
pub fn scan_generators(p: u32, m_max: u64, horizon: usize) -> Result<Vec<ScanEntry>> {
    check_prime(p)?;
    if m_max < 1 {
        return Err(Error::Precondition("m_max must be at least 1".into()));
    }
    Ok((1..=m_max)
        .into_par_iter()
        .map(|m| match greedy_stanley(&[0, m], p, horizon).and_then(|s| detect_modular_params(&s)) {
            Ok(report) => ScanEntry { m, modular: report.is_some(), report, error: None },
            Err(e) => ScanEntry { m, modular: false, report: None, error: Some(e.to_string()) },
        })
        .collect())
}
