//! Structural parameter detection for Stanley sequences.
//!
//! All detectors share one recurrence. Level `k` of a sequence with block
//! unit `m` and shift `σ` starts at index `s = m·(p-1)^k - σ`, and with
//! `B = m·(p-1)^k`:
//!
//! ```text
//! a[j·B - σ + i] = j·a[s] + core[i]          1 <= j <= p-2, 0 <= i < B
//! (p-2)·a[s]     = (p-1)·a[s-1] - λ + (p-2)
//! ```
//!
//! For p = 3 this is the familiar doubling recurrence
//! `a[s+i] = a[s] + core[i]`, `a[s] = 2a[s-1] - λ + 1`. Modular and
//! independent sequences use the sequence itself as the core and σ = 0.
//! The normalization gives `S_p(0)` character 0 for every p. λ ≥ 0 is only
//! required for p = 3.
//!
//! A candidate is accepted when its first level lies entirely inside the
//! horizon, at least `min_levels` level start points are inside the horizon,
//! and every in-horizon index of every level from the first one on
//! satisfies both equations with a single λ. Detection never
//! extrapolates: a miss is reported as [`StructureKind::NoneAtHorizon`].

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::modular::{expand, ModularSet};
use crate::sequence::{greedy_stanley, Sequence};
use crate::witness::find_p_ap;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StructureKind {
    Independent,
    Modular,
    Regular,
    Pseudomodular,
    NoneAtHorizon,
}

/// Modular set of a core sequence: its first `m` terms modulo `a_m`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoreRef {
    pub generators: Vec<u64>,
    pub modulus: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StructureReport {
    pub kind: StructureKind,
    pub lambda: i64,
    pub m: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kappa: Option<u32>,
    pub repeat_factor: u64,
    pub sigma: usize,
    /// Lowest level `k` at which the recurrences are required to hold.
    pub first_level: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub core: Option<CoreRef>,
    /// Levels whose start point fell inside the horizon.
    pub levels: u32,
    pub horizon: usize,
}

impl StructureReport {
    fn none(horizon: usize) -> Self {
        StructureReport {
            kind: StructureKind::NoneAtHorizon,
            lambda: 0,
            m: 0,
            kappa: None,
            repeat_factor: 0,
            sigma: 0,
            first_level: 0,
            core: None,
            levels: 0,
            horizon,
        }
    }

    pub fn is_structured(&self) -> bool {
        self.kind != StructureKind::NoneAtHorizon
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DetectConfig {
    pub min_levels: u32,
    pub max_sigma: usize,
    /// Upper bound on the block unit `m`; `None` searches as far as the
    /// horizon allows.
    pub max_m: Option<usize>,
}

impl Default for DetectConfig {
    fn default() -> Self {
        DetectConfig { min_levels: 2, max_sigma: 8, max_m: None }
    }
}

struct Fit {
    lambda: i64,
    levels: u32,
}

/// Replays the level recurrences from `first_level` on. `core = None` uses
/// the sequence itself.
fn check_levels(
    terms: &[u64],
    p: u32,
    unit: usize,
    first_level: u32,
    sigma: usize,
    core: Option<&[u64]>,
    min_levels: u32,
) -> Option<Fit> {
    let len = terms.len();
    let branch = p as usize - 1;
    let mut lambda = None;
    let mut levels = 0;
    for k in first_level.. {
        let block = unit.checked_mul(branch.checked_pow(k)?)?;
        if block <= sigma {
            return None;
        }
        let start = block - sigma;
        if start >= len {
            break;
        }
        if k == first_level && branch * block - sigma > len {
            return None;
        }
        let (a_s, a_prev) = (terms[start] as i128, terms[start - 1] as i128);
        let l = (branch as i128) * a_prev - (branch as i128 - 1) * (a_s - 1);
        if (p == 3 && l < 0) || lambda.is_some_and(|x| x != l) {
            return None;
        }
        lambda = Some(l);
        'blocks: for j in 1..branch {
            let base = j * block - sigma;
            for i in 0..block {
                let idx = base + i;
                if idx >= len {
                    break 'blocks;
                }
                let offset = match core {
                    Some(c) => *c.get(i)? as i128,
                    None => terms[i] as i128,
                };
                if terms[idx] as i128 != j as i128 * a_s + offset {
                    return None;
                }
            }
        }
        levels += 1;
    }
    if levels < min_levels {
        return None;
    }
    Some(Fit { lambda: lambda? as i64, levels })
}

fn require_horizon(seq: &Sequence, config: &DetectConfig) -> Result<()> {
    let need = (seq.p as usize - 1).pow(config.min_levels);
    if seq.len() < need {
        return Err(Error::HorizonTooSmall { have: seq.len(), need });
    }
    Ok(())
}

fn core_ref(terms: &[u64], m: usize, p: u32) -> Option<CoreRef> {
    let modulus = *terms.get(m)?;
    ModularSet::new(&terms[..m], modulus, p).ok().map(|s| CoreRef { generators: s.residues().to_vec(), modulus })
}

/// Independent structure: `a[2^k + i] = a[2^k] + a[i]` and the doubling
/// equation for every `k ≥ κ` (p-ary analogue for p > 3), with κ minimal.
pub fn detect_independent(seq: &Sequence) -> Result<Option<StructureReport>> {
    detect_independent_with(seq, &DetectConfig::default())
}

pub fn detect_independent_with(seq: &Sequence, config: &DetectConfig) -> Result<Option<StructureReport>> {
    require_horizon(seq, config)?;
    let branch = seq.p as usize - 1;
    for kappa in 0u32.. {
        let block = branch.pow(kappa);
        if branch * block > seq.len() {
            break;
        }
        if let Some(fit) = check_levels(&seq.terms, seq.p, 1, kappa, 0, None, config.min_levels) {
            return Ok(Some(StructureReport {
                kind: StructureKind::Independent,
                lambda: fit.lambda,
                m: block,
                kappa: Some(kappa),
                repeat_factor: seq.terms[block],
                sigma: 0,
                first_level: kappa,
                core: core_ref(&seq.terms, block, seq.p),
                levels: fit.levels,
                horizon: seq.len(),
            }));
        }
    }
    Ok(None)
}

/// Modular structure: the recurrences hold for all `k ≥ 0` with block unit
/// `m`, which need not be a power of two. The smallest such `m` is reported.
pub fn detect_modular_params(seq: &Sequence) -> Result<Option<StructureReport>> {
    detect_modular_params_with(seq, &DetectConfig::default())
}

pub fn detect_modular_params_with(seq: &Sequence, config: &DetectConfig) -> Result<Option<StructureReport>> {
    require_horizon(seq, config)?;
    let branch = seq.p as usize - 1;
    let limit = config.max_m.unwrap_or(usize::MAX).min(seq.len().saturating_sub(1) / branch);
    for m in 1..=limit {
        if let Some(fit) = check_levels(&seq.terms, seq.p, m, 0, 0, None, config.min_levels) {
            return Ok(Some(StructureReport {
                kind: StructureKind::Modular,
                lambda: fit.lambda,
                m,
                kappa: None,
                repeat_factor: seq.terms[m],
                sigma: 0,
                first_level: 0,
                core: core_ref(&seq.terms, m, seq.p),
                levels: fit.levels,
                horizon: seq.len(),
            }));
        }
    }
    Ok(None)
}

/// Checks a derived or supplied core: it must itself be modular with the
/// same character and be reproduced by the greedy rule from its modular set.
fn validate_core(core: &[u64], p: u32, lambda: i64, config: &DetectConfig) -> Option<(CoreRef, bool)> {
    let seq = Sequence { p, generators: vec![], terms: core.to_vec() };
    let report = detect_modular_params_with(&seq, config).ok()??;
    if report.lambda != lambda {
        return None;
    }
    let generators = core[..report.m].to_vec();
    let regenerated = greedy_stanley(&generators, p, core.len()).ok()?;
    if regenerated.terms != core {
        return None;
    }
    let independent = detect_independent_with(&seq, config).ok().flatten().is_some();
    Some((CoreRef { generators, modulus: core[report.m] }, independent))
}

/// Pseudomodular structure (p = 3): from some level on, blocks starting at
/// `m·2^k - σ` are translates of a modular core with character λ.
///
/// Without `core_candidates` the core prefix is read off the longest
/// in-horizon block and must itself verify as a modular Stanley sequence.
/// Smaller σ is preferred, then smaller `m`, then an earlier first level.
/// The kind is `Regular` when `m` is a power of two and the core is
/// independent.
pub fn detect_pseudomodular(seq: &Sequence, core_candidates: Option<&[Sequence]>) -> Result<Option<StructureReport>> {
    detect_pseudomodular_with(seq, core_candidates, &DetectConfig::default())
}

pub fn detect_pseudomodular_with(
    seq: &Sequence,
    core_candidates: Option<&[Sequence]>,
    config: &DetectConfig,
) -> Result<Option<StructureReport>> {
    if seq.p != 3 {
        return Err(Error::Unsupported("pseudomodular detection"));
    }
    require_horizon(seq, config)?;
    let (terms, len) = (&seq.terms[..], seq.len());
    let limit = config.max_m.unwrap_or(usize::MAX).min(len / 2);
    for sigma in 0..=config.max_sigma {
        for m in 1..=limit {
            for first in 0u32.. {
                let block = m << first;
                if 2 * block > len + sigma {
                    break;
                }
                if block <= sigma {
                    continue;
                }
                let found = match core_candidates {
                    Some(cands) => cands.iter().find_map(|c| {
                        let fit = check_levels(terms, 3, m, first, sigma, Some(&c.terms), config.min_levels)?;
                        let (core, independent) = validate_core(&c.terms, 3, fit.lambda, config)?;
                        Some((fit, core, independent))
                    }),
                    None => {
                        let core = derived_core(terms, m, first, sigma);
                        check_levels(terms, 3, m, first, sigma, Some(&core), config.min_levels).and_then(|fit| {
                            let (core, independent) = validate_core(&core, 3, fit.lambda, config)?;
                            Some((fit, core, independent))
                        })
                    }
                };
                if let Some((fit, core, independent)) = found {
                    let kind = if m.is_power_of_two() && independent {
                        StructureKind::Regular
                    } else {
                        StructureKind::Pseudomodular
                    };
                    return Ok(Some(StructureReport {
                        kind,
                        lambda: fit.lambda,
                        m,
                        kappa: None,
                        repeat_factor: terms[block - sigma],
                        sigma,
                        first_level: first,
                        core: Some(core),
                        levels: fit.levels,
                        horizon: len,
                    }));
                }
            }
        }
    }
    Ok(None)
}

/// Longest run `a[s+i] - a[s]` available at any level from `first` on.
fn derived_core(terms: &[u64], m: usize, first: u32, sigma: usize) -> Vec<u64> {
    let len = terms.len();
    let mut best: &[u64] = &[];
    let mut start_value = 0;
    for k in first.. {
        let block = m << k;
        let start = block - sigma;
        if start >= len {
            break;
        }
        let run = &terms[start..len.min(start + block)];
        if run.len() > best.len() {
            best = run;
            start_value = terms[start];
        }
    }
    best.iter().map(|&t| t - start_value).collect()
}

/// Runs every detector in order of specificity: independent, modular,
/// then pseudomodular (p = 3 only).
pub fn detect(seq: &Sequence) -> Result<StructureReport> {
    detect_with(seq, &DetectConfig::default())
}

pub fn detect_with(seq: &Sequence, config: &DetectConfig) -> Result<StructureReport> {
    if let Some(r) = detect_independent_with(seq, config)? {
        return Ok(r);
    }
    if let Some(r) = detect_modular_params_with(seq, config)? {
        return Ok(r);
    }
    if seq.p == 3 {
        if let Some(r) = detect_pseudomodular_with(seq, None, config)? {
            return Ok(r);
        }
    }
    Ok(StructureReport::none(seq.len()))
}

/// Generators built by translating part of a modular sequence, together
/// with the structure found in their Stanley sequence.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PseudomodularBuild {
    pub generators: Vec<u64>,
    pub report: StructureReport,
}

/// Builds `A_k^c = {a_i : i < m·2^k - σ} ∪ {c + a_i : m·2^k - σ <= i < m·2^(k+1) - σ}`
/// from the modular sequence of `set`, for `λ <= c <= a[m·(2^k - 1)] - λ`.
///
/// The result is checked 3-free, and its Stanley sequence is checked to be
/// pseudomodular with the original modular sequence as its core. Either
/// check failing is reported as a contradiction.
pub fn build_pseudomodular(set: &ModularSet, sigma: usize, k: u32, c: u64) -> Result<PseudomodularBuild> {
    if set.p() != 3 {
        return Err(Error::Unsupported("build_pseudomodular"));
    }
    if k == 0 {
        return Err(Error::Precondition("k must be positive".into()));
    }
    let probe = expand(set, 8 * set.len());
    let params = detect_modular_params(&probe)?
        .ok_or_else(|| Error::TheoremContradiction(format!("expansion of {set} shows no modular structure")))?;
    let (m, lambda) = (params.m, params.lambda);
    let upper = m << (k + 1);
    if upper <= sigma {
        return Err(Error::Precondition(format!("sigma {sigma} too large for m={m}, k={k}")));
    }
    let horizon = (m << (k + 4)).max(64);
    let base = expand(set, horizon);
    let high = base.terms[m * ((1 << k) - 1)] as i64 - lambda;
    if (c as i64) < lambda || (c as i64) > high {
        return Err(Error::ShiftOutOfRange { c, low: lambda, high });
    }
    let split = (m << k) - sigma;
    let mut generators: Vec<u64> = base.terms[..split].to_vec();
    generators.extend(base.terms[split..upper - sigma].iter().map(|&a| a + c));
    if let Some(w) = find_p_ap(&generators, 3)? {
        return Err(Error::TheoremContradiction(format!("A_k^c contains the progression {w}")));
    }
    let built = greedy_stanley(&generators, 3, horizon)?;
    let report = detect_pseudomodular(&built, Some(std::slice::from_ref(&base)))?.ok_or_else(|| {
        Error::TheoremContradiction(format!("S(A_k^c) is not pseudomodular with core {set} within {horizon} terms"))
    })?;
    Ok(PseudomodularBuild { generators, report })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GrowthClass {
    Type1Evidence,
    Type2Fit,
    Unknown,
}

/// Empirical growth reading. The thresholds are desk-scale heuristics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GrowthVerdict {
    pub classification: GrowthClass,
    /// (min, max) of `a_n / n^(log_{p-1} p)` over the top half of indices.
    pub band: (f64, f64),
    /// Coefficient of determination of `a_n ≈ c·n²/ln n` over the top half.
    pub fit_quality: f64,
    pub fit_coefficient: f64,
    pub structure: StructureKind,
    pub heuristic: bool,
}

pub const TYPE2_R2_THRESHOLD: f64 = 0.99;
pub const MIN_GROWTH_TERMS: usize = 64;

pub fn classify_growth(seq: &Sequence) -> Result<GrowthVerdict> {
    if seq.len() < MIN_GROWTH_TERMS {
        return Err(Error::HorizonTooSmall { have: seq.len(), need: MIN_GROWTH_TERMS });
    }
    let structure = detect(seq)?.kind;
    let p = seq.p as f64;
    let exponent = p.ln() / (p - 1.0).ln();
    let top: Vec<(f64, f64)> = (seq.len() / 2..seq.len()).map(|n| (n as f64, seq.terms[n] as f64)).collect();

    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for &(n, a) in &top {
        let r = a / n.powf(exponent);
        lo = lo.min(r);
        hi = hi.max(r);
    }

    let xs: Vec<f64> = top.iter().map(|&(n, _)| n * n / n.ln()).collect();
    let sxy: f64 = xs.iter().zip(&top).map(|(x, &(_, a))| x * a).sum();
    let sxx: f64 = xs.iter().map(|x| x * x).sum();
    let coef = sxy / sxx;
    let mean = top.iter().map(|&(_, a)| a).sum::<f64>() / top.len() as f64;
    let ss_res: f64 = xs.iter().zip(&top).map(|(x, &(_, a))| (a - coef * x).powi(2)).sum();
    let ss_tot: f64 = top.iter().map(|&(_, a)| (a - mean).powi(2)).sum();
    let r2 = if ss_tot > 0.0 { 1.0 - ss_res / ss_tot } else { 0.0 };

    let classification = if structure != StructureKind::NoneAtHorizon {
        GrowthClass::Type1Evidence
    } else if r2 >= TYPE2_R2_THRESHOLD {
        GrowthClass::Type2Fit
    } else {
        GrowthClass::Unknown
    };
    Ok(GrowthVerdict {
        classification,
        band: (lo, hi),
        fit_quality: r2,
        fit_coefficient: coef,
        structure,
        heuristic: true,
    })
}
