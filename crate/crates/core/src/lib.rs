//! Greedy p-Stanley sequences, modular p-free sets and their structure.
//!
//! A p-Stanley sequence `S_p(A)` starts from a p-free set `A` of
//! nonnegative integers and repeatedly appends the smallest larger integer
//! that keeps the set free of p-term arithmetic progressions.

pub mod arith;
pub mod basic;
pub mod data;
pub mod error;
pub mod gaps;
pub mod modular;
pub mod search;
pub mod sequence;
pub mod sieve;
pub mod structure;
pub mod witness;

pub use basic::{basis_sequence, complete, cover_witness_digits, scale_basic, validate_basis, Basis};
pub use error::{Error, Result};
pub use gaps::{gap_family, gap_profile, GapFamily, GapProfile};
pub use modular::{
    expand, independent_to_modular, omega, product, scale, verify_modular_set, ModularSet, VerificationReport,
};
pub use search::{scan_generators, search_modular_sets, SearchTask};
pub use sequence::{greedy_stanley, Sequence};
pub use structure::{
    build_pseudomodular, classify_growth, detect, detect_independent, detect_modular_params, detect_pseudomodular,
    GrowthClass, GrowthVerdict, StructureKind, StructureReport,
};
pub use witness::{find_p_ap, is_covered, is_covered_mod, p_free_mod, ApWitness};

/// Parses a comma-separated list of nonnegative integers. Whitespace around
/// entries is ignored and an empty string yields an empty list.
pub fn parse_list(s: &str) -> Result<Vec<u64>> {
    let s = s.trim();
    if s.is_empty() {
        return Ok(Vec::new());
    }
    s.split(',')
        .map(|w| w.trim().parse::<u64>().map_err(|_| Error::Precondition(format!("not a nonnegative integer: {w:?}"))))
        .collect()
}
