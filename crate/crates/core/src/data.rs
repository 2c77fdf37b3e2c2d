//! Bundled reference data: the table of non-independent modular sets and
//! example sequences, bases and sets, embedded at compile time.

use serde::{Deserialize, Serialize};

use crate::basic::Basis;
use crate::error::Result;
use crate::modular::ModularSet;

const TABLE: &str = include_str!("../data/sporadic_sets.json");
const FIXTURES: &str = include_str!("../data/fixtures.json");

#[derive(Debug, Clone, Serialize, Deserialize)]
struct TableFile {
    version: u32,
    sets: Vec<ModularSet>,
}

/// The six non-independent modular sets, in order of modulus.
pub fn table_sets() -> Result<Vec<ModularSet>> {
    Ok(serde_json::from_str::<TableFile>(TABLE)?.sets)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SequenceFixture {
    pub name: String,
    pub p: u32,
    pub generators: Vec<u64>,
    pub terms: Vec<u64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BasisFixture {
    pub name: String,
    pub basis: Basis,
    pub terms: Vec<u64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScalingFixture {
    pub name: String,
    pub set: ModularSet,
    pub alpha: u64,
    pub terms: Vec<u64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SetFixture {
    pub name: String,
    pub set: ModularSet,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Fixtures {
    pub version: u32,
    pub sequences: Vec<SequenceFixture>,
    pub scalings: Vec<ScalingFixture>,
    pub bases: Vec<BasisFixture>,
    pub modular_sets: Vec<SetFixture>,
    /// Generators `m` with modular `S_5(0, m)` as listed, written in base 5.
    pub base5_generators: Vec<String>,
}

impl Fixtures {
    pub fn sequence(&self, name: &str) -> Option<&SequenceFixture> {
        self.sequences.iter().find(|s| s.name == name)
    }

    pub fn modular_set(&self, name: &str) -> Option<&ModularSet> {
        self.modular_sets.iter().find(|s| s.name == name).map(|s| &s.set)
    }

    pub fn base5_values(&self) -> Vec<u64> {
        self.base5_generators.iter().map(|s| u64::from_str_radix(s, 5).expect("base-5 fixture")).collect()
    }
}

pub fn fixtures() -> Result<Fixtures> {
    Ok(serde_json::from_str(FIXTURES)?)
}
