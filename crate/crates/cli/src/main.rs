mod output;

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use stanley::basic::{basis_sequence, truncation, BasisValidation};
use stanley::search::{census, reduce_by_scaling, resume, search_with_budget, Budget, Checkpoint};
use stanley::structure::build_pseudomodular;
use stanley::{
    classify_growth, complete, detect, expand, gap_family, gap_profile, greedy_stanley, parse_list, product, scale,
    scale_basic, scan_generators, validate_basis, verify_modular_set, Basis, ModularSet, SearchTask, Sequence,
    StructureKind,
};

use output::{Format, OutputRecord, Timing};

/// Comma-separated list of non-negative integers.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(transparent)]
struct List(Vec<u64>);

impl FromStr for List {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        parse_list(s).map(List).map_err(|e| e.to_string())
    }
}

#[derive(Debug, Parser, Serialize)]
#[command(name = "stanley", version, about = "Stanley sequences and modular p-free sets")]
struct Cli {
    #[command(flatten)]
    #[serde(flatten)]
    global: Global,
    #[command(subcommand)]
    #[serde(rename = "args")]
    command: Command,
}

#[derive(Debug, Args, Serialize)]
struct Global {
    /// Odd prime defining the forbidden progression length.
    #[arg(long, global = true, default_value_t = 3)]
    p: u32,
    /// Number of terms to generate.
    #[arg(long, global = true)]
    count: Option<usize>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Comma-separated generators, residues or set elements.
    #[arg(long, global = true)]
    set: Option<List>,
    #[arg(long, global = true)]
    modulus: Option<u64>,
    /// JSON input in the schema of the command's main operand.
    #[arg(long, global = true)]
    seed_file: Option<PathBuf>,
    /// Write output here instead of standard output.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads for `search` and `scan`.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Node budget for `search`.
    #[arg(long, global = true)]
    budget: Option<u64>,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "kebab-case")]
enum Command {
    /// Greedy Stanley sequence from the generators in --set.
    Gen,
    /// Check whether --set is a modular set modulo --modulus.
    Verify,
    /// Stanley sequence of a modular set, by translation.
    Expand,
    /// Scale a modular set by a unit; with --head, via a basic sequence.
    Scale {
        #[arg(long)]
        alpha: u64,
        #[arg(long)]
        head: Option<List>,
        #[arg(long)]
        tail_start: Option<u64>,
    },
    /// Product of --set/--modulus with --by-set/--by-modulus.
    Product {
        #[arg(long)]
        by_set: List,
        #[arg(long)]
        by_modulus: u64,
    },
    /// Detect independent, modular or pseudomodular structure.
    Detect,
    /// Build a pseudomodular generator set from a modular set.
    BuildPseudo {
        #[arg(long, default_value_t = 0)]
        sigma: usize,
        #[arg(long)]
        k: u32,
        #[arg(long)]
        c: u64,
    },
    /// Basic sequences.
    Basis {
        #[command(subcommand)]
        action: BasisAction,
    },
    /// Gap family and gap profiles.
    Gaps {
        #[command(subcommand)]
        action: GapsAction,
    },
    /// Exhaustive search for modular sets modulo --modulus.
    Search {
        /// Exact cardinality.
        #[arg(long)]
        size: Option<usize>,
        #[arg(long)]
        size_min: Option<usize>,
        #[arg(long)]
        size_max: Option<usize>,
        #[arg(long)]
        limit: Option<usize>,
        /// Keep one representative per orbit under multiplication by units.
        #[arg(long)]
        symmetry: bool,
        #[arg(long)]
        budget_ms: Option<u64>,
        /// Save a resumable checkpoint here when the budget runs out.
        #[arg(long)]
        checkpoint: Option<PathBuf>,
        /// Report counts per cardinality instead of the sets.
        #[arg(long)]
        census: bool,
    },
    /// Scan S_p(0, m) for 1 <= m <= --m-max for modular structure.
    Scan {
        #[arg(long, default_value_t = 100)]
        m_max: u64,
    },
    /// Empirical growth classification.
    Classify,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "kebab-case")]
enum BasisAction {
    /// Check the basis hypotheses.
    Validate(BasisArgs),
    /// Subset sums of the basis in increasing order.
    Gen(BasisArgs),
    /// Complete the 3-free set in --set to a regular sequence.
    Complete,
}

#[derive(Debug, Args, Serialize)]
struct BasisArgs {
    #[arg(long)]
    head: Option<List>,
    #[arg(long)]
    tail_start: Option<u64>,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "kebab-case")]
enum GapsAction {
    /// The set A_m with minimum gap 2^(m+1).
    Family {
        #[arg(long)]
        m: u32,
    },
    /// Minimum gap of a sequence after a burn-in.
    Profile {
        #[arg(long, default_value_t = 0)]
        burn_in: usize,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Gen => "gen",
            Command::Verify => "verify",
            Command::Expand => "expand",
            Command::Scale { .. } => "scale",
            Command::Product { .. } => "product",
            Command::Detect => "detect",
            Command::BuildPseudo { .. } => "build-pseudo",
            Command::Basis { action: BasisAction::Validate(_) } => "basis validate",
            Command::Basis { action: BasisAction::Gen(_) } => "basis gen",
            Command::Basis { action: BasisAction::Complete } => "basis complete",
            Command::Gaps { action: GapsAction::Family { .. } } => "gaps family",
            Command::Gaps { action: GapsAction::Profile { .. } } => "gaps profile",
            Command::Search { .. } => "search",
            Command::Scan { .. } => "scan",
            Command::Classify => "classify",
        }
    }
}

/// A failed run. Every error maps to exit code 2.
#[derive(Debug)]
struct Failure(String);

impl<E: std::fmt::Display> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure(e.to_string())
    }
}

type Run<T> = Result<T, Failure>;

/// Result payload and whether it is a negative answer (exit code 1).
struct Answer {
    result: Value,
    negative: bool,
}

impl Answer {
    fn of<T: Serialize>(result: T) -> Run<Answer> {
        Ok(Answer { result: serde_json::to_value(result)?, negative: false })
    }
}

fn read_json<T: DeserializeOwned>(path: &Path) -> Run<T> {
    let text = std::fs::read_to_string(path).map_err(|e| Failure(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Failure(format!("{}: {e}", path.display())))
}

fn require<T: Clone>(value: &Option<T>, flag: &str) -> Run<T> {
    value.clone().ok_or_else(|| Failure(format!("{flag} is required")))
}

#[derive(Deserialize)]
struct RawSet {
    #[serde(default)]
    p: Option<u32>,
    modulus: u64,
    residues: Vec<u64>,
}

fn raw_set(g: &Global) -> Run<(Vec<u64>, u64, u32)> {
    match &g.seed_file {
        Some(path) => {
            let r: RawSet = read_json(path)?;
            Ok((r.residues, r.modulus, r.p.unwrap_or(g.p)))
        }
        None => Ok((require(&g.set, "--set")?.0, require(&g.modulus, "--modulus")?, g.p)),
    }
}

fn modular_set(g: &Global) -> Run<ModularSet> {
    let (residues, modulus, p) = raw_set(g)?;
    Ok(ModularSet::new(&residues, modulus, p)?)
}

fn sequence(g: &Global, default_count: usize) -> Run<Sequence> {
    match &g.seed_file {
        Some(path) => {
            let s: Sequence = read_json(path)?;
            Ok(match g.count {
                Some(n) => s.extended(n)?,
                None => s,
            })
        }
        None => {
            let gens = require(&g.set, "--set")?.0;
            Ok(greedy_stanley(&gens, g.p, g.count.unwrap_or(default_count).max(gens.len()))?)
        }
    }
}

fn basis(g: &Global, head: &Option<List>, tail_start: Option<u64>) -> Run<Basis> {
    if let Some(path) = &g.seed_file {
        return read_json(path);
    }
    let head = head.clone().map(|l| l.0).unwrap_or_default();
    let tail = match tail_start {
        Some(t) => t,
        None => (g.p as u64).checked_pow(head.len() as u32).ok_or_else(|| Failure("head too long".into()))?,
    };
    Ok(Basis::new(g.p, head, tail)?)
}

fn execute(cli: &Cli) -> Run<Answer> {
    let g = &cli.global;
    match &cli.command {
        Command::Gen => Answer::of(sequence(g, 32)?.terms),
        Command::Verify => {
            let (residues, modulus, p) = raw_set(g)?;
            let r = verify_modular_set(&residues, modulus, p)?;
            Ok(Answer {
                result: json!({
                    "p": p,
                    "modulus": modulus,
                    "residues": residues,
                    "valid": r.valid,
                    "uncovered": r.uncovered,
                    "freeness_witness": r.freeness_witness,
                }),
                negative: !r.valid,
            })
        }
        Command::Expand => {
            let set = modular_set(g)?;
            Answer::of(expand(&set, g.count.unwrap_or(4 * set.len())).terms)
        }
        Command::Scale { alpha, head, tail_start } => {
            let set = modular_set(g)?;
            let scaled = match head {
                Some(h) => {
                    let tail = tail_start.ok_or_else(|| Failure("--tail-start is required with --head".into()))?;
                    scale_basic(&set, *alpha, &Basis::new(g.p, h.0.clone(), tail)?)?
                }
                None => scale(&set, *alpha)?,
            };
            Answer::of(scaled)
        }
        Command::Product { by_set, by_modulus } => {
            let left = modular_set(g)?;
            let right = ModularSet::new(&by_set.0, *by_modulus, g.p)?;
            Answer::of(product(&left, &right)?)
        }
        Command::Detect => {
            let report = detect(&sequence(g, 1024)?)?;
            let negative = report.kind == StructureKind::NoneAtHorizon;
            Ok(Answer { result: serde_json::to_value(report)?, negative })
        }
        Command::BuildPseudo { sigma, k, c } => Answer::of(build_pseudomodular(&modular_set(g)?, *sigma, *k, *c)?),
        Command::Basis { action } => match action {
            BasisAction::Validate(a) => {
                let b = basis(g, &a.head, a.tail_start)?;
                let v: BasisValidation = validate_basis(&b);
                let negative = !v.valid;
                let mut result = serde_json::to_value(&v)?;
                if v.valid {
                    let (level, modulus) = truncation(&b)?;
                    result["truncation"] = json!({"level": level, "modulus": modulus});
                }
                Ok(Answer { result, negative })
            }
            BasisAction::Gen(a) => {
                let b = basis(g, &a.head, a.tail_start)?;
                Answer::of(basis_sequence(&b, g.count.unwrap_or(32))?)
            }
            BasisAction::Complete => Answer::of(complete(&require(&g.set, "--set")?.0)?),
        },
        Command::Gaps { action } => match action {
            GapsAction::Family { m } => Answer::of(gap_family(*m)?),
            GapsAction::Profile { burn_in } => {
                let seq = match g.modulus {
                    Some(_) => expand(&modular_set(g)?, g.count.unwrap_or(1024)),
                    None => sequence(g, 1024)?,
                };
                Answer::of(gap_profile(&seq, *burn_in)?)
            }
        },
        Command::Search { size, size_min, size_max, limit, symmetry, budget_ms, checkpoint, census: by_size } => {
            let budget = Budget { max_nodes: g.budget, max_millis: *budget_ms };
            let outcome = match &g.seed_file {
                Some(path) => resume(&read_json::<Checkpoint>(path)?, budget)?,
                None => {
                    let mut task = SearchTask::new(require(&g.modulus, "--modulus")?);
                    task.p = g.p;
                    if let Some(k) = size {
                        task = task.with_size(*k);
                    }
                    if let Some(k) = size_min {
                        task.size_min = *k;
                    }
                    if size_max.is_some() {
                        task.size_max = *size_max;
                    }
                    task.symmetry_reduction = *symmetry;
                    task.limit = *limit;
                    search_with_budget(&task, budget)?
                }
            };
            if !outcome.complete {
                if let Some(path) = checkpoint {
                    outcome.checkpoint().save(path)?;
                }
            }
            let sets = if *by_size {
                let reduced = if outcome.task.symmetry_reduction {
                    reduce_by_scaling(&outcome.found)
                } else {
                    outcome.found.clone()
                };
                serde_json::to_value(census(&reduced))?
            } else {
                serde_json::to_value(&outcome.results)?
            };
            Ok(Answer {
                result: json!({
                    "modulus": outcome.task.modulus,
                    "p": outcome.task.p,
                    "complete": outcome.complete,
                    "nodes": outcome.nodes,
                    "pending": outcome.pending.len(),
                    if *by_size { "census" } else { "sets" }: sets,
                }),
                negative: false,
            })
        }
        Command::Scan { m_max } => Answer::of(scan_generators(g.p, *m_max, g.count.unwrap_or(4096))?),
        Command::Classify => Answer::of(classify_growth(&sequence(g, 1024)?)?),
    }
}

fn render(cli: &Cli, record: &OutputRecord) -> Run<String> {
    Ok(match cli.global.format {
        Format::Json => serde_json::to_string_pretty(record)? + "\n",
        Format::Plain => output::plain(&record.result),
        Format::Csv => output::csv(&record.result)?,
    })
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    if let Some(n) = cli.global.threads {
        if matches!(cli.command, Command::Search { .. } | Command::Scan { .. }) {
            if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
                eprintln!("error: {e}");
                return ExitCode::from(2);
            }
        }
    }
    let start = Instant::now();
    let outcome = execute(&cli).and_then(|answer| {
        let record = OutputRecord {
            command: cli.command.name().to_string(),
            parameters: serde_json::to_value(&cli)?,
            result: answer.result,
            timing: Timing { elapsed_us: start.elapsed().as_micros() as u64 },
        };
        let text = render(&cli, &record)?;
        match &cli.global.out {
            Some(path) => std::fs::write(path, text)?,
            None => print!("{text}"),
        }
        Ok(answer.negative)
    });
    match outcome {
        Ok(false) => ExitCode::SUCCESS,
        Ok(true) => ExitCode::from(1),
        Err(Failure(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
