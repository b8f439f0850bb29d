//! Command-line front end: configuration ingestion, subcommand dispatch and
//! deterministic JSON reports.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_rational::BigRational;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::algebra::{check_square_zero, torsion_order, CountDocument, TorsionOrder, Truncation};
use crate::building::{self, Cancellation, Convention, Entry};
use crate::covers::{self, BranchProfile, RigidityReport};
use crate::index::{self, CurveIndexData, PunctureProfile};
use crate::model::{self, Model};
use crate::ratio;
use crate::surface::{classes_of_length, CyclicWord, SurfaceGroup};
use crate::topology::{cobracket, cobracket_coefficients, sporadic_count, sporadic_count_direct, Registry};

pub const MANIFEST_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Validation(String),
    #[error("{message}")]
    Consistency { message: String, witness: String },
    #[error("{0}")]
    Internal(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 2,
            CliError::Consistency { .. } => 3,
            CliError::Internal(_) => 4,
        }
    }
}

fn validation(e: impl ToString) -> CliError {
    CliError::Validation(e.to_string())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ConventionArg {
    TwinsDistinct,
    TwinsIdentified,
    Mixed,
}

impl From<ConventionArg> for Convention {
    fn from(c: ConventionArg) -> Convention {
        match c {
            ConventionArg::TwinsDistinct => Convention::TwinsDistinct,
            ConventionArg::TwinsIdentified => Convention::TwinsIdentified,
            ConventionArg::Mixed => Convention::Mixed,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "sft-lab", version, about = "Exact SFT combinatorics: building enumeration, torsion, cobracket, index and rigidity")]
pub struct Cli {
    /// Model configuration (JSON); the bundled reference model when omitted.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output file, written atomically; standard output when omitted.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// How twin configurations are counted.
    #[arg(long, global = true, value_enum, default_value = "mixed")]
    pub convention: ConventionArg,
    /// Largest power of ħ kept.
    #[arg(long, global = true, default_value_t = 3)]
    pub trunc_hbar: u32,
    /// Largest number of generators in a monomial.
    #[arg(long, global = true, default_value_t = 3)]
    pub trunc_len: usize,
    /// Seed for sampling.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Enumerate index-1 buildings and their twin pairing.
    Enumerate {
        /// Arithmetic genus; all shapes with genus + ends <= 2 when omitted.
        #[arg(long, requires = "ends")]
        genus: Option<u32>,
        /// Number of positive ends.
        #[arg(long, requires = "genus")]
        ends: Option<u32>,
    },
    /// Algebraic torsion order from a count table.
    Torsion {
        /// Count table (JSON); derived from the model's twin pairing when omitted.
        #[arg(long)]
        counts: Option<PathBuf>,
        /// Leave the sporadic count out of the derived table.
        #[arg(long)]
        without_sporadic: bool,
        /// Action cap of the truncation, as "p/q"; the model threshold when omitted.
        #[arg(long)]
        action_cap: Option<String>,
    },
    /// Cobracket and sporadic count of a class on a surface.
    Cobracket {
        #[arg(long, default_value_t = 2)]
        genus: u8,
        /// Word such as "a1b2A1B2"; capital letters are inverses.
        #[arg(long, required_unless_present = "sample")]
        word: Option<String>,
        /// Label registry (JSON) to extend; fresh when omitted.
        #[arg(long)]
        registry: Option<PathBuf>,
        /// Sample this many classes of the given length instead of one word.
        #[arg(long, conflicts_with = "word")]
        sample: Option<usize>,
        #[arg(long, default_value_t = 6)]
        length: usize,
    },
    /// Index calculus.
    Index {
        #[command(subcommand)]
        op: IndexOp,
    },
    /// Super-rigidity verdicts for branched covers.
    Rigidity(RigidityArgs),
}

#[derive(Debug, Subcommand)]
pub enum IndexOp {
    /// CZ index in the model and in the semi-filling.
    Cz {
        #[arg(long)]
        crit_index: u8,
        #[arg(long, allow_hyphen_values = true)]
        cz_base: i64,
    },
    /// Fredholm index from dimension, Euler characteristic, Chern number and CZ indices.
    Fredholm {
        #[arg(long)]
        half_dim: i64,
        #[arg(long, allow_hyphen_values = true)]
        euler: i64,
        #[arg(long, default_value_t = 0, allow_hyphen_values = true)]
        chern: i64,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        positive_cz: Vec<i64>,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        negative_cz: Vec<i64>,
    },
    /// Normal index and transversality of a puncture profile.
    Normal {
        #[arg(long, default_value_t = 0)]
        genus: u32,
        /// Positive ends over Morse index 0, 1, 2.
        #[arg(long, value_delimiter = ',', default_values_t = [0, 0, 0])]
        positive: Vec<u32>,
        /// Negative ends over Morse index 0, 1, 2.
        #[arg(long, value_delimiter = ',', default_values_t = [0, 0, 0])]
        negative: Vec<u32>,
    },
    /// Smallest k + l with k <= G, l even and 2k + l > 2c.
    KernelBound {
        #[arg(long, allow_hyphen_values = true)]
        c1: i64,
        #[arg(long)]
        gamma_even: u32,
    },
    /// Rank of the obstruction bundle.
    ObstructionRank {
        #[arg(long, allow_hyphen_values = true)]
        rank_in_leaf: i64,
        #[arg(long, allow_hyphen_values = true)]
        ind_n: i64,
        #[arg(long, allow_hyphen_values = true)]
        dim_ker: i64,
    },
    /// Dimension of the gluing base.
    GluingBaseDim {
        #[arg(long, allow_hyphen_values = true)]
        virt_dim: i64,
        #[arg(long, allow_hyphen_values = true)]
        rank: i64,
    },
}

#[derive(Debug, Args)]
pub struct RigidityArgs {
    /// Sweep all profiles up to the given degree and branching.
    #[arg(long)]
    pub sweep: bool,
    #[arg(long, default_value_t = 2)]
    pub degree: u32,
    /// Interior vanishing order of the cover.
    #[arg(long, default_value_t = 0)]
    pub interior: u32,
    /// Cover puncture multiplicities; unbranched at the punctures when omitted.
    #[arg(long, value_delimiter = ',')]
    pub multiplicities: Option<Vec<u32>>,
    #[arg(long, default_value_t = 2)]
    pub base_punctures: u32,
    #[arg(long, default_value_t = 0, allow_hyphen_values = true)]
    pub base_euler: i64,
    #[arg(long, default_value_t = 2)]
    pub min_degree: u32,
    #[arg(long, default_value_t = 5)]
    pub max_degree: u32,
    #[arg(long, default_value_t = 1)]
    pub min_branching: i64,
    #[arg(long, default_value_t = 6)]
    pub max_branching: i64,
}

/// Envelope of every emitted document. Timing goes to standard error so
/// identical inputs give byte-identical documents.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest<T> {
    pub schema_version: u32,
    pub tool: String,
    pub version: String,
    pub command: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub config_digest: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub convention: Option<ConventionRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub truncation: Option<Truncation>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub summary: String,
    pub result: T,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConventionRecord {
    pub name: Convention,
    pub description: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ShapeSummary {
    pub genus: u32,
    pub ends: u32,
    pub case: building::Case,
    pub count: usize,
    pub left: usize,
    pub right: usize,
    pub summary: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EnumerateResult {
    pub shapes: Vec<ShapeSummary>,
    pub total: usize,
    pub entries: Vec<Entry>,
    pub cancellation: Cancellation,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TorsionResult {
    pub square_zero: bool,
    pub checked_monomials: usize,
    pub order: Option<u32>,
    pub verdict: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub certificate: Option<std::collections::BTreeMap<String, String>>,
    pub counts: CountDocument,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TensorTerm {
    pub left: String,
    pub right: String,
    pub coefficient: i64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabelCoefficient {
    pub left: i64,
    pub right: i64,
    pub coefficient: i64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CobracketReport {
    pub word: String,
    pub canonical: String,
    pub cobracket: Vec<TensorTerm>,
    pub coefficients: Vec<LabelCoefficient>,
    pub sporadic_count: i64,
    pub sporadic_count_direct: i64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CobracketResult {
    pub genus: u8,
    pub classes: Vec<CobracketReport>,
    pub registry: std::collections::BTreeMap<String, i64>,
    pub power_convention: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RigidityRow {
    pub profile: BranchProfile,
    pub report: RigidityReport,
    /// Why the profile is not a connected cover, when it is not; the verdict
    /// arithmetic is reported regardless.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub not_realizable: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RigidityResult {
    pub rows: Vec<RigidityRow>,
    pub injective_forced: usize,
    pub inconclusive: usize,
}

/// SHA-256 of the document with object keys sorted and no whitespace.
pub fn digest(value: &serde_json::Value) -> String {
    let canonical = serde_json::to_string(value).expect("JSON values serialize");
    format!("{:x}", Sha256::digest(canonical.as_bytes()))
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| validation(format!("{}: {e}", path.display())))
}

fn parse_json<T: for<'de> Deserialize<'de>>(path: &Path, text: &str) -> Result<T, CliError> {
    serde_json::from_str(text).map_err(|e| validation(format!("{}: line {} column {}: {e}", path.display(), e.line(), e.column())))
}

/// Loads the model and the digest of its document.
pub fn load_model(path: Option<&Path>) -> Result<(Model, String), CliError> {
    let (text, name) = match path {
        Some(p) => (read(p)?, p.display().to_string()),
        None => (include_str!("../fixtures/reference.json").to_string(), "bundled reference model".to_string()),
    };
    let value: serde_json::Value = serde_json::from_str(&text).map_err(|e| validation(format!("{name}: line {} column {}: {e}", e.line(), e.column())))?;
    let cfg = serde_json::from_value(value.clone()).map_err(|e| validation(format!("{name}: {e}")))?;
    let model = Model::new(cfg).map_err(|e| validation(format!("{name}: {e}")))?;
    Ok((model, digest(&value)))
}

/// Serializes with a trailing newline.
pub fn render<T: Serialize>(doc: &T) -> String {
    let mut s = serde_json::to_string_pretty(doc).expect("documents serialize");
    s.push('\n');
    s
}

/// Writes through a temporary file in the same directory, then renames.
pub fn write_atomic(path: &Path, contents: &str) -> Result<(), CliError> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let name = path.file_name().ok_or_else(|| validation(format!("{}: not a file path", path.display())))?;
    let tmp = dir.join(format!(".{}.tmp{}", name.to_string_lossy(), std::process::id()));
    let io = |e: std::io::Error| validation(format!("{}: {e}", path.display()));
    let mut f = fs::File::create(&tmp).map_err(io)?;
    f.write_all(contents.as_bytes()).map_err(io)?;
    f.sync_all().map_err(io)?;
    fs::rename(&tmp, path).map_err(io)
}

impl Cli {
    fn manifest<T>(&self, command: &str, summary: String, result: T) -> Manifest<T> {
        Manifest {
            schema_version: MANIFEST_SCHEMA_VERSION,
            tool: "sft-lab".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            command: command.into(),
            config_digest: None,
            convention: None,
            truncation: None,
            seed: None,
            summary,
            result,
        }
    }
}

/// Runs one command and returns the rendered document.
pub fn execute(cli: &Cli) -> Result<String, CliError> {
    match &cli.command {
        Command::Enumerate { genus, ends } => {
            let (model, digest) = load_model(cli.config.as_deref())?;
            let convention: Convention = cli.convention.into();
            let shapes: Vec<(u32, u32)> = match (genus, ends) {
                (Some(g), Some(r)) => vec![(*g, *r)],
                _ => vec![(0, 1), (0, 2), (1, 1)],
            };
            let mut entries = Vec::new();
            let mut summaries = Vec::new();
            for (g, r) in shapes {
                let found = building::classify(&model, g, r, convention).map_err(validation)?;
                let c = building::pair_cancellation(&found).map_err(|e| CliError::Internal(e.to_string()))?;
                let left = found.iter().filter(|e| e.side == model::Half::Left).count();
                summaries.push(ShapeSummary {
                    genus: g,
                    ends: r,
                    case: building::Case::from_shape(g, r).map_err(validation)?,
                    count: found.len(),
                    left,
                    right: found.len() - left,
                    summary: shape_summary(&found, &c),
                });
                entries.extend(found);
            }
            let cancellation = building::pair_cancellation(&entries).map_err(|e| CliError::Internal(e.to_string()))?;
            let summary = summaries.iter().map(|s| format!("genus {} ends {}: {} configurations, {}", s.genus, s.ends, s.count, s.summary)).collect::<Vec<_>>().join("; ");
            let total = entries.len();
            let mut m = cli.manifest("enumerate", summary, EnumerateResult { shapes: summaries, total, entries, cancellation });
            m.config_digest = Some(digest);
            m.convention = Some(ConventionRecord { name: convention, description: convention.description().into() });
            Ok(render(&m))
        }
        Command::Torsion { counts, without_sporadic, action_cap } => {
            let (doc, digest, default_cap) = match counts {
                Some(p) => {
                    let text = read(p)?;
                    let value: serde_json::Value = parse_json(p, &text)?;
                    let doc: CountDocument = parse_json(p, &text)?;
                    let cap = doc.generators.iter().map(|g| g.action.clone()).max().unwrap_or_else(ratio::one) * ratio::int(cli.trunc_len as i64);
                    (doc, digest(&value), cap)
                }
                None => {
                    let (model, digest) = load_model(cli.config.as_deref())?;
                    let entries = building::classify_all(&model, cli.convention.into());
                    let doc = building::twin_count_document(&model, &entries, !without_sporadic).map_err(|e| CliError::Internal(e.to_string()))?;
                    (doc, digest, model.config.action_threshold.clone())
                }
            };
            let cap: BigRational = match action_cap {
                Some(s) => ratio::parse(s).map_err(validation)?,
                None => default_cap,
            };
            let trunc = Truncation::new(cli.trunc_hbar, cli.trunc_len, cap).map_err(validation)?;
            let (gens, table) = doc.resolve().map_err(validation)?;
            let sz = check_square_zero(&gens, &table, &trunc);
            if let Some(w) = &sz.witness {
                return Err(CliError::Consistency { message: "D∘D is not zero".into(), witness: w.render(&gens) });
            }
            let order = torsion_order(&gens, &table, &trunc).map_err(|e| CliError::Internal(e.to_string()))?;
            let (order, verdict, certificate) = match order {
                TorsionOrder::Certified { order: 0, certificate } => (Some(0), "AT = 0, certificate attached".to_string(), Some(certificate.render(&gens))),
                TorsionOrder::Certified { order, certificate } => (Some(order), format!("AT ≤ {order}, certificate attached"), Some(certificate.render(&gens))),
                TorsionOrder::Unknown => (None, "unknown".to_string(), None),
            };
            let mut m = cli.manifest("torsion", verdict.clone(), TorsionResult { square_zero: sz.holds, checked_monomials: sz.checked, order, verdict, certificate, counts: doc });
            m.config_digest = Some(digest);
            m.truncation = Some(trunc);
            if counts.is_none() {
                let c: Convention = cli.convention.into();
                m.convention = Some(ConventionRecord { name: c, description: c.description().into() });
            }
            Ok(render(&m))
        }
        Command::Cobracket { genus, word, registry, sample, length } => {
            let group = SurfaceGroup::new(*genus).map_err(validation)?;
            let mut reg = match registry {
                Some(p) => {
                    let mut r: Registry = parse_json(p, &read(p)?)?;
                    r.restore(*genus).map_err(validation)?;
                    r
                }
                None => Registry::default(),
            };
            let words: Vec<(String, CyclicWord)> = match (word, sample) {
                (Some(w), _) => vec![(w.clone(), group.canonicalize_str(w).map_err(|e| validation(format!("{w}: {e}")))?)],
                (None, Some(n)) => {
                    let mut all = classes_of_length(group, *length);
                    all.shuffle(&mut ChaCha8Rng::seed_from_u64(cli.seed));
                    all.truncate(*n);
                    all.sort();
                    all.into_iter().map(|w| (w.to_string(), w)).collect()
                }
                (None, None) => return Err(validation("give --word or --sample")),
            };
            let mut classes = Vec::new();
            for (input, w) in words {
                let delta = cobracket(&w);
                let coefficients = cobracket_coefficients(&w, &mut reg).into_iter().map(|((left, right), coefficient)| LabelCoefficient { left, right, coefficient }).collect();
                let d = sporadic_count(&w, &mut reg);
                let direct = sporadic_count_direct(&w);
                if d != direct {
                    return Err(CliError::Consistency { message: "sporadic counts disagree".into(), witness: w.to_string() });
                }
                classes.push(CobracketReport {
                    word: input,
                    canonical: w.to_string(),
                    cobracket: delta.pairs().iter().map(|((a, b), c)| TensorTerm { left: a.to_string(), right: b.to_string(), coefficient: *c }).collect(),
                    coefficients,
                    sporadic_count: d,
                    sporadic_count_direct: direct,
                });
            }
            let summary = classes.iter().map(|c| format!("{}: {} terms, d = {}", c.canonical, c.cobracket.len(), c.sporadic_count)).collect::<Vec<_>>().join("; ");
            let mut m = cli.manifest("cobracket", summary, CobracketResult { genus: *genus, classes, registry: reg.labels.clone(), power_convention: crate::topology::POWER_CONVENTION.into() });
            if sample.is_some() {
                m.seed = Some(cli.seed);
            }
            Ok(render(&m))
        }
        Command::Index { op } => {
            let (summary, result) = index_op(op)?;
            Ok(render(&cli.manifest("index", summary, result)))
        }
        Command::Rigidity(args) => {
            let rows = if args.sweep {
                let mut rows = Vec::new();
                for d in args.min_degree..=args.max_degree {
                    let max_z = args.max_branching.max(0) as u32;
                    for bp in covers::enumerate_branch_profiles(d, args.base_euler, args.base_punctures, max_z) {
                        let b = covers::total_branching(&bp);
                        if (args.min_branching..=args.max_branching).contains(&b) {
                            rows.push(RigidityRow { report: covers::super_rigidity_verdict(&bp), profile: bp, not_realizable: None });
                        }
                    }
                }
                rows
            } else {
                if args.degree == 0 || args.base_punctures == 0 {
                    return Err(validation("degree and base punctures must be at least 1"));
                }
                let mut k = args.multiplicities.clone().unwrap_or_else(|| vec![1; (args.degree * args.base_punctures) as usize]);
                k.sort_unstable_by(|a, b| b.cmp(a));
                let bp = BranchProfile { degree: args.degree, interior_vanishing: args.interior, puncture_multiplicities: k, base_punctures: args.base_punctures, base_euler: args.base_euler };
                let realizable = bp.validate().map_err(|e| e.to_string()).err();
                vec![RigidityRow { report: covers::super_rigidity_verdict(&bp), profile: bp, not_realizable: realizable }]
            };
            let forced = rows.iter().filter(|r| r.report.verdict == covers::Verdict::InjectiveForced).count();
            let result = RigidityResult { injective_forced: forced, inconclusive: rows.len() - forced, rows };
            let summary = format!("{} profiles: {} injective_forced, {} inconclusive", result.rows.len(), result.injective_forced, result.inconclusive);
            Ok(render(&cli.manifest("rigidity", summary, result)))
        }
    }
}

fn shape_summary(found: &[Entry], c: &Cancellation) -> String {
    if found.is_empty() {
        return "plane case empty".into();
    }
    let internal = c.pairs.iter().filter(|p| p.internal).count();
    let sporadic = found.iter().filter(|e| e.sporadic).count();
    format!("{} pairs ({internal} internal), {} unpaired ({sporadic} sporadic)", c.pairs.len(), c.unpaired.len())
}

fn index_op(op: &IndexOp) -> Result<(String, serde_json::Value), CliError> {
    use serde_json::json;
    Ok(match op {
        IndexOp::Cz { crit_index, cz_base } => {
            if *crit_index > 2 {
                return Err(validation(index::IndexError::BadMorseIndex(*crit_index)));
            }
            let model = cz_base + if *crit_index == 1 { 0 } else { 1 };
            (format!("model CZ {model}, filling CZ {cz_base}"), json!({ "cz_in_model": model, "cz_in_filling": cz_base }))
        }
        IndexOp::Fredholm { half_dim, euler, chern, positive_cz, negative_cz } => {
            let ind = index::fredholm_index(&CurveIndexData { half_dim: *half_dim, euler_char: *euler, rel_chern: *chern, positive_cz: positive_cz.clone(), negative_cz: negative_cz.clone() });
            (format!("Fredholm index {ind}"), json!({ "fredholm_index": ind }))
        }
        IndexOp::Normal { genus, positive, negative } => {
            if positive.len() != 3 || negative.len() != 3 {
                return Err(validation("--positive and --negative take three counts, over Morse index 0, 1 and 2"));
            }
            let p = PunctureProfile::new(*genus, [positive[0], positive[1], positive[2]], [negative[0], negative[1], negative[2]]);
            let n = index::normal_index(&p);
            let at = index::automatic_transversality(&p, n);
            let transfer = index::regularity_transfer(&p, true);
            (
                format!("normal index {n}, automatic transversality {at}"),
                json!({ "profile": p, "normal_index": n, "automatic_transversality": at, "regularity_transfer": transfer }),
            )
        }
        IndexOp::KernelBound { c1, gamma_even } => {
            let k = index::kernel_bound(*c1, *gamma_even);
            (format!("kernel bound {k}"), json!({ "kernel_bound": k }))
        }
        IndexOp::ObstructionRank { rank_in_leaf, ind_n, dim_ker } => {
            let r = index::obstruction_rank(*rank_in_leaf, *ind_n, *dim_ker).map_err(validation)?;
            (format!("obstruction rank {r}"), json!({ "obstruction_rank": r }))
        }
        IndexOp::GluingBaseDim { virt_dim, rank } => {
            let d = index::gluing_base_dim(*virt_dim, *rank);
            (format!("gluing base dimension {d}"), json!({ "gluing_base_dim": d }))
        }
    })
}

/// Builds the thread pool from SFT_LAB_THREADS, parses arguments, runs, writes.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    if let Some(n) = std::env::var("SFT_LAB_THREADS").ok().and_then(|s| s.parse::<usize>().ok()).filter(|&n| n > 0) {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    let start = Instant::now();
    let outcome = std::panic::catch_unwind(|| execute(&cli)).unwrap_or_else(|p| {
        let msg = p.downcast_ref::<String>().cloned().or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string())).unwrap_or_default();
        Err(CliError::Internal(format!("internal invariant breach: {msg}")))
    });
    let result = outcome.and_then(|doc| match &cli.out {
        Some(p) => write_atomic(p, &doc),
        None => {
            print!("{doc}");
            Ok(())
        }
    });
    match result {
        Ok(()) => {
            eprintln!("done in {:.3} s", start.elapsed().as_secs_f64());
            0
        }
        Err(e) => {
            match &e {
                CliError::Consistency { message, witness } => eprintln!("error: {message}; witness: {witness}"),
                other => eprintln!("error: {other}"),
            }
            e.exit_code()
        }
    }
}
