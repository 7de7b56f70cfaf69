//! Command-line surface: enumerate presentation files, build the named
//! families, classify candidate pairs, run exhaustive searches, replay the
//! verification suites, and manage JSON-lines atlases.
//!
//! Exit codes: 0 when every requested check passed, 1 when a verification
//! failed (the failure report goes to stdout), 2 for usage or limit
//! errors. JSON output is byte-identical across identical invocations;
//! only atlas records carry timestamps.

use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::atlas::{
    self, atlas_append, atlas_diff, atlas_load, search_pairs, AtlasError, AtlasRecord,
    DedupeMode, GroupSource, SearchFilters,
};
use crate::constructions::{
    self, build_g_case1, build_g_star, build_p, build_theorem2, build_tight, generator_pair,
    residue_sweep, table1_exponents, verify_lemma_3_1, verify_lemma_3_2, verify_lemma_3_3,
    verify_table1, ConstructError, MaximalClassParams, TheoremTwoParams, TightParams,
};
use crate::coset::{self, EnumLimits, Strategy};
use crate::group::{ConcreteGroup, EngineLimits, GroupError};
use crate::polytope::{self, Orientation, PolyhedronReport, RotationPair};
use crate::words::{parse_presentation, parse_word, Presentation};

/// Environment override for the coset ceiling, superseded by --max-cosets.
pub const MAX_COSETS_ENV: &str = "CHIRALIA_MAX_COSETS";

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Human,
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum CliStrategy {
    Hlt,
    Felsch,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum CliDedupe {
    /// Every valid pair.
    Raw,
    /// One representative per automorphism class.
    Aut,
    /// Automorphism classes folded together with enantiomorph and dual.
    Full,
}

impl From<CliDedupe> for DedupeMode {
    fn from(d: CliDedupe) -> Self {
        match d {
            CliDedupe::Raw => DedupeMode::Raw,
            CliDedupe::Aut => DedupeMode::UpToAut,
            CliDedupe::Full => DedupeMode::UpToAutEnantiomorphDual,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Family {
    P,
    G,
    Gstar,
    Tight,
    Thm2,
}

#[derive(Debug, Parser)]
#[command(name = "chiralia", version, about = "rotation-group toolkit for order 2p^m polyhedra")]
struct Cli {
    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Human)]
    format: Format,
    /// Coset ceiling for enumerations (overrides CHIRALIA_MAX_COSETS).
    #[arg(long, global = true)]
    max_cosets: Option<usize>,
    /// Enumeration strategy.
    #[arg(long, global = true, value_enum)]
    strategy: Option<CliStrategy>,
    /// Element ceiling for materialized groups.
    #[arg(long, global = true)]
    element_cap: Option<usize>,
    /// Worker threads; 1 forces the fully deterministic sequential path.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Seed for the associativity spot checks run on group construction.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, clap::Args)]
struct FamilyArgs {
    /// Family to build.
    #[arg(long, value_enum)]
    family: Family,
    /// The odd prime.
    #[arg(long)]
    p: u64,
    /// Exponent parameter for P, G, Gstar.
    #[arg(long)]
    e: Option<u32>,
    /// Rank parameter for P, G, Gstar.
    #[arg(long)]
    r: Option<u32>,
    /// First type exponent for tight.
    #[arg(long)]
    l1: Option<u32>,
    /// Second type exponent for tight.
    #[arg(long)]
    l2: Option<u32>,
    /// Candidate presentation index 1..=6 for thm2.
    #[arg(long)]
    variant: Option<u8>,
    /// First residue for thm2 variants 4..6.
    #[arg(long)]
    i: Option<u64>,
    /// Second residue for thm2 variants 4..6.
    #[arg(long)]
    j: Option<u64>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Enumerate a presentation file and print the group order.
    Order { file: PathBuf },
    /// Build a family member; print its presentation and the
    /// classification report of its canonical pair.
    Construct {
        #[command(flatten)]
        family: FamilyArgs,
    },
    /// Classify the pair given by two words over a presentation file.
    Classify {
        file: PathBuf,
        #[arg(long)]
        sigma1: String,
        #[arg(long)]
        sigma2: String,
    },
    /// Exhaustive rotation-pair search in a group.
    Search {
        /// Presentation file source; mutually exclusive with --family.
        file: Option<PathBuf>,
        #[command(flatten)]
        family: SearchFamilyArgs,
        /// Keep chiral pairs only.
        #[arg(long)]
        chiral: bool,
        /// Keep pairs of this type, as k1,k2.
        #[arg(long, value_name = "K1,K2")]
        schlafli: Option<String>,
        /// Keep pairs with this tightness.
        #[arg(long)]
        tight: Option<bool>,
        #[arg(long, value_enum, default_value_t = CliDedupe::Raw)]
        dedupe: CliDedupe,
        /// Also append the records to this atlas file.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Replay a verification suite; exit 1 on any failed check.
    Verify {
        #[command(subcommand)]
        suite: VerifySuite,
    },
    /// Manage JSON-lines atlases.
    Atlas {
        #[command(subcommand)]
        op: AtlasOp,
    },
}

/// Same shape as FamilyArgs with every flag optional, for `search`.
#[derive(Debug, Clone, Copy, clap::Args)]
struct SearchFamilyArgs {
    #[arg(long, value_enum)]
    family: Option<Family>,
    #[arg(long)]
    p: Option<u64>,
    #[arg(long)]
    e: Option<u32>,
    #[arg(long)]
    r: Option<u32>,
    #[arg(long)]
    l1: Option<u32>,
    #[arg(long)]
    l2: Option<u32>,
    #[arg(long)]
    variant: Option<u8>,
    #[arg(long)]
    i: Option<u64>,
    #[arg(long)]
    j: Option<u64>,
}

#[derive(Debug, Subcommand)]
enum VerifySuite {
    /// Structure clauses over the full chiral corpus of an extension group.
    Thm1 {
        #[arg(long)]
        p: u64,
        #[arg(long)]
        e: u32,
        #[arg(long)]
        r: u32,
        /// Use the central extension instead.
        #[arg(long)]
        star: bool,
    },
    /// Candidate presentations at orders 2p^3 and 2p^4: order bounds and
    /// regularity across the residue sweep.
    Thm2 {
        #[arg(long)]
        p: u64,
    },
    /// A chiral non-tight extension of the requested order exists.
    Thm3 {
        #[arg(long)]
        p: u64,
        #[arg(long)]
        e: u32,
        #[arg(long)]
        r: u32,
        /// Use the central extension instead.
        #[arg(long)]
        star: bool,
    },
    /// Generator-assignment facts and the exponent table in P(p,e,r).
    Lemmas {
        #[arg(long)]
        p: u64,
        #[arg(long)]
        e: u32,
        #[arg(long)]
        r: u32,
    },
}

#[derive(Debug, Subcommand)]
enum AtlasOp {
    /// Validate and summarize an atlas file.
    Load { file: PathBuf },
    /// Append the records of one atlas file to another.
    Append { dest: PathBuf, src: PathBuf },
    /// Keys present in exactly one of two atlas files.
    Diff { a: PathBuf, b: PathBuf },
}

/// Entry point used by the binary; returns the process exit code.
pub fn run<I, S>(args: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            // clap handles --help/--version as "errors" with exit 0
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(&cli) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err}");
            exit_code_for(&err)
        }
    }
}

#[derive(Debug, thiserror::Error)]
enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Atlas(#[from] AtlasError),
    #[error(transparent)]
    Construct(#[from] ConstructError),
    #[error(transparent)]
    Engine(#[from] GroupError),
    #[error(transparent)]
    Word(#[from] crate::words::WordError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

fn exit_code_for(err: &CliError) -> i32 {
    match err {
        CliError::Construct(ConstructError::Verification(_)) => 1,
        CliError::Atlas(AtlasError::Construct(ConstructError::Verification(_))) => 1,
        _ => 2,
    }
}

struct Config {
    format: Format,
    enum_limits: Option<EnumLimits>,
    engine: EngineLimits,
    parallel: bool,
}

fn configure(cli: &Cli) -> Config {
    let env_cap = std::env::var(MAX_COSETS_ENV).ok().and_then(|v| v.parse::<usize>().ok());
    let cap = cli.max_cosets.or(env_cap);
    let strategy = cli.strategy.map(|s| match s {
        CliStrategy::Hlt => Strategy::Hlt,
        CliStrategy::Felsch => Strategy::Felsch,
    });
    let enum_limits = match (cap, strategy) {
        (None, None) => None,
        (cap, strategy) => Some(EnumLimits {
            max_cosets: cap.unwrap_or(coset::DEFAULT_MAX_COSETS),
            strategy: strategy.unwrap_or(Strategy::Hlt),
        }),
    };
    let mut engine = EngineLimits::default();
    if let Some(cap) = cli.element_cap {
        engine.element_cap = cap;
    }
    if let Some(seed) = cli.seed {
        engine.spot_seed = seed;
    }
    let parallel = cli.threads != Some(1);
    #[cfg(feature = "parallel")]
    if let Some(n) = cli.threads {
        if n > 1 {
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
        }
    }
    Config { format: cli.format, enum_limits, engine, parallel }
}

fn dispatch(cli: &Cli) -> Result<i32, CliError> {
    let config = configure(cli);
    match &cli.command {
        Command::Order { file } => cmd_order(&config, file),
        Command::Construct { family } => cmd_construct(&config, family),
        Command::Classify { file, sigma1, sigma2 } => {
            cmd_classify(&config, file, sigma1, sigma2)
        }
        Command::Search { file, family, chiral, schlafli, tight, dedupe, out } => cmd_search(
            &config,
            file.as_deref(),
            family,
            *chiral,
            schlafli.as_deref(),
            *tight,
            (*dedupe).into(),
            out.as_deref(),
        ),
        Command::Verify { suite } => cmd_verify(&config, suite),
        Command::Atlas { op } => cmd_atlas(&config, op),
    }
}

fn read_presentation(path: &Path) -> Result<Presentation, CliError> {
    let text = std::fs::read_to_string(path)?;
    let mut pres = parse_presentation(&text)?;
    if let Some(stem) = path.file_stem().and_then(|s| s.to_str()) {
        pres.label = stem.to_string();
    }
    Ok(pres)
}

fn effective_limits(config: &Config, expected: Option<usize>) -> EnumLimits {
    match (config.enum_limits, expected) {
        (Some(l), _) => l,
        (None, Some(n)) => EnumLimits::for_expected(n),
        (None, None) => EnumLimits::default(),
    }
}

#[derive(Serialize)]
struct OrderOut {
    label: String,
    order: Option<usize>,
    status: String,
    cosets: usize,
}

fn cmd_order(config: &Config, file: &Path) -> Result<i32, CliError> {
    let pres = read_presentation(file)?;
    let limits = effective_limits(config, None);
    let table = coset::enumerate(&pres, &[], &limits);
    if !table.is_closed() {
        return Err(CliError::Usage(format!(
            "enumeration did not close within {} cosets (status {:?}); raise --max-cosets or {}",
            limits.max_cosets, table.status, MAX_COSETS_ENV
        )));
    }
    let out = OrderOut {
        label: pres.label.clone(),
        order: table.order(),
        status: format!("{:?}", table.status).to_lowercase(),
        cosets: table.order().unwrap_or(0),
    };
    match config.format {
        Format::Json => println!("{}", serde_json::to_string_pretty(&out).expect("serializes")),
        _ => println!("{}", out.order.unwrap_or(0)),
    }
    Ok(0)
}

struct Built {
    presentation: Presentation,
    group: ConcreteGroup,
    pair: RotationPair,
    note: Option<String>,
}

fn build_family(config: &Config, args: &FamilyArgs) -> Result<Built, CliError> {
    let need = |name: &str, v: Option<u32>| {
        v.ok_or_else(|| CliError::Usage(format!("--{name} is required for this family")))
    };
    match args.family {
        Family::P => {
            let params =
                MaximalClassParams::new(args.p, need("e", args.e)?, need("r", args.r)?)?;
            let built = build_p(&params)?;
            let s1 = built.s(1);
            let b = built.beta();
            let pair = RotationPair::new(&built.group, s1, b);
            Ok(Built {
                presentation: built.presentation,
                group: built.group,
                pair,
                note: Some("odd-order group; the generator pair cannot be a rotation pair".into()),
            })
        }
        Family::G => {
            let params =
                MaximalClassParams::new(args.p, need("e", args.e)?, need("r", args.r)?)?;
            let built = build_g_case1(&params)?;
            Ok(Built { presentation: built.presentation, group: built.group, pair: built.pair, note: None })
        }
        Family::Gstar => {
            let params =
                MaximalClassParams::new(args.p, need("e", args.e)?, need("r", args.r)?)?;
            let built = build_g_star(&params)?;
            Ok(Built { presentation: built.presentation, group: built.group, pair: built.pair, note: None })
        }
        Family::Tight => {
            let params = TightParams::new(args.p, need("l1", args.l1)?, need("l2", args.l2)?)?;
            let pres = build_tight(&params)?;
            let group = constructions::materialize(
                &pres,
                params.presented_order()? as usize,
                config.enum_limits,
            )?;
            let pair = generator_pair(&group)?;
            let note = (params.l1 < params.l2).then(|| {
                format!(
                    "relations force order {} below the tight bound {}",
                    params.presented_order().unwrap_or(0),
                    params.order().unwrap_or(0)
                )
            });
            Ok(Built { presentation: pres, group, pair, note })
        }
        Family::Thm2 => {
            let variant = args
                .variant
                .ok_or_else(|| CliError::Usage("--variant is required for thm2".into()))?;
            let params = TheoremTwoParams::new(args.p, variant, args.i, args.j)?;
            let pres = build_theorem2(&params)?;
            let group = constructions::materialize(
                &pres,
                params.order_bound() as usize,
                config.enum_limits,
            )?;
            let pair = generator_pair(&group)?;
            let note = params
                .below_analysis_range()
                .then(|| "desk-scale prime below the p >= 7 analysis range".to_string());
            Ok(Built { presentation: pres, group, pair, note })
        }
    }
}

#[derive(Serialize)]
struct ConstructOut {
    presentation: String,
    note: Option<String>,
    report: PolyhedronReport,
}

fn print_report_csv(label: &str, report: &PolyhedronReport) {
    println!("group,order,k1,k2,tight,orientation");
    println!(
        "{},{},{},{},{},{}",
        label,
        report.order,
        report.schlafli[0],
        report.schlafli[1],
        report.tight,
        format!("{:?}", report.orientation).to_lowercase()
    );
}

fn print_report(config: &Config, label: &str, out: &ConstructOut) {
    match config.format {
        Format::Json => {
            println!("{}", serde_json::to_string_pretty(out).expect("serializes"))
        }
        Format::Csv => print_report_csv(label, &out.report),
        Format::Human => {
            print!("{}", out.presentation);
            if let Some(note) = &out.note {
                println!("note: {note}");
            }
            println!(
                "order {}  type ({}, {})  tight {}  orientation {:?}",
                out.report.order,
                out.report.schlafli[0],
                out.report.schlafli[1],
                out.report.tight,
                out.report.orientation
            );
        }
    }
}

fn cmd_construct(config: &Config, args: &FamilyArgs) -> Result<i32, CliError> {
    let built = build_family(config, args)?;
    let report = polytope::classify(&built.group, &built.pair, &config.engine);
    let out = ConstructOut {
        presentation: built.presentation.to_text(),
        note: built.note,
        report,
    };
    print_report(config, &built.presentation.label, &out);
    Ok(0)
}

fn cmd_classify(
    config: &Config,
    file: &Path,
    sigma1: &str,
    sigma2: &str,
) -> Result<i32, CliError> {
    let pres = read_presentation(file)?;
    let limits = effective_limits(config, None);
    let group = constructions::materialize(&pres, limits.max_cosets, Some(limits))?;
    let s1 = group.evaluate_word(&parse_word(sigma1, group.word_alphabet())?)?;
    let s2 = group.evaluate_word(&parse_word(sigma2, group.word_alphabet())?)?;
    let pair = RotationPair::new(&group, s1, s2);
    let report = polytope::classify(&group, &pair, &config.engine);
    match config.format {
        Format::Json => {
            println!("{}", serde_json::to_string_pretty(&report).expect("serializes"))
        }
        Format::Csv => print_report_csv(&pres.label, &report),
        Format::Human => {
            println!(
                "order {}  generates {}  type ({}, {})  tight {}  orientation {:?}",
                report.order,
                report.generates,
                report.schlafli[0],
                report.schlafli[1],
                report.tight,
                report.orientation
            );
        }
    }
    Ok(0)
}

#[allow(clippy::too_many_arguments)]
fn cmd_search(
    config: &Config,
    file: Option<&Path>,
    family: &SearchFamilyArgs,
    chiral: bool,
    schlafli: Option<&str>,
    tight: Option<bool>,
    dedupe: DedupeMode,
    out: Option<&Path>,
) -> Result<i32, CliError> {
    let source = match (file, family.family) {
        (Some(_), Some(_)) => {
            return Err(CliError::Usage(
                "give either a presentation file or --family, not both".into(),
            ))
        }
        (None, None) => {
            return Err(CliError::Usage("a presentation file or --family is required".into()))
        }
        (Some(path), None) => GroupSource::Presentation(read_presentation(path)?),
        (None, Some(fam)) => {
            let args = FamilyArgs {
                family: fam,
                p: family
                    .p
                    .ok_or_else(|| CliError::Usage("--p is required with --family".into()))?,
                e: family.e,
                r: family.r,
                l1: family.l1,
                l2: family.l2,
                variant: family.variant,
                i: family.i,
                j: family.j,
            };
            family_source(&args)?
        }
    };
    let filters = SearchFilters {
        chiral_only: chiral,
        schlafli: schlafli.map(parse_schlafli).transpose()?,
        tight,
    };
    let label = source.label()?;
    let group = source.materialize(config.enum_limits, &config.engine)?;
    let records =
        search_pairs(&group, &label, &filters, dedupe, &config.engine, config.parallel)?;
    if let Some(path) = out {
        atlas_append(path, &records)?;
    }
    print_records(config, &records);
    Ok(0)
}

fn family_source(args: &FamilyArgs) -> Result<GroupSource, CliError> {
    let need = |name: &str, v: Option<u32>| {
        v.ok_or_else(|| CliError::Usage(format!("--{name} is required for this family")))
    };
    Ok(match args.family {
        Family::P => GroupSource::MaximalClass(MaximalClassParams::new(
            args.p,
            need("e", args.e)?,
            need("r", args.r)?,
        )?),
        Family::G => GroupSource::Extension(MaximalClassParams::new(
            args.p,
            need("e", args.e)?,
            need("r", args.r)?,
        )?),
        Family::Gstar => GroupSource::CentralExtension(MaximalClassParams::new(
            args.p,
            need("e", args.e)?,
            need("r", args.r)?,
        )?),
        Family::Tight => GroupSource::Tight(TightParams::new(
            args.p,
            need("l1", args.l1)?,
            need("l2", args.l2)?,
        )?),
        Family::Thm2 => {
            let variant = args
                .variant
                .ok_or_else(|| CliError::Usage("--variant is required for thm2".into()))?;
            GroupSource::Candidate(TheoremTwoParams::new(args.p, variant, args.i, args.j)?)
        }
    })
}

fn parse_schlafli(text: &str) -> Result<[u64; 2], CliError> {
    let parts: Vec<_> = text.split(',').collect();
    if parts.len() != 2 {
        return Err(CliError::Usage("--schlafli expects k1,k2".into()));
    }
    let k1 = parts[0].trim().parse::<u64>();
    let k2 = parts[1].trim().parse::<u64>();
    match (k1, k2) {
        (Ok(a), Ok(b)) => Ok([a, b]),
        _ => Err(CliError::Usage("--schlafli expects two integers".into())),
    }
}

fn print_records(config: &Config, records: &[AtlasRecord]) {
    match config.format {
        Format::Json => {
            for rec in records {
                println!("{}", serde_json::to_string(rec).expect("serializes"));
            }
        }
        Format::Csv => {
            println!("group,order,k1,k2,tight,orientation,sigma1,sigma2");
            for rec in records {
                println!(
                    "{},{},{},{},{},{},{},{}",
                    rec.group,
                    rec.order,
                    rec.report.schlafli[0],
                    rec.report.schlafli[1],
                    rec.report.tight,
                    format!("{:?}", rec.report.orientation).to_lowercase(),
                    rec.sigma1,
                    rec.sigma2
                );
            }
        }
        Format::Human => {
            println!("{} record(s)", records.len());
            for rec in records {
                println!(
                    "  ({}, {})  type ({}, {})  tight {}  {:?}",
                    rec.sigma1,
                    rec.sigma2,
                    rec.report.schlafli[0],
                    rec.report.schlafli[1],
                    rec.report.tight,
                    rec.report.orientation
                );
            }
        }
    }
}

#[derive(Serialize)]
struct Check {
    name: String,
    pass: bool,
    detail: String,
}

impl Check {
    fn new(name: &str, pass: bool, detail: impl Into<String>) -> Self {
        Check { name: name.to_string(), pass, detail: detail.into() }
    }
}

#[derive(Serialize)]
struct Outcome {
    suite: String,
    checks: Vec<Check>,
    all_pass: bool,
}

fn finish_outcome(config: &Config, suite: &str, checks: Vec<Check>) -> i32 {
    let all_pass = checks.iter().all(|c| c.pass);
    let outcome = Outcome { suite: suite.to_string(), checks, all_pass };
    match config.format {
        Format::Json => {
            println!("{}", serde_json::to_string_pretty(&outcome).expect("serializes"))
        }
        _ => {
            for c in &outcome.checks {
                let mark = if c.pass { "ok  " } else { "FAIL" };
                if c.detail.is_empty() {
                    println!("{mark} {}", c.name);
                } else {
                    println!("{mark} {}: {}", c.name, c.detail);
                }
            }
            println!("{}: {}", outcome.suite, if all_pass { "pass" } else { "FAIL" });
        }
    }
    if all_pass {
        0
    } else {
        1
    }
}

fn cmd_verify(config: &Config, suite: &VerifySuite) -> Result<i32, CliError> {
    match suite {
        VerifySuite::Thm1 { p, e, r, star } => verify_thm1(config, *p, *e, *r, *star),
        VerifySuite::Thm2 { p } => verify_thm2(config, *p),
        VerifySuite::Thm3 { p, e, r, star } => verify_thm3(config, *p, *e, *r, *star),
        VerifySuite::Lemmas { p, e, r } => verify_lemmas(config, *p, *e, *r),
    }
}

fn extension_group(
    p: u64,
    e: u32,
    r: u32,
    star: bool,
) -> Result<(String, ConcreteGroup, RotationPair), CliError> {
    let params = MaximalClassParams::new(p, e, r)?;
    if star {
        let built = build_g_star(&params)?;
        Ok((built.presentation.label, built.group, built.pair))
    } else {
        let built = build_g_case1(&params)?;
        Ok((built.presentation.label, built.group, built.pair))
    }
}

fn verify_thm1(config: &Config, p: u64, e: u32, r: u32, star: bool) -> Result<i32, CliError> {
    let (label, group, _) = extension_group(p, e, r, star)?;
    let filters = SearchFilters { chiral_only: true, ..Default::default() };
    let records = search_pairs(
        &group,
        &label,
        &filters,
        DedupeMode::Raw,
        &config.engine,
        config.parallel,
    )?;
    let summary = atlas::verify_theorem1_corpus(&group, &records, &config.engine)?;
    let mut checks = vec![
        Check::new(
            "chiral corpus nonempty",
            !records.is_empty(),
            format!("{} chiral pair(s)", records.len()),
        ),
        Check::new(
            "structure clauses",
            summary.all_pass,
            format!("{} failure(s)", summary.failures.len()),
        ),
    ];
    for failure in summary.failures.iter().take(5) {
        checks.push(Check::new("clause failure", false, format!("{failure:?}")));
    }
    Ok(finish_outcome(config, &format!("thm1 {label}"), checks))
}

fn verify_thm2(config: &Config, p: u64) -> Result<i32, CliError> {
    let mut checks = Vec::new();
    let mut sweep: Vec<TheoremTwoParams> = Vec::new();
    for variant in 1..=3u8 {
        sweep.push(TheoremTwoParams::new(p, variant, None, None)?);
    }
    for variant in 4..=6u8 {
        for (i, j) in residue_sweep(p) {
            sweep.push(TheoremTwoParams::new(p, variant, Some(i), Some(j))?);
        }
    }
    let below = sweep.first().is_some_and(|t| t.below_analysis_range());
    if below {
        checks.push(Check::new(
            "analysis range",
            true,
            "desk-scale prime below the p >= 7 analysis range",
        ));
    }
    // Felsch by default: the candidate presentations collapse heavily and
    // HLT can need millions of intermediate cosets at p = 7.
    let limits = config.enum_limits.unwrap_or(EnumLimits {
        max_cosets: coset::DEFAULT_MAX_COSETS,
        strategy: Strategy::Felsch,
    });
    for params in sweep {
        let pres = build_theorem2(&params)?;
        let label = pres.label.clone();
        let result = (|| -> Result<(bool, String), CliError> {
            let group = constructions::materialize(
                &pres,
                params.order_bound() as usize,
                Some(limits),
            )?;
            let within = group.order() as u64 <= params.order_bound();
            let pair = generator_pair(&group)?;
            let report = polytope::classify(&group, &pair, &config.engine);
            let regular = report.orientation == Orientation::Regular;
            Ok((
                within && regular,
                format!("order {} (bound {}), {:?}", group.order(), params.order_bound(), report.orientation),
            ))
        })();
        match result {
            Ok((pass, detail)) => checks.push(Check::new(&label, pass, detail)),
            Err(e) => checks.push(Check::new(&label, false, e.to_string())),
        }
    }
    Ok(finish_outcome(config, &format!("thm2 p={p}"), checks))
}

fn verify_thm3(config: &Config, p: u64, e: u32, r: u32, star: bool) -> Result<i32, CliError> {
    let (label, group, pair) = extension_group(p, e, r, star)?;
    let report = polytope::classify(&group, &pair, &config.engine);
    let params = MaximalClassParams::new(p, e, r)?;
    let expected_order =
        if star { 2 * params.order()? * p } else { 2 * params.order()? };
    let pe = 2 * p.pow(e);
    let checks = vec![
        Check::new(
            "order",
            report.order == expected_order,
            format!("{} (expected {expected_order})", report.order),
        ),
        Check::new("chiral", report.orientation == Orientation::Chiral, format!("{:?}", report.orientation)),
        Check::new(
            "type",
            report.schlafli == [p * p, pe],
            format!("({}, {})", report.schlafli[0], report.schlafli[1]),
        ),
        Check::new("non-tight", !report.tight, format!("tight = {}", report.tight)),
        Check::new(
            "intersection trivial",
            report.intersection_trivial,
            String::new(),
        ),
    ];
    Ok(finish_outcome(config, &format!("thm3 {label}"), checks))
}

fn verify_lemmas(config: &Config, p: u64, e: u32, r: u32) -> Result<i32, CliError> {
    let params = MaximalClassParams::new(p, e, r)?;
    let built = build_p(&params)?;
    let label = built.presentation.label.clone();
    let mut checks = vec![
        Check::new("inversion on s1 never extends", verify_lemma_3_1(&built), String::new()),
        Check::new("conjugation formula", verify_lemma_3_2(&built), String::new()),
    ];
    if params.m() % 2 == 1 {
        checks.push(Check::new(
            "sigma is an order-two automorphism",
            verify_lemma_3_3(&built)?,
            format!("m = {}, r = {r}", params.m()),
        ));
        checks.push(Check::new(
            "exponent table product",
            verify_table1(&built)?,
            format!("{:?}", table1_exponents(p)),
        ));
    } else {
        checks.push(Check::new(
            "sigma is an order-two automorphism",
            true,
            format!("skipped: m = {} is even", params.m()),
        ));
    }
    Ok(finish_outcome(config, &format!("lemmas {label}"), checks))
}

#[derive(Serialize)]
struct LoadOut {
    records: usize,
    issues: Vec<String>,
}

fn cmd_atlas(config: &Config, op: &AtlasOp) -> Result<i32, CliError> {
    match op {
        AtlasOp::Load { file } => {
            let loaded = atlas_load(file)?;
            let out = LoadOut { records: loaded.records.len(), issues: loaded.issues };
            match config.format {
                Format::Json => {
                    println!("{}", serde_json::to_string_pretty(&out).expect("serializes"))
                }
                _ => {
                    println!("{} record(s)", out.records);
                    for issue in &out.issues {
                        println!("issue: {issue}");
                    }
                }
            }
            Ok(0)
        }
        AtlasOp::Append { dest, src } => {
            let loaded = atlas_load(src)?;
            atlas_append(dest, &loaded.records)?;
            match config.format {
                Format::Json => println!(
                    "{}",
                    serde_json::to_string_pretty(&LoadOut {
                        records: loaded.records.len(),
                        issues: loaded.issues,
                    })
                    .expect("serializes")
                ),
                _ => println!("appended {} record(s)", loaded.records.len()),
            }
            Ok(0)
        }
        AtlasOp::Diff { a, b } => {
            let la = atlas_load(a)?;
            let lb = atlas_load(b)?;
            let diff = atlas_diff(&la.records, &lb.records);
            match config.format {
                Format::Json => {
                    println!("{}", serde_json::to_string_pretty(&diff).expect("serializes"))
                }
                _ => {
                    for k in &diff.only_in_a {
                        println!("only in {}: {} ({}, {})", a.display(), k.0, k.1, k.2);
                    }
                    for k in &diff.only_in_b {
                        println!("only in {}: {} ({}, {})", b.display(), k.0, k.1, k.2);
                    }
                    if diff.is_empty() {
                        println!("atlases agree");
                    }
                }
            }
            Ok(0)
        }
    }
}
