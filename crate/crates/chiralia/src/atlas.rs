//! Exhaustive rotation-pair searches inside a fixed group, equivalence
//! reduction of the hits, and a JSON-lines atlas that persists
//! classification reports across runs.
//!
//! A search walks every ordered pair (sigma1, sigma2) satisfying the
//! rotation relation. The quadratic scan is pruned through the constraint
//! itself: (sigma1 sigma2)^2 = 1 means sigma2 = sigma1^-1 w for an
//! involution or identity w, so each row only visits that frame. Pairs
//! classifying Invalid are never recorded.

use std::collections::BTreeSet;
use std::fs::OpenOptions;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::constructions::{
    self, build_g_case1, build_g_star, build_p, build_theorem2, build_tight, ConstructError,
    MaximalClassParams, TheoremTwoParams, TightParams,
};
use crate::coset::EnumLimits;
use crate::group::{ConcreteGroup, EngineLimits, GroupError};
use crate::pgroup::{self, PGroupError, PGroupProfile};
use crate::polytope::{
    self, Orientation, PolyhedronReport, PolytopeError, RotationPair,
};
use crate::words::{parse_word, Presentation, WordError};

/// Schema version stamped on every record.
pub const ATLAS_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum AtlasError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Construct(#[from] ConstructError),
    #[error(transparent)]
    Engine(#[from] GroupError),
    #[error(transparent)]
    Polytope(#[from] PolytopeError),
    #[error(transparent)]
    PGroup(#[from] PGroupError),
    #[error(transparent)]
    Word(#[from] WordError),
}

/// Where the searched group comes from; exactly one source per spec.
#[derive(Debug, Clone)]
pub enum GroupSource {
    /// P(p,e,r) through its audited builder.
    MaximalClass(MaximalClassParams),
    /// The order-2p^m extension through its audited builder.
    Extension(MaximalClassParams),
    /// The central extension through its audited builder.
    CentralExtension(MaximalClassParams),
    Tight(TightParams),
    Candidate(TheoremTwoParams),
    /// Any parsed presentation, enumerated within the given coset limit.
    Presentation(Presentation),
}

impl GroupSource {
    pub fn label(&self) -> Result<String, AtlasError> {
        Ok(match self {
            GroupSource::MaximalClass(p) => constructions::p_presentation(p)?.label,
            GroupSource::Extension(p) => constructions::g_presentation(p)?.label,
            GroupSource::CentralExtension(p) => constructions::g_star_presentation(p)?.label,
            GroupSource::Tight(p) => build_tight(p)?.label,
            GroupSource::Candidate(p) => build_theorem2(p)?.label,
            GroupSource::Presentation(pres) => pres.label.clone(),
        })
    }

    /// Builds the concrete group. Construction sources run their full
    /// structural audits; presentation sources enumerate directly.
    pub fn materialize(
        &self,
        enum_limits: Option<EnumLimits>,
        engine: &EngineLimits,
    ) -> Result<ConcreteGroup, AtlasError> {
        let _ = engine;
        Ok(match self {
            GroupSource::MaximalClass(p) => build_p(p)?.group,
            GroupSource::Extension(p) => build_g_case1(p)?.group,
            GroupSource::CentralExtension(p) => build_g_star(p)?.group,
            GroupSource::Tight(p) => {
                let pres = build_tight(p)?;
                let expected = p.presented_order()? as usize;
                constructions::materialize(&pres, expected, enum_limits)?
            }
            GroupSource::Candidate(p) => {
                let pres = build_theorem2(p)?;
                constructions::materialize(&pres, p.order_bound() as usize, enum_limits)?
            }
            GroupSource::Presentation(pres) => {
                let limits = enum_limits.unwrap_or_default();
                constructions::materialize(pres, limits.max_cosets, Some(limits))?
            }
        })
    }
}

/// Record filters; all off by default.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchFilters {
    pub chiral_only: bool,
    pub schlafli: Option<[u64; 2]>,
    pub tight: Option<bool>,
}

impl SearchFilters {
    fn admits(&self, report: &PolyhedronReport) -> bool {
        if self.chiral_only && report.orientation != Orientation::Chiral {
            return false;
        }
        if let Some(want) = self.schlafli {
            if report.schlafli != want {
                return false;
            }
        }
        if let Some(want) = self.tight {
            if report.tight != want {
                return false;
            }
        }
        true
    }
}

/// How far hits are identified before they become records.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DedupeMode {
    /// Every valid pair.
    Raw,
    /// One representative per automorphism class.
    UpToAut,
    /// One representative per class under automorphisms together with the
    /// enantiomorph and dual moves.
    UpToAutEnantiomorphDual,
}

/// A complete search request.
#[derive(Debug, Clone)]
pub struct SearchSpec {
    pub source: GroupSource,
    pub filters: SearchFilters,
    pub dedupe: DedupeMode,
    pub enum_limits: Option<EnumLimits>,
}

/// One persisted classification.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AtlasRecord {
    pub v: u32,
    pub group: String,
    pub order: u64,
    pub sigma1: String,
    pub sigma2: String,
    pub report: PolyhedronReport,
    pub toolkit_version: String,
    pub timestamp: String,
}

impl AtlasRecord {
    /// Identity of a record across atlases.
    pub fn key(&self) -> (String, String, String) {
        (self.group.clone(), self.sigma1.clone(), self.sigma2.clone())
    }
}

type Hit = (u32, u32, PolyhedronReport);

fn involution_frame(group: &ConcreteGroup) -> Vec<u32> {
    (0..group.order() as u32).filter(|&w| group.element_order(w) <= 2).collect()
}

fn row_hits(
    group: &ConcreteGroup,
    sylow: Option<&PGroupProfile>,
    frame: &[u32],
    filters: &SearchFilters,
    engine: &EngineLimits,
    sigma1: u32,
) -> Vec<Hit> {
    if group.element_order(sigma1) < 3 {
        return Vec::new();
    }
    let inv = group.inverse(sigma1);
    let mut out = Vec::new();
    for &w in frame {
        let sigma2 = group.product(inv, w);
        if group.element_order(sigma2) < 3 {
            continue;
        }
        let pair = RotationPair::new(group, sigma1, sigma2);
        let report = polytope::classify_cached(group, &pair, engine, sylow);
        if report.is_valid() && filters.admits(&report) {
            out.push((sigma1, sigma2, report));
        }
    }
    out
}

fn scan_sequential(
    group: &ConcreteGroup,
    sylow: Option<&PGroupProfile>,
    frame: &[u32],
    filters: &SearchFilters,
    engine: &EngineLimits,
) -> Vec<Hit> {
    (0..group.order() as u32)
        .flat_map(|s1| row_hits(group, sylow, frame, filters, engine, s1))
        .collect()
}

#[cfg(feature = "parallel")]
fn scan_parallel(
    group: &ConcreteGroup,
    sylow: Option<&PGroupProfile>,
    frame: &[u32],
    filters: &SearchFilters,
    engine: &EngineLimits,
) -> Vec<Hit> {
    use rayon::prelude::*;
    (0..group.order() as u32)
        .into_par_iter()
        .flat_map_iter(|s1| row_hits(group, sylow, frame, filters, engine, s1))
        .collect()
}

#[cfg(not(feature = "parallel"))]
fn scan_parallel(
    group: &ConcreteGroup,
    sylow: Option<&PGroupProfile>,
    frame: &[u32],
    filters: &SearchFilters,
    engine: &EngineLimits,
) -> Vec<Hit> {
    scan_sequential(group, sylow, frame, filters, engine)
}

/// True when some automorphism carries one generating pair to the other.
fn pairs_equivalent(group: &ConcreteGroup, a: (u32, u32), b: (u32, u32)) -> bool {
    match group.extend_from_pairs(&[(a.0, b.0), (a.1, b.1)], group) {
        Ok(Some(h)) => h.is_automorphism(),
        _ => false,
    }
}

/// Closure of a pair under the enantiomorph and dual moves.
fn symmetry_orbit(group: &ConcreteGroup, start: (u32, u32)) -> Vec<(u32, u32)> {
    let mut seen = BTreeSet::new();
    let mut queue = vec![start];
    while let Some(p) = queue.pop() {
        if !seen.insert(p) {
            continue;
        }
        let pair = RotationPair::new(group, p.0, p.1);
        let e = polytope::enantiomorph(group, &pair);
        let d = polytope::dual(group, &pair);
        queue.push((e.sigma1, e.sigma2));
        queue.push((d.sigma1, d.sigma2));
    }
    seen.into_iter().collect()
}

fn signature(group: &ConcreteGroup, h: &Hit) -> (u64, u64, Orientation, bool) {
    let _ = group;
    (h.2.schlafli[0], h.2.schlafli[1], h.2.orientation, h.2.tight)
}

fn dedupe_hits(group: &ConcreteGroup, hits: Vec<Hit>, mode: DedupeMode) -> Vec<Hit> {
    if mode == DedupeMode::Raw {
        return hits;
    }
    let mut reps: Vec<Hit> = Vec::new();
    'next_hit: for h in hits {
        let candidates: Vec<(u32, u32)> = match mode {
            DedupeMode::UpToAut => vec![(h.0, h.1)],
            DedupeMode::UpToAutEnantiomorphDual => symmetry_orbit(group, (h.0, h.1)),
            DedupeMode::Raw => unreachable!(),
        };
        for rep in &reps {
            // the signature shortcut is only sound when no orbit move can
            // change it; dual swaps the type entries
            if mode == DedupeMode::UpToAut && signature(group, rep) != signature(group, &h) {
                continue;
            }
            for &c in &candidates {
                if pairs_equivalent(group, c, (rep.0, rep.1)) {
                    continue 'next_hit;
                }
            }
        }
        reps.push(h);
    }
    reps
}

fn hits_to_records(group: &ConcreteGroup, label: &str, hits: Vec<Hit>) -> Vec<AtlasRecord> {
    let timestamp =
        chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true);
    hits.into_iter()
        .map(|(s1, s2, report)| AtlasRecord {
            v: ATLAS_VERSION,
            group: label.to_string(),
            order: group.order() as u64,
            sigma1: group.express(s1).to_string(),
            sigma2: group.express(s2).to_string(),
            report,
            toolkit_version: env!("CARGO_PKG_VERSION").to_string(),
            timestamp: timestamp.clone(),
        })
        .collect()
}

/// Scans a materialized group. The hit list is sorted before dedupe, so
/// results do not depend on scan order; `parallel` only affects wall time.
pub fn search_pairs(
    group: &ConcreteGroup,
    label: &str,
    filters: &SearchFilters,
    dedupe: DedupeMode,
    engine: &EngineLimits,
    parallel: bool,
) -> Result<Vec<AtlasRecord>, AtlasError> {
    let sylow = match polytope::two_p_m_shape(group.order() as u64) {
        Some((p, _)) => Some(pgroup::sylow_profile(group, p, engine)?),
        None => None,
    };
    let frame = involution_frame(group);
    let mut hits = if parallel {
        scan_parallel(group, sylow.as_ref(), &frame, filters, engine)
    } else {
        scan_sequential(group, sylow.as_ref(), &frame, filters, engine)
    };
    hits.sort_by_key(|h| (h.0, h.1));
    let reps = dedupe_hits(group, hits, dedupe);
    Ok(hits_to_records(group, label, reps))
}

fn search_impl(
    spec: &SearchSpec,
    engine: &EngineLimits,
    parallel: bool,
) -> Result<Vec<AtlasRecord>, AtlasError> {
    let label = spec.source.label()?;
    let group = spec.source.materialize(spec.enum_limits, engine)?;
    search_pairs(&group, &label, &spec.filters, spec.dedupe, engine, parallel)
}

/// Runs the search, parallel when the crate is built with the `parallel`
/// feature.
pub fn search(spec: &SearchSpec, engine: &EngineLimits) -> Result<Vec<AtlasRecord>, AtlasError> {
    search_impl(spec, engine, true)
}

/// Strictly sequential variant; identical results to `search`.
pub fn search_seq(spec: &SearchSpec, engine: &EngineLimits) -> Result<Vec<AtlasRecord>, AtlasError> {
    search_impl(spec, engine, false)
}

/// Parallel-preferring variant; falls back to the sequential scan when the
/// `parallel` feature is absent.
pub fn search_par(spec: &SearchSpec, engine: &EngineLimits) -> Result<Vec<AtlasRecord>, AtlasError> {
    search_impl(spec, engine, true)
}

/// One failed record inside a corpus check.
#[derive(Debug, Clone, Serialize)]
pub struct CorpusFailure {
    pub group: String,
    pub sigma1: String,
    pub sigma2: String,
    pub detail: String,
}

/// Outcome of re-running the structure clauses over a record corpus.
#[derive(Debug, Clone, Serialize)]
pub struct CorpusSummary {
    pub records: usize,
    pub failures: Vec<CorpusFailure>,
    pub all_pass: bool,
}

/// Re-evaluates every record's pair in the group and runs the four
/// structure clauses; chiral corpora are expected to pass clause-clean.
pub fn verify_theorem1_corpus(
    group: &ConcreteGroup,
    records: &[AtlasRecord],
    engine: &EngineLimits,
) -> Result<CorpusSummary, AtlasError> {
    let alphabet = group.word_alphabet();
    let mut failures = Vec::new();
    let context = polytope::sylow_context(group, engine)?;
    for rec in records {
        let s1 = group.evaluate_word(&parse_word(&rec.sigma1, &alphabet)?)?;
        let s2 = group.evaluate_word(&parse_word(&rec.sigma2, &alphabet)?)?;
        let pair = RotationPair::new(group, s1, s2);
        let fail = |detail: String| CorpusFailure {
            group: rec.group.clone(),
            sigma1: rec.sigma1.clone(),
            sigma2: rec.sigma2.clone(),
            detail,
        };
        match polytope::verify_theorem1_cached(group, &pair, engine, Some(&context)) {
            Ok(report) => {
                let clauses = report.clauses.as_ref().expect("clauses filled");
                if !clauses.all_pass {
                    failures.push(fail(format!("clause failure: {clauses:?}")));
                }
            }
            Err(e) => failures.push(fail(e.to_string())),
        }
    }
    Ok(CorpusSummary { records: records.len(), all_pass: failures.is_empty(), failures })
}

/// Appends records to a JSON-lines atlas, creating the file if needed.
pub fn atlas_append(path: &Path, records: &[AtlasRecord]) -> Result<(), AtlasError> {
    let mut file = OpenOptions::new().create(true).append(true).open(path)?;
    for rec in records {
        let line = serde_json::to_string(rec).expect("record serializes");
        file.write_all(line.as_bytes())?;
        file.write_all(b"\n")?;
    }
    Ok(())
}

/// A loaded atlas: the parseable records plus one issue line per problem.
#[derive(Debug, Clone)]
pub struct AtlasLoad {
    pub records: Vec<AtlasRecord>,
    pub issues: Vec<String>,
}

fn record_issue(rec: &AtlasRecord) -> Option<String> {
    let r = &rec.report;
    let tight_consistent = r.tight == (r.schlafli[0] * r.schlafli[1] == r.order);
    let validity_consistent = !r.is_valid()
        || (r.generates
            && r.rotation_relation_holds
            && r.intersection_trivial
            && r.schlafli[0] >= 3
            && r.schlafli[1] >= 3);
    if !tight_consistent {
        Some("tight flag disagrees with k1*k2 vs order".to_string())
    } else if !validity_consistent {
        Some("orientation is valid but a validity flag is false".to_string())
    } else {
        None
    }
}

/// Reads a JSON-lines atlas. Malformed lines and invariant violations are
/// reported with their line number; loading continues past them. A version
/// other than the current one is a warning, not an error.
pub fn atlas_load(path: &Path) -> Result<AtlasLoad, AtlasError> {
    let file = std::fs::File::open(path)?;
    let mut records = Vec::new();
    let mut issues = Vec::new();
    for (idx, line) in BufReader::new(file).lines().enumerate() {
        let line = line?;
        let n = idx + 1;
        if line.trim().is_empty() {
            continue;
        }
        match serde_json::from_str::<AtlasRecord>(&line) {
            Ok(rec) => {
                if rec.v != ATLAS_VERSION {
                    issues.push(format!("line {n}: version {} (current {})", rec.v, ATLAS_VERSION));
                }
                if let Some(problem) = record_issue(&rec) {
                    issues.push(format!("line {n}: {problem}"));
                }
                records.push(rec);
            }
            Err(e) => issues.push(format!("line {n}: {e}")),
        }
    }
    Ok(AtlasLoad { records, issues })
}

/// Records on one side and not the other, keyed by group label and the
/// pair's word form.
#[derive(Debug, Clone, Serialize)]
pub struct AtlasDiff {
    pub only_in_a: Vec<(String, String, String)>,
    pub only_in_b: Vec<(String, String, String)>,
}

impl AtlasDiff {
    pub fn is_empty(&self) -> bool {
        self.only_in_a.is_empty() && self.only_in_b.is_empty()
    }
}

pub fn atlas_diff(a: &[AtlasRecord], b: &[AtlasRecord]) -> AtlasDiff {
    let keys_a: BTreeSet<_> = a.iter().map(AtlasRecord::key).collect();
    let keys_b: BTreeSet<_> = b.iter().map(AtlasRecord::key).collect();
    AtlasDiff {
        only_in_a: keys_a.difference(&keys_b).cloned().collect(),
        only_in_b: keys_b.difference(&keys_a).cloned().collect(),
    }
}
