//! Rank-3 rotation-pair calculus.
//!
//! A candidate pair (sigma1, sigma2) in a finite group is screened for the
//! polyhedron conditions: the two elements generate, (sigma1*sigma2)^2 = 1,
//! the cyclic subgroups they span meet trivially, and both orders are at
//! least 3. A valid pair is `Regular` when inverting both generators
//! extends to an automorphism and `Chiral` when it does not; everything
//! else is `Invalid`. Reports carry the Schlafli type, tightness, a Sylow
//! subgroup profile for groups of order 2*p^m, and witness material.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::group::{ConcreteGroup, ElementSet, EngineLimits, GroupError, GroupId, Homomorphism};
use crate::pgroup::{self, PGroupError, PGroupProfile};

#[derive(Debug, Error)]
pub enum PolytopeError {
    #[error("pair is {0:?}, not chiral")]
    NotChiral(Orientation),
    #[error("group order {0} is not 2 * p^m for an odd prime p")]
    OrderShape(u64),
    #[error("homomorphism does not carry the source pair to the target pair")]
    PairMismatch,
    #[error("rotation relation (sigma1*sigma2)^2 = 1 fails in the source group")]
    RotationRelationRequired,
    #[error(transparent)]
    Engine(#[from] GroupError),
    #[error(transparent)]
    PGroup(#[from] PGroupError),
}

/// Candidate rotation generators, tagged with their owning group.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RotationPair {
    group: GroupId,
    pub sigma1: u32,
    pub sigma2: u32,
}

impl RotationPair {
    pub fn new(group: &ConcreteGroup, sigma1: u32, sigma2: u32) -> Self {
        assert!((sigma1 as usize) < group.order() && (sigma2 as usize) < group.order());
        RotationPair { group: group.id(), sigma1, sigma2 }
    }

    pub fn group_id(&self) -> GroupId {
        self.group
    }

    fn check(&self, group: &ConcreteGroup) -> Result<(), PolytopeError> {
        if self.group != group.id() {
            return Err(PolytopeError::Engine(GroupError::GroupMismatch));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Orientation {
    Regular,
    Chiral,
    Invalid,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TypeArrangement {
    /// (k1, k2) = (p^l1, 2p^l2)
    Direct,
    /// (k1, k2) = (2p^l2, p^l1)
    Swapped,
}

/// Clause-by-clause verdict for the structure theorem on chiral pairs in
/// groups of order 2 * p^m.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Theorem1Verdict {
    /// Sylow p-subgroup is normal, meets <sigma1*sigma2> trivially, and
    /// their product is the whole group.
    pub semidirect_over_sylow: bool,
    /// {k1, k2} = {p^l1, 2*p^l2} up to duality.
    pub schlafli_powers: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub schlafli_arrangement: Option<TypeArrangement>,
    /// P = <sigma1, sigma2^2>, needs exactly 2 generators, nonabelian, m >= 3.
    pub sylow_two_generated: bool,
    pub tight_iff_metacyclic: bool,
    pub all_pass: bool,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Evidence {
    /// Nontrivial element of <sigma1> meet <sigma2>, as a word.
    pub intersection_witness: Option<String>,
    /// Generator images of the inverting automorphism, when one exists.
    pub automorphism: Option<BTreeMap<String, String>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolyhedronReport {
    pub order: u64,
    pub generates: bool,
    pub rotation_relation_holds: bool,
    pub intersection_trivial: bool,
    pub schlafli: [u64; 2],
    pub tight: bool,
    pub orientation: Orientation,
    pub sylow_profile: Option<PGroupProfile>,
    pub clauses: Option<Theorem1Verdict>,
    pub evidence: Evidence,
}

impl PolyhedronReport {
    pub fn is_valid(&self) -> bool {
        self.orientation != Orientation::Invalid
    }

    /// Decision fields only: everything except the witness material, which
    /// may legitimately differ between equivalent pairs.
    pub fn decision_fields(&self) -> PolyhedronReport {
        PolyhedronReport { evidence: Evidence::default(), ..self.clone() }
    }
}

/// Mirror-image pair (sigma1^-1, sigma1^2 * sigma2). Applying it twice
/// returns the original pair exactly.
pub fn enantiomorph(group: &ConcreteGroup, pair: &RotationPair) -> RotationPair {
    pair.check(group).expect("pair belongs to group");
    let s1 = group.inverse(pair.sigma1);
    let s2 = group.product(group.product(pair.sigma1, pair.sigma1), pair.sigma2);
    RotationPair { group: group.id(), sigma1: s1, sigma2: s2 }
}

/// Dual pair (sigma2^-1, sigma1^-1): swaps the Schlafli entries.
pub fn dual(group: &ConcreteGroup, pair: &RotationPair) -> RotationPair {
    pair.check(group).expect("pair belongs to group");
    RotationPair {
        group: group.id(),
        sigma1: group.inverse(pair.sigma2),
        sigma2: group.inverse(pair.sigma1),
    }
}

/// Full screening of a candidate pair. Never fails: every defect is a
/// report field.
pub fn classify(group: &ConcreteGroup, pair: &RotationPair, limits: &EngineLimits) -> PolyhedronReport {
    classify_cached(group, pair, limits, None)
}

/// `classify` with an optional precomputed Sylow profile for the group,
/// letting bulk scans pay the profile cost once.
pub fn classify_cached(
    group: &ConcreteGroup,
    pair: &RotationPair,
    limits: &EngineLimits,
    sylow: Option<&PGroupProfile>,
) -> PolyhedronReport {
    pair.check(group).expect("pair belongs to group");
    let n = group.order() as u64;
    let s1 = pair.sigma1;
    let s2 = pair.sigma2;
    let k1 = group.element_order(s1);
    let k2 = group.element_order(s2);
    let t = group.product(s1, s2);
    let rotation_relation_holds = group.product(t, t) == 0;

    let c1 = group.cyclic_subgroup(s1);
    let c2 = group.cyclic_subgroup(s2);
    let meet = group.intersect(&c1, &c2).expect("same group");
    let intersection_trivial = meet.is_trivial();
    let mut evidence = Evidence::default();
    if !intersection_trivial {
        let witness = meet.elems().iter().copied().find(|&x| x != 0).expect("nontrivial");
        evidence.intersection_witness = Some(group.express(witness).to_string());
    }

    let generates = group.subgroup_closure(&[s1, s2]).len() as u64 == n;
    let valid = generates && rotation_relation_holds && intersection_trivial && k1 >= 3 && k2 >= 3;

    let orientation = if !valid {
        Orientation::Invalid
    } else {
        let assignment = [(s1, group.inverse(s1)), (s2, group.inverse(s2))];
        match group.extend_from_pairs(&assignment, group).expect("pair generates") {
            Some(alpha) => {
                // the inverting automorphism must square to the identity on
                // the pair
                for &(g, _) in &assignment {
                    assert_eq!(alpha.apply(alpha.apply(g)), g, "inverting map must be an involution");
                }
                assert!(alpha.is_automorphism());
                let images = group
                    .generator_names()
                    .iter()
                    .zip(group.generator_elems())
                    .map(|(name, &g)| (name.clone(), group.express(alpha.apply(g)).to_string()))
                    .collect();
                evidence.automorphism = Some(images);
                Orientation::Regular
            }
            None => Orientation::Chiral,
        }
    };

    let sylow_profile = match sylow {
        Some(profile) => Some(profile.clone()),
        None => two_p_m_shape(n)
            .and_then(|(p, _)| pgroup::sylow_profile(group, p, limits).ok()),
    };

    PolyhedronReport {
        order: n,
        generates,
        rotation_relation_holds,
        intersection_trivial,
        schlafli: [k1, k2],
        tight: k1 * k2 == n,
        orientation,
        sylow_profile,
        clauses: None,
        evidence,
    }
}

/// Writes n = 2 * p^m for an odd prime p, if possible.
pub fn two_p_m_shape(n: u64) -> Option<(u64, u32)> {
    if n < 6 || n % 2 != 0 {
        return None;
    }
    let odd = n / 2;
    if odd % 2 == 0 {
        return None;
    }
    let mut p = 3u64;
    while p * p <= odd {
        if odd % p == 0 {
            break;
        }
        p += 2;
    }
    if p * p > odd {
        p = odd;
    }
    let (power, m) = pgroup::p_part(odd, p);
    (power == odd).then_some((p, m))
}

fn is_power_of(mut k: u64, p: u64) -> bool {
    if k == 0 {
        return false;
    }
    while k % p == 0 {
        k /= p;
    }
    k == 1
}

/// Pair-independent facts about a group of order 2 * p^m, shared across a
/// corpus of Theorem 1 checks so the Sylow subgroup is computed once.
#[derive(Debug, Clone)]
pub struct SylowContext {
    pub set: ElementSet,
    pub profile: PGroupProfile,
    pub normal: bool,
}

pub fn sylow_context(
    group: &ConcreteGroup,
    limits: &EngineLimits,
) -> Result<SylowContext, PolytopeError> {
    let n = group.order() as u64;
    let (p, _) = two_p_m_shape(n).ok_or(PolytopeError::OrderShape(n))?;
    let set = pgroup::sylow_p(group, p)?;
    let profile = pgroup::sylow_profile(group, p, limits)?;
    let normal = group.is_normal(&set)?;
    Ok(SylowContext { set, profile, normal })
}

/// Checks the four structure clauses for a chiral pair in a group of order
/// 2 * p^m and returns the classification report with `clauses` filled.
pub fn verify_theorem1(
    group: &ConcreteGroup,
    pair: &RotationPair,
    limits: &EngineLimits,
) -> Result<PolyhedronReport, PolytopeError> {
    verify_theorem1_cached(group, pair, limits, None)
}

/// `verify_theorem1` with the Sylow context precomputed.
pub fn verify_theorem1_cached(
    group: &ConcreteGroup,
    pair: &RotationPair,
    limits: &EngineLimits,
    context: Option<&SylowContext>,
) -> Result<PolyhedronReport, PolytopeError> {
    pair.check(group)?;
    let n = group.order() as u64;
    let (p, m) = two_p_m_shape(n).ok_or(PolytopeError::OrderShape(n))?;
    let built;
    let context = match context {
        Some(ctx) => ctx,
        None => {
            built = sylow_context(group, limits)?;
            &built
        }
    };
    let mut report = classify_cached(group, pair, limits, Some(&context.profile));
    if report.orientation != Orientation::Chiral {
        return Err(PolytopeError::NotChiral(report.orientation));
    }
    let profile = report.sylow_profile.as_ref().expect("order is 2 * p^m");

    let sylow = &context.set;
    let t = group.product(pair.sigma1, pair.sigma2);
    let t_cyclic = group.cyclic_subgroup(t);
    let semidirect_over_sylow = context.normal
        && group.intersect(&t_cyclic, sylow)?.is_trivial()
        && group.product_of_sets(sylow, &t_cyclic)?.len() as u64 == n;

    let [k1, k2] = report.schlafli;
    let direct = is_power_of(k1, p) && k2 % 2 == 0 && is_power_of(k2 / 2, p);
    let swapped = is_power_of(k2, p) && k1 % 2 == 0 && is_power_of(k1 / 2, p);
    let schlafli_arrangement = if direct {
        Some(TypeArrangement::Direct)
    } else if swapped {
        Some(TypeArrangement::Swapped)
    } else {
        None
    };
    let schlafli_powers = schlafli_arrangement.is_some();

    // the p-part pair: (sigma1, sigma2^2) when sigma1 is the odd rotation,
    // (sigma1^2, sigma2) for the dual arrangement
    let p_part = match schlafli_arrangement {
        Some(TypeArrangement::Swapped) => {
            [group.product(pair.sigma1, pair.sigma1), pair.sigma2]
        }
        _ => [pair.sigma1, group.product(pair.sigma2, pair.sigma2)],
    };
    let generated = group.subgroup_closure(&p_part);
    let sylow_two_generated = generated == *sylow
        && profile.minimal_generators == 2
        && profile.derived_order > 1
        && m >= 3;

    let tight_iff_metacyclic = report.tight == profile.metacyclic;

    let all_pass = semidirect_over_sylow && schlafli_powers && sylow_two_generated && tight_iff_metacyclic;
    report.clauses = Some(Theorem1Verdict {
        semidirect_over_sylow,
        schlafli_powers,
        schlafli_arrangement,
        sylow_two_generated,
        tight_iff_metacyclic,
        all_pass,
    });
    Ok(report)
}

/// Certifies the intersection condition for a pair upstairs from a pair
/// downstairs: true when the homomorphism is injective on one of the two
/// cyclic subgroups and the target pair is a valid chiral pair. The
/// conclusion is re-checked directly; a mismatch would be an engine bug.
pub fn quotient_criterion(
    source: &ConcreteGroup,
    source_pair: &RotationPair,
    hom: &Homomorphism,
    target: &ConcreteGroup,
    target_pair: &RotationPair,
    limits: &EngineLimits,
) -> Result<bool, PolytopeError> {
    source_pair.check(source)?;
    target_pair.check(target)?;
    if hom.source != source.id() || hom.target != target.id() {
        return Err(PolytopeError::PairMismatch);
    }
    if hom.apply(source_pair.sigma1) != target_pair.sigma1
        || hom.apply(source_pair.sigma2) != target_pair.sigma2
    {
        return Err(PolytopeError::PairMismatch);
    }
    let t = source.product(source_pair.sigma1, source_pair.sigma2);
    if source.product(t, t) != 0 {
        return Err(PolytopeError::RotationRelationRequired);
    }

    let injective_on = |gen: u32| {
        let cyclic = source.cyclic_subgroup(gen);
        let mut images: Vec<u32> = cyclic.elems().iter().map(|&x| hom.apply(x)).collect();
        images.sort_unstable();
        images.dedup();
        images.len() == cyclic.len()
    };
    let injective = injective_on(source_pair.sigma1) || injective_on(source_pair.sigma2);

    let target_report = classify(target, target_pair, limits);
    let certified = injective && target_report.orientation == Orientation::Chiral;

    if certified {
        let c1 = source.cyclic_subgroup(source_pair.sigma1);
        let c2 = source.cyclic_subgroup(source_pair.sigma2);
        assert!(
            source.intersect(&c1, &c2).expect("same group").is_trivial(),
            "criterion certified a pair whose intersection is not trivial"
        );
    }
    Ok(certified)
}
