//! Structure analysis for finite p-groups.
//!
//! The entry points either take a group whose order is a prime power, or
//! extract the unique Sylow p-subgroup first (`sylow_p`). Orders here rely
//! on materializing the element order vector, so everything refuses groups
//! past `MAX_PGROUP_ELEMENTS`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::group::{ConcreteGroup, ElementSet, EngineLimits, GroupError};

/// Hard ceiling for whole-group order scans.
pub const MAX_PGROUP_ELEMENTS: usize = 2_000_000;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PGroupError {
    #[error("group of order {0} exceeds the p-group analysis ceiling")]
    TooLarge(usize),
    #[error("group order {order} is not a power of {p}")]
    NotAPGroup { order: usize, p: u64 },
    #[error("elements of {p}-power order do not form a subgroup")]
    SylowNotUnique { p: u64 },
    #[error(transparent)]
    Engine(#[from] GroupError),
}

pub(crate) fn ensure_tractable(order: usize) -> Result<(), PGroupError> {
    if order > MAX_PGROUP_ELEMENTS {
        return Err(PGroupError::TooLarge(order));
    }
    Ok(())
}

/// Splits n as p^m * q with p not dividing q.
pub fn p_part(n: u64, p: u64) -> (u64, u32) {
    let mut power = 1u64;
    let mut m = 0u32;
    let mut rest = n;
    while rest % p == 0 {
        rest /= p;
        power *= p;
        m += 1;
    }
    (power, m)
}

/// The unique Sylow p-subgroup, computed as the set of elements of p-power
/// order. Fails when that set is not a subgroup, which cannot happen for
/// the orders this toolkit targets (the Sylow p-subgroup has index at most
/// two, hence is normal).
pub fn sylow_p(group: &ConcreteGroup, p: u64) -> Result<ElementSet, PGroupError> {
    ensure_tractable(group.order())?;
    let (expected, _) = p_part(group.order() as u64, p);
    let orders = group.all_orders();
    let elems: Vec<u32> = (0..group.order() as u32)
        .filter(|&i| {
            let mut o = orders[i as usize] as u64;
            while o % p == 0 {
                o /= p;
            }
            o == 1
        })
        .collect();
    if elems.len() as u64 != expected {
        return Err(PGroupError::SylowNotUnique { p });
    }
    let set = group.element_set(elems);
    let gens = group.generating_subset(&set)?;
    if group.subgroup_closure(&gens) != set {
        return Err(PGroupError::SylowNotUnique { p });
    }
    Ok(set)
}

fn require_p_group(group: &ConcreteGroup, p: u64) -> Result<u32, PGroupError> {
    ensure_tractable(group.order())?;
    let (power, m) = p_part(group.order() as u64, p);
    if power != group.order() as u64 {
        return Err(PGroupError::NotAPGroup { order: group.order(), p });
    }
    Ok(m)
}

/// Subgroup generated by the solutions of x^p = 1.
pub fn omega1(group: &ConcreteGroup, p: u64) -> Result<ElementSet, PGroupError> {
    require_p_group(group, p)?;
    let orders = group.all_orders();
    let seeds: Vec<u32> = (0..group.order() as u32)
        .filter(|&i| orders[i as usize] == 1 || orders[i as usize] as u64 == p)
        .collect();
    Ok(group.subgroup_closure(&seeds))
}

/// Subgroup generated by all p-th powers.
pub fn agemo1(group: &ConcreteGroup, p: u64) -> Result<ElementSet, PGroupError> {
    require_p_group(group, p)?;
    let mut seeds: Vec<u32> = (0..group.order() as u32).map(|i| group.power(i, p as i64)).collect();
    seeds.sort_unstable();
    seeds.dedup();
    Ok(group.subgroup_closure(&seeds))
}

/// Frattini subgroup of a p-group as the product set P' * agemo1(P), which
/// is already a subgroup there.
pub fn frattini(group: &ConcreteGroup, p: u64) -> Result<ElementSet, PGroupError> {
    require_p_group(group, p)?;
    let derived = group.derived_subgroup();
    let powers = agemo1(group, p)?;
    let product = group.product_of_sets(&derived, &powers)?;
    debug_assert!(group.is_subgroup(&product).unwrap());
    Ok(product)
}

/// Size of a minimal generating set: log_p of the Frattini index.
pub fn minimal_generator_count(group: &ConcreteGroup, p: u64) -> Result<u32, PGroupError> {
    require_p_group(group, p)?;
    let phi = frattini(group, p)?;
    let index = (group.order() / phi.len()) as u64;
    let (power, d) = p_part(index, p);
    assert_eq!(power, index, "Frattini index must be a p-power");
    Ok(d)
}

/// Certificate that the group is an extension of one cyclic group by
/// another.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MetacyclicWitness {
    /// Generator of the cyclic normal subgroup.
    pub normal_generator: u32,
    pub normal_order: u64,
    /// Element whose coset generates the cyclic quotient.
    pub quotient_generator: u32,
    pub quotient_order: u64,
}

/// Searches for a cyclic normal subgroup with cyclic quotient, trying
/// larger cyclic subgroups first. The quotient is checked through coset
/// orders without building it.
pub fn is_metacyclic(group: &ConcreteGroup) -> Result<Option<MetacyclicWitness>, PGroupError> {
    ensure_tractable(group.order())?;
    let n = group.order() as u64;
    let mut seen = std::collections::HashSet::new();
    let mut cyclics: Vec<(u32, ElementSet)> = Vec::new();
    for i in 0..group.order() as u32 {
        let sub = group.cyclic_subgroup(i);
        if seen.insert(sub.elems().to_vec()) {
            cyclics.push((i, sub));
        }
    }
    cyclics.sort_by_key(|(_, sub)| std::cmp::Reverse(sub.len()));
    for (gen, sub) in cyclics {
        if !group.is_normal(&sub)? {
            continue;
        }
        let index = n / sub.len() as u64;
        for h in 0..group.order() as u32 {
            // order of hN in G/N: first power of h landing in N
            let mut x = h;
            let mut coset_order = 1u64;
            while !sub.contains(x) {
                x = group.product(x, h);
                coset_order += 1;
            }
            if coset_order == index {
                return Ok(Some(MetacyclicWitness {
                    normal_generator: gen,
                    normal_order: sub.len() as u64,
                    quotient_generator: h,
                    quotient_order: index,
                }));
            }
        }
    }
    Ok(None)
}

/// Invariants of a p-group used throughout the classification reports.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PGroupProfile {
    pub p: u64,
    pub m: u32,
    pub order: u64,
    pub exponent: u64,
    pub minimal_generators: u32,
    pub frattini_order: u64,
    pub derived_order: u64,
    pub center_order: u64,
    pub nilpotency_class: u32,
    pub omega1_order: u64,
    pub agemo1_order: u64,
    pub metacyclic: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub metacyclic_witness: Option<MetacyclicWitness>,
}

/// Full invariant sweep over a p-group.
pub fn profile(group: &ConcreteGroup, p: u64) -> Result<PGroupProfile, PGroupError> {
    let m = require_p_group(group, p)?;
    let phi = frattini(group, p)?;
    let witness = is_metacyclic(group)?;
    Ok(PGroupProfile {
        p,
        m,
        order: group.order() as u64,
        exponent: group.exponent(),
        minimal_generators: minimal_generator_count(group, p)?,
        frattini_order: phi.len() as u64,
        derived_order: group.derived_subgroup().len() as u64,
        center_order: group.center().len() as u64,
        nilpotency_class: group
            .nilpotency_class()
            .expect("p-groups are nilpotent") as u32,
        omega1_order: omega1(group, p)?.len() as u64,
        agemo1_order: agemo1(group, p)?.len() as u64,
        metacyclic: witness.is_some(),
        metacyclic_witness: witness,
    })
}

/// Profile of the Sylow p-subgroup of a group of order 2 * p^m.
pub fn sylow_profile(
    group: &ConcreteGroup,
    p: u64,
    limits: &EngineLimits,
) -> Result<PGroupProfile, PGroupError> {
    let sylow = sylow_p(group, p)?;
    let sub = group.subgroup_group(&sylow, limits)?;
    profile(&sub, p)
}
