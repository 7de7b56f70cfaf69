//! Concrete finite groups materialized as permutation groups.
//!
//! Elements are dense indices 0..n with 0 the identity. Every group keeps,
//! per generator letter, the right-multiplication action on element indices
//! plus a breadth-first word for each element; a product walks the second
//! factor's word. Groups of at most 4096 elements additionally materialize
//! the full n*n multiplication table on first use. Groups built from
//! explicit permutations also keep the sorted permutation list; groups built
//! from a closed coset table (the regular action) index elements by coset,
//! which coincides with lexicographic order of the regular permutations.
//!
//! Construction always checks the identity and inverse axioms on all
//! elements and spot-checks associativity on 1000 seeded random triples.
//! All values are immutable after construction and safe to share across
//! threads.

use std::collections::hash_map::DefaultHasher;
use std::collections::HashMap;
use std::hash::{Hash, Hasher};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, OnceLock};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::words::{Alphabet, Word};

const UNDEF: u32 = u32::MAX;

/// Largest group that gets a full multiplication table.
pub const MUL_TABLE_MAX: usize = 4096;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GroupError {
    #[error("closure exceeded the element cap of {0}")]
    ClosureCapExceeded(usize),
    #[error("element or set belongs to a different group")]
    GroupMismatch,
    #[error("permutation degree mismatch")]
    DegreeMismatch,
    #[error("no generator named `{0}`")]
    NoSuchGenerator(String),
    #[error("the given elements do not generate the group")]
    NotGenerating,
    #[error("element set is not a subgroup")]
    NotASubgroup,
    #[error("subgroup is not normal")]
    NotNormal,
    #[error("group too large for this operation ({0} elements)")]
    TooLarge(usize),
    #[error("word uses generator `{0}` that the group does not have")]
    UnknownWordGenerator(String),
}

/// A permutation of 0..degree given by its image list.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Permutation {
    images: Vec<u32>,
}

impl Permutation {
    pub fn from_images(images: Vec<u32>) -> Self {
        let n = images.len();
        let mut seen = vec![false; n];
        for &i in &images {
            assert!((i as usize) < n && !seen[i as usize], "not a permutation");
            seen[i as usize] = true;
        }
        Permutation { images }
    }

    pub fn identity(degree: usize) -> Self {
        Permutation { images: (0..degree as u32).collect() }
    }

    /// A single cycle moving `points` in order, fixing everything else.
    pub fn cycle(degree: usize, points: &[u32]) -> Self {
        let mut images: Vec<u32> = (0..degree as u32).collect();
        for w in points.windows(2) {
            images[w[0] as usize] = w[1];
        }
        if points.len() > 1 {
            images[points[points.len() - 1] as usize] = points[0];
        }
        Permutation::from_images(images)
    }

    pub fn degree(&self) -> usize {
        self.images.len()
    }

    pub fn image(&self, point: u32) -> u32 {
        self.images[point as usize]
    }

    pub fn images(&self) -> &[u32] {
        &self.images
    }

    pub fn is_identity(&self) -> bool {
        self.images.iter().enumerate().all(|(i, &p)| i as u32 == p)
    }

    /// Applies `self` first, then `other`.
    pub fn compose(&self, other: &Permutation) -> Permutation {
        assert_eq!(self.degree(), other.degree(), "degree mismatch");
        Permutation { images: self.images.iter().map(|&p| other.images[p as usize]).collect() }
    }

    pub fn inverse(&self) -> Permutation {
        let mut images = vec![0u32; self.images.len()];
        for (i, &p) in self.images.iter().enumerate() {
            images[p as usize] = i as u32;
        }
        Permutation { images }
    }

    pub fn order(&self) -> u64 {
        let n = self.degree();
        let mut seen = vec![false; n];
        let mut order = 1u64;
        for start in 0..n {
            if seen[start] {
                continue;
            }
            let mut len = 0u64;
            let mut p = start;
            while !seen[p] {
                seen[p] = true;
                p = self.images[p] as usize;
                len += 1;
            }
            order = lcm(order, len);
        }
        order
    }
}

fn lcm(a: u64, b: u64) -> u64 {
    fn gcd(a: u64, b: u64) -> u64 {
        if b == 0 {
            a
        } else {
            gcd(b, a % b)
        }
    }
    a / gcd(a, b) * b
}

static NEXT_GROUP_ID: AtomicU64 = AtomicU64::new(1);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct GroupId(u64);

fn fresh_group_id() -> GroupId {
    GroupId(NEXT_GROUP_ID.fetch_add(1, Ordering::Relaxed))
}

/// An element index tagged with its owning group.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GroupElement {
    pub group: GroupId,
    pub index: u32,
}

/// Sorted, deduplicated element indices within one group.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ElementSet {
    group: GroupId,
    elems: Vec<u32>,
}

impl ElementSet {
    pub fn len(&self) -> usize {
        self.elems.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elems.is_empty()
    }

    pub fn contains(&self, elem: u32) -> bool {
        self.elems.binary_search(&elem).is_ok()
    }

    pub fn elems(&self) -> &[u32] {
        &self.elems
    }

    pub fn group_id(&self) -> GroupId {
        self.group
    }

    pub fn is_trivial(&self) -> bool {
        self.elems == [0]
    }
}

/// Total map between groups, stored on all source elements.
#[derive(Debug, Clone)]
pub struct Homomorphism {
    pub source: GroupId,
    pub target: GroupId,
    map: Vec<u32>,
}

impl Homomorphism {
    pub fn apply(&self, elem: u32) -> u32 {
        self.map[elem as usize]
    }

    pub fn map(&self) -> &[u32] {
        &self.map
    }

    pub fn image_size(&self) -> usize {
        let mut seen = vec![false; self.map.len().max(self.map.iter().map(|&x| x as usize + 1).max().unwrap_or(0))];
        let mut count = 0;
        for &x in &self.map {
            if !seen[x as usize] {
                seen[x as usize] = true;
                count += 1;
            }
        }
        count
    }

    pub fn is_bijective(&self) -> bool {
        self.image_size() == self.map.len()
    }

    /// An automorphism is a bijective self-map.
    pub fn is_automorphism(&self) -> bool {
        self.source == self.target && self.is_bijective()
    }

    pub fn kernel(&self, source: &ConcreteGroup) -> ElementSet {
        let elems = (0..self.map.len() as u32).filter(|&x| self.map[x as usize] == 0).collect();
        ElementSet { group: source.id, elems }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct EngineLimits {
    pub element_cap: usize,
    pub spot_seed: u64,
}

pub const DEFAULT_ELEMENT_CAP: usize = 1_000_000;

impl Default for EngineLimits {
    fn default() -> Self {
        EngineLimits { element_cap: DEFAULT_ELEMENT_CAP, spot_seed: 0x00C0_FFEE }
    }
}

/// Hash-bucketed index from permutation to element id that avoids storing
/// the permutations twice.
struct PermIndex {
    buckets: HashMap<u64, Vec<u32>>,
}

fn perm_hash(images: &[u32]) -> u64 {
    let mut h = DefaultHasher::new();
    images.hash(&mut h);
    h.finish()
}

impl PermIndex {
    fn new() -> Self {
        PermIndex { buckets: HashMap::new() }
    }

    fn get(&self, elements: &[Permutation], perm: &Permutation) -> Option<u32> {
        let bucket = self.buckets.get(&perm_hash(perm.images()))?;
        bucket.iter().copied().find(|&i| &elements[i as usize] == perm)
    }

    fn insert(&mut self, perm: &Permutation, id: u32) {
        self.buckets.entry(perm_hash(perm.images())).or_default().push(id);
    }
}

pub struct ConcreteGroup {
    id: GroupId,
    degree: usize,
    n: usize,
    gen_names: Vec<String>,
    gen_elems: Vec<u32>,
    /// Right action of letter 2g (generator g) and 2g+1 (its inverse) on
    /// element indices.
    cols: Vec<Vec<u32>>,
    word_off: Vec<u32>,
    word_let: Vec<u16>,
    inverses: Vec<u32>,
    /// Sorted permutations, for groups built from explicit permutations.
    perms: Option<(Vec<Permutation>, PermIndex)>,
    mul_table: OnceLock<Option<Vec<u32>>>,
    orders: OnceLock<Vec<u32>>,
    alphabet: OnceLock<Arc<Alphabet>>,
}

impl std::fmt::Debug for ConcreteGroup {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ConcreteGroup")
            .field("order", &self.n)
            .field("degree", &self.degree)
            .field("generators", &self.gen_names)
            .finish()
    }
}

impl ConcreteGroup {
    /// Closes the named permutations under composition. Fails once the
    /// closure would exceed `limits.element_cap`.
    pub fn from_generators(
        degree: usize,
        named: &[(String, Permutation)],
        limits: &EngineLimits,
    ) -> Result<Self, GroupError> {
        for (_, p) in named {
            if p.degree() != degree {
                return Err(GroupError::DegreeMismatch);
            }
        }
        let mut elements = vec![Permutation::identity(degree)];
        let mut index = PermIndex::new();
        index.insert(&elements[0], 0);
        let gen_perms: Vec<Permutation> = named.iter().map(|(_, p)| p.clone()).collect();
        let mut head = 0;
        while head < elements.len() {
            for g in &gen_perms {
                let product = elements[head].compose(g);
                if index.get(&elements, &product).is_none() {
                    if elements.len() >= limits.element_cap {
                        return Err(GroupError::ClosureCapExceeded(limits.element_cap));
                    }
                    index.insert(&product, elements.len() as u32);
                    elements.push(product);
                }
            }
            head += 1;
        }

        elements.sort();
        let mut index = PermIndex::new();
        for (i, p) in elements.iter().enumerate() {
            index.insert(p, i as u32);
        }
        assert!(elements[0].is_identity(), "identity must sort first");

        let n = elements.len();
        let n_gens = named.len();
        let mut cols = vec![vec![0u32; n]; 2 * n_gens];
        for (g, perm) in gen_perms.iter().enumerate() {
            let inv = perm.inverse();
            for i in 0..n {
                cols[2 * g][i] = index.get(&elements, &elements[i].compose(perm)).expect("closed");
                cols[2 * g + 1][i] = index.get(&elements, &elements[i].compose(&inv)).expect("closed");
            }
        }
        let gen_elems: Vec<u32> =
            gen_perms.iter().map(|p| index.get(&elements, p).expect("generator in closure")).collect();
        let gen_names = named.iter().map(|(name, _)| name.clone()).collect();
        Self::assemble(degree, n, gen_names, gen_elems, cols, Some((elements, index)), limits)
    }

    /// Wraps a closed coset table over the trivial subgroup: elements are
    /// the cosets of the regular action.
    pub fn from_coset_table(
        table: &crate::coset::CosetTable,
        names: &[String],
        limits: &EngineLimits,
    ) -> Result<Self, GroupError> {
        assert_eq!(names.len(), table.n_gens, "one name per generator");
        let n = table.order().expect("table must be closed");
        if n > limits.element_cap {
            return Err(GroupError::ClosureCapExceeded(limits.element_cap));
        }
        let cols: Vec<Vec<u32>> =
            (0..2 * table.n_gens).map(|l| table.letter_action(l).to_vec()).collect();
        let gen_elems: Vec<u32> = (0..table.n_gens).map(|g| cols[2 * g][0]).collect();
        Self::assemble(n, n, names.to_vec(), gen_elems, cols, None, limits)
    }

    fn assemble(
        degree: usize,
        n: usize,
        gen_names: Vec<String>,
        gen_elems: Vec<u32>,
        cols: Vec<Vec<u32>>,
        perms: Option<(Vec<Permutation>, PermIndex)>,
        limits: &EngineLimits,
    ) -> Result<Self, GroupError> {
        // breadth-first words from the identity, letters in ascending order
        let mut parent = vec![UNDEF; n];
        let mut parent_letter = vec![0u16; n];
        let mut depth = vec![0u32; n];
        let mut order_visit = Vec::with_capacity(n);
        parent[0] = 0;
        order_visit.push(0u32);
        let mut head = 0;
        while head < order_visit.len() {
            let x = order_visit[head];
            head += 1;
            for (l, col) in cols.iter().enumerate() {
                let y = col[x as usize];
                if parent[y as usize] == UNDEF {
                    parent[y as usize] = x;
                    parent_letter[y as usize] = l as u16;
                    depth[y as usize] = depth[x as usize] + 1;
                    order_visit.push(y);
                }
            }
        }
        assert_eq!(order_visit.len(), n, "generator actions must be transitive");
        depth[0] = 0;
        // prefix offsets follow element ids, not visit order
        let mut word_off = vec![0u32; n + 1];
        let mut acc = 0u32;
        for i in 0..n {
            word_off[i] = acc;
            acc += depth[i];
        }
        word_off[n] = acc;
        let mut word_let = vec![0u16; acc as usize];
        for i in 0..n {
            let mut pos = word_off[i + 1] as usize;
            let mut x = i as u32;
            while x != 0 {
                pos -= 1;
                word_let[pos] = parent_letter[x as usize];
                x = parent[x as usize];
            }
            debug_assert_eq!(pos, word_off[i] as usize);
        }

        let mut group = ConcreteGroup {
            id: fresh_group_id(),
            degree,
            n,
            gen_names,
            gen_elems,
            cols,
            word_off,
            word_let,
            inverses: Vec::new(),
            perms,
            mul_table: OnceLock::new(),
            orders: OnceLock::new(),
            alphabet: OnceLock::new(),
        };
        let mut inverses = vec![0u32; n];
        for i in 0..n {
            inverses[i] = group.walk_inverse(i as u32);
        }
        group.inverses = inverses;
        group.validate_axioms(limits.spot_seed);
        Ok(group)
    }

    fn word_slice(&self, i: u32) -> &[u16] {
        &self.word_let[self.word_off[i as usize] as usize..self.word_off[i as usize + 1] as usize]
    }

    fn walk_from(&self, start: u32, word: &[u16]) -> u32 {
        word.iter().fold(start, |x, &l| self.cols[l as usize][x as usize])
    }

    fn walk_inverse(&self, i: u32) -> u32 {
        let mut x = 0u32;
        for &l in self.word_slice(i).iter().rev() {
            x = self.cols[(l ^ 1) as usize][x as usize];
        }
        x
    }

    fn table(&self) -> Option<&[u32]> {
        self.mul_table
            .get_or_init(|| {
                if self.n > MUL_TABLE_MAX {
                    return None;
                }
                let mut t = vec![0u32; self.n * self.n];
                for j in 0..self.n as u32 {
                    let word = self.word_slice(j);
                    for i in 0..self.n {
                        t[i * self.n + j as usize] = self.walk_from(i as u32, word);
                    }
                }
                Some(t)
            })
            .as_deref()
    }

    pub fn id(&self) -> GroupId {
        self.id
    }

    pub fn order(&self) -> usize {
        self.n
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn generator_names(&self) -> &[String] {
        &self.gen_names
    }

    pub fn generator_elems(&self) -> &[u32] {
        &self.gen_elems
    }

    pub fn generator_named(&self, name: &str) -> Result<u32, GroupError> {
        self.gen_names
            .iter()
            .position(|n| n == name)
            .map(|i| self.gen_elems[i])
            .ok_or_else(|| GroupError::NoSuchGenerator(name.to_string()))
    }

    pub fn element(&self, index: u32) -> GroupElement {
        assert!((index as usize) < self.n, "element index out of range");
        GroupElement { group: self.id, index }
    }

    pub fn check(&self, elem: GroupElement) -> Result<u32, GroupError> {
        if elem.group != self.id || elem.index as usize >= self.n {
            return Err(GroupError::GroupMismatch);
        }
        Ok(elem.index)
    }

    pub fn product(&self, i: u32, j: u32) -> u32 {
        if let Some(t) = self.table() {
            t[i as usize * self.n + j as usize]
        } else {
            self.walk_from(i, self.word_slice(j))
        }
    }

    pub fn inverse(&self, i: u32) -> u32 {
        self.inverses[i as usize]
    }

    pub fn conjugate(&self, x: u32, by: u32) -> u32 {
        self.product(self.product(self.inverse(by), x), by)
    }

    pub fn commutator_elems(&self, x: u32, y: u32) -> u32 {
        let xy = self.product(x, y);
        let yx = self.product(y, x);
        self.product(self.inverse(yx), xy)
    }

    pub fn element_order(&self, i: u32) -> u64 {
        let mut x = i;
        let mut order = 1u64;
        while x != 0 {
            x = self.product(x, i);
            order += 1;
        }
        order
    }

    /// Element orders for the whole group, computed once.
    pub fn all_orders(&self) -> &[u32] {
        self.orders.get_or_init(|| {
            (0..self.n as u32).map(|i| self.element_order(i) as u32).collect()
        })
    }

    pub fn exponent(&self) -> u64 {
        self.all_orders().iter().fold(1u64, |acc, &o| lcm(acc, o as u64))
    }

    pub fn power(&self, i: u32, e: i64) -> u32 {
        if e == 0 {
            return 0;
        }
        let base = if e < 0 { self.inverse(i) } else { i };
        let mut remaining = e.unsigned_abs();
        let mut acc = 0u32;
        let mut sq = base;
        loop {
            if remaining & 1 == 1 {
                acc = self.product(acc, sq);
            }
            remaining >>= 1;
            if remaining == 0 {
                return acc;
            }
            sq = self.product(sq, sq);
        }
    }

    pub fn is_involution(&self, i: u32) -> bool {
        i != 0 && self.product(i, i) == 0
    }

    pub fn perm_of(&self, i: u32) -> Permutation {
        if let Some((elements, _)) = &self.perms {
            return elements[i as usize].clone();
        }
        let word = self.word_slice(i);
        let images = (0..self.degree as u32).map(|p| self.walk_from(p, word)).collect();
        Permutation::from_images(images)
    }

    pub fn generator_perm(&self, g: usize) -> Permutation {
        Permutation::from_images(self.cols[2 * g].clone())
    }

    pub fn index_of_perm(&self, perm: &Permutation) -> Option<u32> {
        if let Some((elements, index)) = &self.perms {
            return index.get(elements, perm);
        }
        // the regular action is point-0 discriminated
        if perm.degree() != self.degree {
            return None;
        }
        let candidate = perm.image(0);
        ((candidate as usize) < self.n && &self.perm_of(candidate) == perm).then_some(candidate)
    }

    fn validate_axioms(&self, seed: u64) {
        for i in 0..self.n as u32 {
            assert_eq!(self.product(0, i), i, "left identity failed");
            assert_eq!(self.product(i, 0), i, "right identity failed");
            assert_eq!(self.product(i, self.inverses[i as usize]), 0, "inverse failed");
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..1000 {
            let a = rng.gen_range(0..self.n) as u32;
            let b = rng.gen_range(0..self.n) as u32;
            let c = rng.gen_range(0..self.n) as u32;
            assert_eq!(
                self.product(self.product(a, b), c),
                self.product(a, self.product(b, c)),
                "associativity spot check failed"
            );
        }
    }

    pub fn element_set(&self, elems: Vec<u32>) -> ElementSet {
        let mut elems = elems;
        elems.sort_unstable();
        elems.dedup();
        assert!(elems.iter().all(|&e| (e as usize) < self.n), "element out of range");
        ElementSet { group: self.id, elems }
    }

    pub fn full_set(&self) -> ElementSet {
        ElementSet { group: self.id, elems: (0..self.n as u32).collect() }
    }

    pub fn trivial_set(&self) -> ElementSet {
        ElementSet { group: self.id, elems: vec![0] }
    }

    fn check_set(&self, set: &ElementSet) -> Result<(), GroupError> {
        if set.group != self.id {
            return Err(GroupError::GroupMismatch);
        }
        Ok(())
    }

    /// Subgroup generated by the seeds: grows a generator list, re-running
    /// the orbit walk whenever a seed falls outside the current closure.
    pub fn subgroup_closure(&self, seeds: &[u32]) -> ElementSet {
        let mut gens: Vec<u32> = Vec::new();
        let mut member = vec![false; self.n];
        let mut list = vec![0u32];
        member[0] = true;
        for &s in seeds {
            if member[s as usize] {
                continue;
            }
            gens.push(s);
            member.iter_mut().for_each(|m| *m = false);
            list.clear();
            list.push(0);
            member[0] = true;
            let mut head = 0;
            while head < list.len() {
                let x = list[head];
                head += 1;
                for &g in &gens {
                    let y = self.product(x, g);
                    if !member[y as usize] {
                        member[y as usize] = true;
                        list.push(y);
                    }
                }
            }
        }
        self.element_set(list)
    }

    pub fn cyclic_subgroup(&self, i: u32) -> ElementSet {
        let mut elems = vec![0u32];
        let mut x = i;
        while x != 0 {
            elems.push(x);
            x = self.product(x, i);
        }
        self.element_set(elems)
    }

    pub fn intersect(&self, a: &ElementSet, b: &ElementSet) -> Result<ElementSet, GroupError> {
        self.check_set(a)?;
        self.check_set(b)?;
        let elems = a.elems.iter().copied().filter(|&x| b.contains(x)).collect();
        Ok(ElementSet { group: self.id, elems })
    }

    pub fn product_of_sets(&self, a: &ElementSet, b: &ElementSet) -> Result<ElementSet, GroupError> {
        self.check_set(a)?;
        self.check_set(b)?;
        let mut member = vec![false; self.n];
        let mut elems = Vec::new();
        for &x in &a.elems {
            for &y in &b.elems {
                let p = self.product(x, y);
                if !member[p as usize] {
                    member[p as usize] = true;
                    elems.push(p);
                }
            }
        }
        Ok(self.element_set(elems))
    }

    pub fn is_subgroup(&self, set: &ElementSet) -> Result<bool, GroupError> {
        self.check_set(set)?;
        if !set.contains(0) {
            return Ok(false);
        }
        Ok(set
            .elems
            .iter()
            .all(|&x| set.elems.iter().all(|&y| set.contains(self.product(x, y)))))
    }

    /// Normality under the whole group: conjugation by the group generators
    /// suffices.
    pub fn is_normal(&self, set: &ElementSet) -> Result<bool, GroupError> {
        self.check_set(set)?;
        Ok(set.elems.iter().all(|&x| {
            self.gen_elems.iter().all(|&g| set.contains(self.conjugate(x, g)))
        }))
    }

    pub fn center(&self) -> ElementSet {
        let elems = (0..self.n as u32)
            .filter(|&x| {
                self.gen_elems
                    .iter()
                    .all(|&g| self.product(x, g) == self.product(g, x))
            })
            .collect();
        ElementSet { group: self.id, elems }
    }

    pub fn centralizer(&self, set: &ElementSet) -> Result<ElementSet, GroupError> {
        self.check_set(set)?;
        let elems = (0..self.n as u32)
            .filter(|&x| {
                set.elems
                    .iter()
                    .all(|&s| self.product(x, s) == self.product(s, x))
            })
            .collect();
        Ok(ElementSet { group: self.id, elems })
    }

    /// Greedy generating subset of a subgroup's element set.
    pub fn generating_subset(&self, set: &ElementSet) -> Result<Vec<u32>, GroupError> {
        self.check_set(set)?;
        let mut gens = Vec::new();
        let mut closure = self.trivial_set();
        for &x in &set.elems {
            if !closure.contains(x) {
                gens.push(x);
                closure = self.subgroup_closure(&gens);
                if closure.len() == set.len() {
                    break;
                }
            }
        }
        Ok(gens)
    }

    /// Smallest normal subgroup containing the seeds: closes the seed list
    /// under conjugation by group generators.
    pub fn normal_closure(&self, seeds: &[u32]) -> ElementSet {
        let mut seed_list: Vec<u32> = seeds.to_vec();
        loop {
            let h = self.subgroup_closure(&seed_list);
            let mut new_seeds = Vec::new();
            for &s in &seed_list {
                for &g in &self.gen_elems {
                    let c = self.conjugate(s, g);
                    if !h.contains(c) && !new_seeds.contains(&c) {
                        new_seeds.push(c);
                    }
                }
            }
            if new_seeds.is_empty() {
                return h;
            }
            seed_list.extend(new_seeds);
        }
    }

    /// Derived subgroup: normal closure of the generator commutators.
    pub fn derived_subgroup(&self) -> ElementSet {
        let mut seeds = Vec::new();
        for (a, &x) in self.gen_elems.iter().enumerate() {
            for &y in &self.gen_elems[a + 1..] {
                seeds.push(self.commutator_elems(x, y));
            }
        }
        self.normal_closure(&seeds)
    }

    /// [H, G] for H given by its full element set.
    pub fn commutator_with_group(&self, h: &ElementSet) -> Result<ElementSet, GroupError> {
        self.check_set(h)?;
        let h_gens = self.generating_subset(h)?;
        let mut seeds = Vec::new();
        for &x in &h_gens {
            for &g in &self.gen_elems {
                seeds.push(self.commutator_elems(x, g));
            }
        }
        Ok(self.normal_closure(&seeds))
    }

    /// Lower central series G = G1 >= G2 >= ..., stopping at the first
    /// repeat. Nilpotent groups end with the trivial subgroup.
    pub fn lower_central_series(&self) -> Vec<ElementSet> {
        let mut series = vec![self.full_set()];
        loop {
            let current = series.last().unwrap();
            let next = if series.len() == 1 {
                self.derived_subgroup()
            } else {
                self.commutator_with_group(current).expect("same group")
            };
            if &next == current {
                break;
            }
            let trivial = next.is_trivial();
            series.push(next);
            if trivial {
                break;
            }
        }
        series
    }

    /// Nilpotency class, when the lower central series reaches the trivial
    /// subgroup.
    pub fn nilpotency_class(&self) -> Option<usize> {
        let series = self.lower_central_series();
        series.last().unwrap().is_trivial().then(|| series.len() - 1)
    }

    pub fn is_abelian(&self) -> bool {
        self.gen_elems.iter().all(|&x| {
            self.gen_elems.iter().all(|&y| self.product(x, y) == self.product(y, x))
        })
    }

    /// Extends `pairs = [(g, image)]` to a homomorphism by closing the graph
    /// in the direct product. Returns Ok(None) when the assignment is
    /// inconsistent; the first components must generate the group.
    pub fn extend_from_pairs(
        &self,
        pairs: &[(u32, u32)],
        target: &ConcreteGroup,
    ) -> Result<Option<Homomorphism>, GroupError> {
        let mut map = vec![UNDEF; self.n];
        map[0] = 0;
        let mut list = vec![0u32];
        let mut head = 0;
        while head < list.len() {
            let x = list[head];
            head += 1;
            for &(g, img) in pairs {
                let y = self.product(x, g);
                let y_img = target.product(map[x as usize], img);
                if map[y as usize] == UNDEF {
                    map[y as usize] = y_img;
                    list.push(y);
                } else if map[y as usize] != y_img {
                    return Ok(None);
                }
            }
        }
        if list.len() != self.n {
            return Err(GroupError::NotGenerating);
        }
        Ok(Some(Homomorphism { source: self.id, target: target.id, map }))
    }

    /// Named-generator form of `extend_from_pairs`.
    pub fn hom_extends(
        &self,
        images: &[(&str, u32)],
        target: &ConcreteGroup,
    ) -> Result<Option<Homomorphism>, GroupError> {
        let pairs: Result<Vec<(u32, u32)>, GroupError> = images
            .iter()
            .map(|&(name, img)| Ok((self.generator_named(name)?, img)))
            .collect();
        self.extend_from_pairs(&pairs?, target)
    }

    /// Quotient by a normal subgroup: the regular action on cosets, with the
    /// verified projection.
    pub fn quotient(&self, normal: &ElementSet) -> Result<(ConcreteGroup, Homomorphism), GroupError> {
        self.check_set(normal)?;
        if !self.is_subgroup(normal)? {
            return Err(GroupError::NotASubgroup);
        }
        if !self.is_normal(normal)? {
            return Err(GroupError::NotNormal);
        }
        let mut coset_of = vec![UNDEF; self.n];
        let mut reps = Vec::new();
        for x in 0..self.n as u32 {
            if coset_of[x as usize] != UNDEF {
                continue;
            }
            let id = reps.len() as u32;
            reps.push(x);
            for &m in normal.elems() {
                coset_of[self.product(m, x) as usize] = id;
            }
        }
        let k = reps.len();
        let named: Vec<(String, Permutation)> = self
            .gen_names
            .iter()
            .zip(&self.gen_elems)
            .map(|(name, &g)| {
                let images = reps
                    .iter()
                    .map(|&r| coset_of[self.product(r, g) as usize])
                    .collect();
                (name.clone(), Permutation::from_images(images))
            })
            .collect();
        let limits = EngineLimits { element_cap: k + 1, ..EngineLimits::default() };
        let q = ConcreteGroup::from_generators(k, &named, &limits)?;
        assert_eq!(q.order(), k, "coset action closure mismatch");
        // regular action sorted by image of 0, which is the coset id itself
        for i in 0..k as u32 {
            assert_eq!(q.perm_of(i).image(0), i, "coset numbering out of order");
        }
        let hom = Homomorphism { source: self.id, target: q.id, map: coset_of };
        // full homomorphism check against group generators
        for x in 0..self.n as u32 {
            for &g in &self.gen_elems {
                let lhs = hom.apply(self.product(x, g));
                let rhs = q.product(hom.apply(x), hom.apply(g));
                assert_eq!(lhs, rhs, "projection is not a homomorphism");
            }
        }
        Ok((q, hom))
    }

    /// The direct product G x G acting on two disjoint copies of the points.
    pub fn direct_square(&self, limits: &EngineLimits) -> Result<ConcreteGroup, GroupError> {
        if self.n.saturating_mul(self.n) > limits.element_cap {
            return Err(GroupError::ClosureCapExceeded(limits.element_cap));
        }
        let d = self.degree;
        let mut named = Vec::new();
        for (g, name) in self.gen_names.iter().enumerate() {
            let perm = self.generator_perm(g);
            let mut left: Vec<u32> = (0..2 * d as u32).collect();
            let mut right: Vec<u32> = (0..2 * d as u32).collect();
            for p in 0..d {
                left[p] = perm.image(p as u32);
                right[d + p] = perm.image(p as u32) + d as u32;
            }
            named.push((format!("{name}_l"), Permutation::from_images(left)));
            named.push((format!("{name}_r"), Permutation::from_images(right)));
        }
        let sq = ConcreteGroup::from_generators(2 * d, &named, limits)?;
        assert_eq!(sq.order(), self.n * self.n, "direct square order mismatch");
        Ok(sq)
    }

    /// The subgroup as a group in its own right via its regular action;
    /// element `i` of the result corresponds to `set.elems()[i]`.
    pub fn subgroup_group(&self, set: &ElementSet, limits: &EngineLimits) -> Result<ConcreteGroup, GroupError> {
        self.check_set(set)?;
        if !self.is_subgroup(set)? {
            return Err(GroupError::NotASubgroup);
        }
        let h = set.len();
        let gens = self.generating_subset(set)?;
        let pos = |e: u32| set.elems.binary_search(&e).expect("member") as u32;
        let named: Vec<(String, Permutation)> = gens
            .iter()
            .enumerate()
            .map(|(i, &g)| {
                let images = set.elems.iter().map(|&x| pos(self.product(x, g))).collect();
                (format!("x{i}"), Permutation::from_images(images))
            })
            .collect();
        let sub = ConcreteGroup::from_generators(h, &named, limits)?;
        assert_eq!(sub.order(), h, "subgroup regular action mismatch");
        for i in 0..h as u32 {
            assert_eq!(sub.perm_of(i).image(0), i, "subgroup numbering out of order");
        }
        Ok(sub)
    }

    pub fn word_alphabet(&self) -> &Arc<Alphabet> {
        self.alphabet
            .get_or_init(|| Alphabet::new(&self.gen_names).expect("generator names are valid"))
    }

    /// The element as a word in the named generators (its breadth-first
    /// normal form).
    pub fn express(&self, i: u32) -> Word {
        let alphabet = self.word_alphabet();
        let mut word = Word::identity(alphabet);
        for &l in self.word_slice(i) {
            let g = (l >> 1) as usize;
            let e = if l & 1 == 0 { 1 } else { -1 };
            word = word
                .multiply(&Word::generator_power(alphabet, g, e))
                .expect("same alphabet");
        }
        word
    }

    /// Evaluates a word whose generator names all belong to this group.
    pub fn evaluate_word(&self, word: &Word) -> Result<u32, GroupError> {
        let mut letter_of = Vec::with_capacity(word.alphabet().len());
        for gen in word.alphabet().generators() {
            let pos = self
                .gen_names
                .iter()
                .position(|n| *n == gen.name)
                .ok_or_else(|| GroupError::UnknownWordGenerator(gen.name.clone()))?;
            letter_of.push(pos);
        }
        let mut x = 0u32;
        for &(g, e) in word.syllables() {
            let base = self.gen_elems[letter_of[g]];
            x = self.product(x, self.power(base, e));
        }
        Ok(x)
    }
}
