//! Boxes & connectors recognition and n-tier structure.
//!
//! An ordered partition `C1..Cn` of the universe is a tier partition when
//! every relation tuple lies inside `Ci ∪ Ci+1` for some `i`. The maximal
//! tier count of a B&C architecture is found by searching for an
//! element-surjective homomorphism onto the elementary architecture `Tn`;
//! a direct enumeration of ordered partitions serves as a cross-check.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::model::{Architecture, ElementId, Relation};
use crate::morphism::{find_element_surjective, Homomorphism, MorphismError, SearchConfig};
use crate::par::{self, Parallelism};

/// Name of the single relation of `Tn`.
pub const LINKED: &str = "linked";

/// Default universe-size cap for exhaustive partition enumeration.
pub const DEFAULT_ORACLE_LIMIT: usize = 9;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TierError {
    #[error("NOT_A_PARTITION: {0}")]
    NotAPartition(String),
    #[error("NOT_BNC: tier search needs binary relations only and no functions")]
    NotBnc,
    #[error("EMPTY_UNIVERSE: an empty architecture has no tiers")]
    EmptyUniverse,
    #[error("INDEX_OUT_OF_RANGE: cannot merge tier {index} with its successor in a {tiers}-tier partition")]
    IndexOutOfRange { index: usize, tiers: usize },
    #[error("universe of {size} elements exceeds the enumeration limit of {limit}")]
    OracleLimit { size: usize, limit: usize },
    #[error(transparent)]
    Search(#[from] MorphismError),
}

/// Ordered list of nonempty, pairwise disjoint tiers.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TierPartition {
    tiers: Vec<BTreeSet<ElementId>>,
}

impl TierPartition {
    pub fn new(tiers: Vec<BTreeSet<ElementId>>) -> Result<Self, TierError> {
        if let Some(i) = tiers.iter().position(BTreeSet::is_empty) {
            return Err(TierError::NotAPartition(format!("tier {} is empty", i + 1)));
        }
        let mut seen = BTreeSet::new();
        for t in &tiers {
            for e in t {
                if !seen.insert(e) {
                    return Err(TierError::NotAPartition(format!("{e} appears in more than one tier")));
                }
            }
        }
        Ok(TierPartition { tiers })
    }

    /// Groups elements by their 1-based tier index. Indices must form a
    /// contiguous range starting at 1.
    pub fn from_assignment(assignment: &BTreeMap<ElementId, usize>) -> Result<Self, TierError> {
        let n = assignment.values().copied().max().unwrap_or(0);
        let mut tiers = vec![BTreeSet::new(); n];
        for (e, &i) in assignment {
            if i == 0 {
                return Err(TierError::NotAPartition(format!("{e} assigned to tier 0")));
            }
            tiers[i - 1].insert(e.clone());
        }
        TierPartition::new(tiers)
    }

    pub fn tiers(&self) -> &[BTreeSet<ElementId>] {
        &self.tiers
    }

    pub fn len(&self) -> usize {
        self.tiers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tiers.is_empty()
    }

    /// 1-based tier index of `e`.
    pub fn tier_of(&self, e: &ElementId) -> Option<usize> {
        self.tiers.iter().position(|t| t.contains(e)).map(|i| i + 1)
    }

    pub fn elements(&self) -> BTreeSet<ElementId> {
        self.tiers.iter().flatten().cloned().collect()
    }

    fn index(&self) -> HashMap<&ElementId, usize> {
        self.tiers
            .iter()
            .enumerate()
            .flat_map(|(i, t)| t.iter().map(move |e| (e, i)))
            .collect()
    }
}

impl fmt::Display for TierPartition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, t) in self.tiers.iter().enumerate() {
            let names: Vec<&str> = t.iter().map(ElementId::as_str).collect();
            writeln!(f, "tier {}: {}", i + 1, names.join(" "))?;
        }
        Ok(())
    }
}

pub fn is_bnc(arch: &Architecture) -> bool {
    arch.is_bnc()
}

fn ensure_covers(arch: &Architecture, p: &TierPartition) -> Result<(), TierError> {
    let universe = arch.universe_set();
    let covered = p.elements();
    if let Some(e) = universe.difference(&covered).next() {
        return Err(TierError::NotAPartition(format!("{e} is in no tier")));
    }
    if let Some(e) = covered.difference(&universe).next() {
        return Err(TierError::NotAPartition(format!("{e} is not an element of the architecture")));
    }
    Ok(())
}

/// Whether every relation tuple fits within one tier or two adjacent ones.
/// A single tier is always satisfied.
pub fn check_tier_partition(arch: &Architecture, p: &TierPartition) -> Result<bool, TierError> {
    ensure_covers(arch, p)?;
    let index = p.index();
    Ok(arch.relations.iter().flat_map(|r| &r.tuples).all(|t| {
        let (lo, hi) = t
            .iter()
            .map(|e| index[e])
            .fold((usize::MAX, 0), |(lo, hi), i| (lo.min(i), hi.max(i)));
        t.is_empty() || hi - lo <= 1
    }))
}

/// Replaces tiers `i` and `i + 1` (1-based) by their union.
pub fn merge_adjacent_tiers(p: &TierPartition, i: usize) -> Result<TierPartition, TierError> {
    if i == 0 || i >= p.len() {
        return Err(TierError::IndexOutOfRange { index: i, tiers: p.len() });
    }
    let mut tiers = p.tiers.clone();
    let next = tiers.remove(i);
    tiers[i - 1].extend(next);
    Ok(TierPartition { tiers })
}

/// `Tn`: universe `1..=n` and `linked = {(i, j) : |i - j| <= 1}`.
///
/// # Panics
/// If `n == 0`.
pub fn elementary_tier(n: usize) -> Architecture {
    assert!(n >= 1, "the elementary tier architecture needs n >= 1");
    let id = |i: usize| ElementId::new(i.to_string()).expect("numerals are valid element ids");
    let universe: Vec<ElementId> = (1..=n).map(id).collect();
    let tuples = (1..=n).flat_map(|i| {
        (i.saturating_sub(1).max(1)..=(i + 1).min(n)).map(move |j| vec![id(i), id(j)])
    });
    Architecture {
        universe,
        relations: vec![Relation::new(LINKED, 2, tuples)],
        functions: vec![],
    }
}

/// The map sending each element to its tier index and every relation to
/// `linked`, as a candidate homomorphism into `Tn`.
pub fn tier_homomorphism(arch: &Architecture, p: &TierPartition) -> Result<Homomorphism, TierError> {
    if !arch.is_bnc() {
        return Err(TierError::NotBnc);
    }
    ensure_covers(arch, p)?;
    let target = elementary_tier(p.len().max(1));
    let elements = arch
        .universe
        .iter()
        .map(|e| {
            let tier = p.tier_of(e).expect("partition covers the universe");
            (e.clone(), target.universe[tier - 1].clone())
        })
        .collect();
    let relations = vec![0; arch.relations.len()];
    Ok(Homomorphism::new(Arc::new(arch.clone()), Arc::new(target), elements, relations, vec![])?)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TierConfig {
    pub search: SearchConfig,
    /// Largest universe the partition enumeration accepts.
    pub oracle_limit: usize,
    pub parallelism: Parallelism,
}

impl Default for TierConfig {
    fn default() -> Self {
        TierConfig {
            search: SearchConfig::default(),
            oracle_limit: DEFAULT_ORACLE_LIMIT,
            parallelism: Parallelism::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MaxTiers {
    pub tiers: usize,
    pub witness: TierPartition,
}

/// Tier partition from BFS layers, one component after the other. Each
/// component is layered from an element of minimum degree.
fn bfs_layering(arch: &Architecture) -> TierPartition {
    let index: HashMap<&ElementId, usize> = arch.universe.iter().enumerate().map(|(i, e)| (e, i)).collect();
    let n = arch.universe.len();
    let mut adj: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); n];
    for t in arch.relations.iter().flat_map(|r| &r.tuples) {
        for a in t {
            for b in t {
                if a != b {
                    adj[index[a]].insert(index[b]);
                }
            }
        }
    }
    let mut component = vec![usize::MAX; n];
    let mut layer_of = vec![0usize; n];
    let mut offset = 0;
    for start in 0..n {
        if component[start] != usize::MAX {
            continue;
        }
        // collect the component first to pick its minimum-degree root
        let mut members = vec![start];
        component[start] = start;
        let mut k = 0;
        while k < members.len() {
            let u = members[k];
            for &w in &adj[u] {
                if component[w] == usize::MAX {
                    component[w] = start;
                    members.push(w);
                }
            }
            k += 1;
        }
        let root = *members.iter().min_by_key(|&&u| (adj[u].len(), u)).expect("nonempty component");
        let mut dist = HashMap::from([(root, 0usize)]);
        let mut queue = VecDeque::from([root]);
        let mut depth = 0;
        while let Some(u) = queue.pop_front() {
            let d = dist[&u];
            depth = depth.max(d);
            layer_of[u] = offset + d;
            for &w in &adj[u] {
                if let std::collections::hash_map::Entry::Vacant(slot) = dist.entry(w) {
                    slot.insert(d + 1);
                    queue.push_back(w);
                }
            }
        }
        offset += depth + 1;
    }
    let mut tiers = vec![BTreeSet::new(); offset];
    for (i, e) in arch.universe.iter().enumerate() {
        tiers[layer_of[i]].insert(e.clone());
    }
    TierPartition { tiers }
}

fn partition_from_homomorphism(h: &Homomorphism) -> TierPartition {
    let n = h.target().universe.len();
    let position: HashMap<&ElementId, usize> =
        h.target().universe.iter().enumerate().map(|(i, e)| (e, i)).collect();
    let mut tiers = vec![BTreeSet::new(); n];
    for (e, v) in h.element_map() {
        tiers[position[v]].insert(e.clone());
    }
    TierPartition { tiers }
}

/// Largest `n` for which a B&C architecture is n-tier, with a witness.
///
/// Starts from a BFS layering and then searches for element-surjective
/// homomorphisms onto `T(n+1)`, `T(n+2)`, … until the search proves none
/// exists. Merging adjacent tiers makes tier counts downward closed, so the
/// first failure bounds the maximum.
pub fn find_max_tiers(arch: &Architecture, config: &TierConfig) -> Result<MaxTiers, TierError> {
    let report = arch.validate();
    if !report.is_empty() {
        return Err(MorphismError::InvalidArchitecture { side: "source", report }.into());
    }
    if !arch.is_bnc() {
        return Err(TierError::NotBnc);
    }
    if arch.is_empty() {
        return Err(TierError::EmptyUniverse);
    }
    let mut witness = bfs_layering(arch);
    debug_assert!(check_tier_partition(arch, &witness).unwrap_or(false));
    for n in witness.len() + 1..=arch.len() {
        match find_element_surjective(arch, &elementary_tier(n), &config.search)? {
            Some(h) => witness = partition_from_homomorphism(&h),
            None => break,
        }
    }
    Ok(MaxTiers { tiers: witness.len(), witness })
}

/// Maximal tier count by enumerating every ordered partition of the
/// universe. Works for any arity; limited to `config.oracle_limit` elements.
pub fn max_tiers_by_enumeration(arch: &Architecture, config: &TierConfig) -> Result<MaxTiers, TierError> {
    let n = arch.len();
    if n == 0 {
        return Err(TierError::EmptyUniverse);
    }
    if n > config.oracle_limit {
        return Err(TierError::OracleLimit { size: n, limit: config.oracle_limit });
    }
    let index: HashMap<&ElementId, usize> = arch.universe.iter().enumerate().map(|(i, e)| (e, i)).collect();
    // tuples checked as soon as their last element is placed
    let mut closing: Vec<Vec<Vec<usize>>> = vec![Vec::new(); n];
    for t in arch.relations.iter().flat_map(|r| &r.tuples) {
        let idx: Vec<usize> = t.iter().map(|e| index[e]).collect();
        if let Some(&last) = idx.iter().max() {
            closing[last].push(idx);
        }
    }
    let enumerator = Enumerator { n, closing };
    let firsts: Vec<usize> = (0..n).collect();
    let branches = par::map(&firsts, config.parallelism, |&v| enumerator.branch(v));
    let (tiers, assignment) = branches
        .into_iter()
        .fold((0, Vec::new()), |best, b| if b.0 > best.0 { b } else { best });
    let mut parts = vec![BTreeSet::new(); tiers];
    for (i, &v) in assignment.iter().enumerate() {
        parts[v].insert(arch.universe[i].clone());
    }
    Ok(MaxTiers { tiers, witness: TierPartition { tiers: parts } })
}

struct Enumerator {
    n: usize,
    closing: Vec<Vec<Vec<usize>>>,
}

impl Enumerator {
    /// Best (tier count, assignment) with element 0 placed in tier `first`.
    fn branch(&self, first: usize) -> (usize, Vec<usize>) {
        let mut assign = vec![0; self.n];
        let mut used = vec![0u32; self.n];
        let mut best = (0, Vec::new());
        assign[0] = first;
        used[first] += 1;
        if self.fits(0, &assign) {
            self.explore(1, &mut assign, &mut used, first, &mut best);
        }
        best
    }

    fn fits(&self, k: usize, assign: &[usize]) -> bool {
        self.closing[k].iter().all(|t| {
            let lo = t.iter().map(|&i| assign[i]).min().unwrap_or(0);
            let hi = t.iter().map(|&i| assign[i]).max().unwrap_or(0);
            hi - lo <= 1
        })
    }

    fn explore(&self, k: usize, assign: &mut Vec<usize>, used: &mut Vec<u32>, top: usize, best: &mut (usize, Vec<usize>)) {
        let remaining = self.n - k;
        let gaps = used[..=top].iter().filter(|&&u| u == 0).count();
        if gaps > remaining {
            return;
        }
        if k == self.n {
            if top + 1 > best.0 {
                *best = (top + 1, assign.clone());
            }
            return;
        }
        if top + 1 + remaining <= best.0 {
            return;
        }
        for v in 0..self.n {
            assign[k] = v;
            used[v] += 1;
            if self.fits(k, assign) {
                self.explore(k + 1, assign, used, top.max(v), best);
            }
            used[v] -= 1;
        }
    }
}

/// Runs [`find_max_tiers`] over many architectures.
pub fn find_max_tiers_batch(archs: &[Architecture], config: &TierConfig) -> Vec<Result<MaxTiers, TierError>> {
    par::map(archs, config.parallelism, |a| find_max_tiers(a, config))
}

/// Runs [`max_tiers_by_enumeration`] over many architectures.
pub fn max_tiers_by_enumeration_batch(archs: &[Architecture], config: &TierConfig) -> Vec<Result<MaxTiers, TierError>> {
    // each enumeration already fans out; keep the inner level sequential
    let inner = TierConfig { parallelism: Parallelism::Sequential, ..*config };
    par::map(archs, config.parallelism, |a| max_tiers_by_enumeration(a, &inner))
}
