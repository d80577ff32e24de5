//! Seeded random instances for tests and benchmarks.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::graphbridge::Graph;
use crate::model::{Architecture, ElementId, FunctionTable, Relation, Tuple};
use crate::morphism::Homomorphism;
use crate::tiers::{tier_homomorphism, TierPartition};

fn id(s: String) -> ElementId {
    ElementId::new(s).expect("generated ids are tokens")
}

/// Elements `e0..e{n-1}`.
pub fn element_names(n: usize) -> Vec<ElementId> {
    (0..n).map(|i| id(format!("e{i}"))).collect()
}

/// B&C architecture with `elements` elements, up to `relations` binary
/// relations and at most `max_tuples` tuples in total. Relations with equal
/// extensions are dropped, so the result is always valid.
pub fn random_bnc<R: Rng>(rng: &mut R, elements: usize, relations: usize, max_tuples: usize) -> Architecture {
    let universe = element_names(elements);
    let mut rels = Vec::new();
    if elements > 0 {
        let total = rng.gen_range(0..=max_tuples);
        let k = relations.max(1);
        let mut buckets: Vec<BTreeSet<Tuple>> = vec![BTreeSet::new(); k];
        for _ in 0..total {
            let a = universe.choose(rng).unwrap().clone();
            let b = universe.choose(rng).unwrap().clone();
            buckets[rng.gen_range(0..k)].insert(vec![a, b]);
        }
        // equal buckets would be duplicate extensions; keep the first
        let mut seen = BTreeSet::new();
        for (i, tuples) in buckets.into_iter().enumerate() {
            if seen.insert(tuples.clone()) {
                rels.push(Relation::new(format!("r{i}"), 2, tuples));
            }
        }
    }
    let arch = Architecture::new(universe, rels, vec![]);
    debug_assert!(arch.is_valid() && arch.is_bnc());
    arch
}

/// Valid architecture with relations of arity 1..=3 and partial functions
/// of arity 1..=2. Elements are shuffled so that declaration order varies.
pub fn random_architecture<R: Rng>(rng: &mut R, max_elements: usize) -> Architecture {
    let n = rng.gen_range(0..=max_elements);
    let mut universe = element_names(n);
    universe.shuffle(rng);
    if n == 0 {
        return Architecture::default();
    }
    let mut relations = Vec::new();
    for i in 0..rng.gen_range(0..=3) {
        let arity = rng.gen_range(1..=3);
        let count = rng.gen_range(0..=4);
        let tuples: Vec<Tuple> = (0..count)
            .map(|_| (0..arity).map(|_| universe.choose(rng).unwrap().clone()).collect())
            .collect();
        relations.push(Relation::new(format!("r{i}"), arity, tuples));
    }
    let mut functions = Vec::new();
    for i in 0..rng.gen_range(0..=2) {
        let arity = rng.gen_range(1..=2);
        let mut mapping = BTreeMap::new();
        for _ in 0..rng.gen_range(0..=3) {
            let args: Tuple = (0..arity).map(|_| universe.choose(rng).unwrap().clone()).collect();
            mapping.insert(args, universe.choose(rng).unwrap().clone());
        }
        functions.push(FunctionTable::new(format!("f{i}"), arity, mapping));
    }
    let arch = Architecture::new(universe, relations, functions).disambiguate_relations();
    debug_assert!(arch.is_valid());
    arch
}

/// Directed graph on `v0..v{n-1}` with each ordered pair (loops included)
/// present with probability `density`.
pub fn random_graph<R: Rng>(rng: &mut R, vertices: usize, density: f64) -> Graph {
    let vs: Vec<ElementId> = (0..vertices).map(|i| id(format!("v{i}"))).collect();
    let mut edges = Vec::new();
    for a in &vs {
        for b in &vs {
            if rng.gen_bool(density) {
                edges.push((a.clone(), b.clone()));
            }
        }
    }
    Graph::new(vs, edges).expect("edges use declared vertices")
}

/// Random ordered partition of `elements` into nonempty tiers.
pub fn random_partition<R: Rng>(rng: &mut R, elements: &[ElementId]) -> TierPartition {
    let mut shuffled = elements.to_vec();
    shuffled.shuffle(rng);
    let k = rng.gen_range(1..=shuffled.len().max(1));
    let mut tiers: Vec<BTreeSet<ElementId>> = vec![BTreeSet::new(); k];
    for (i, e) in shuffled.into_iter().enumerate() {
        let slot = if i < k { i } else { rng.gen_range(0..k) };
        tiers[slot].insert(e);
    }
    tiers.retain(|t| !t.is_empty());
    TierPartition::new(tiers).expect("nonempty disjoint tiers")
}

/// B&C architecture that is `tiers`-tier by construction: elements are
/// spread over tiers and every tuple stays within adjacent ones.
pub fn random_tiered<R: Rng>(rng: &mut R, elements: usize, tiers: usize, tuples: usize) -> (Architecture, TierPartition) {
    assert!(tiers >= 1 && elements >= tiers);
    let universe = element_names(elements);
    let mut layer: Vec<usize> = (0..elements).map(|i| if i < tiers { i } else { rng.gen_range(0..tiers) }).collect();
    layer.shuffle(rng);
    let mut set = BTreeSet::new();
    for _ in 0..tuples {
        let a = rng.gen_range(0..elements);
        let near: Vec<usize> = (0..elements).filter(|&b| layer[a].abs_diff(layer[b]) <= 1).collect();
        let b = *near.choose(rng).unwrap();
        set.insert(vec![universe[a].clone(), universe[b].clone()]);
    }
    let mut parts = vec![BTreeSet::new(); tiers];
    for (i, e) in universe.iter().enumerate() {
        parts[layer[i]].insert(e.clone());
    }
    let arch = Architecture::new(universe, vec![Relation::new("r0", 2, set)], vec![]);
    (arch, TierPartition::new(parts).expect("every tier seeded"))
}

/// Tier map of a random tiered architecture followed by two random
/// merge maps `T(n) -> T(m)`, giving three composable homomorphisms.
pub fn random_composable_triple<R: Rng>(rng: &mut R) -> (Homomorphism, Homomorphism, Homomorphism) {
    let n = rng.gen_range(1..=5);
    let elements = rng.gen_range(n..=7);
    let tuples = rng.gen_range(0..=10);
    let (arch, p) = random_tiered(rng, elements, n, tuples);
    let f = tier_homomorphism(&arch, &p).expect("tier partition by construction");
    let g = random_collapse(rng, f.target_arc());
    let h = random_collapse(rng, g.target_arc());
    (f, g, h)
}

/// Homomorphism `T(n) -> T(m)` that sends `i` to a monotone map whose
/// consecutive values differ by at most one.
fn random_collapse<R: Rng>(rng: &mut R, tn: &Arc<Architecture>) -> Homomorphism {
    let n = tn.len();
    let mut value = 1usize;
    let mut elements = BTreeMap::new();
    for i in 1..=n {
        if i > 1 && rng.gen_bool(0.6) {
            value += 1;
        }
        elements.insert(id(i.to_string()), value);
    }
    let m = value;
    let target = Arc::new(crate::tiers::elementary_tier(m));
    let elements = elements.into_iter().map(|(k, v)| (k, id(v.to_string()))).collect();
    Homomorphism::new(tn.clone(), target, elements, vec![0], vec![]).expect("collapse is well formed")
}
