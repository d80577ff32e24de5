//! Exact backtracking search for homomorphisms.
//!
//! The relation and function maps are enumerated first (they are small);
//! for each choice the element map is solved as a constraint problem whose
//! constraints are the source tuples and whose allowed values are the image
//! relation's tuples. Function graphs are handled as relations of arity
//! `m + 1`, which encodes both domain membership and commutation.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::sync::Arc;

use super::{Homomorphism, MorphismError, DEFAULT_NODE_BUDGET};
use crate::bitset::BitSet;
use crate::model::{Architecture, ElementId};

/// Extra requirements on a homomorphism. Following the usual convention a
/// map is injective (surjective) when all three component maps are.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct HomFlags {
    pub surjective: bool,
    pub injective: bool,
}

impl HomFlags {
    pub const ANY: HomFlags = HomFlags { surjective: false, injective: false };
    pub const SURJECTIVE: HomFlags = HomFlags { surjective: true, injective: false };
    pub const INJECTIVE: HomFlags = HomFlags { surjective: false, injective: true };
    pub const BIJECTIVE: HomFlags = HomFlags { surjective: true, injective: true };
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SearchConfig {
    /// Maximum number of search nodes (tentative assignments) per call.
    pub node_budget: u64,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig { node_budget: DEFAULT_NODE_BUDGET }
    }
}

impl SearchConfig {
    pub fn with_budget(node_budget: u64) -> Self {
        SearchConfig { node_budget }
    }
}

#[derive(Clone, Copy, Debug, Default)]
struct Options {
    element_surjective: bool,
    element_injective: bool,
    maps_surjective: bool,
    maps_injective: bool,
    /// Prune with occurrence signatures; only sound for bijective maps whose
    /// inverse must preserve relations as well.
    signatures: bool,
}

#[derive(Debug)]
struct Exceeded(u64);

struct Budget {
    used: u64,
    limit: u64,
}

impl Budget {
    fn tick(&mut self) -> Result<(), Exceeded> {
        self.used += 1;
        if self.used > self.limit {
            Err(Exceeded(self.used))
        } else {
            Ok(())
        }
    }
}

struct Table {
    tuples: Vec<Vec<usize>>,
    set: HashSet<Vec<usize>>,
}

impl Table {
    fn new(tuples: Vec<Vec<usize>>) -> Self {
        let set = tuples.iter().cloned().collect();
        Table { tuples, set }
    }
}

fn index_of(arch: &Architecture) -> HashMap<&ElementId, usize> {
    arch.universe.iter().enumerate().map(|(i, e)| (e, i)).collect()
}

/// Relation tuples and function graphs of one architecture, as indices.
struct Indexed {
    relations: Vec<Vec<Vec<usize>>>,
    functions: Vec<Vec<Vec<usize>>>,
}

impl Indexed {
    fn new(arch: &Architecture) -> Self {
        let idx = index_of(arch);
        let conv = |t: &[ElementId]| t.iter().map(|e| idx[e]).collect::<Vec<usize>>();
        Indexed {
            relations: arch.relations.iter().map(|r| r.tuples.iter().map(|t| conv(t)).collect()).collect(),
            functions: arch
                .functions
                .iter()
                .map(|f| {
                    f.mapping
                        .iter()
                        .filter(|(t, _)| f.domain.contains(*t))
                        .map(|(t, o)| {
                            let mut g = conv(t);
                            g.push(idx[o]);
                            g
                        })
                        .collect()
                })
                .collect(),
        }
    }
}

type MapVisitor<'a> = dyn FnMut(&[usize], &mut Budget) -> Result<bool, Exceeded> + 'a;

/// Calls `visit` with every map `slots -> codomain` drawn from `candidates`
/// in lexicographic order, honouring injectivity/surjectivity. Stops when
/// `visit` returns `Ok(true)`.
fn for_each_map(
    candidates: &[Vec<usize>],
    codomain: usize,
    injective: bool,
    surjective: bool,
    budget: &mut Budget,
    visit: &mut MapVisitor<'_>,
) -> Result<bool, Exceeded> {
    #[allow(clippy::too_many_arguments)]
    fn go(
        i: usize,
        chosen: &mut Vec<usize>,
        used: &mut [u32],
        candidates: &[Vec<usize>],
        injective: bool,
        surjective: bool,
        budget: &mut Budget,
        visit: &mut MapVisitor<'_>,
    ) -> Result<bool, Exceeded> {
        if surjective {
            let uncovered = used.iter().filter(|&&u| u == 0).count();
            if candidates.len() - i < uncovered {
                return Ok(false);
            }
        }
        if i == candidates.len() {
            return visit(chosen, budget);
        }
        for &j in &candidates[i] {
            if injective && used[j] > 0 {
                continue;
            }
            budget.tick()?;
            chosen.push(j);
            used[j] += 1;
            let done = go(i + 1, chosen, used, candidates, injective, surjective, budget, visit)?;
            used[j] -= 1;
            chosen.pop();
            if done {
                return Ok(true);
            }
        }
        Ok(false)
    }
    let mut used = vec![0u32; codomain];
    go(0, &mut Vec::new(), &mut used, candidates, injective, surjective, budget, visit)
}

const UNSET: usize = usize::MAX;

/// Constraint problem for the element map under fixed relation/function maps.
struct Csp<'t> {
    vars: usize,
    values: usize,
    constraints: Vec<(&'t [usize], &'t Table)>,
    by_var: Vec<Vec<usize>>,
    degree: Vec<usize>,
    injective: bool,
    surjective: bool,
}

impl<'t> Csp<'t> {
    fn new(vars: usize, values: usize, constraints: Vec<(&'t [usize], &'t Table)>, injective: bool, surjective: bool) -> Self {
        let mut by_var = vec![Vec::new(); vars];
        let mut degree = vec![0; vars];
        for (ci, (scope, _)) in constraints.iter().enumerate() {
            for &x in scope.iter() {
                degree[x] += 1;
                if by_var[x].last() != Some(&ci) {
                    by_var[x].push(ci);
                }
            }
        }
        Csp { vars, values, constraints, by_var, degree, injective, surjective }
    }

    fn solve(
        &self,
        mut domains: Vec<BitSet>,
        budget: &mut Budget,
        accept: &mut dyn FnMut(&[usize]) -> bool,
    ) -> Result<bool, Exceeded> {
        if self.injective && self.vars > self.values {
            return Ok(false);
        }
        if self.surjective && self.vars < self.values {
            return Ok(false);
        }
        let assign = vec![UNSET; self.vars];
        for (scope, table) in &self.constraints {
            let first = scope[0];
            if scope.iter().all(|&x| x == first) && !self.narrow(first, scope, table, &assign, &mut domains) {
                return Ok(false);
            }
        }
        if domains.iter().any(BitSet::is_empty) {
            return Ok(false);
        }
        let mut assign = assign;
        let mut cover = vec![0u32; self.values];
        if self.surjective && !self.coverable(&assign, &domains, &cover) {
            return Ok(false);
        }
        self.descend(&mut assign, &domains, &mut cover, self.vars, budget, accept)
    }

    fn pick(&self, assign: &[usize], domains: &[BitSet]) -> usize {
        let mut best = UNSET;
        let mut best_key = (usize::MAX, 0usize);
        for v in 0..self.vars {
            if assign[v] != UNSET {
                continue;
            }
            let size = domains[v].count();
            if size < best_key.0 || (size == best_key.0 && self.degree[v] > best_key.1) {
                best = v;
                best_key = (size, self.degree[v]);
            }
        }
        best
    }

    fn descend(
        &self,
        assign: &mut Vec<usize>,
        domains: &[BitSet],
        cover: &mut Vec<u32>,
        unassigned: usize,
        budget: &mut Budget,
        accept: &mut dyn FnMut(&[usize]) -> bool,
    ) -> Result<bool, Exceeded> {
        if unassigned == 0 {
            return Ok(accept(assign));
        }
        let v = self.pick(assign, domains);
        let candidates: Vec<usize> = domains[v].iter().collect();
        for val in candidates {
            budget.tick()?;
            assign[v] = val;
            cover[val] += 1;
            let mut next = domains.to_vec();
            next[v] = BitSet::empty(self.values);
            next[v].insert(val);
            if self.propagate(v, val, assign, &mut next, cover)
                && self.descend(assign, &next, cover, unassigned - 1, budget, accept)?
            {
                return Ok(true);
            }
            cover[val] -= 1;
            assign[v] = UNSET;
        }
        Ok(false)
    }

    /// Restricts the domain of `free` to values completing some allowed tuple.
    fn narrow(&self, free: usize, scope: &[usize], table: &Table, assign: &[usize], domains: &mut [BitSet]) -> bool {
        let mut allowed = BitSet::empty(self.values);
        'tuples: for t in &table.tuples {
            let mut value = UNSET;
            for (q, &x) in scope.iter().enumerate() {
                if x == free {
                    if value == UNSET {
                        value = t[q];
                    } else if value != t[q] {
                        continue 'tuples;
                    }
                } else if assign[x] != t[q] {
                    continue 'tuples;
                }
            }
            allowed.insert(value);
        }
        domains[free].intersect_with(&allowed);
        !domains[free].is_empty()
    }

    fn propagate(&self, v: usize, val: usize, assign: &[usize], domains: &mut [BitSet], cover: &[u32]) -> bool {
        for &ci in &self.by_var[v] {
            let (scope, table) = self.constraints[ci];
            let mut free = UNSET;
            let mut several = false;
            for &x in scope {
                if assign[x] == UNSET {
                    if free == UNSET {
                        free = x;
                    } else if free != x {
                        several = true;
                        break;
                    }
                }
            }
            if several {
                continue;
            }
            if free == UNSET {
                let image: Vec<usize> = scope.iter().map(|&x| assign[x]).collect();
                if !table.set.contains(&image) {
                    return false;
                }
            } else if !self.narrow(free, scope, table, assign, domains) {
                return false;
            }
        }
        if self.injective {
            for u in 0..self.vars {
                if assign[u] == UNSET {
                    domains[u].remove(val);
                    if domains[u].is_empty() {
                        return false;
                    }
                }
            }
        }
        !self.surjective || self.coverable(assign, domains, cover)
    }

    /// Every target value not yet hit must still be reachable.
    fn coverable(&self, assign: &[usize], domains: &[BitSet], cover: &[u32]) -> bool {
        let free = assign.iter().filter(|&&a| a == UNSET).count();
        let uncovered: Vec<usize> = (0..self.values).filter(|&d| cover[d] == 0).collect();
        if free < uncovered.len() {
            return false;
        }
        let mut reach = BitSet::empty(self.values);
        for u in 0..self.vars {
            if assign[u] == UNSET {
                reach.union_with(&domains[u]);
            }
        }
        uncovered.iter().all(|&d| reach.contains(d))
    }
}

/// Per-element occurrence counts at each (relation, position) slot.
fn signatures(vars: usize, slots: &[&Vec<Vec<usize>>], width: &[usize]) -> Vec<Vec<u32>> {
    let total: usize = width.iter().sum();
    let mut sig = vec![vec![0u32; total]; vars];
    let mut offset = 0;
    for (k, tuples) in slots.iter().enumerate() {
        for t in tuples.iter() {
            for (p, &e) in t.iter().enumerate() {
                sig[e][offset + p] += 1;
            }
        }
        offset += width[k];
    }
    sig
}

/// A found assignment: element map, relation map, function map (by index).
struct Found<'a> {
    elements: &'a [usize],
    relations: &'a [usize],
    functions: &'a [usize],
}

fn run(
    source: &Architecture,
    target: &Architecture,
    opts: Options,
    config: &SearchConfig,
    accept: &mut dyn FnMut(Found<'_>) -> bool,
) -> Result<bool, MorphismError> {
    let src = Indexed::new(source);
    let tgt = Indexed::new(target);
    let rel_tables: Vec<Table> = tgt.relations.iter().cloned().map(Table::new).collect();
    let fun_tables: Vec<Table> = tgt.functions.iter().cloned().map(Table::new).collect();
    let n = source.universe.len();
    let m = target.universe.len();

    let rel_candidates: Vec<Vec<usize>> = source
        .relations
        .iter()
        .map(|r| {
            (0..target.relations.len())
                .filter(|&j| {
                    let s = &target.relations[j];
                    s.arity == r.arity
                        && (r.is_empty() || !s.is_empty())
                        && (!opts.signatures || s.len() == r.len())
                })
                .collect()
        })
        .collect();
    let fun_candidates: Vec<Vec<usize>> = source
        .functions
        .iter()
        .enumerate()
        .map(|(i, f)| {
            (0..target.functions.len())
                .filter(|&j| {
                    let g = &target.functions[j];
                    let (a, b) = (src.functions[i].len(), tgt.functions[j].len());
                    g.arity == f.arity && (a == 0 || b > 0) && (!opts.signatures || a == b)
                })
                .collect()
        })
        .collect();

    let mut budget = Budget { used: 0, limit: config.node_budget };
    let result = for_each_map(
        &rel_candidates,
        target.relations.len(),
        opts.maps_injective,
        opts.maps_surjective,
        &mut budget,
        &mut |hr, budget| {
            for_each_map(
                &fun_candidates,
                target.functions.len(),
                opts.maps_injective,
                opts.maps_surjective,
                budget,
                &mut |hf, budget| {
                    let mut constraints: Vec<(&[usize], &Table)> = Vec::new();
                    for (i, &j) in hr.iter().enumerate() {
                        for t in &src.relations[i] {
                            constraints.push((t, &rel_tables[j]));
                        }
                    }
                    for (i, &j) in hf.iter().enumerate() {
                        for t in &src.functions[i] {
                            constraints.push((t, &fun_tables[j]));
                        }
                    }
                    let mut domains = vec![BitSet::full(m); n];
                    if opts.signatures {
                        let src_slots: Vec<&Vec<Vec<usize>>> =
                            src.relations.iter().chain(src.functions.iter()).collect();
                        let tgt_slots: Vec<&Vec<Vec<usize>>> = hr
                            .iter()
                            .map(|&j| &tgt.relations[j])
                            .chain(hf.iter().map(|&j| &tgt.functions[j]))
                            .collect();
                        let width: Vec<usize> = source
                            .relations
                            .iter()
                            .map(|r| r.arity)
                            .chain(source.functions.iter().map(|f| f.arity + 1))
                            .collect();
                        let s_sig = signatures(n, &src_slots, &width);
                        let t_sig = signatures(m, &tgt_slots, &width);
                        for (v, dom) in domains.iter_mut().enumerate() {
                            for (d, sig) in t_sig.iter().enumerate() {
                                if s_sig[v] != *sig {
                                    dom.remove(d);
                                }
                            }
                        }
                    }
                    let csp = Csp::new(n, m, constraints, opts.element_injective, opts.element_surjective);
                    csp.solve(domains, budget, &mut |elements| {
                        accept(Found { elements, relations: hr, functions: hf })
                    })
                },
            )
        },
    );
    result.map_err(|Exceeded(nodes)| MorphismError::BudgetExceeded { nodes })
}

fn validated(source: &Architecture, target: &Architecture) -> Result<(), MorphismError> {
    let report = source.validate();
    if !report.is_empty() {
        return Err(MorphismError::InvalidArchitecture { side: "source", report });
    }
    let report = target.validate();
    if !report.is_empty() {
        return Err(MorphismError::InvalidArchitecture { side: "target", report });
    }
    Ok(())
}

fn witness(source: &Arc<Architecture>, target: &Arc<Architecture>, found: &Found<'_>) -> Homomorphism {
    let elements: BTreeMap<ElementId, ElementId> = found
        .elements
        .iter()
        .enumerate()
        .map(|(i, &j)| (source.universe[i].clone(), target.universe[j].clone()))
        .collect();
    Homomorphism::new(
        source.clone(),
        target.clone(),
        elements,
        found.relations.to_vec(),
        found.functions.to_vec(),
    )
    .expect("search produces total, arity-preserving maps")
}

/// Searches for a homomorphism `source -> target` with the requested flags.
///
/// `Ok(None)` means the search space was exhausted without a witness;
/// running out of budget is reported as [`MorphismError::BudgetExceeded`].
pub fn find_homomorphism(
    source: &Architecture,
    target: &Architecture,
    flags: HomFlags,
    config: &SearchConfig,
) -> Result<Option<Homomorphism>, MorphismError> {
    validated(source, target)?;
    let opts = Options {
        element_surjective: flags.surjective,
        element_injective: flags.injective,
        maps_surjective: flags.surjective,
        maps_injective: flags.injective,
        signatures: false,
    };
    let (s, t) = (Arc::new(source.clone()), Arc::new(target.clone()));
    let mut found = None;
    run(source, target, opts, config, &mut |f| {
        found = Some(witness(&s, &t, &f));
        true
    })?;
    Ok(found)
}

/// Searches for a bijective homomorphism whose inverse is a homomorphism.
pub fn find_isomorphism(
    a: &Architecture,
    b: &Architecture,
    config: &SearchConfig,
) -> Result<Option<Homomorphism>, MorphismError> {
    validated(a, b)?;
    if a.universe.len() != b.universe.len()
        || a.relations.len() != b.relations.len()
        || a.functions.len() != b.functions.len()
    {
        return Ok(None);
    }
    let opts = Options {
        element_surjective: true,
        element_injective: true,
        maps_surjective: true,
        maps_injective: true,
        signatures: true,
    };
    let (s, t) = (Arc::new(a.clone()), Arc::new(b.clone()));
    let mut found = None;
    run(a, b, opts, config, &mut |f| {
        let h = witness(&s, &t, &f);
        if h.is_isomorphism() {
            found = Some(h);
            true
        } else {
            false
        }
    })?;
    Ok(found)
}

/// A homomorphism whose element map alone is required to be onto. Used for
/// tier search, where relation and function maps are forced.
pub(crate) fn find_element_surjective(
    source: &Architecture,
    target: &Architecture,
    config: &SearchConfig,
) -> Result<Option<Homomorphism>, MorphismError> {
    validated(source, target)?;
    let opts = Options { element_surjective: true, ..Options::default() };
    let (s, t) = (Arc::new(source.clone()), Arc::new(target.clone()));
    let mut found = None;
    run(source, target, opts, config, &mut |f| {
        found = Some(witness(&s, &t, &f));
        true
    })?;
    Ok(found)
}
