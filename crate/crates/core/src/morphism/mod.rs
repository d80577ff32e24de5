//! Homomorphisms `h = <h0, hR, hF>` between architectures: construction,
//! verification, inversion and search.

mod search;

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::model::{fmt_tuple, Architecture, ElementId, Tuple};
use crate::report::{Code, ValidationReport, Violation};

pub use search::{find_homomorphism, find_isomorphism, HomFlags, SearchConfig};
pub(crate) use search::find_element_surjective;

/// Default node budget for every search.
pub const DEFAULT_NODE_BUDGET: u64 = 10_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MorphismError {
    #[error("malformed homomorphism: {0}")]
    Malformed(String),
    #[error("NOT_COMPOSABLE: target of the first map differs from the source of the second")]
    NotComposable,
    #[error("SEARCH_BUDGET_EXCEEDED: gave up after {nodes} nodes")]
    BudgetExceeded { nodes: u64 },
    #[error("{side} architecture is invalid:\n{report}")]
    InvalidArchitecture { side: &'static str, report: ValidationReport },
}

/// A triple of maps on elements, relations and functions. Relations and
/// functions are addressed by their position in the source and target
/// architectures.
#[derive(Clone, Debug)]
pub struct Homomorphism {
    source: Arc<Architecture>,
    target: Arc<Architecture>,
    elements: BTreeMap<ElementId, ElementId>,
    relations: Vec<usize>,
    functions: Vec<usize>,
}

impl Homomorphism {
    /// Checks totality and arity preservation. The structure-preservation
    /// conditions are left to [`Homomorphism::check`].
    pub fn new(
        source: Arc<Architecture>,
        target: Arc<Architecture>,
        elements: BTreeMap<ElementId, ElementId>,
        relations: Vec<usize>,
        functions: Vec<usize>,
    ) -> Result<Self, MorphismError> {
        let src = source.universe_set();
        let tgt = target.universe_set();
        if let Some(e) = src.iter().find(|e| !elements.contains_key(*e)) {
            return Err(MorphismError::Malformed(format!("element map undefined at {e}")));
        }
        if let Some(e) = elements.keys().find(|e| !src.contains(*e)) {
            return Err(MorphismError::Malformed(format!("element map defined outside the source at {e}")));
        }
        if let Some((e, v)) = elements.iter().find(|(_, v)| !tgt.contains(*v)) {
            return Err(MorphismError::Malformed(format!("{e} maps to {v}, which is not a target element")));
        }
        if relations.len() != source.relations.len() {
            return Err(MorphismError::Malformed(format!(
                "relation map covers {} of {} relations",
                relations.len(),
                source.relations.len()
            )));
        }
        for (i, &j) in relations.iter().enumerate() {
            let r = &source.relations[i];
            let Some(s) = target.relations.get(j) else {
                return Err(MorphismError::Malformed(format!("relation {} maps to missing index {j}", r.name)));
            };
            if r.arity != s.arity {
                return Err(MorphismError::Malformed(format!(
                    "relation {}/{} maps to {}/{}",
                    r.name, r.arity, s.name, s.arity
                )));
            }
        }
        if functions.len() != source.functions.len() {
            return Err(MorphismError::Malformed(format!(
                "function map covers {} of {} functions",
                functions.len(),
                source.functions.len()
            )));
        }
        for (i, &j) in functions.iter().enumerate() {
            let f = &source.functions[i];
            let Some(g) = target.functions.get(j) else {
                return Err(MorphismError::Malformed(format!("function {} maps to missing index {j}", f.name)));
            };
            if f.arity != g.arity {
                return Err(MorphismError::Malformed(format!(
                    "function {}/{} maps to {}/{}",
                    f.name, f.arity, g.name, g.arity
                )));
            }
        }
        Ok(Homomorphism { source, target, elements, relations, functions })
    }

    pub fn source(&self) -> &Architecture {
        &self.source
    }

    pub fn target(&self) -> &Architecture {
        &self.target
    }

    pub fn source_arc(&self) -> &Arc<Architecture> {
        &self.source
    }

    pub fn target_arc(&self) -> &Arc<Architecture> {
        &self.target
    }

    pub fn element_map(&self) -> &BTreeMap<ElementId, ElementId> {
        &self.elements
    }

    pub fn relation_map(&self) -> &[usize] {
        &self.relations
    }

    pub fn function_map(&self) -> &[usize] {
        &self.functions
    }

    pub fn apply(&self, e: &ElementId) -> Option<&ElementId> {
        self.elements.get(e)
    }

    fn image(&self, t: &[ElementId]) -> Tuple {
        t.iter().map(|e| self.elements[e].clone()).collect()
    }

    /// Verifies relation preservation and commutation with functions.
    pub fn check(&self) -> ValidationReport {
        let mut report = ValidationReport::new();
        for (i, r) in self.source.relations.iter().enumerate() {
            let s = &self.target.relations[self.relations[i]];
            for t in &r.tuples {
                let img = self.image(t);
                if !s.contains(&img) {
                    report.push(Violation::new(
                        Code::RelationNotPreserved,
                        format!("{}{} maps to {}{}, not a tuple", r.name, fmt_tuple(t), s.name, fmt_tuple(&img)),
                    ));
                }
            }
        }
        for (i, f) in self.source.functions.iter().enumerate() {
            let g = &self.target.functions[self.functions[i]];
            for t in &f.domain {
                let Some(out) = f.mapping.get(t) else { continue };
                let img = self.image(t);
                match g.apply(&img) {
                    None => report.push(Violation::new(
                        Code::FunctionDomainEscape,
                        format!("{}{} maps to {}{}, outside its domain", f.name, fmt_tuple(t), g.name, fmt_tuple(&img)),
                    )),
                    Some(v) if *v != self.elements[out] => report.push(Violation::new(
                        Code::FunctionNotCommuting,
                        format!(
                            "h0({}{}) = {} but {}{} = {}",
                            f.name,
                            fmt_tuple(t),
                            self.elements[out],
                            g.name,
                            fmt_tuple(&img),
                            v
                        ),
                    )),
                    Some(_) => {}
                }
            }
        }
        report
    }

    pub fn is_homomorphism(&self) -> bool {
        self.check().is_empty()
    }

    pub fn is_element_injective(&self) -> bool {
        let image: HashSet<&ElementId> = self.elements.values().collect();
        image.len() == self.elements.len()
    }

    pub fn is_element_surjective(&self) -> bool {
        let image: HashSet<&ElementId> = self.elements.values().collect();
        self.target.universe_set().iter().all(|e| image.contains(e))
    }

    /// All three maps injective.
    pub fn is_injective(&self) -> bool {
        self.is_element_injective() && injective(&self.relations) && injective(&self.functions)
    }

    /// All three maps surjective.
    pub fn is_surjective(&self) -> bool {
        self.is_element_surjective()
            && surjective(&self.relations, self.target.relations.len())
            && surjective(&self.functions, self.target.functions.len())
    }

    pub fn is_bijective(&self) -> bool {
        self.is_injective() && self.is_surjective()
    }

    /// The inverse triple of a bijective map, without checking that it is a
    /// homomorphism.
    pub fn inverse(&self) -> Option<Homomorphism> {
        if !self.is_bijective() {
            return None;
        }
        let elements = self.elements.iter().map(|(k, v)| (v.clone(), k.clone())).collect();
        let mut relations = vec![0; self.relations.len()];
        for (i, &j) in self.relations.iter().enumerate() {
            relations[j] = i;
        }
        let mut functions = vec![0; self.functions.len()];
        for (i, &j) in self.functions.iter().enumerate() {
            functions[j] = i;
        }
        Homomorphism::new(self.target.clone(), self.source.clone(), elements, relations, functions).ok()
    }

    /// Bijective, and the inverse triple is again a homomorphism.
    pub fn is_isomorphism(&self) -> bool {
        self.is_homomorphism() && self.inverse().is_some_and(|inv| inv.is_homomorphism())
    }
}

fn injective(map: &[usize]) -> bool {
    let set: HashSet<usize> = map.iter().copied().collect();
    set.len() == map.len()
}

fn surjective(map: &[usize], codomain: usize) -> bool {
    let set: HashSet<usize> = map.iter().copied().collect();
    set.len() == codomain
}

type ExtensionalMap = BTreeSet<((usize, Vec<Tuple>), (usize, Vec<Tuple>))>;

impl Homomorphism {
    fn extensional_relation_map(&self) -> ExtensionalMap {
        self.relations
            .iter()
            .enumerate()
            .map(|(i, &j)| {
                let r = &self.source.relations[i];
                let s = &self.target.relations[j];
                (
                    (r.arity, r.tuples.iter().cloned().collect()),
                    (s.arity, s.tuples.iter().cloned().collect()),
                )
            })
            .collect()
    }

    fn extensional_function_map(&self) -> ExtensionalMap {
        let graph = |f: &crate::model::FunctionTable| {
            f.mapping
                .iter()
                .map(|(t, o)| t.iter().cloned().chain(std::iter::once(o.clone())).collect())
                .collect::<Vec<Tuple>>()
        };
        self.functions
            .iter()
            .enumerate()
            .map(|(i, &j)| {
                let f = &self.source.functions[i];
                let g = &self.target.functions[j];
                ((f.arity, graph(f)), (g.arity, graph(g)))
            })
            .collect()
    }
}

/// Componentwise extensional equality: same source and target complexes,
/// same element map, and each relation (function) sent to the same image.
impl PartialEq for Homomorphism {
    fn eq(&self, other: &Self) -> bool {
        self.source == other.source
            && self.target == other.target
            && self.elements == other.elements
            && self.extensional_relation_map() == other.extensional_relation_map()
            && self.extensional_function_map() == other.extensional_function_map()
    }
}

impl Eq for Homomorphism {}

impl fmt::Display for Homomorphism {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "h0:")?;
        for (k, v) in &self.elements {
            writeln!(f, "  {k} -> {v}")?;
        }
        writeln!(f, "hR:")?;
        for (i, &j) in self.relations.iter().enumerate() {
            writeln!(f, "  {} -> {}", self.source.relations[i].name, self.target.relations[j].name)?;
        }
        writeln!(f, "hF:")?;
        for (i, &j) in self.functions.iter().enumerate() {
            writeln!(f, "  {} -> {}", self.source.functions[i].name, self.target.functions[j].name)?;
        }
        Ok(())
    }
}

pub fn check_homomorphism(h: &Homomorphism) -> ValidationReport {
    h.check()
}

pub fn is_isomorphism(h: &Homomorphism) -> bool {
    h.is_isomorphism()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::trivial_architecture;
    use crate::tiers::elementary_tier;

    fn el(s: &str) -> ElementId {
        ElementId::new(s).unwrap()
    }

    fn map(pairs: &[(&str, &str)]) -> BTreeMap<ElementId, ElementId> {
        pairs.iter().map(|(a, b)| (el(a), el(b))).collect()
    }

    fn triangle() -> Architecture {
        Architecture::builder()
            .elements(["a", "b", "c"])
            .relation("r", 2, [["a", "b"], ["b", "c"], ["a", "c"]])
            .build()
            .unwrap()
    }

    #[test]
    fn triangle_onto_t3_breaks_at_a_c() {
        let h = Homomorphism::new(
            Arc::new(triangle()),
            Arc::new(elementary_tier(3)),
            map(&[("a", "1"), ("b", "2"), ("c", "3")]),
            vec![0],
            vec![],
        )
        .unwrap();
        let report = h.check();
        assert_eq!(report.codes(), vec![Code::RelationNotPreserved]);
        assert!(report.violations()[0].detail.contains("(a, c)"));
    }

    #[test]
    fn path_onto_t3_is_not_an_isomorphism() {
        let path = Architecture::builder()
            .elements(["a", "b", "c"])
            .relation("p", 2, [["a", "b"], ["b", "a"], ["b", "c"], ["c", "b"]])
            .build()
            .unwrap();
        let h = Homomorphism::new(
            Arc::new(path),
            Arc::new(elementary_tier(3)),
            map(&[("a", "1"), ("b", "2"), ("c", "3")]),
            vec![0],
            vec![],
        )
        .unwrap();
        assert!(h.is_homomorphism());
        assert!(h.is_bijective());
        let inv = h.inverse().unwrap();
        assert!(inv.check().violations().iter().any(|v| v.detail.contains("(1, 1)")));
        assert!(!h.is_isomorphism());
    }

    #[test]
    fn function_conditions() {
        let src = Architecture::builder()
            .elements(["x", "y"])
            .function("f", 1, [(["x"], "y")])
            .build()
            .unwrap();
        let tgt = Architecture::builder()
            .elements(["p", "q"])
            .function("g", 1, [(["p"], "p")])
            .build()
            .unwrap();
        let (src, tgt) = (Arc::new(src), Arc::new(tgt));
        let h = Homomorphism::new(src.clone(), tgt.clone(), map(&[("x", "q"), ("y", "p")]), vec![], vec![0]).unwrap();
        assert_eq!(h.check().codes(), vec![Code::FunctionDomainEscape]);
        let h = Homomorphism::new(src.clone(), tgt.clone(), map(&[("x", "p"), ("y", "q")]), vec![], vec![0]).unwrap();
        assert_eq!(h.check().codes(), vec![Code::FunctionNotCommuting]);
        let h = Homomorphism::new(src, tgt, map(&[("x", "p"), ("y", "p")]), vec![], vec![0]).unwrap();
        assert!(h.is_homomorphism());
    }

    #[test]
    fn malformed_maps_rejected() {
        let t1 = Arc::new(trivial_architecture());
        let t2 = Arc::new(elementary_tier(2));
        assert!(matches!(
            Homomorphism::new(t2.clone(), t1.clone(), map(&[("1", "a")]), vec![0], vec![]),
            Err(MorphismError::Malformed(_))
        ));
        assert!(matches!(
            Homomorphism::new(t1.clone(), t2.clone(), map(&[("a", "1")]), vec![0], vec![]),
            Err(MorphismError::Malformed(_))
        ));
        assert!(matches!(
            Homomorphism::new(t2, t1, map(&[("1", "a"), ("2", "zz")]), vec![0], vec![]),
            Err(MorphismError::Malformed(_))
        ));
    }

    #[test]
    fn renaming_is_an_isomorphism() {
        let a = triangle();
        let rename = [("a", "u"), ("b", "v"), ("c", "w")];
        let b = a.rename_elements(&rename.iter().map(|(x, y)| (el(x), el(y))).collect());
        let h = Homomorphism::new(Arc::new(a), Arc::new(b), map(&rename), vec![0], vec![]).unwrap();
        assert!(h.is_isomorphism());
    }
}
