//! Architecture complexes: a universe of elements, a set of finite relations
//! and a set of partial functions with explicit domains.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::report::{Code, ValidationReport, Violation};

/// Opaque element token. Nonempty and free of whitespace.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ElementId(String);

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ElementIdError {
    #[error("element id must not be empty")]
    Empty,
    #[error("element id {0:?} contains whitespace")]
    Whitespace(String),
}

impl ElementId {
    pub fn new(token: impl Into<String>) -> Result<Self, ElementIdError> {
        let token = token.into();
        if token.is_empty() {
            return Err(ElementIdError::Empty);
        }
        if token.chars().any(char::is_whitespace) {
            return Err(ElementIdError::Whitespace(token));
        }
        Ok(ElementId(token))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl FromStr for ElementId {
    type Err = ElementIdError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ElementId::new(s)
    }
}

impl fmt::Display for ElementId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl AsRef<str> for ElementId {
    fn as_ref(&self) -> &str {
        &self.0
    }
}

pub type Tuple = Vec<ElementId>;

pub(crate) fn fmt_tuple(t: &[ElementId]) -> String {
    let parts: Vec<&str> = t.iter().map(ElementId::as_str).collect();
    format!("({})", parts.join(", "))
}

/// A finite `arity`-ary relation. The name is a label only; two relations
/// are the same relation iff arity and tuple set agree.
#[derive(Clone, Debug)]
pub struct Relation {
    pub name: String,
    pub arity: usize,
    pub tuples: BTreeSet<Tuple>,
}

impl Relation {
    pub fn new(name: impl Into<String>, arity: usize, tuples: impl IntoIterator<Item = Tuple>) -> Self {
        Relation {
            name: name.into(),
            arity,
            tuples: tuples.into_iter().collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.tuples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tuples.is_empty()
    }

    pub fn contains(&self, t: &[ElementId]) -> bool {
        self.tuples.contains(t)
    }

    /// Arity and extension, ignoring the name.
    pub fn same_extension(&self, other: &Relation) -> bool {
        self.arity == other.arity && self.tuples == other.tuples
    }
}

/// A finite partial function `A* ⊆ A^arity -> A` with an explicit domain.
#[derive(Clone, Debug)]
pub struct FunctionTable {
    pub name: String,
    pub arity: usize,
    pub domain: BTreeSet<Tuple>,
    pub mapping: BTreeMap<Tuple, ElementId>,
}

impl FunctionTable {
    /// Builds a table whose domain is exactly the set of mapped tuples.
    pub fn new(
        name: impl Into<String>,
        arity: usize,
        entries: impl IntoIterator<Item = (Tuple, ElementId)>,
    ) -> Self {
        let mapping: BTreeMap<Tuple, ElementId> = entries.into_iter().collect();
        FunctionTable {
            name: name.into(),
            arity,
            domain: mapping.keys().cloned().collect(),
            mapping,
        }
    }

    /// Builds a table with a declared domain that may disagree with the
    /// mapping; `validate` reports the mismatch.
    pub fn with_domain(
        name: impl Into<String>,
        arity: usize,
        domain: impl IntoIterator<Item = Tuple>,
        entries: impl IntoIterator<Item = (Tuple, ElementId)>,
    ) -> Self {
        FunctionTable {
            name: name.into(),
            arity,
            domain: domain.into_iter().collect(),
            mapping: entries.into_iter().collect(),
        }
    }

    pub fn apply(&self, args: &[ElementId]) -> Option<&ElementId> {
        if self.domain.contains(args) {
            self.mapping.get(args)
        } else {
            None
        }
    }

    pub fn same_extension(&self, other: &FunctionTable) -> bool {
        self.arity == other.arity && self.domain == other.domain && self.mapping == other.mapping
    }
}

/// The complex `<A, R, F>`.
///
/// The universe is kept as a list so that duplicated declarations survive
/// until `validate` can report them. Equality is extensional: element order,
/// relation order and all names are ignored.
#[derive(Clone, Debug, Default)]
pub struct Architecture {
    pub universe: Vec<ElementId>,
    pub relations: Vec<Relation>,
    pub functions: Vec<FunctionTable>,
}

type RelationKey<'a> = (usize, &'a BTreeSet<Tuple>);
type FunctionKey<'a> = (usize, &'a BTreeSet<Tuple>, &'a BTreeMap<Tuple, ElementId>);

impl Architecture {
    pub fn new(universe: Vec<ElementId>, relations: Vec<Relation>, functions: Vec<FunctionTable>) -> Self {
        Architecture { universe, relations, functions }
    }

    pub fn builder() -> ArchitectureBuilder {
        ArchitectureBuilder::default()
    }

    pub fn universe_set(&self) -> BTreeSet<ElementId> {
        self.universe.iter().cloned().collect()
    }

    pub fn contains_element(&self, e: &ElementId) -> bool {
        self.universe.contains(e)
    }

    pub fn len(&self) -> usize {
        self.universe.len()
    }

    pub fn is_empty(&self) -> bool {
        self.universe.is_empty()
    }

    /// Index of the first relation with the same arity and extension.
    pub fn relation_index_of(&self, r: &Relation) -> Option<usize> {
        self.relations.iter().position(|x| x.same_extension(r))
    }

    pub fn function_index_of(&self, f: &FunctionTable) -> Option<usize> {
        self.functions.iter().position(|x| x.same_extension(f))
    }

    pub fn relation_by_name(&self, name: &str) -> Option<usize> {
        self.relations.iter().position(|r| r.name == name)
    }

    pub fn function_by_name(&self, name: &str) -> Option<usize> {
        self.functions.iter().position(|f| f.name == name)
    }

    fn relation_keys(&self) -> BTreeSet<RelationKey<'_>> {
        self.relations.iter().map(|r| (r.arity, &r.tuples)).collect()
    }

    fn function_keys(&self) -> BTreeSet<FunctionKey<'_>> {
        self.functions.iter().map(|f| (f.arity, &f.domain, &f.mapping)).collect()
    }

    /// Checks every structural invariant of a complex and lists each
    /// violation found.
    pub fn validate(&self) -> ValidationReport {
        let mut report = ValidationReport::new();
        let mut seen = HashSet::new();
        for e in &self.universe {
            if !seen.insert(e) {
                report.push(Violation::new(Code::DuplicateElement, format!("element {e} declared more than once")));
            }
        }

        let mut dangling = BTreeSet::new();
        let mut note_dangling = |e: &ElementId, report: &mut ValidationReport, what: &str| {
            if !seen.contains(e) && dangling.insert(e.clone()) {
                report.push(Violation::new(Code::DanglingElement, format!("{e} used in {what} but not in the universe")));
            }
        };

        for r in &self.relations {
            if r.arity == 0 {
                report.push(Violation::new(Code::ArityMismatch, format!("relation {} has arity 0", r.name)));
            }
            for t in &r.tuples {
                if t.len() != r.arity {
                    report.push(Violation::new(
                        Code::ArityMismatch,
                        format!("tuple {} in relation {}/{}", fmt_tuple(t), r.name, r.arity),
                    ));
                }
                for e in t {
                    note_dangling(e, &mut report, &format!("relation {}", r.name));
                }
            }
        }

        for f in &self.functions {
            if f.arity == 0 {
                report.push(Violation::new(Code::ArityMismatch, format!("function {} has arity 0", f.name)));
            }
            for t in f.domain.iter().chain(f.mapping.keys()) {
                if t.len() != f.arity {
                    report.push(Violation::new(
                        Code::ArityMismatch,
                        format!("argument tuple {} of function {}/{}", fmt_tuple(t), f.name, f.arity),
                    ));
                }
            }
            for t in &f.domain {
                if !f.mapping.contains_key(t) {
                    report.push(Violation::new(
                        Code::PartialMapping,
                        format!("function {} has no value at domain tuple {}", f.name, fmt_tuple(t)),
                    ));
                }
            }
            for t in f.mapping.keys() {
                if !f.domain.contains(t) {
                    report.push(Violation::new(
                        Code::PartialMapping,
                        format!("function {} maps {} outside its declared domain", f.name, fmt_tuple(t)),
                    ));
                }
            }
            for (t, out) in &f.mapping {
                for e in t.iter().chain(std::iter::once(out)) {
                    note_dangling(e, &mut report, &format!("function {}", f.name));
                }
            }
        }

        for (i, r) in self.relations.iter().enumerate() {
            if let Some(j) = self.relations[..i].iter().position(|s| s.same_extension(r)) {
                report.push(Violation::new(
                    Code::DuplicateRelationExtension,
                    format!("relations {} and {} have the same extension", self.relations[j].name, r.name),
                ));
            }
        }
        report
    }

    pub fn is_valid(&self) -> bool {
        self.validate().is_empty()
    }

    /// Makes extensionally equal relations distinct by prepending a fresh
    /// element to every tuple of each repeated relation. The first relation
    /// of every group keeps its shape.
    pub fn disambiguate_relations(&self) -> Architecture {
        let mut out = self.clone();
        let mut taken: HashSet<String> = self.universe.iter().map(|e| e.as_str().to_owned()).collect();
        let mut counter = 0usize;
        let mut fresh = move || loop {
            counter += 1;
            let candidate = format!("·n{counter}");
            if taken.insert(candidate.clone()) {
                return ElementId(candidate);
            }
        };

        for i in 0..out.relations.len() {
            let clashes = out.relations[..i].iter().any(|s| s.same_extension(&out.relations[i]));
            if !clashes {
                continue;
            }
            let marker = fresh();
            out.universe.push(marker.clone());
            // Prepending to an empty relation only bumps the arity, so repeat
            // until the extension is new.
            loop {
                let r = &mut out.relations[i];
                r.arity += 1;
                r.tuples = std::mem::take(&mut r.tuples)
                    .into_iter()
                    .map(|t| std::iter::once(marker.clone()).chain(t).collect())
                    .collect();
                let r = &out.relations[i];
                if !out.relations.iter().enumerate().any(|(j, s)| j != i && s.same_extension(r)) {
                    break;
                }
            }
        }
        out
    }

    /// Renames elements according to `rename`; unmapped elements keep their id.
    pub fn rename_elements(&self, rename: &HashMap<ElementId, ElementId>) -> Architecture {
        let map = |e: &ElementId| rename.get(e).cloned().unwrap_or_else(|| e.clone());
        let map_t = |t: &Tuple| t.iter().map(map).collect::<Tuple>();
        Architecture {
            universe: self.universe.iter().map(map).collect(),
            relations: self
                .relations
                .iter()
                .map(|r| Relation::new(r.name.clone(), r.arity, r.tuples.iter().map(map_t)))
                .collect(),
            functions: self
                .functions
                .iter()
                .map(|f| FunctionTable {
                    name: f.name.clone(),
                    arity: f.arity,
                    domain: f.domain.iter().map(map_t).collect(),
                    mapping: f.mapping.iter().map(|(t, o)| (map_t(t), map(o))).collect(),
                })
                .collect(),
        }
    }

    /// All relations binary and no functions.
    pub fn is_bnc(&self) -> bool {
        self.functions.is_empty() && self.relations.iter().all(|r| r.arity == 2)
    }
}

impl PartialEq for Architecture {
    fn eq(&self, other: &Self) -> bool {
        self.universe_set() == other.universe_set()
            && self.relation_keys() == other.relation_keys()
            && self.function_keys() == other.function_keys()
    }
}

impl Eq for Architecture {}

/// `T0 = <∅, ∅, ∅>`.
pub fn empty_architecture() -> Architecture {
    Architecture::default()
}

/// `T1 = <{a}, {{(a, a)}}, {id}>`.
pub fn trivial_architecture() -> Architecture {
    let a = ElementId("a".into());
    Architecture {
        universe: vec![a.clone()],
        relations: vec![Relation::new("loop", 2, [vec![a.clone(), a.clone()]])],
        functions: vec![FunctionTable::new("id", 1, [(vec![a.clone()], a)])],
    }
}

type FunctionEntry = (Vec<String>, String);

/// Convenience builder taking string tokens.
#[derive(Default, Debug, Clone)]
pub struct ArchitectureBuilder {
    elements: Vec<String>,
    relations: Vec<(String, usize, Vec<Vec<String>>)>,
    functions: Vec<(String, usize, Vec<FunctionEntry>)>,
}

impl ArchitectureBuilder {
    pub fn element(mut self, e: &str) -> Self {
        self.elements.push(e.to_owned());
        self
    }

    pub fn elements<'a>(mut self, es: impl IntoIterator<Item = &'a str>) -> Self {
        self.elements.extend(es.into_iter().map(str::to_owned));
        self
    }

    pub fn relation<'a, T>(mut self, name: &str, arity: usize, tuples: impl IntoIterator<Item = T>) -> Self
    where
        T: AsRef<[&'a str]>,
    {
        let tuples = tuples
            .into_iter()
            .map(|t| t.as_ref().iter().map(|s| (*s).to_owned()).collect())
            .collect();
        self.relations.push((name.to_owned(), arity, tuples));
        self
    }

    pub fn function<'a, T>(mut self, name: &str, arity: usize, entries: impl IntoIterator<Item = (T, &'a str)>) -> Self
    where
        T: AsRef<[&'a str]>,
    {
        let entries = entries
            .into_iter()
            .map(|(t, o)| (t.as_ref().iter().map(|s| (*s).to_owned()).collect(), o.to_owned()))
            .collect();
        self.functions.push((name.to_owned(), arity, entries));
        self
    }

    /// Builds without checking the complex invariants; only element tokens
    /// are checked.
    pub fn build(self) -> Result<Architecture, ElementIdError> {
        let id = |s: &String| ElementId::new(s.clone());
        let tuple = |t: &Vec<String>| t.iter().map(id).collect::<Result<Tuple, _>>();
        let universe = self.elements.iter().map(id).collect::<Result<Vec<_>, _>>()?;
        let mut relations = Vec::new();
        for (name, arity, tuples) in &self.relations {
            let ts = tuples.iter().map(tuple).collect::<Result<Vec<_>, _>>()?;
            relations.push(Relation::new(name.clone(), *arity, ts));
        }
        let mut functions = Vec::new();
        for (name, arity, entries) in &self.functions {
            let mut es = Vec::new();
            for (t, o) in entries {
                es.push((tuple(t)?, id(o)?));
            }
            functions.push(FunctionTable::new(name.clone(), *arity, es));
        }
        Ok(Architecture { universe, relations, functions })
    }
}
