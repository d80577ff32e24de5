//! Structured views (sub-architectures), unstructured views and viewpoints.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

use crate::model::{Architecture, ElementId, FunctionTable, Relation, Tuple};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ViewError {
    #[error("SUBSET_NOT_IN_UNIVERSE: {}", list(.0))]
    SubsetNotInUniverse(Vec<ElementId>),
    #[error("NOT_A_SUBSET: {component} {}", .items.join(", "))]
    NotASubset { component: Component, items: Vec<String> },
    #[error("DUPLICATE_VIEW: labels {first:?} and {second:?} name the same view")]
    DuplicateView { first: String, second: String },
    #[error("duplicate viewpoint label {0:?}")]
    DuplicateLabel(String),
    #[error("view {0:?} is not a view of the viewpoint's architecture")]
    ForeignView(String),
}

fn list(es: &[ElementId]) -> String {
    es.iter().map(ElementId::as_str).collect::<Vec<_>>().join(", ")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Component {
    Elements,
    Relations,
    Functions,
}

impl fmt::Display for Component {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Component::Elements => "elements",
            Component::Relations => "relations",
            Component::Functions => "functions",
        })
    }
}

/// Something `restrict` merged or dropped while building a view.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RestrictionNote {
    MergedRelation { kept: String, merged: String },
    MergedFunction { kept: String, merged: String },
    DroppedFunction(String),
}

impl fmt::Display for RestrictionNote {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RestrictionNote::MergedRelation { kept, merged } => {
                write!(f, "relation {merged} merged into {kept}: equal after restriction")
            }
            RestrictionNote::MergedFunction { kept, merged } => {
                write!(f, "function {merged} merged into {kept}: equal after restriction")
            }
            RestrictionNote::DroppedFunction(name) => write!(f, "function {name} dropped: no entries left"),
        }
    }
}

fn inside(t: &[ElementId], subset: &BTreeSet<ElementId>) -> bool {
    t.iter().all(|e| subset.contains(e))
}

fn restrict_relation(r: &Relation, subset: &BTreeSet<ElementId>) -> Relation {
    Relation::new(
        r.name.clone(),
        r.arity,
        r.tuples.iter().filter(|t| inside(t, subset)).cloned(),
    )
}

/// `f|A`: a domain tuple survives when its arguments and its value lie in `A`.
fn restrict_function(f: &FunctionTable, subset: &BTreeSet<ElementId>) -> FunctionTable {
    let mapping: BTreeMap<Tuple, ElementId> = f
        .mapping
        .iter()
        .filter(|(t, o)| f.domain.contains(*t) && inside(t, subset) && subset.contains(*o))
        .map(|(t, o)| (t.clone(), o.clone()))
        .collect();
    FunctionTable {
        name: f.name.clone(),
        arity: f.arity,
        domain: mapping.keys().cloned().collect(),
        mapping,
    }
}

/// The maximal structured view of `parent` on `subset`.
pub fn restrict(parent: &Architecture, subset: &BTreeSet<ElementId>) -> Result<Architecture, ViewError> {
    restrict_with_notes(parent, subset).map(|(a, _)| a)
}

/// Like [`restrict`], also reporting merged duplicates and functions whose
/// domain vanished.
pub fn restrict_with_notes(
    parent: &Architecture,
    subset: &BTreeSet<ElementId>,
) -> Result<(Architecture, Vec<RestrictionNote>), ViewError> {
    let universe = parent.universe_set();
    let missing: Vec<ElementId> = subset.difference(&universe).cloned().collect();
    if !missing.is_empty() {
        return Err(ViewError::SubsetNotInUniverse(missing));
    }

    let mut notes = Vec::new();
    let mut relations: Vec<Relation> = Vec::new();
    for r in &parent.relations {
        let restricted = restrict_relation(r, subset);
        match relations.iter().find(|s| s.same_extension(&restricted)) {
            Some(kept) => notes.push(RestrictionNote::MergedRelation {
                kept: kept.name.clone(),
                merged: r.name.clone(),
            }),
            None => relations.push(restricted),
        }
    }

    let mut functions: Vec<FunctionTable> = Vec::new();
    for f in &parent.functions {
        let restricted = restrict_function(f, subset);
        // A function that only loses its domain through restriction is no
        // longer part of the view; originally empty functions stay.
        if restricted.domain.is_empty() && !f.domain.is_empty() {
            notes.push(RestrictionNote::DroppedFunction(f.name.clone()));
            continue;
        }
        match functions.iter().find(|g| g.same_extension(&restricted)) {
            Some(kept) => notes.push(RestrictionNote::MergedFunction {
                kept: kept.name.clone(),
                merged: f.name.clone(),
            }),
            None => functions.push(restricted),
        }
    }

    let arch = Architecture {
        universe: parent.universe.iter().filter(|e| subset.contains(*e)).cloned().collect(),
        relations,
        functions,
    };
    Ok((arch, notes))
}

/// `a ⊂ b`: strict universe inclusion, and every relation and function of
/// `a` is the restriction of one of `b`'s.
pub fn is_sub_architecture(a: &Architecture, b: &Architecture) -> bool {
    let ua = a.universe_set();
    let ub = b.universe_set();
    if !(ua.is_subset(&ub) && ua.len() < ub.len()) {
        return false;
    }
    let relations_ok = a.relations.iter().all(|ra| {
        b.relations
            .iter()
            .filter(|rb| rb.arity == ra.arity)
            .any(|rb| restrict_relation(rb, &ua).tuples == ra.tuples)
    });
    let functions_ok = a.functions.iter().all(|fa| {
        b.functions
            .iter()
            .filter(|fb| fb.arity == fa.arity)
            .any(|fb| restrict_function(fb, &ua).same_extension(fa))
    });
    relations_ok && functions_ok
}

/// `<A_V, R_V, F_V>` with each component a subset of the parent's. The
/// elements and relations need not be compatible with each other.
#[derive(Clone, Debug)]
pub struct UnstructuredView {
    pub elements: BTreeSet<ElementId>,
    pub relations: Vec<Relation>,
    pub functions: Vec<FunctionTable>,
}

impl PartialEq for UnstructuredView {
    fn eq(&self, other: &Self) -> bool {
        let rels = |v: &Self| v.relations.iter().map(|r| (r.arity, r.tuples.clone())).collect::<BTreeSet<_>>();
        let funs = |v: &Self| {
            v.functions
                .iter()
                .map(|f| (f.arity, f.domain.clone(), f.mapping.clone()))
                .collect::<BTreeSet<_>>()
        };
        self.elements == other.elements && rels(self) == rels(other) && funs(self) == funs(other)
    }
}

impl Eq for UnstructuredView {}

impl UnstructuredView {
    /// The unstructured view naming, for each relation and function of a
    /// structured view, the parent relation or function it restricts.
    pub fn from_structured(sub: &Architecture, parent: &Architecture) -> Option<UnstructuredView> {
        let elements = sub.universe_set();
        let relations = sub
            .relations
            .iter()
            .map(|rs| {
                parent
                    .relations
                    .iter()
                    .find(|rp| rp.arity == rs.arity && restrict_relation(rp, &elements).tuples == rs.tuples)
                    .cloned()
            })
            .collect::<Option<Vec<_>>>()?;
        let functions = sub
            .functions
            .iter()
            .map(|fs| {
                parent
                    .functions
                    .iter()
                    .find(|fp| fp.arity == fs.arity && restrict_function(fp, &elements).same_extension(fs))
                    .cloned()
            })
            .collect::<Option<Vec<_>>>()?;
        Some(UnstructuredView { elements, relations, functions })
    }
}

pub fn make_view(
    parent: &Architecture,
    elements: BTreeSet<ElementId>,
    relation_refs: Vec<Relation>,
    function_refs: Vec<FunctionTable>,
) -> Result<UnstructuredView, ViewError> {
    let universe = parent.universe_set();
    let stray: Vec<String> = elements.difference(&universe).map(|e| e.to_string()).collect();
    if !stray.is_empty() {
        return Err(ViewError::NotASubset { component: Component::Elements, items: stray });
    }
    let stray: Vec<String> = relation_refs
        .iter()
        .filter(|r| parent.relation_index_of(r).is_none())
        .map(|r| format!("{}/{}", r.name, r.arity))
        .collect();
    if !stray.is_empty() {
        return Err(ViewError::NotASubset { component: Component::Relations, items: stray });
    }
    let stray: Vec<String> = function_refs
        .iter()
        .filter(|f| parent.function_index_of(f).is_none())
        .map(|f| format!("{}/{}", f.name, f.arity))
        .collect();
    if !stray.is_empty() {
        return Err(ViewError::NotASubset { component: Component::Functions, items: stray });
    }
    Ok(UnstructuredView { elements, relations: relation_refs, functions: function_refs })
}

/// Builds a view whose relations and functions are picked by name from the
/// parent.
pub fn make_view_by_name(
    parent: &Architecture,
    elements: BTreeSet<ElementId>,
    relation_names: &[&str],
    function_names: &[&str],
) -> Result<UnstructuredView, ViewError> {
    let mut missing = Vec::new();
    let mut relations = Vec::new();
    for n in relation_names {
        match parent.relation_by_name(n) {
            Some(i) => relations.push(parent.relations[i].clone()),
            None => missing.push(n.to_string()),
        }
    }
    if !missing.is_empty() {
        return Err(ViewError::NotASubset { component: Component::Relations, items: missing });
    }
    let mut functions = Vec::new();
    for n in function_names {
        match parent.function_by_name(n) {
            Some(i) => functions.push(parent.functions[i].clone()),
            None => missing.push(n.to_string()),
        }
    }
    if !missing.is_empty() {
        return Err(ViewError::NotASubset { component: Component::Functions, items: missing });
    }
    make_view(parent, elements, relations, functions)
}

pub fn is_view(candidate: &UnstructuredView, parent: &Architecture) -> bool {
    let universe = parent.universe_set();
    candidate.elements.is_subset(&universe)
        && candidate.relations.iter().all(|r| parent.relation_index_of(r).is_some())
        && candidate.functions.iter().all(|f| parent.function_index_of(f).is_some())
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum View {
    Structured(Architecture),
    Unstructured(UnstructuredView),
}

impl View {
    pub fn belongs_to(&self, parent: &Architecture) -> bool {
        match self {
            View::Structured(a) => is_sub_architecture(a, parent),
            View::Unstructured(v) => is_view(v, parent),
        }
    }
}

/// Injective assignment of labels to views of a single architecture.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Viewpoint {
    pub parent: Architecture,
    views: BTreeMap<String, View>,
}

impl Viewpoint {
    /// Views ordered by label.
    pub fn views(&self) -> impl Iterator<Item = (&str, &View)> {
        self.views.iter().map(|(l, v)| (l.as_str(), v))
    }

    pub fn labels(&self) -> impl Iterator<Item = &str> {
        self.views.keys().map(String::as_str)
    }

    pub fn get(&self, label: &str) -> Option<&View> {
        self.views.get(label)
    }

    pub fn len(&self) -> usize {
        self.views.len()
    }

    pub fn is_empty(&self) -> bool {
        self.views.is_empty()
    }
}

pub fn make_viewpoint(parent: &Architecture, labeled_views: Vec<(String, View)>) -> Result<Viewpoint, ViewError> {
    for (i, (label, view)) in labeled_views.iter().enumerate() {
        if let Some((other, _)) = labeled_views[..i].iter().find(|(l, _)| l == label) {
            return Err(ViewError::DuplicateLabel(other.clone()));
        }
        if let Some((other, _)) = labeled_views[..i].iter().find(|(_, v)| v == view) {
            return Err(ViewError::DuplicateView { first: other.clone(), second: label.clone() });
        }
        if !view.belongs_to(parent) {
            return Err(ViewError::ForeignView(label.clone()));
        }
    }
    Ok(Viewpoint { parent: parent.clone(), views: labeled_views.into_iter().collect() })
}
