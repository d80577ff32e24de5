//! Encodings of modelling-language constructs (junctions, layers) and the
//! worked example architectures.

use std::collections::{BTreeSet, HashSet};

use thiserror::Error;

use crate::model::{Architecture, ElementId, FunctionTable, Relation, Tuple};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EncodingError {
    #[error("JUNCTION_SHAPE_MISMATCH: {0}")]
    JunctionShapeMismatch(String),
    #[error("{0} is not an element of the architecture")]
    UnknownElement(ElementId),
    #[error("no relation at index {0}")]
    UnknownRelation(usize),
}

fn id(s: &str) -> ElementId {
    ElementId::new(s).expect("fixture ids are valid")
}

fn fresh(arch: &Architecture, stem: &str) -> ElementId {
    let taken: HashSet<&str> = arch.universe.iter().map(ElementId::as_str).collect();
    (1..)
        .map(|i| format!("{stem}·{i}"))
        .find(|c| !taken.contains(c.as_str()))
        .map(|c| id(&c))
        .expect("unbounded counter")
}

/// AND-junction: the listed relations, each a single connection `(a, b_i)`
/// out of the same source `a`, become one relation `(a, b_1, …, b_k)`
/// named after the first.
pub fn encode_and_junction(arch: &Architecture, joined: &[usize]) -> Result<Architecture, EncodingError> {
    let Some(&first) = joined.first() else {
        return Err(EncodingError::JunctionShapeMismatch("nothing to join".into()));
    };
    let mut source: Option<&ElementId> = None;
    let mut targets = Vec::new();
    for &i in joined {
        let r = arch.relations.get(i).ok_or(EncodingError::UnknownRelation(i))?;
        if r.arity != 2 || r.len() != 1 {
            return Err(EncodingError::JunctionShapeMismatch(format!(
                "relation {} must be a single binary connection",
                r.name
            )));
        }
        let t = r.tuples.iter().next().expect("one tuple");
        match source {
            None => source = Some(&t[0]),
            Some(a) if *a != t[0] => {
                return Err(EncodingError::JunctionShapeMismatch(format!(
                    "relation {} starts at {} instead of {}",
                    r.name, t[0], a
                )))
            }
            Some(_) => {}
        }
        targets.push(t[1].clone());
    }
    if joined.iter().collect::<HashSet<_>>().len() != joined.len() {
        return Err(EncodingError::JunctionShapeMismatch("a relation is listed twice".into()));
    }
    let source = source.expect("at least one arm").clone();
    let tuple: Tuple = std::iter::once(source).chain(targets).collect();
    let junction = Relation::new(arch.relations[first].name.clone(), tuple.len(), [tuple]);

    let mut out = arch.clone();
    out.relations = arch
        .relations
        .iter()
        .enumerate()
        .filter(|(i, _)| !joined.contains(i) || *i == first)
        .map(|(i, r)| if i == first { junction.clone() } else { r.clone() })
        .collect();
    if out.relations.iter().filter(|r| r.same_extension(&junction)).count() > 1 {
        out = out.disambiguate_relations();
    }
    Ok(out)
}

/// OR-junction: a fresh element ω is added and the designated relation gains
/// `(a, ω)` and `(ω, t)` for every target `t`.
pub fn encode_or_junction(
    arch: &Architecture,
    relation: usize,
    source: &ElementId,
    targets: &BTreeSet<ElementId>,
) -> Result<Architecture, EncodingError> {
    if relation >= arch.relations.len() {
        return Err(EncodingError::UnknownRelation(relation));
    }
    if arch.relations[relation].arity != 2 {
        return Err(EncodingError::JunctionShapeMismatch(format!(
            "relation {} is not binary",
            arch.relations[relation].name
        )));
    }
    for e in std::iter::once(source).chain(targets) {
        if !arch.contains_element(e) {
            return Err(EncodingError::UnknownElement(e.clone()));
        }
    }
    let omega = fresh(arch, "omega");
    let mut out = arch.clone();
    out.universe.push(omega.clone());
    let r = &mut out.relations[relation];
    r.tuples.insert(vec![source.clone(), omega.clone()]);
    for t in targets {
        r.tuples.insert(vec![omega.clone(), t.clone()]);
    }
    Ok(out)
}

/// A named subset of the universe (a layer, a horizontal section, …).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LayerSpec {
    pub name: String,
    pub members: BTreeSet<ElementId>,
}

/// Element standing for membership in an indicator function.
pub const INSIDE: &str = "0";
/// Element standing for non-membership.
pub const OUTSIDE: &str = "1";

/// Adds the unary indicator `f_L(a) = 0` if `a ∈ L`, `1` otherwise, over the
/// whole universe. The codes `0` and `1` are added as elements when absent.
pub fn indicator_function(arch: &Architecture, layer: &LayerSpec) -> Result<Architecture, EncodingError> {
    if let Some(e) = layer.members.iter().find(|e| !arch.contains_element(e)) {
        return Err(EncodingError::UnknownElement(e.clone()));
    }
    let (inside, outside) = (id(INSIDE), id(OUTSIDE));
    let mut out = arch.clone();
    for code in [&inside, &outside] {
        if !out.contains_element(code) {
            out.universe.push(code.clone());
        }
    }
    let entries: Vec<(Tuple, ElementId)> = out
        .universe
        .iter()
        .map(|e| {
            let v = if layer.members.contains(e) { &inside } else { &outside };
            (vec![e.clone()], v.clone())
        })
        .collect();
    out.functions.push(FunctionTable::new(layer.name.clone(), 1, entries));
    Ok(out)
}

/// The structure of `A x = b`: groups `A`, `x`, `b` joined by juxtaposition
/// (`dot`) and equality (`eq`).
pub fn wilkinson_base() -> Architecture {
    Architecture {
        universe: vec![id("A"), id("x"), id("b")],
        relations: vec![
            Relation::new("dot", 2, [vec![id("A"), id("x")]]),
            Relation::new("eq", 2, [vec![id("x"), id("b")]]),
        ],
        functions: vec![],
    }
}

/// [`wilkinson_base`] extended by the individual matrix and vector entries
/// and the unary `member` function sending each entry to its group.
pub fn wilkinson_star() -> Architecture {
    let mut arch = wilkinson_base();
    let entries = [
        ("a11", "A"),
        ("a12", "A"),
        ("a21", "A"),
        ("a22", "A"),
        ("x1", "x"),
        ("x2", "x"),
        ("b1", "b"),
        ("b2", "b"),
    ];
    arch.universe.extend(entries.iter().map(|(e, _)| id(e)));
    arch.functions.push(FunctionTable::new(
        "member",
        1,
        entries.iter().map(|(e, g)| (vec![id(e)], id(g))),
    ));
    arch
}

/// Concept and relation labels for [`torch_fixture_with`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TorchLabels {
    pub concepts: [String; 7],
    pub relations: [String; 7],
}

impl Default for TorchLabels {
    fn default() -> Self {
        let s = |xs: [&str; 7]| xs.map(str::to_owned);
        TorchLabels {
            concepts: s([
                "User",
                "Switch",
                "Energy_Transfer_Mechanism",
                "Energy_Store",
                "Light_Emitter",
                "Light",
                "Surroundings",
            ]),
            relations: s([
                "operates",
                "controls",
                "is_transferred_by",
                "is_consumed_by",
                "powers",
                "emits",
                "illuminates",
            ]),
        }
    }
}

/// A generic torch: seven concepts and seven single-connection relations.
///
/// Orientation (concept indices of [`TorchLabels`]):
///
/// ```text
/// User -operates-> Switch -controls-> Energy_Transfer_Mechanism
/// Energy_Store -is_transferred_by-> Energy_Transfer_Mechanism
/// Energy_Store -is_consumed_by-> Light_Emitter
/// Energy_Transfer_Mechanism -powers-> Light_Emitter
/// Light_Emitter -emits-> Light -illuminates-> Surroundings
/// ```
///
/// The longest shortest path, User to Surroundings, has five hops, so the
/// architecture is maximally 6-tier.
pub fn torch_fixture_with(labels: &TorchLabels) -> Architecture {
    const EDGES: [(usize, usize); 7] = [(0, 1), (1, 2), (3, 2), (3, 4), (2, 4), (4, 5), (5, 6)];
    let concepts: Vec<ElementId> = labels.concepts.iter().map(|c| id(c)).collect();
    Architecture {
        universe: concepts.clone(),
        relations: EDGES
            .iter()
            .zip(&labels.relations)
            .map(|(&(a, b), name)| Relation::new(name.clone(), 2, [vec![concepts[a].clone(), concepts[b].clone()]]))
            .collect(),
        functions: vec![],
    }
}

pub fn torch_fixture() -> Architecture {
    torch_fixture_with(&TorchLabels::default())
}
