//! Directed graphs as boxes & connectors architectures, and a small DOT
//! reader/writer.
//!
//! Accepted input:
//!
//! ```text
//! digraph <id> { <node>; <node> -> <node> -> ...; }
//! ```
//!
//! Identifiers match `[A-Za-z_][A-Za-z0-9_]*`; double-quoted identifiers are
//! also read so that exported element names survive a round trip. `//`
//! starts a line comment. Attributes, subgraphs and undirected edges are
//! not supported.

use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

use crate::model::{Architecture, ElementId, Relation};

/// Name of the edge relation of a converted graph.
pub const EDGE_RELATION: &str = "E";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GraphError {
    #[error("edge ({0}, {1}) has an endpoint outside the vertex set")]
    DanglingEdge(ElementId, ElementId),
    #[error("NOT_SINGLE_RELATION_BNC: only a B&C architecture with exactly one relation converts to a graph")]
    NotSingleRelationBnc,
    #[error(transparent)]
    Parse(#[from] DotError),
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Graph {
    vertices: BTreeSet<ElementId>,
    edges: BTreeSet<(ElementId, ElementId)>,
}

impl Graph {
    pub fn new(
        vertices: impl IntoIterator<Item = ElementId>,
        edges: impl IntoIterator<Item = (ElementId, ElementId)>,
    ) -> Result<Self, GraphError> {
        let vertices: BTreeSet<ElementId> = vertices.into_iter().collect();
        let edges: BTreeSet<(ElementId, ElementId)> = edges.into_iter().collect();
        if let Some((a, b)) = edges.iter().find(|(a, b)| !vertices.contains(a) || !vertices.contains(b)) {
            return Err(GraphError::DanglingEdge(a.clone(), b.clone()));
        }
        Ok(Graph { vertices, edges })
    }

    pub fn vertices(&self) -> &BTreeSet<ElementId> {
        &self.vertices
    }

    pub fn edges(&self) -> &BTreeSet<(ElementId, ElementId)> {
        &self.edges
    }

    /// Applies a vertex renaming.
    pub fn relabel(&self, f: impl Fn(&ElementId) -> ElementId) -> Graph {
        Graph {
            vertices: self.vertices.iter().map(&f).collect(),
            edges: self.edges.iter().map(|(a, b)| (f(a), f(b))).collect(),
        }
    }
}

/// `<V, {E}, ∅>`. The graph without vertices becomes the empty architecture.
pub fn graph_to_bnc(g: &Graph) -> Architecture {
    if g.vertices.is_empty() {
        return Architecture::default();
    }
    Architecture {
        universe: g.vertices.iter().cloned().collect(),
        relations: vec![Relation::new(
            EDGE_RELATION,
            2,
            g.edges.iter().map(|(a, b)| vec![a.clone(), b.clone()]),
        )],
        functions: vec![],
    }
}

pub fn bnc_to_graph(a: &Architecture) -> Result<Graph, GraphError> {
    let shape_ok = a.is_bnc() && (a.relations.len() == 1 || (a.relations.is_empty() && a.universe.is_empty()));
    if !shape_ok {
        return Err(GraphError::NotSingleRelationBnc);
    }
    let edges = a
        .relations
        .iter()
        .flat_map(|r| &r.tuples)
        .map(|t| (t[0].clone(), t[1].clone()));
    Graph::new(a.universe.iter().cloned(), edges)
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("PARSE_ERROR at {line}:{column}: expected {}, found {found}", .expected.join(" or "))]
pub struct DotError {
    pub line: usize,
    pub column: usize,
    pub expected: Vec<String>,
    pub found: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Arrow,
    LBrace,
    RBrace,
    Semi,
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) => write!(f, "identifier {s:?}"),
            Tok::Arrow => f.write_str("'->'"),
            Tok::LBrace => f.write_str("'{'"),
            Tok::RBrace => f.write_str("'}'"),
            Tok::Semi => f.write_str("';'"),
            Tok::Eof => f.write_str("end of input"),
        }
    }
}

#[derive(Debug, Clone)]
struct Spanned {
    tok: Tok,
    line: usize,
    column: usize,
}

fn err(line: usize, column: usize, expected: &[&str], found: impl Into<String>) -> DotError {
    DotError {
        line,
        column,
        expected: expected.iter().map(|s| s.to_string()).collect(),
        found: found.into(),
    }
}

fn lex(text: &str) -> Result<Vec<Spanned>, DotError> {
    let mut out = Vec::new();
    let mut chars = text.chars().peekable();
    let (mut line, mut column) = (1usize, 1usize);
    while let Some(&c) = chars.peek() {
        let (l, col) = (line, column);
        let mut bump = |chars: &mut std::iter::Peekable<std::str::Chars<'_>>| {
            let c = chars.next();
            if c == Some('\n') {
                line += 1;
                column = 1;
            } else {
                column += 1;
            }
            c
        };
        match c {
            c if c.is_whitespace() => {
                bump(&mut chars);
            }
            '/' => {
                bump(&mut chars);
                if chars.peek() != Some(&'/') {
                    return Err(err(l, col, &["'//' comment"], "'/'"));
                }
                while chars.peek().is_some_and(|&c| c != '\n') {
                    bump(&mut chars);
                }
            }
            '{' | '}' | ';' => {
                bump(&mut chars);
                let tok = match c {
                    '{' => Tok::LBrace,
                    '}' => Tok::RBrace,
                    _ => Tok::Semi,
                };
                out.push(Spanned { tok, line: l, column: col });
            }
            '-' => {
                bump(&mut chars);
                if chars.peek() != Some(&'>') {
                    return Err(err(l, col, &["'->'"], "'-'"));
                }
                bump(&mut chars);
                out.push(Spanned { tok: Tok::Arrow, line: l, column: col });
            }
            '"' => {
                bump(&mut chars);
                let mut s = String::new();
                loop {
                    match bump(&mut chars) {
                        Some('"') => break,
                        Some(c) => s.push(c),
                        None => return Err(err(l, col, &["closing '\"'"], "end of input")),
                    }
                }
                if ElementId::new(s.clone()).is_err() {
                    return Err(err(l, col, &["nonempty identifier without whitespace"], format!("{s:?}")));
                }
                out.push(Spanned { tok: Tok::Ident(s), line: l, column: col });
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let mut s = String::new();
                while chars.peek().is_some_and(|&c| c.is_ascii_alphanumeric() || c == '_') {
                    s.push(bump(&mut chars).expect("peeked"));
                }
                out.push(Spanned { tok: Tok::Ident(s), line: l, column: col });
            }
            other => return Err(err(l, col, &["identifier", "'->'", "';'", "'{'", "'}'"], format!("{other:?}"))),
        }
    }
    out.push(Spanned { tok: Tok::Eof, line, column });
    Ok(out)
}

struct DotParser {
    toks: Vec<Spanned>,
    pos: usize,
}

impl DotParser {
    fn peek(&self) -> &Spanned {
        &self.toks[self.pos]
    }

    fn next(&mut self) -> Spanned {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn unexpected(&self, expected: &[&str]) -> DotError {
        let t = self.peek();
        err(t.line, t.column, expected, t.tok.to_string())
    }

    fn ident(&mut self) -> Result<String, DotError> {
        match &self.peek().tok {
            Tok::Ident(s) => {
                let s = s.clone();
                self.next();
                Ok(s)
            }
            _ => Err(self.unexpected(&["identifier"])),
        }
    }

    fn expect(&mut self, tok: Tok, label: &str) -> Result<(), DotError> {
        if self.peek().tok == tok {
            self.next();
            Ok(())
        } else {
            Err(self.unexpected(&[label]))
        }
    }
}

/// Parses the supported DOT subset into a graph containing every mentioned
/// identifier.
pub fn parse_dot_subset(text: &str) -> Result<Graph, DotError> {
    let mut p = DotParser { toks: lex(text)?, pos: 0 };
    match &p.peek().tok {
        Tok::Ident(k) if k == "digraph" => {
            p.next();
        }
        _ => return Err(p.unexpected(&["'digraph'"])),
    }
    if matches!(p.peek().tok, Tok::Ident(_)) {
        p.next();
    }
    p.expect(Tok::LBrace, "'{'")?;
    let mut vertices = BTreeSet::new();
    let mut edges = BTreeSet::new();
    loop {
        match p.peek().tok {
            Tok::RBrace => {
                p.next();
                break;
            }
            Tok::Semi => {
                p.next();
            }
            Tok::Ident(_) => {
                let mut prev = p.ident()?;
                vertices.insert(prev.clone());
                while p.peek().tok == Tok::Arrow {
                    p.next();
                    let next = p.ident()?;
                    vertices.insert(next.clone());
                    edges.insert((prev, next.clone()));
                    prev = next;
                }
                match p.peek().tok {
                    Tok::Semi | Tok::RBrace | Tok::Ident(_) => {}
                    _ => return Err(p.unexpected(&["'->'", "';'", "'}'"])),
                }
            }
            _ => return Err(p.unexpected(&["identifier", "';'", "'}'"])),
        }
    }
    p.expect(Tok::Eof, "end of input")?;
    let id = |s: &String| ElementId::new(s.clone()).expect("lexer yields valid tokens");
    Ok(Graph {
        vertices: vertices.iter().map(id).collect(),
        edges: edges.iter().map(|(a, b)| (id(a), id(b))).collect(),
    })
}

fn dot_id(e: &ElementId) -> String {
    let s = e.as_str();
    let plain = s.chars().next().is_some_and(|c| c.is_ascii_alphabetic() || c == '_')
        && s.chars().all(|c| c.is_ascii_alphanumeric() || c == '_')
        && s != "digraph";
    if plain {
        s.to_owned()
    } else {
        format!("\"{s}\"")
    }
}

/// Writes a graph in the same DOT subset `parse_dot_subset` reads.
pub fn to_dot(g: &Graph, name: &str) -> String {
    let mut out = format!("digraph {name} {{\n");
    for v in &g.vertices {
        out.push_str(&format!("  {};\n", dot_id(v)));
    }
    for (a, b) in &g.edges {
        out.push_str(&format!("  {} -> {};\n", dot_id(a), dot_id(b)));
    }
    out.push_str("}\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::morphism::{find_isomorphism, SearchConfig};
    use crate::tiers::elementary_tier;

    fn el(s: &str) -> ElementId {
        ElementId::new(s).unwrap()
    }

    #[test]
    fn parses_edge() {
        let g = parse_dot_subset("digraph g { a -> b; }").unwrap();
        assert_eq!(g.vertices().iter().map(|e| e.as_str()).collect::<Vec<_>>(), ["a", "b"]);
        assert!(g.edges().contains(&(el("a"), el("b"))));
        assert_eq!(g.edges().len(), 1);
    }

    #[test]
    fn parses_lone_node_and_comments() {
        let g = parse_dot_subset("// header\ndigraph g {\n  a; // only a\n}\n").unwrap();
        assert_eq!(g.vertices().len(), 1);
        assert!(g.edges().is_empty());
    }

    #[test]
    fn chains_expand_to_edges() {
        let g = parse_dot_subset("digraph { a -> b -> c }").unwrap();
        assert_eq!(g.edges().len(), 2);
    }

    #[test]
    fn dangling_arrow_position() {
        let e = parse_dot_subset("digraph g { a -> }").unwrap_err();
        assert_eq!((e.line, e.column), (1, 18));
        assert_eq!(e.expected, vec!["identifier".to_string()]);
        assert_eq!(e.to_string(), "PARSE_ERROR at 1:18: expected identifier, found '}'");
    }

    #[test]
    fn error_positions_are_one_based_lines() {
        let e = parse_dot_subset("digraph g {\n  a -> b;\n  c [label=x];\n}").unwrap_err();
        assert_eq!((e.line, e.column), (3, 5));
        let e = parse_dot_subset("graph g { }").unwrap_err();
        assert_eq!((e.line, e.column), (1, 1));
        let e = parse_dot_subset("digraph g { a }  b").unwrap_err();
        assert_eq!((e.line, e.column), (1, 18));
    }

    #[test]
    fn empty_graph_is_empty_architecture() {
        assert_eq!(graph_to_bnc(&Graph::default()), Architecture::default());
    }

    #[test]
    fn path_with_loops_is_elementary_tier() {
        let vs: Vec<ElementId> = (1..=4).map(|i| el(&i.to_string())).collect();
        let mut edges = Vec::new();
        for i in 0..4 {
            for j in 0..4 {
                if (i as i32 - j as i32).abs() <= 1 {
                    edges.push((vs[i].clone(), vs[j].clone()));
                }
            }
        }
        let g = Graph::new(vs, edges).unwrap();
        assert_eq!(graph_to_bnc(&g), elementary_tier(4));
    }

    #[test]
    fn round_trip_is_isomorphic() {
        for a in [elementary_tier(3), graph_to_bnc(&parse_dot_subset("digraph t { a -> b -> c; a -> c; }").unwrap())] {
            let back = graph_to_bnc(&bnc_to_graph(&a).unwrap());
            assert!(find_isomorphism(&a, &back, &SearchConfig::default()).unwrap().is_some());
        }
    }

    #[test]
    fn two_relations_rejected() {
        let a = Architecture::builder()
            .elements(["a", "b"])
            .relation("r", 2, [["a", "b"]])
            .relation("s", 2, [["b", "a"]])
            .build()
            .unwrap();
        assert_eq!(bnc_to_graph(&a).unwrap_err(), GraphError::NotSingleRelationBnc);
    }

    #[test]
    fn export_reimports() {
        let g = bnc_to_graph(&elementary_tier(3)).unwrap();
        let text = to_dot(&g, "t3");
        assert_eq!(parse_dot_subset(&text).unwrap(), g);
    }
}
