//! The `.archc` interchange format.
//!
//! A line-oriented text format with one canonical spelling per value:
//!
//! ```text
//! arch t1
//! elements: a
//! rel loop/2:
//!   (a, a)
//! fun id/1:
//!   (a) -> a
//! ```
//!
//! Elements, relations (by name), functions (by name), tuples and map
//! entries are written in lexicographic order, so extensionally equal
//! values serialize to identical bytes. Other document kinds embed
//! architectures between a `source:`/`target:`/`parent:`/`view <label>:`
//! line and a closing `end`:
//!
//! ```text
//! hom h                 partition p          view v
//! source:               tier: a b            parent:
//! arch ...              tier: c              arch ...
//! end                                        end
//! target:                                    elements: a
//! arch ...                                   rels: r
//! end                                        funs:
//! h0:
//!   a -> 1
//! hR:
//!   r -> linked
//! hF:
//! ```
//!
//! A viewpoint is `viewpoint <name>`, a `parent:` block, then one
//! `view <label>:` block per view holding either an `arch` (structured) or
//! `elements:`/`rels:`/`funs:` lines (unstructured), each closed by `end`.
//! In a `fun` block a tuple without `-> value` declares a domain point with
//! no value, which validation reports as a partial mapping. Blank lines and
//! lines starting with `#` are ignored; indentation is not
//! significant.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt::Write as _;
use std::sync::Arc;

use thiserror::Error;

use crate::model::{Architecture, ElementId, FunctionTable, Relation, Tuple};
use crate::morphism::Homomorphism;
use crate::report::Violation;
use crate::tiers::TierPartition;
use crate::views::{make_view, make_viewpoint, UnstructuredView, View, Viewpoint};

/// Conventional file extension.
pub const EXTENSION: &str = "archc";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FormatError {
    #[error("PARSE_ERROR at {line}:{column}: {message}")]
    Parse { line: usize, column: usize, message: String },
    #[error("SCHEMA_ERROR: {message}")]
    Schema { message: String, violations: Vec<Violation> },
}

impl FormatError {
    fn schema(message: impl Into<String>) -> Self {
        FormatError::Schema { message: message.into(), violations: Vec::new() }
    }

    fn invalid(what: &str, violations: Vec<Violation>) -> Self {
        let codes: Vec<String> = violations.iter().map(|v| v.to_string()).collect();
        FormatError::Schema {
            message: format!("{what} is invalid: {}", codes.join("; ")),
            violations,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Kind {
    Architecture,
    View,
    Viewpoint,
    Partition,
    Homomorphism,
}

impl Kind {
    pub fn keyword(self) -> &'static str {
        match self {
            Kind::Architecture => "arch",
            Kind::View => "view",
            Kind::Viewpoint => "viewpoint",
            Kind::Partition => "partition",
            Kind::Homomorphism => "hom",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Payload {
    Architecture(Architecture),
    View { parent: Architecture, view: UnstructuredView },
    Viewpoint(Viewpoint),
    Partition(TierPartition),
    Homomorphism(Homomorphism),
}

/// A named value of one of the five document kinds.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Document {
    pub name: String,
    pub payload: Payload,
}

impl Document {
    pub fn new(name: impl Into<String>, payload: Payload) -> Self {
        Document { name: name.into(), payload }
    }

    pub fn architecture(name: impl Into<String>, arch: Architecture) -> Self {
        Document::new(name, Payload::Architecture(arch))
    }

    pub fn kind(&self) -> Kind {
        match &self.payload {
            Payload::Architecture(_) => Kind::Architecture,
            Payload::View { .. } => Kind::View,
            Payload::Viewpoint(_) => Kind::Viewpoint,
            Payload::Partition(_) => Kind::Partition,
            Payload::Homomorphism(_) => Kind::Homomorphism,
        }
    }

    pub fn into_architecture(self) -> Option<Architecture> {
        match self.payload {
            Payload::Architecture(a) => Some(a),
            _ => None,
        }
    }

    pub fn into_partition(self) -> Option<TierPartition> {
        match self.payload {
            Payload::Partition(p) => Some(p),
            _ => None,
        }
    }

    pub fn into_homomorphism(self) -> Option<Homomorphism> {
        match self.payload {
            Payload::Homomorphism(h) => Some(h),
            _ => None,
        }
    }
}

/// Characters allowed in element ids and names.
pub fn is_token(s: &str) -> bool {
    !s.is_empty() && s.chars().all(|c| c.is_ascii_alphanumeric() || matches!(c, '_' | '.' | '·' | '-'))
}

// ---------------------------------------------------------------------------
// serialization

fn token<'a>(s: &'a str, what: &str) -> Result<&'a str, FormatError> {
    if is_token(s) {
        Ok(s)
    } else {
        Err(FormatError::schema(format!("{what} {s:?} is not a valid token")))
    }
}

fn unique_names<'a>(names: impl Iterator<Item = &'a str>, what: &str) -> Result<(), FormatError> {
    let mut seen = HashSet::new();
    for n in names {
        if !seen.insert(n) {
            return Err(FormatError::schema(format!("DUPLICATE_NAME: {what} {n:?} appears twice")));
        }
    }
    Ok(())
}

fn tuple_text(t: &[ElementId]) -> String {
    let parts: Vec<&str> = t.iter().map(ElementId::as_str).collect();
    format!("({})", parts.join(", "))
}

fn check_names(arch: &Architecture) -> Result<(), FormatError> {
    let report = arch.validate();
    if !report.is_empty() {
        return Err(FormatError::invalid("architecture", report.into_iter().collect()));
    }
    for e in &arch.universe {
        token(e.as_str(), "element")?;
    }
    for r in &arch.relations {
        token(&r.name, "relation name")?;
    }
    for f in &arch.functions {
        token(&f.name, "function name")?;
    }
    unique_names(arch.relations.iter().map(|r| r.name.as_str()), "relation")?;
    unique_names(arch.functions.iter().map(|f| f.name.as_str()), "function")
}

fn write_arch(out: &mut String, name: &str, arch: &Architecture) -> Result<(), FormatError> {
    token(name, "architecture name")?;
    check_names(arch)?;
    writeln!(out, "arch {name}").unwrap();
    out.push_str("elements:");
    for e in arch.universe_set() {
        write!(out, " {e}").unwrap();
    }
    out.push('\n');
    let mut rels: Vec<&Relation> = arch.relations.iter().collect();
    rels.sort_by(|a, b| a.name.cmp(&b.name));
    for r in rels {
        writeln!(out, "rel {}/{}:", r.name, r.arity).unwrap();
        for t in &r.tuples {
            writeln!(out, "  {}", tuple_text(t)).unwrap();
        }
    }
    let mut funs: Vec<&FunctionTable> = arch.functions.iter().collect();
    funs.sort_by(|a, b| a.name.cmp(&b.name));
    for f in funs {
        writeln!(out, "fun {}/{}:", f.name, f.arity).unwrap();
        for (t, o) in &f.mapping {
            writeln!(out, "  {} -> {o}", tuple_text(t)).unwrap();
        }
    }
    Ok(())
}

fn write_nested(out: &mut String, header: &str, name: &str, arch: &Architecture) -> Result<(), FormatError> {
    writeln!(out, "{header}").unwrap();
    write_arch(out, name, arch)?;
    out.push_str("end\n");
    Ok(())
}

fn sorted_names<'a>(names: impl Iterator<Item = &'a str>) -> String {
    let set: BTreeSet<&str> = names.collect();
    set.into_iter().map(|n| format!(" {n}")).collect()
}

fn write_unstructured(out: &mut String, parent: &Architecture, v: &UnstructuredView) -> Result<(), FormatError> {
    let mut rel_names = Vec::new();
    for r in &v.relations {
        let i = parent
            .relation_index_of(r)
            .ok_or_else(|| FormatError::schema(format!("view relation {} is not in the parent", r.name)))?;
        rel_names.push(parent.relations[i].name.as_str());
    }
    let mut fun_names = Vec::new();
    for f in &v.functions {
        let i = parent
            .function_index_of(f)
            .ok_or_else(|| FormatError::schema(format!("view function {} is not in the parent", f.name)))?;
        fun_names.push(parent.functions[i].name.as_str());
    }
    out.push_str("elements:");
    for e in &v.elements {
        write!(out, " {}", token(e.as_str(), "element")?).unwrap();
    }
    out.push('\n');
    writeln!(out, "rels:{}", sorted_names(rel_names.into_iter())).unwrap();
    writeln!(out, "funs:{}", sorted_names(fun_names.into_iter())).unwrap();
    Ok(())
}

/// Canonical text of a document.
pub fn serialize(doc: &Document) -> Result<String, FormatError> {
    let mut out = String::new();
    let name = token(&doc.name, "document name")?;
    match &doc.payload {
        Payload::Architecture(a) => write_arch(&mut out, name, a)?,
        Payload::Partition(p) => {
            writeln!(out, "partition {name}").unwrap();
            for t in p.tiers() {
                out.push_str("tier:");
                for e in t {
                    write!(out, " {}", token(e.as_str(), "element")?).unwrap();
                }
                out.push('\n');
            }
        }
        Payload::View { parent, view } => {
            writeln!(out, "view {name}").unwrap();
            write_nested(&mut out, "parent:", "parent", parent)?;
            write_unstructured(&mut out, parent, view)?;
        }
        Payload::Viewpoint(vp) => {
            writeln!(out, "viewpoint {name}").unwrap();
            write_nested(&mut out, "parent:", "parent", &vp.parent)?;
            for (label, view) in vp.views() {
                writeln!(out, "view {}:", token(label, "view label")?).unwrap();
                match view {
                    View::Structured(a) => write_arch(&mut out, label, a)?,
                    View::Unstructured(v) => write_unstructured(&mut out, &vp.parent, v)?,
                }
                out.push_str("end\n");
            }
        }
        Payload::Homomorphism(h) => {
            writeln!(out, "hom {name}").unwrap();
            write_nested(&mut out, "source:", "source", h.source())?;
            write_nested(&mut out, "target:", "target", h.target())?;
            out.push_str("h0:\n");
            for (a, b) in h.element_map() {
                writeln!(out, "  {a} -> {b}").unwrap();
            }
            out.push_str("hR:\n");
            let mut rel_lines: Vec<(&str, &str)> = h
                .relation_map()
                .iter()
                .enumerate()
                .map(|(i, &j)| (h.source().relations[i].name.as_str(), h.target().relations[j].name.as_str()))
                .collect();
            rel_lines.sort();
            for (a, b) in rel_lines {
                writeln!(out, "  {a} -> {b}").unwrap();
            }
            out.push_str("hF:\n");
            let mut fun_lines: Vec<(&str, &str)> = h
                .function_map()
                .iter()
                .enumerate()
                .map(|(i, &j)| (h.source().functions[i].name.as_str(), h.target().functions[j].name.as_str()))
                .collect();
            fun_lines.sort();
            for (a, b) in fun_lines {
                writeln!(out, "  {a} -> {b}").unwrap();
            }
        }
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// parsing

#[derive(Clone, Copy, Debug)]
struct Line<'a> {
    no: usize,
    /// 1-based column of the first content character.
    col: usize,
    text: &'a str,
}

struct Cursor<'a> {
    lines: Vec<Line<'a>>,
    pos: usize,
    last_line: usize,
}

impl<'a> Cursor<'a> {
    fn new(text: &'a str) -> Self {
        let mut lines = Vec::new();
        let mut last_line = 1;
        for (i, raw) in text.lines().enumerate() {
            last_line = i + 1;
            let trimmed = raw.trim_start();
            let text = trimmed.trim_end();
            if text.is_empty() || text.starts_with('#') {
                continue;
            }
            let col = raw[..raw.len() - trimmed.len()].chars().count() + 1;
            lines.push(Line { no: i + 1, col, text });
        }
        Cursor { lines, pos: 0, last_line }
    }

    fn peek(&self) -> Option<Line<'a>> {
        self.lines.get(self.pos).copied()
    }

    fn next(&mut self, expected: &str) -> Result<Line<'a>, FormatError> {
        let l = self.peek().ok_or_else(|| FormatError::Parse {
            line: self.last_line,
            column: 1,
            message: format!("unexpected end of input, expected {expected}"),
        })?;
        self.pos += 1;
        Ok(l)
    }
}

fn perr(line: Line<'_>, offset: usize, message: impl Into<String>) -> FormatError {
    FormatError::Parse { line: line.no, column: line.col + offset, message: message.into() }
}

/// Char offset of a byte position within the line text.
fn offset_of(line: Line<'_>, byte: usize) -> usize {
    line.text[..byte].chars().count()
}

/// `keyword rest` with `rest` returned trimmed, together with its offset.
fn keyword<'a>(line: Line<'a>, kw: &str) -> Option<(&'a str, usize)> {
    let rest = line.text.strip_prefix(kw)?;
    if !rest.is_empty() && !rest.starts_with(char::is_whitespace) {
        return None;
    }
    let trimmed = rest.trim_start();
    let byte = line.text.len() - trimmed.len();
    Some((trimmed, offset_of(line, byte)))
}

fn expect_token(line: Line<'_>, s: &str, offset: usize, what: &str) -> Result<String, FormatError> {
    if is_token(s) {
        Ok(s.to_owned())
    } else {
        Err(perr(line, offset, format!("expected {what}, found {s:?}")))
    }
}

/// Whitespace-separated tokens after `label:`.
fn token_list(line: Line<'_>, label: &str) -> Result<Vec<(String, usize)>, FormatError> {
    let Some(rest) = line.text.strip_prefix(label).and_then(|r| r.strip_prefix(':')) else {
        return Err(perr(line, 0, format!("expected '{label}:'")));
    };
    let base = line.text.len() - rest.len();
    let mut out = Vec::new();
    let mut byte = base;
    for piece in rest.split(char::is_whitespace) {
        if !piece.is_empty() {
            let off = offset_of(line, byte);
            out.push((expect_token(line, piece, off, "a token")?, off));
        }
        byte += piece.len() + 1;
    }
    Ok(out)
}

fn element(line: Line<'_>, s: &str, offset: usize) -> Result<ElementId, FormatError> {
    let t = expect_token(line, s, offset, "an element")?;
    Ok(ElementId::new(t).expect("tokens are valid ids"))
}

/// `(a, b, …)` optionally followed by `-> c`.
fn tuple_line(line: Line<'_>) -> Result<(Tuple, Option<ElementId>), FormatError> {
    let text = line.text;
    if !text.starts_with('(') {
        return Err(perr(line, 0, "expected '('"));
    }
    let close = text.find(')').ok_or_else(|| perr(line, text.chars().count(), "expected ')'"))?;
    let inner = &text[1..close];
    let mut tuple = Vec::new();
    let mut byte = 1;
    for piece in inner.split(',') {
        let lead = piece.len() - piece.trim_start().len();
        let item = piece.trim();
        tuple.push(element(line, item, offset_of(line, byte + lead))?);
        byte += piece.len() + 1;
    }
    let rest = &text[close + 1..];
    let rest_trim = rest.trim_start();
    if rest_trim.is_empty() {
        return Ok((tuple, None));
    }
    let at = offset_of(line, text.len() - rest_trim.len());
    let Some(value) = rest_trim.strip_prefix("->") else {
        return Err(perr(line, at, format!("expected '->' or end of line, found {rest_trim:?}")));
    };
    let value_trim = value.trim_start();
    let vat = offset_of(line, text.len() - value_trim.len());
    Ok((tuple, Some(element(line, value_trim, vat)?)))
}

/// `a -> b`.
fn arrow_line(line: Line<'_>) -> Result<(String, String), FormatError> {
    let Some(pos) = line.text.find("->") else {
        return Err(perr(line, 0, "expected 'name -> name'"));
    };
    let left = line.text[..pos].trim_end();
    let right_raw = &line.text[pos + 2..];
    let right = right_raw.trim_start();
    let rat = offset_of(line, line.text.len() - right.len());
    Ok((
        expect_token(line, left, 0, "a name")?,
        expect_token(line, right, rat, "a name")?,
    ))
}

/// `rel name/arity:` or `fun name/arity:`.
fn block_header(line: Line<'_>, kw: &str) -> Result<(String, usize), FormatError> {
    let (rest, off) = keyword(line, kw).ok_or_else(|| perr(line, 0, format!("expected '{kw}'")))?;
    let Some(body) = rest.strip_suffix(':') else {
        return Err(perr(line, off + rest.chars().count(), "expected ':'"));
    };
    let Some(slash) = body.rfind('/') else {
        return Err(perr(line, off, "expected 'name/arity'"));
    };
    let name = expect_token(line, &body[..slash], off, "a name")?;
    let arity_text = &body[slash + 1..];
    let arity_off = off + body[..=slash].chars().count();
    let arity = arity_text
        .parse::<usize>()
        .map_err(|_| perr(line, arity_off, format!("expected an arity, found {arity_text:?}")))?;
    Ok((name, arity))
}

fn is_end(line: Line<'_>) -> bool {
    line.text == "end"
}

/// Parses an `arch` block. Nested blocks stop at (and consume) `end`.
fn parse_arch_block(cur: &mut Cursor<'_>, nested: bool) -> Result<(String, Architecture), FormatError> {
    let head = cur.next("'arch'")?;
    let (name, off) = keyword(head, "arch").ok_or_else(|| perr(head, 0, "expected 'arch <name>'"))?;
    let name = expect_token(head, name, off, "an architecture name")?;
    let el_line = cur.next("'elements:'")?;
    let mut universe = Vec::new();
    for (t, _) in token_list(el_line, "elements")? {
        universe.push(ElementId::new(t).expect("token"));
    }
    let mut relations = Vec::new();
    let mut functions = Vec::new();
    let mut rel_names = HashSet::new();
    let mut fun_names = HashSet::new();
    loop {
        let Some(line) = cur.peek() else {
            if nested {
                return Err(cur.next("'end'").unwrap_err());
            }
            break;
        };
        if nested && is_end(line) {
            cur.pos += 1;
            break;
        }
        if keyword(line, "rel").is_some() {
            cur.pos += 1;
            let (rname, arity) = block_header(line, "rel")?;
            if !rel_names.insert(rname.clone()) {
                return Err(FormatError::schema(format!("DUPLICATE_NAME: relation {rname:?} appears twice")));
            }
            let mut tuples = BTreeSet::new();
            while let Some(l) = cur.peek().filter(|l| l.text.starts_with('(')) {
                cur.pos += 1;
                let (t, value) = tuple_line(l)?;
                if value.is_some() {
                    return Err(perr(l, l.text.find("->").map_or(0, |b| offset_of(l, b)), "relation tuples take no '->'"));
                }
                tuples.insert(t);
            }
            relations.push(Relation { name: rname, arity, tuples });
        } else if keyword(line, "fun").is_some() {
            cur.pos += 1;
            let (fname, arity) = block_header(line, "fun")?;
            if !fun_names.insert(fname.clone()) {
                return Err(FormatError::schema(format!("DUPLICATE_NAME: function {fname:?} appears twice")));
            }
            let mut mapping: BTreeMap<Tuple, ElementId> = BTreeMap::new();
            let mut domain = BTreeSet::new();
            while let Some(l) = cur.peek().filter(|l| l.text.starts_with('(')) {
                cur.pos += 1;
                let (t, value) = tuple_line(l)?;
                domain.insert(t.clone());
                // a bare tuple declares a domain point without a value
                let Some(value) = value else { continue };
                if let Some(prev) = mapping.get(&t) {
                    if *prev != value {
                        return Err(perr(l, 0, format!("{} already maps to {prev}", tuple_text(&t))));
                    }
                }
                mapping.insert(t, value);
            }
            functions.push(FunctionTable { name: fname, arity, domain, mapping });
        } else {
            let expected = if nested { "'rel', 'fun' or 'end'" } else { "'rel' or 'fun'" };
            return Err(perr(line, 0, format!("expected {expected}, found {:?}", line.text)));
        }
    }
    Ok((name, Architecture { universe, relations, functions }))
}

fn validated_arch(arch: Architecture) -> Result<Architecture, FormatError> {
    let report = arch.validate();
    if report.is_empty() {
        Ok(arch)
    } else {
        Err(FormatError::invalid("architecture", report.into_iter().collect()))
    }
}

fn expect_line(cur: &mut Cursor<'_>, text: &str) -> Result<(), FormatError> {
    let l = cur.next(&format!("'{text}'"))?;
    if l.text == text {
        Ok(())
    } else {
        Err(perr(l, 0, format!("expected '{text}', found {:?}", l.text)))
    }
}

fn nested_arch(cur: &mut Cursor<'_>, header: &str) -> Result<Architecture, FormatError> {
    expect_line(cur, header)?;
    let (_, arch) = parse_arch_block(cur, true)?;
    validated_arch(arch)
}

fn parse_unstructured(cur: &mut Cursor<'_>, parent: &Architecture) -> Result<UnstructuredView, FormatError> {
    let el = cur.next("'elements:'")?;
    let elements: BTreeSet<ElementId> = token_list(el, "elements")?
        .into_iter()
        .map(|(t, _)| ElementId::new(t).expect("token"))
        .collect();
    let rl = cur.next("'rels:'")?;
    let mut relations = Vec::new();
    for (n, off) in token_list(rl, "rels")? {
        let i = parent
            .relation_by_name(&n)
            .ok_or_else(|| perr(rl, off, format!("no relation named {n:?} in the parent")))?;
        relations.push(parent.relations[i].clone());
    }
    let fl = cur.next("'funs:'")?;
    let mut functions = Vec::new();
    for (n, off) in token_list(fl, "funs")? {
        let i = parent
            .function_by_name(&n)
            .ok_or_else(|| perr(fl, off, format!("no function named {n:?} in the parent")))?;
        functions.push(parent.functions[i].clone());
    }
    make_view(parent, elements, relations, functions).map_err(|e| FormatError::schema(e.to_string()))
}

fn arrow_block(cur: &mut Cursor<'_>, header: &str) -> Result<Vec<(Line<'static>, String, String)>, FormatError> {
    expect_line(cur, header)?;
    let mut out = Vec::new();
    while let Some(l) = cur.peek().filter(|l| l.text.contains("->")) {
        cur.pos += 1;
        let (a, b) = arrow_line(l)?;
        out.push((Line { no: l.no, col: l.col, text: "" }, a, b));
    }
    Ok(out)
}

fn parse_homomorphism(cur: &mut Cursor<'_>) -> Result<Homomorphism, FormatError> {
    let source = nested_arch(cur, "source:")?;
    let target = nested_arch(cur, "target:")?;
    let mut elements = BTreeMap::new();
    for (l, a, b) in arrow_block(cur, "h0:")? {
        let (a, b) = (ElementId::new(a).expect("token"), ElementId::new(b).expect("token"));
        if elements.insert(a.clone(), b).is_some() {
            return Err(perr(l, 0, format!("element {a} mapped twice")));
        }
    }
    let mut relations = vec![usize::MAX; source.relations.len()];
    for (l, a, b) in arrow_block(cur, "hR:")? {
        let i = source.relation_by_name(&a).ok_or_else(|| perr(l, 0, format!("unknown source relation {a:?}")))?;
        let j = target.relation_by_name(&b).ok_or_else(|| perr(l, 0, format!("unknown target relation {b:?}")))?;
        relations[i] = j;
    }
    let mut functions = vec![usize::MAX; source.functions.len()];
    for (l, a, b) in arrow_block(cur, "hF:")? {
        let i = source.function_by_name(&a).ok_or_else(|| perr(l, 0, format!("unknown source function {a:?}")))?;
        let j = target.function_by_name(&b).ok_or_else(|| perr(l, 0, format!("unknown target function {b:?}")))?;
        functions[i] = j;
    }
    Homomorphism::new(Arc::new(source), Arc::new(target), elements, relations, functions)
        .map_err(|e| FormatError::schema(e.to_string()))
}

fn parse_body(cur: &mut Cursor<'_>, validate: bool) -> Result<Document, FormatError> {
    let head = cur.peek().ok_or_else(|| FormatError::Parse {
        line: 1,
        column: 1,
        message: "empty document".into(),
    })?;
    let word = head.text.split_whitespace().next().unwrap_or("");
    let header_name = |kw: &str| -> Result<String, FormatError> {
        let (rest, off) = keyword(head, kw).ok_or_else(|| perr(head, 0, format!("expected '{kw} <name>'")))?;
        expect_token(head, rest, off, "a document name")
    };
    let doc = match word {
        "arch" => {
            let (name, arch) = parse_arch_block(cur, false)?;
            let arch = if validate { validated_arch(arch)? } else { arch };
            Document::architecture(name, arch)
        }
        "partition" => {
            let name = header_name("partition")?;
            cur.pos += 1;
            let mut tiers = Vec::new();
            while let Some(l) = cur.peek() {
                cur.pos += 1;
                let members: BTreeSet<ElementId> = token_list(l, "tier")?
                    .into_iter()
                    .map(|(t, _)| ElementId::new(t).expect("token"))
                    .collect();
                tiers.push(members);
            }
            let p = TierPartition::new(tiers).map_err(|e| FormatError::schema(e.to_string()))?;
            Document::new(name, Payload::Partition(p))
        }
        "view" => {
            let name = header_name("view")?;
            cur.pos += 1;
            let parent = nested_arch(cur, "parent:")?;
            let view = parse_unstructured(cur, &parent)?;
            Document::new(name, Payload::View { parent, view })
        }
        "viewpoint" => {
            let name = header_name("viewpoint")?;
            cur.pos += 1;
            let parent = nested_arch(cur, "parent:")?;
            let mut views = Vec::new();
            while let Some(l) = cur.peek() {
                cur.pos += 1;
                let label = keyword(l, "view")
                    .and_then(|(rest, off)| rest.strip_suffix(':').map(|r| (r, off)))
                    .ok_or_else(|| perr(l, 0, "expected 'view <label>:'"))?;
                let label = expect_token(l, label.0, label.1, "a view label")?;
                let starts_arch = cur.peek().is_some_and(|n| keyword(n, "arch").is_some());
                let view = if starts_arch {
                    let (_, a) = parse_arch_block(cur, true)?;
                    View::Structured(validated_arch(a)?)
                } else {
                    let v = parse_unstructured(cur, &parent)?;
                    expect_line(cur, "end")?;
                    View::Unstructured(v)
                };
                views.push((label, view));
            }
            let vp = make_viewpoint(&parent, views).map_err(|e| FormatError::schema(e.to_string()))?;
            Document::new(name, Payload::Viewpoint(vp))
        }
        "hom" => {
            let name = header_name("hom")?;
            cur.pos += 1;
            Document::new(name, Payload::Homomorphism(parse_homomorphism(cur)?))
        }
        _ => {
            return Err(perr(head, 0, "expected 'arch', 'partition', 'view', 'viewpoint' or 'hom'"));
        }
    };
    if let Some(extra) = cur.peek() {
        return Err(perr(extra, 0, format!("unexpected {:?} after the document", extra.text)));
    }
    Ok(doc)
}

/// Parses a document, checking every structural invariant.
pub fn parse(text: &str) -> Result<Document, FormatError> {
    parse_body(&mut Cursor::new(text), true)
}

/// Parses an architecture document without checking the complex
/// invariants, so that they can be reported by `Architecture::validate`.
pub fn parse_architecture_unchecked(text: &str) -> Result<(String, Architecture), FormatError> {
    let doc = parse_body(&mut Cursor::new(text), false)?;
    let name = doc.name.clone();
    match doc.payload {
        Payload::Architecture(a) => Ok((name, a)),
        _ => Err(FormatError::schema(format!("{name} is a {} document, not an architecture", doc.kind().keyword()))),
    }
}

/// Parses a document that must hold an architecture.
pub fn parse_architecture(text: &str) -> Result<(String, Architecture), FormatError> {
    let doc = parse(text)?;
    let name = doc.name.clone();
    let kind = doc.kind();
    doc.into_architecture()
        .map(|a| (name.clone(), a))
        .ok_or_else(|| FormatError::schema(format!("{name} is a {} document, not an architecture", kind.keyword())))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::category::identity;
    use crate::model::trivial_architecture;
    use crate::report::Code;
    use crate::tiers::{elementary_tier, tier_homomorphism};
    use crate::views::make_view_by_name;

    const T1_TEXT: &str = "arch t1\nelements: a\nrel loop/2:\n  (a, a)\nfun id/1:\n  (a) -> a\n";

    #[test]
    fn trivial_architecture_text() {
        let doc = Document::architecture("t1", trivial_architecture());
        assert_eq!(serialize(&doc).unwrap(), T1_TEXT);
        assert_eq!(parse(T1_TEXT).unwrap(), doc);
    }

    #[test]
    fn arity_mismatch_is_schema_error() {
        let text = "arch x\nelements: a b c\nrel r/2:\n  (a, b, c)\n";
        match parse(text).unwrap_err() {
            FormatError::Schema { violations, .. } => {
                assert_eq!(violations.iter().map(|v| v.code).collect::<Vec<_>>(), vec![Code::ArityMismatch]);
            }
            other => panic!("unexpected {other:?}"),
        }
        let (_, raw) = parse_architecture_unchecked(text).unwrap();
        assert!(raw.validate().has(Code::ArityMismatch));
    }

    #[test]
    fn bare_function_tuple_is_partial() {
        let text = "arch x\nelements: a\nfun f/1:\n  (a)\n";
        let (_, raw) = parse_architecture_unchecked(text).unwrap();
        assert_eq!(raw.validate().codes(), vec![Code::PartialMapping]);
        assert!(matches!(parse(text), Err(FormatError::Schema { .. })));
    }

    #[test]
    fn parse_error_positions() {
        let e = parse("arch x\nelements: a b\nrel r/2:\n  (a, b\n").unwrap_err();
        assert_eq!(e, FormatError::Parse { line: 4, column: 8, message: "expected ')'".into() });
        let e = parse("arch x\nelements: a b!\n").unwrap_err();
        assert!(matches!(e, FormatError::Parse { line: 2, column: 13, .. }), "{e:?}");
        let e = parse("arch x\nelements: a\nrel r/two:\n").unwrap_err();
        assert!(matches!(e, FormatError::Parse { line: 3, column: 7, .. }), "{e:?}");
        let e = parse("arch x\nelements: a\nbogus\n").unwrap_err();
        assert!(matches!(e, FormatError::Parse { line: 3, column: 1, .. }), "{e:?}");
        let e = parse("  arch x\n  elements: a\n  rel r/1:\n    (a) -> a\n").unwrap_err();
        assert!(matches!(e, FormatError::Parse { line: 4, column: 9, .. }), "{e:?}");
    }

    #[test]
    fn canonical_order_is_independent_of_input_order() {
        let a = Architecture::builder()
            .elements(["b", "a"])
            .relation("z", 2, [["b", "a"], ["a", "b"]])
            .relation("y", 1, [["a"]])
            .build()
            .unwrap();
        let mut b = a.clone();
        b.universe.reverse();
        b.relations.reverse();
        let sa = serialize(&Document::architecture("x", a)).unwrap();
        let sb = serialize(&Document::architecture("x", b)).unwrap();
        assert_eq!(sa, sb);
        assert_eq!(sa, "arch x\nelements: a b\nrel y/1:\n  (a)\nrel z/2:\n  (a, b)\n  (b, a)\n");
    }

    #[test]
    fn comments_and_blank_lines() {
        let text = "# fixture\n\narch t1\nelements: a\n\nrel loop/2:\n  (a, a)\n# id\nfun id/1:\n  (a) -> a\n";
        assert_eq!(parse(text).unwrap(), parse(T1_TEXT).unwrap());
    }

    #[test]
    fn empty_architecture_and_relation() {
        let text = "arch t0\nelements:\n";
        assert_eq!(parse(text).unwrap().into_architecture().unwrap(), Architecture::default());
        let doc = parse("arch e\nelements: a\nrel r/3:\n").unwrap();
        let a = doc.into_architecture().unwrap();
        assert_eq!(a.relations[0].arity, 3);
        assert!(a.relations[0].is_empty());
    }

    #[test]
    fn homomorphism_round_trip() {
        let a = Architecture::builder()
            .elements(["ui", "api"])
            .relation("calls", 2, [["ui", "api"]])
            .build()
            .unwrap();
        let p = TierPartition::new(vec![
            BTreeSet::from([ElementId::new("ui").unwrap()]),
            BTreeSet::from([ElementId::new("api").unwrap()]),
        ])
        .unwrap();
        let h = tier_homomorphism(&a, &p).unwrap();
        let doc = Document::new("tiermap", Payload::Homomorphism(h));
        let text = serialize(&doc).unwrap();
        assert!(text.contains("h0:\n  api -> 2\n  ui -> 1\nhR:\n  calls -> linked\nhF:\n"), "{text}");
        assert_eq!(parse(&text).unwrap(), doc);
        assert_eq!(serialize(&parse(&text).unwrap()).unwrap(), text);

        let id = Document::new("id", Payload::Homomorphism(identity(&trivial_architecture())));
        assert_eq!(parse(&serialize(&id).unwrap()).unwrap(), id);
    }

    #[test]
    fn partition_view_viewpoint_round_trip() {
        let t3 = elementary_tier(3);
        let p = TierPartition::new(vec![
            BTreeSet::from([ElementId::new("1").unwrap(), ElementId::new("2").unwrap()]),
            BTreeSet::from([ElementId::new("3").unwrap()]),
        ])
        .unwrap();
        let pd = Document::new("p", Payload::Partition(p));
        assert_eq!(serialize(&pd).unwrap(), "partition p\ntier: 1 2\ntier: 3\n");
        assert_eq!(parse(&serialize(&pd).unwrap()).unwrap(), pd);

        let v = make_view_by_name(&t3, BTreeSet::from([ElementId::new("1").unwrap()]), &["linked"], &[]).unwrap();
        let vd = Document::new("v", Payload::View { parent: t3.clone(), view: v.clone() });
        let text = serialize(&vd).unwrap();
        assert_eq!(parse(&text).unwrap(), vd);

        let sub = crate::views::restrict(&t3, &BTreeSet::from([ElementId::new("1").unwrap()])).unwrap();
        let vp = make_viewpoint(&t3, vec![("b".into(), View::Structured(sub)), ("a".into(), View::Unstructured(v))]).unwrap();
        let vpd = Document::new("vp", Payload::Viewpoint(vp));
        let text = serialize(&vpd).unwrap();
        assert_eq!(parse(&text).unwrap(), vpd);
        assert_eq!(serialize(&parse(&text).unwrap()).unwrap(), text);
    }

    #[test]
    fn bad_tokens_and_duplicate_names() {
        let a = Architecture::builder().elements(["a b"]).build();
        assert!(a.is_err());
        let weird = Architecture::builder().elements(["a/b"]).build().unwrap();
        assert!(matches!(serialize(&Document::architecture("x", weird)), Err(FormatError::Schema { .. })));
        let dup = "arch x\nelements: a\nrel r/1:\n  (a)\nrel r/2:\n";
        assert!(matches!(parse(dup), Err(FormatError::Schema { .. })));
        let conflict = "arch x\nelements: a b\nfun f/1:\n  (a) -> a\n  (a) -> b\n";
        assert!(matches!(parse(conflict), Err(FormatError::Parse { line: 5, .. })));
    }

    #[test]
    fn disambiguation_marker_is_a_token() {
        assert!(is_token("·n1"));
        assert!(is_token("omega·2"));
        assert!(!is_token("ω"));
    }
}
