//! Line-oriented text format for distinguishing graphs and coding sets.
//!
//! A document has up to four sections, always in this order:
//!
//! ```text
//! graph {
//!   vertex x1 saddle +1 spin [e1:out, e3:in, e2:out, e4:in]
//!   edge e1 unstable x1 free u.1.x1
//!   edge e2 unstable x1 b1
//!   sf vertices (x1 x2)
//!   sf edges (e1 e2)
//! }
//! manifolds {
//!   u.1.x1 n=2 period=1
//! }
//! basic {
//!   (u.1.x1[2n], s.1.x2[2n], +1)
//!   (u.1.x1[2n+2k1, -1-2k1], s.1.x3[2n+2, 2k1+1], +1; k1>=0)
//! }
//! extended { ... }
//! ```
//!
//! Manifold identifiers read `sigma.branch.saddle`; vectors use the
//! parameters `n` (trajectory) and `k1..k9` (local); domains are `;`-attached
//! clauses `affine>=int`; orientation components are `+1` or `-1`; `#` starts
//! a comment. Serialization is canonical: sections in fixed order, vertices
//! and edges sorted by name, spins at their minimal rotation, formulas sorted
//! by prefixes and component constants, so parse-then-serialize is a
//! fixed point on normalized text.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::coding::{
    AffineFn, CodingKind, CodingSet, ComponentFn, FormulaSide, IntDomain, LinearConstraint,
    ManifoldInfo, ManifoldTable, ParamFormula,
};
use crate::graph::{
    DistinguishingGraph, Edge, EdgeId, EndKind, ManifoldId, OuterEnd, Sigma, Sign, SpinEntry,
    Vertex, VertexId, VertexKind,
};

pub const MAX_LOCAL_PARAMS: usize = 9;

/// A parsed document: graph (with its manifold table), basic coding set, and
/// optionally an extended coding set.
#[derive(Debug, Clone, PartialEq)]
pub struct Document {
    pub graph: DistinguishingGraph,
    pub basic: CodingSet,
    pub extended: Option<CodingSet>,
}

impl Document {
    /// Resolves a textual manifold identifier such as `u.1.x1`.
    pub fn try_manifold(&self, text: &str) -> Option<ManifoldId> {
        let mut parts = text.splitn(3, '.');
        let sigma = match parts.next()? {
            "u" => Sigma::U,
            "s" => Sigma::S,
            _ => return None,
        };
        let branch: u8 = parts.next()?.parse().ok()?;
        let saddle = self.graph.vertex_by_name(parts.next()?)?.id;
        Some(ManifoldId::new(sigma, branch, saddle))
    }

    /// Panicking variant of [`Document::try_manifold`] for fixtures.
    pub fn manifold(&self, text: &str) -> ManifoldId {
        self.try_manifold(text)
            .unwrap_or_else(|| panic!("unknown manifold {text:?}"))
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("line {line}, column {col}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub col: usize,
    pub message: String,
}

fn err<T>(line: usize, col: usize, message: impl Into<String>) -> Result<T, ParseError> {
    Err(ParseError {
        line,
        col,
        message: message.into(),
    })
}

/// Character cursor over one logical line.
struct Cursor<'a> {
    text: &'a [u8],
    line: usize,
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn new(text: &'a str, line: usize) -> Cursor<'a> {
        Cursor {
            text: text.as_bytes(),
            line,
            pos: 0,
        }
    }

    fn col(&self) -> usize {
        self.pos + 1
    }

    fn skip_ws(&mut self) {
        while self.pos < self.text.len() && (self.text[self.pos] as char).is_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.text.get(self.pos).map(|&b| b as char)
    }

    fn peek_raw(&self) -> Option<char> {
        self.text.get(self.pos).map(|&b| b as char)
    }

    fn at_end(&mut self) -> bool {
        self.peek().is_none()
    }

    fn eat(&mut self, c: char) -> Result<(), ParseError> {
        if self.peek() == Some(c) {
            self.pos += 1;
            Ok(())
        } else {
            err(self.line, self.col(), format!("expected {c:?}"))
        }
    }

    fn try_eat(&mut self, c: char) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn ident(&mut self) -> Result<String, ParseError> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.text.len() {
            let c = self.text[self.pos] as char;
            if c.is_ascii_alphanumeric() || c == '_' {
                self.pos += 1;
            } else {
                break;
            }
        }
        if start == self.pos {
            return err(self.line, self.col(), "expected an identifier");
        }
        Ok(String::from_utf8_lossy(&self.text[start..self.pos]).into_owned())
    }

    fn uint(&mut self) -> Result<i64, ParseError> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.text.len() && (self.text[self.pos] as char).is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return err(self.line, self.col(), "expected a number");
        }
        String::from_utf8_lossy(&self.text[start..self.pos])
            .parse()
            .map_err(|_| ParseError {
                line: self.line,
                col: start + 1,
                message: "number out of range".into(),
            })
    }

    fn int(&mut self) -> Result<i64, ParseError> {
        self.skip_ws();
        let neg = self.try_eat('-');
        if !neg {
            let _ = self.try_eat('+');
        }
        let v = self.uint()?;
        Ok(if neg { -v } else { v })
    }

    /// `+1` or `-1`.
    fn sign(&mut self) -> Result<Sign, ParseError> {
        let col = self.col();
        let v = self.int()?;
        Sign::from_value(v).ok_or(ParseError {
            line: self.line,
            col,
            message: "expected +1 or -1".into(),
        })
    }
}

/// One parsed vector component: linear part plus optional absolute term.
type RawComponent = (AffineFn, Option<(i64, AffineFn)>);

/// A raw manifold reference, resolved against vertex names later.
#[derive(Debug, Clone, PartialEq, Eq)]
struct RawManifold {
    sigma: Sigma,
    branch: u8,
    saddle: String,
}

fn parse_manifold_ref(c: &mut Cursor) -> Result<RawManifold, ParseError> {
    let col = c.col();
    let sig = c.ident()?;
    let sigma = match sig.as_str() {
        "u" => Sigma::U,
        "s" => Sigma::S,
        _ => return err(c.line, col, "manifold must start with 'u' or 's'"),
    };
    c.eat('.')?;
    let branch = c.uint()?;
    if !(1..=2).contains(&branch) {
        return err(c.line, c.col(), "branch must be 1 or 2");
    }
    c.eat('.')?;
    let saddle = c.ident()?;
    Ok(RawManifold {
        sigma,
        branch: branch as u8,
        saddle,
    })
}

/// One affine term bundle: linear part over `n, k1..k9` plus at most one
/// absolute-value term.
fn parse_component(c: &mut Cursor) -> Result<(RawComponent, usize), ParseError> {
    parse_component_impl(c, false)
}

fn parse_component_impl(
    c: &mut Cursor,
    inside_abs: bool,
) -> Result<(RawComponent, usize), ParseError> {
    let mut coeffs = vec![0i64; MAX_LOCAL_PARAMS + 1];
    let mut constant = 0i64;
    let mut abs: Option<(i64, AffineFn)> = None;
    let mut max_idx = 0usize;
    let mut first = true;
    loop {
        c.skip_ws();
        let Some(ch) = c.peek_raw() else { break };
        if ch == ',' || ch == ']' || ch == ')' || ch == ';' || ch == '>' {
            break;
        }
        if inside_abs && ch == '|' {
            break;
        }
        let sign = if c.try_eat('+') {
            1
        } else if c.try_eat('-') {
            -1
        } else if first {
            1
        } else {
            return err(c.line, c.col(), "expected '+' or '-' between terms");
        };
        first = false;
        // Optional magnitude.
        let mag = if c.peek().is_some_and(|ch| ch.is_ascii_digit()) {
            c.uint()?
        } else {
            1
        };
        c.skip_ws();
        match c.peek_raw() {
            Some('|') if !inside_abs => {
                c.eat('|')?;
                if abs.is_some() {
                    return err(c.line, c.col(), "at most one absolute value per component");
                }
                let ((inner, _), inner_max) = parse_component_impl(c, true)?;
                c.eat('|')?;
                max_idx = max_idx.max(inner_max);
                abs = Some((sign * mag, inner));
            }
            Some(ch2) if ch2.is_ascii_alphabetic() => {
                let col = c.col();
                let name = c.ident()?;
                let idx = param_index(&name)
                    .ok_or_else(|| ParseError {
                        line: c.line,
                        col,
                        message: format!("unknown parameter {name:?} (use n, k1..k9)"),
                    })?;
                coeffs[idx] += sign * mag;
                max_idx = max_idx.max(idx);
            }
            _ => {
                constant += sign * mag;
            }
        }
    }
    Ok(((AffineFn { coeffs, constant }, abs), max_idx))
}

fn param_index(name: &str) -> Option<usize> {
    if name == "n" {
        return Some(0);
    }
    let rest = name.strip_prefix('k')?;
    let i: usize = rest.parse().ok()?;
    (1..=MAX_LOCAL_PARAMS).contains(&i).then_some(i)
}

fn param_name(idx: usize) -> String {
    if idx == 0 {
        "n".to_string()
    } else {
        format!("k{idx}")
    }
}

/// Raw formula with unresolved manifold references.
struct RawFormula {
    u: (RawManifold, Vec<RawComponent>),
    s: (RawManifold, Vec<RawComponent>),
    d: Sign,
    clauses: Vec<(AffineFn, i64)>,
    rank: usize,
    line: usize,
}

fn parse_formula_line(text: &str, line: usize) -> Result<RawFormula, ParseError> {
    let mut c = Cursor::new(text, line);
    c.eat('(')?;
    let mut rank = 0usize;
    let side = |c: &mut Cursor| -> Result<(RawManifold, Vec<RawComponent>, usize), ParseError> {
        let m = parse_manifold_ref(c)?;
        c.eat('[')?;
        let mut comps = Vec::new();
        let mut max_idx = 0usize;
        loop {
            let ((base, abs), mi) = parse_component(c)?;
            max_idx = max_idx.max(mi);
            comps.push((base, abs));
            if !c.try_eat(',') {
                break;
            }
        }
        c.eat(']')?;
        Ok((m, comps, max_idx))
    };
    let (mu, ucomps, umax) = side(&mut c)?;
    rank = rank.max(umax);
    c.eat(',')?;
    let (ms, scomps, smax) = side(&mut c)?;
    rank = rank.max(smax);
    c.eat(',')?;
    let d = c.sign()?;
    let mut clauses = Vec::new();
    if c.try_eat(';') {
        loop {
            let ((lhs, abs), mi) = parse_component(&mut c)?;
            if abs.is_some() {
                return err(line, c.col(), "absolute values are not allowed in domains");
            }
            if lhs.coeffs[0] != 0 {
                return err(line, c.col(), "the trajectory parameter cannot be constrained");
            }
            rank = rank.max(mi);
            c.eat('>')?;
            c.eat('=')?;
            let min = c.int()?;
            clauses.push((lhs, min));
            if !c.try_eat(',') {
                break;
            }
        }
    }
    c.eat(')')?;
    if !c.at_end() {
        return err(line, c.col(), "trailing input after formula");
    }
    Ok(RawFormula {
        u: (mu, ucomps),
        s: (ms, scomps),
        d,
        clauses,
        rank,
        line,
    })
}

fn trim_affine(f: &AffineFn, arity: usize) -> AffineFn {
    AffineFn {
        coeffs: f.coeffs[..arity].to_vec(),
        constant: f.constant,
    }
}

fn resolve_formula(
    raw: RawFormula,
    names: &BTreeMap<String, VertexId>,
) -> Result<ParamFormula, ParseError> {
    let arity = raw.rank + 1;
    let resolve_mid = |m: &RawManifold| -> Result<ManifoldId, ParseError> {
        let id = names.get(&m.saddle).ok_or(ParseError {
            line: raw.line,
            col: 1,
            message: format!("unknown vertex {:?} in manifold reference", m.saddle),
        })?;
        Ok(ManifoldId::new(m.sigma, m.branch, *id))
    };
    let build_side = |(m, comps): &(RawManifold, Vec<RawComponent>)| -> Result<FormulaSide, ParseError> {
        Ok(FormulaSide {
            manifold: resolve_mid(m)?,
            components: comps
                .iter()
                .map(|(base, abs)| ComponentFn {
                    base: trim_affine(base, arity),
                    abs: abs.as_ref().map(|(s, f)| (*s, trim_affine(f, arity))),
                })
                .collect(),
        })
    };
    let formula = ParamFormula {
        u: build_side(&raw.u)?,
        s: build_side(&raw.s)?,
        d: raw.d,
        domain: IntDomain {
            rank: raw.rank,
            constraints: raw
                .clauses
                .iter()
                .map(|(lhs, min)| LinearConstraint {
                    coeffs: trim_affine(lhs, arity).coeffs,
                    min: *min,
                })
                .collect(),
        },
    };
    formula.check_shape().map_err(|e| ParseError {
        line: raw.line,
        col: 1,
        message: e.to_string(),
    })?;
    Ok(formula)
}

/// Parses a document, reporting the first error with its location.
pub fn parse(text: &str) -> Result<Document, ParseError> {
    // Strip comments, keep line numbers.
    let lines: Vec<(usize, String)> = text
        .lines()
        .enumerate()
        .map(|(i, l)| {
            let body = match l.find('#') {
                Some(p) => &l[..p],
                None => l,
            };
            (i + 1, body.trim().to_string())
        })
        .filter(|(_, l)| !l.is_empty())
        .collect();

    let mut idx = 0usize;
    let section = |name: &str, required: bool, idx: &mut usize| -> Result<Option<Vec<(usize, String)>>, ParseError> {
        if *idx >= lines.len() {
            if required {
                return err(lines.last().map_or(1, |l| l.0), 1, format!("missing {name} section"));
            }
            return Ok(None);
        }
        let (lno, line) = &lines[*idx];
        let expect = format!("{name} {{");
        if line != &expect {
            if required {
                return err(*lno, 1, format!("expected `{expect}`"));
            }
            return Ok(None);
        }
        *idx += 1;
        let mut body = Vec::new();
        loop {
            if *idx >= lines.len() {
                return err(lines.last().map_or(1, |l| l.0), 1, format!("unterminated {name} section"));
            }
            let (lno, line) = lines[*idx].clone();
            *idx += 1;
            if line == "}" {
                break;
            }
            body.push((lno, line));
        }
        Ok(Some(body))
    };

    let graph_body = section("graph", true, &mut idx)?.expect("required");
    let manifolds_body = section("manifolds", true, &mut idx)?.expect("required");
    let basic_body = section("basic", true, &mut idx)?.expect("required");
    let extended_body = section("extended", false, &mut idx)?;
    if idx < lines.len() {
        let (lno, _) = lines[idx];
        return err(lno, 1, "unexpected input after the last section");
    }

    // Graph section: vertices, edges, permutation cycles.
    struct RawVertex {
        name: String,
        kind: VertexKind,
        weight: Sign,
        spin: Vec<(String, EndKind)>,
        line: usize,
    }
    struct RawEdge {
        name: String,
        sigma: Sigma,
        saddle: String,
        outer: Result<String, RawManifold>, // Ok(vertex name) or Err(free label)
        line: usize,
    }
    let mut rverts: Vec<RawVertex> = Vec::new();
    let mut redges: Vec<RawEdge> = Vec::new();
    let mut vcycles: Vec<Vec<String>> = Vec::new();
    let mut ecycles: Vec<Vec<String>> = Vec::new();
    for (lno, line) in &graph_body {
        let mut c = Cursor::new(line, *lno);
        let head = c.ident()?;
        match head.as_str() {
            "vertex" => {
                let name = c.ident()?;
                let kcol = c.col();
                let kind = match c.ident()?.as_str() {
                    "sink" => VertexKind::Sink,
                    "source" => VertexKind::Source,
                    "saddle" => VertexKind::Saddle,
                    other => {
                        return err(*lno, kcol, format!("unknown vertex kind {other:?}"))
                    }
                };
                let weight = c.sign()?;
                let scol = c.col();
                if c.ident()? != "spin" {
                    return err(*lno, scol, "expected `spin`");
                }
                c.eat('[')?;
                let mut spin = Vec::new();
                if c.peek() != Some(']') {
                    loop {
                        let ename = c.ident()?;
                        c.eat(':')?;
                        let ecol = c.col();
                        let end = match c.ident()?.as_str() {
                            "in" => EndKind::In,
                            "out" => EndKind::Out,
                            other => {
                                return err(*lno, ecol, format!("expected in/out, found {other:?}"))
                            }
                        };
                        spin.push((ename, end));
                        if !c.try_eat(',') {
                            break;
                        }
                    }
                }
                c.eat(']')?;
                rverts.push(RawVertex {
                    name,
                    kind,
                    weight,
                    spin,
                    line: *lno,
                });
            }
            "edge" => {
                let name = c.ident()?;
                let dcol = c.col();
                let sigma = match c.ident()?.as_str() {
                    "unstable" => Sigma::U,
                    "stable" => Sigma::S,
                    other => return err(*lno, dcol, format!("unknown direction {other:?}")),
                };
                let saddle = c.ident()?;
                c.skip_ws();
                let outer = {
                    let save = c.pos;
                    let word = c.ident()?;
                    if word == "free" {
                        Err(parse_manifold_ref(&mut c)?)
                    } else {
                        c.pos = save;
                        Ok(c.ident()?)
                    }
                };
                if !c.at_end() {
                    return err(*lno, c.col(), "trailing input after edge");
                }
                redges.push(RawEdge {
                    name,
                    sigma,
                    saddle,
                    outer,
                    line: *lno,
                });
            }
            "sf" => {
                let wcol = c.col();
                let which = c.ident()?;
                let target = match which.as_str() {
                    "vertices" => &mut vcycles,
                    "edges" => &mut ecycles,
                    other => return err(*lno, wcol, format!("expected vertices/edges, found {other:?}")),
                };
                while c.try_eat('(') {
                    let mut cycle = Vec::new();
                    while c.peek() != Some(')') {
                        cycle.push(c.ident()?);
                    }
                    c.eat(')')?;
                    if cycle.len() < 2 {
                        return err(*lno, c.col(), "a cycle needs at least two elements");
                    }
                    target.push(cycle);
                }
                if !c.at_end() {
                    return err(*lno, c.col(), "trailing input after permutation");
                }
            }
            other => return err(*lno, 1, format!("unknown graph entry {other:?}")),
        }
    }

    let mut vnames: BTreeMap<String, VertexId> = BTreeMap::new();
    for (i, rv) in rverts.iter().enumerate() {
        if vnames.insert(rv.name.clone(), VertexId(i as u32)).is_some() {
            return err(rv.line, 1, format!("duplicate vertex {:?}", rv.name));
        }
    }
    let mut enames: BTreeMap<String, EdgeId> = BTreeMap::new();
    for (i, re) in redges.iter().enumerate() {
        if enames.insert(re.name.clone(), EdgeId(i as u32)).is_some() {
            return err(re.line, 1, format!("duplicate edge {:?}", re.name));
        }
    }
    let lookup_v = |name: &str, line: usize| {
        vnames.get(name).copied().ok_or(ParseError {
            line,
            col: 1,
            message: format!("unknown vertex {name:?}"),
        })
    };
    let lookup_e = |name: &str, line: usize| {
        enames.get(name).copied().ok_or(ParseError {
            line,
            col: 1,
            message: format!("unknown edge {name:?}"),
        })
    };

    let mut edges = Vec::new();
    for (i, re) in redges.iter().enumerate() {
        let saddle = lookup_v(&re.saddle, re.line)?;
        let outer = match &re.outer {
            Ok(vname) => OuterEnd::Vertex(lookup_v(vname, re.line)?),
            Err(m) => OuterEnd::Free(ManifoldId::new(
                m.sigma,
                m.branch,
                lookup_v(&m.saddle, re.line)?,
            )),
        };
        edges.push(Edge {
            id: EdgeId(i as u32),
            name: re.name.clone(),
            saddle,
            sigma: re.sigma,
            outer,
        });
    }
    let mut vertices = Vec::new();
    for (i, rv) in rverts.iter().enumerate() {
        let spin = rv
            .spin
            .iter()
            .map(|(ename, end)| {
                Ok(SpinEntry {
                    edge: lookup_e(ename, rv.line)?,
                    end: *end,
                })
            })
            .collect::<Result<Vec<_>, ParseError>>()?;
        vertices.push(Vertex {
            id: VertexId(i as u32),
            name: rv.name.clone(),
            kind: rv.kind,
            weight: rv.weight,
            spin,
        });
    }

    let mut vperm: BTreeMap<VertexId, VertexId> = BTreeMap::new();
    for cycle in &vcycles {
        for w in 0..cycle.len() {
            let from = lookup_v(&cycle[w], 1)?;
            let to = lookup_v(&cycle[(w + 1) % cycle.len()], 1)?;
            vperm.insert(from, to);
        }
    }
    let mut eperm: BTreeMap<EdgeId, EdgeId> = BTreeMap::new();
    for cycle in &ecycles {
        for w in 0..cycle.len() {
            let from = lookup_e(&cycle[w], 1)?;
            let to = lookup_e(&cycle[(w + 1) % cycle.len()], 1)?;
            eperm.insert(from, to);
        }
    }

    // Manifolds section.
    let mut table = ManifoldTable::new();
    for (lno, line) in &manifolds_body {
        let mut c = Cursor::new(line, *lno);
        let m = parse_manifold_ref(&mut c)?;
        let id = ManifoldId::new(m.sigma, m.branch, lookup_v(&m.saddle, *lno)?);
        let ncol = c.col();
        if c.ident()? != "n" {
            return err(*lno, ncol, "expected `n=`");
        }
        c.eat('=')?;
        let n_fund = c.int()?;
        let pcol = c.col();
        if c.ident()? != "period" {
            return err(*lno, pcol, "expected `period=`");
        }
        c.eat('=')?;
        let period = c.int()?;
        if table.insert(id, ManifoldInfo { n_fund, period }).is_some() {
            return err(*lno, 1, "duplicate manifold entry");
        }
        if !c.at_end() {
            return err(*lno, c.col(), "trailing input after manifold entry");
        }
    }

    let graph = DistinguishingGraph::new(vertices, edges, vperm, eperm, table);

    let parse_set = |body: &[(usize, String)], kind: CodingKind| -> Result<CodingSet, ParseError> {
        let mut formulas = Vec::new();
        for (lno, line) in body {
            let raw = parse_formula_line(line, *lno)?;
            formulas.push(resolve_formula(raw, &vnames)?);
        }
        Ok(CodingSet::new(kind, formulas))
    };
    let basic = parse_set(&basic_body, CodingKind::Basic)?;
    let extended = match extended_body {
        Some(body) => Some(parse_set(&body, CodingKind::Extended)?),
        None => None,
    };

    Ok(Document {
        graph,
        basic,
        extended,
    })
}

/// Parses a single formula line against an existing graph's vertex names.
pub fn parse_formula(
    text: &str,
    graph: &DistinguishingGraph,
) -> Result<ParamFormula, ParseError> {
    let names: BTreeMap<String, VertexId> = graph
        .vertices()
        .map(|v| (v.name.clone(), v.id))
        .collect();
    let raw = parse_formula_line(text.trim(), 1)?;
    resolve_formula(raw, &names)
}

fn fmt_affine(f: &AffineFn, abs: Option<&(i64, AffineFn)>, out: &mut String) {
    let mut empty = true;
    let push_term = |mag: i64, name: &str, out: &mut String, empty: &mut bool| {
        if mag == 0 {
            return;
        }
        if mag > 0 && !*empty {
            out.push('+');
        }
        if mag == -1 {
            out.push('-');
        } else if mag != 1 {
            out.push_str(&mag.to_string());
        }
        out.push_str(name);
        *empty = false;
    };
    for (i, &c) in f.coeffs.iter().enumerate() {
        push_term(c, &param_name(i), out, &mut empty);
    }
    if let Some((scale, inner)) = abs {
        if *scale != 0 {
            if *scale > 0 && !empty {
                out.push('+');
            }
            if *scale == -1 {
                out.push('-');
            } else if *scale != 1 {
                out.push_str(&scale.to_string());
            }
            out.push('|');
            fmt_affine(inner, None, out);
            out.push('|');
            empty = false;
        }
    }
    if f.constant != 0 || empty {
        if f.constant >= 0 && !empty {
            out.push('+');
        }
        out.push_str(&f.constant.to_string());
    }
}

fn fmt_manifold(m: ManifoldId, g: &DistinguishingGraph) -> String {
    let name = g
        .vertex(m.saddle)
        .map(|v| v.name.clone())
        .unwrap_or_else(|| format!("{}", m.saddle));
    format!("{}.{}.{}", m.sigma, m.branch, name)
}

fn fmt_formula(f: &ParamFormula, g: &DistinguishingGraph) -> String {
    let mut out = String::from("(");
    for (i, side) in [&f.u, &f.s].into_iter().enumerate() {
        if i > 0 {
            out.push_str(", ");
        }
        out.push_str(&fmt_manifold(side.manifold, g));
        out.push('[');
        for (j, c) in side.components.iter().enumerate() {
            if j > 0 {
                out.push_str(", ");
            }
            fmt_affine(&c.base, c.abs.as_ref(), &mut out);
        }
        out.push(']');
    }
    out.push_str(", ");
    out.push_str(&f.d.to_string());
    if !f.domain.constraints.is_empty() {
        out.push_str("; ");
        for (j, c) in f.domain.constraints.iter().enumerate() {
            if j > 0 {
                out.push_str(", ");
            }
            let lhs = AffineFn {
                coeffs: c.coeffs.clone(),
                constant: 0,
            };
            fmt_affine(&lhs, None, &mut out);
            out.push_str(">=");
            out.push_str(&c.min.to_string());
        }
    }
    out.push(')');
    out
}

fn perm_cycles<T: Copy + Ord>(perm: &BTreeMap<T, T>, name: impl Fn(T) -> String) -> Vec<String> {
    let mut seen = std::collections::BTreeSet::new();
    let mut cycles: Vec<(String, String)> = Vec::new();
    for &start in perm.keys() {
        if seen.contains(&start) {
            continue;
        }
        let mut cycle = vec![start];
        seen.insert(start);
        let mut cur = perm.get(&start).copied().unwrap_or(start);
        while cur != start {
            cycle.push(cur);
            seen.insert(cur);
            cur = perm.get(&cur).copied().unwrap_or(cur);
        }
        if cycle.len() < 2 {
            continue;
        }
        // Rotate to the minimal name.
        let names: Vec<String> = cycle.iter().map(|&t| name(t)).collect();
        let min_at = (0..names.len())
            .min_by_key(|&i| names[i].clone())
            .unwrap_or(0);
        let rotated: Vec<String> = (0..names.len())
            .map(|i| names[(min_at + i) % names.len()].clone())
            .collect();
        cycles.push((rotated[0].clone(), format!("({})", rotated.join(" "))));
    }
    cycles.sort();
    cycles.into_iter().map(|(_, c)| c).collect()
}

/// Serializes a document in canonical form: deterministic section order,
/// name-sorted vertices and edges, canonical spin rotations, sorted formulas.
pub fn serialize(doc: &Document) -> String {
    let g = &doc.graph;
    let mut out = String::new();
    out.push_str("graph {\n");
    let mut verts: Vec<&Vertex> = g.vertices().collect();
    verts.sort_by(|a, b| a.name.cmp(&b.name));
    for v in verts {
        out.push_str(&format!("  vertex {} {} {} spin [", v.name, v.kind, v.weight));
        for (i, s) in v.spin.iter().enumerate() {
            if i > 0 {
                out.push_str(", ");
            }
            let ename = g.edge(s.edge).map(|e| e.name.clone()).unwrap_or_default();
            let tag = match s.end {
                EndKind::In => "in",
                EndKind::Out => "out",
            };
            out.push_str(&format!("{ename}:{tag}"));
        }
        out.push_str("]\n");
    }
    let mut edges: Vec<&Edge> = g.edges().collect();
    edges.sort_by(|a, b| a.name.cmp(&b.name));
    for e in edges {
        let dir = match e.sigma {
            Sigma::U => "unstable",
            Sigma::S => "stable",
        };
        let saddle = g.vertex(e.saddle).map(|v| v.name.clone()).unwrap_or_default();
        let outer = match e.outer {
            OuterEnd::Vertex(v) => g.vertex(v).map(|v| v.name.clone()).unwrap_or_default(),
            OuterEnd::Free(m) => format!("free {}", fmt_manifold(m, g)),
        };
        out.push_str(&format!("  edge {} {} {} {}\n", e.name, dir, saddle, outer));
    }
    let vcycles = perm_cycles(g.vertex_perm(), |v| {
        g.vertex(v).map(|x| x.name.clone()).unwrap_or_default()
    });
    if !vcycles.is_empty() {
        out.push_str(&format!("  sf vertices {}\n", vcycles.join(" ")));
    }
    let ecycles = perm_cycles(g.edge_perm(), |e| {
        g.edge(e).map(|x| x.name.clone()).unwrap_or_default()
    });
    if !ecycles.is_empty() {
        out.push_str(&format!("  sf edges {}\n", ecycles.join(" ")));
    }
    out.push_str("}\n");

    out.push_str("manifolds {\n");
    let mut rows: Vec<(String, ManifoldInfo)> = g
        .manifolds
        .iter()
        .map(|(m, info)| (fmt_manifold(*m, g), *info))
        .collect();
    rows.sort();
    for (m, info) in rows {
        out.push_str(&format!("  {} n={} period={}\n", m, info.n_fund, info.period));
    }
    out.push_str("}\n");

    let push_set = |name: &str, cs: &CodingSet, out: &mut String| {
        out.push_str(&format!("{name} {{\n"));
        let mut lines: Vec<(SortKey, String)> = cs
            .formulas
            .iter()
            .map(|f| (sort_key(f, g), format!("  {}\n", fmt_formula(f, g))))
            .collect();
        lines.sort();
        for (_, l) in lines {
            out.push_str(&l);
        }
        out.push_str("}\n");
    };
    push_set("basic", &doc.basic, &mut out);
    if let Some(ext) = &doc.extended {
        push_set("extended", ext, &mut out);
    }
    out
}

type SortKey = (String, String, usize, Vec<(Vec<i64>, i64)>, Vec<(Vec<i64>, i64)>, i64);

fn sort_key(f: &ParamFormula, g: &DistinguishingGraph) -> SortKey {
    let comps = |side: &FormulaSide| {
        side.components
            .iter()
            .map(|c| (c.base.coeffs.clone(), c.base.constant))
            .collect::<Vec<_>>()
    };
    (
        fmt_manifold(f.u.manifold, g),
        fmt_manifold(f.s.manifold, g),
        f.u.components.len(),
        comps(&f.u),
        comps(&f.s),
        f.d.value(),
    )
}

/// Renders the graph as dot text for external viewers.
pub fn to_dot(doc: &Document) -> String {
    let g = &doc.graph;
    let mut out = String::from("digraph distinguishing {\n");
    let mut verts: Vec<&Vertex> = g.vertices().collect();
    verts.sort_by(|a, b| a.name.cmp(&b.name));
    for v in verts {
        let shape = match v.kind {
            VertexKind::Sink => "doublecircle",
            VertexKind::Source => "circle",
            VertexKind::Saddle => "diamond",
        };
        out.push_str(&format!(
            "  {} [shape={shape}, label=\"{} {}\"];\n",
            v.name, v.name, v.weight
        ));
    }
    let mut edges: Vec<&Edge> = g.edges().collect();
    edges.sort_by(|a, b| a.name.cmp(&b.name));
    for e in edges {
        let saddle = g.vertex(e.saddle).map(|v| v.name.clone()).unwrap_or_default();
        match e.outer {
            OuterEnd::Vertex(v) => {
                let other = g.vertex(v).map(|v| v.name.clone()).unwrap_or_default();
                let (from, to) = match e.sigma {
                    Sigma::U => (saddle, other),
                    Sigma::S => (other, saddle),
                };
                out.push_str(&format!("  {from} -> {to} [label=\"{}\"];\n", e.name));
            }
            OuterEnd::Free(m) => {
                let label = fmt_manifold(m, g);
                let node = format!("free_{}", e.name);
                out.push_str(&format!(
                    "  {node} [shape=point, label=\"\"];\n"
                ));
                let (from, to) = match e.sigma {
                    Sigma::U => (saddle, node),
                    Sigma::S => (node, saddle),
                };
                out.push_str(&format!(
                    "  {from} -> {to} [label=\"{} {}\", style=dashed];\n",
                    e.name, label
                ));
            }
        }
    }
    out.push_str("}\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn sphere_text_parses_and_validates() {
        let doc = parse(fixtures::SPHERE_TEXT).expect("fixture text must parse");
        assert!(doc.graph.validate().is_valid());
        assert_eq!(doc.basic.len(), 8);
        assert!(doc.extended.is_none());
    }

    #[test]
    fn sphere_serialization_is_the_golden_text() {
        // The demo text is canonical except for its comment lines.
        let built = fixtures::sphere();
        assert_eq!(
            serialize(&built),
            fixtures::strip_comments(fixtures::SPHERE_TEXT)
        );
    }

    #[test]
    fn empty_input_reports_missing_graph() {
        let e = parse("").unwrap_err();
        assert!(e.message.contains("graph"), "{e}");
    }

    #[test]
    fn roundtrip_fixed_point_on_fixtures() {
        for doc in [
            fixtures::sphere(),
            fixtures::two_saddle_chain(),
            fixtures::three_saddle_chain(),
            fixtures::four_saddle_chain(),
        ] {
            let text = serialize(&doc);
            let reparsed = parse(&text).expect("serialized form must parse");
            assert_eq!(serialize(&reparsed), text);
        }
    }

    #[test]
    fn formula_order_is_normalized() {
        // Permuting basic formula lines does not change the output.
        let text = fixtures::SPHERE_TEXT;
        let doc = parse(text).unwrap();
        let mut permuted = doc.clone();
        permuted.basic.formulas.reverse();
        assert_eq!(serialize(&doc), serialize(&permuted));
    }

    #[test]
    fn extended_section_roundtrips() {
        let mut doc = fixtures::sphere();
        doc.extended = Some(fixtures::sphere_extended_reference());
        let text = serialize(&doc);
        assert!(text.contains("extended {"));
        let reparsed = parse(&text).unwrap();
        assert_eq!(serialize(&reparsed), text);
    }

    #[test]
    fn errors_carry_locations() {
        let bad = "graph {\n  vertex x1 saddle +1 spin [\n}\nmanifolds {\n}\nbasic {\n}\n";
        let e = parse(bad).unwrap_err();
        assert_eq!(e.line, 2);
        assert!(e.col > 0);
    }

    #[test]
    fn unknown_reference_is_an_error() {
        let bad = "graph {\n  edge e1 unstable ghost b1\n}\nmanifolds {\n}\nbasic {\n}\n";
        let e = parse(bad).unwrap_err();
        assert!(e.message.contains("ghost"), "{e}");
    }

    #[test]
    fn duplicate_identifier_is_an_error() {
        let bad = "graph {\n  vertex b1 sink +1 spin []\n  vertex b1 sink +1 spin []\n}\nmanifolds {\n}\nbasic {\n}\n";
        let e = parse(bad).unwrap_err();
        assert!(e.message.contains("duplicate"), "{e}");
    }

    #[test]
    fn abs_component_roundtrips() {
        let doc = fixtures::sphere();
        let mut with_abs = doc.clone();
        let mut f = doc.basic.formulas[4].clone();
        f.u.components[1].abs = Some((
            -1,
            crate::coding::AffineFn {
                coeffs: vec![1],
                constant: -2,
            },
        ));
        with_abs.basic.formulas.push(f);
        let text = serialize(&with_abs);
        assert!(text.contains('|'), "{text}");
        let reparsed = parse(&text).unwrap();
        assert_eq!(serialize(&reparsed), text);
    }
}
