//! The distinguishing graph: periodic trajectories as vertices with spin,
//! separatrix components as edges, and the induced permutation `S_f`.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

use crate::coding::{CodingSet, ManifoldTable};

/// Identifier of a vertex (a periodic trajectory).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VertexId(pub u32);

/// Identifier of an edge (a separatrix component).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct EdgeId(pub u32);

impl fmt::Display for VertexId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "v{}", self.0)
    }
}

impl fmt::Display for EdgeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "e{}", self.0)
    }
}

/// A sign, `+1` or `-1`. Used for vertex weights (orientation type of the
/// periodic trajectory) and for the orientation component of formulas.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn value(self) -> i64 {
        match self {
            Sign::Plus => 1,
            Sign::Minus => -1,
        }
    }

    pub fn from_value(v: i64) -> Option<Sign> {
        match v {
            1 => Some(Sign::Plus),
            -1 => Some(Sign::Minus),
            _ => None,
        }
    }

    /// Sign of a nonzero integer.
    pub fn of(v: i64) -> Option<Sign> {
        match v {
            v if v > 0 => Some(Sign::Plus),
            v if v < 0 => Some(Sign::Minus),
            _ => None,
        }
    }

    pub fn flip(self) -> Sign {
        match self {
            Sign::Plus => Sign::Minus,
            Sign::Minus => Sign::Plus,
        }
    }
}

impl std::ops::Mul for Sign {
    type Output = Sign;
    fn mul(self, rhs: Sign) -> Sign {
        if self == rhs {
            Sign::Plus
        } else {
            Sign::Minus
        }
    }
}

impl std::ops::Neg for Sign {
    type Output = Sign;
    fn neg(self) -> Sign {
        self.flip()
    }
}

impl fmt::Display for Sign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Sign::Plus => write!(f, "+1"),
            Sign::Minus => write!(f, "-1"),
        }
    }
}

/// Stable or unstable, for separatrices and manifold identifiers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Sigma {
    U,
    S,
}

impl Sigma {
    pub fn dual(self) -> Sigma {
        match self {
            Sigma::U => Sigma::S,
            Sigma::S => Sigma::U,
        }
    }
}

impl fmt::Display for Sigma {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Sigma::U => write!(f, "u"),
            Sigma::S => write!(f, "s"),
        }
    }
}

/// Names one separatrix branch of one saddle: `W_branch^sigma(saddle)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ManifoldId {
    pub sigma: Sigma,
    pub branch: u8,
    pub saddle: VertexId,
}

impl ManifoldId {
    pub fn new(sigma: Sigma, branch: u8, saddle: VertexId) -> ManifoldId {
        ManifoldId {
            sigma,
            branch,
            saddle,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum VertexKind {
    Sink,
    Source,
    Saddle,
}

impl fmt::Display for VertexKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            VertexKind::Sink => write!(f, "sink"),
            VertexKind::Source => write!(f, "source"),
            VertexKind::Saddle => write!(f, "saddle"),
        }
    }
}

/// Which end of an edge sits at a given vertex: `In` means the edge points
/// into the vertex here (its head), `Out` means it leaves (its tail).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum EndKind {
    In,
    Out,
}

/// One entry of a vertex spin: an incident edge-end.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SpinEntry {
    pub edge: EdgeId,
    pub end: EndKind,
}

/// A vertex of the distinguishing graph. The spin records the cyclic order of
/// incident edge-ends around the vertex, following the surface orientation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vertex {
    pub id: VertexId,
    pub name: String,
    pub kind: VertexKind,
    pub weight: Sign,
    pub spin: Vec<SpinEntry>,
}

/// The far end of an edge: another vertex, or free. A free end corresponds to
/// a separatrix that carries heteroclinic points; it is labeled by the
/// manifold it represents.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OuterEnd {
    Vertex(VertexId),
    Free(ManifoldId),
}

/// An edge of the distinguishing graph. Edges are oriented with the flow:
/// unstable edges leave their saddle, stable edges enter it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Edge {
    pub id: EdgeId,
    pub name: String,
    pub saddle: VertexId,
    pub sigma: Sigma,
    pub outer: OuterEnd,
}

/// Structural violation found by a validation pass.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub rule: String,
    pub message: String,
}

impl Violation {
    pub fn new(rule: &str, message: impl Into<String>) -> Violation {
        Violation {
            rule: rule.to_string(),
            message: message.into(),
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}] {}", self.rule, self.message)
    }
}

/// Outcome of validation: empty means valid.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn push(&mut self, rule: &str, message: impl Into<String>) {
        self.violations.push(Violation::new(rule, message));
    }

    pub fn merge(&mut self, other: ValidationReport) {
        self.violations.extend(other.violations);
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.violations.is_empty() {
            write!(f, "valid")
        } else {
            for v in &self.violations {
                writeln!(f, "{v}")?;
            }
            Ok(())
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GraphError {
    #[error("unknown vertex {0}")]
    UnknownVertex(VertexId),
    #[error("unknown edge {0}")]
    UnknownEdge(EdgeId),
    #[error("duplicate vertex name {0:?}")]
    DuplicateName(String),
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum BehError {
    #[error("vertex {0} is not a saddle")]
    NotSaddle(VertexId),
    #[error("heteroclinic incidence relation contains a cycle through {0}")]
    Cycle(VertexId),
}

/// Declared heteroclinic incidence between saddles: an arrow `a -> b` records
/// that the unstable manifold of `a` meets the stable manifold of `b`.
/// Built from the manifold pairs of a coding set rather than stored on the
/// graph, so there is a single source of truth.
#[derive(Debug, Clone, Default)]
pub struct BehIncidence {
    arrows: BTreeMap<VertexId, BTreeSet<VertexId>>,
}

impl BehIncidence {
    pub fn from_pairs(pairs: impl IntoIterator<Item = (VertexId, VertexId)>) -> BehIncidence {
        let mut arrows: BTreeMap<VertexId, BTreeSet<VertexId>> = BTreeMap::new();
        for (a, b) in pairs {
            arrows.entry(a).or_default().insert(b);
        }
        BehIncidence { arrows }
    }

    /// Reads the (unstable saddle, stable saddle) pair off every formula.
    pub fn from_coding_set(cs: &CodingSet) -> BehIncidence {
        BehIncidence::from_pairs(
            cs.formulas
                .iter()
                .map(|f| (f.u.manifold.saddle, f.s.manifold.saddle)),
        )
    }

    pub fn successors(&self, v: VertexId) -> impl Iterator<Item = VertexId> + '_ {
        self.arrows.get(&v).into_iter().flatten().copied()
    }
}

/// The distinguishing graph together with the permutation `S_f` and the
/// table of fundamental-domain counts for the free-edge manifolds.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DistinguishingGraph {
    vertices: BTreeMap<VertexId, Vertex>,
    edges: BTreeMap<EdgeId, Edge>,
    vertex_perm: BTreeMap<VertexId, VertexId>,
    edge_perm: BTreeMap<EdgeId, EdgeId>,
    pub manifolds: ManifoldTable,
}

impl DistinguishingGraph {
    /// Assembles a graph. Spins are canonicalized to their lexicographically
    /// minimal rotation (by edge name, then end kind) so that equality and
    /// serialization are rotation-invariant.
    pub fn new(
        vertices: Vec<Vertex>,
        edges: Vec<Edge>,
        vertex_perm: BTreeMap<VertexId, VertexId>,
        edge_perm: BTreeMap<EdgeId, EdgeId>,
        manifolds: ManifoldTable,
    ) -> DistinguishingGraph {
        let edge_names: BTreeMap<EdgeId, String> =
            edges.iter().map(|e| (e.id, e.name.clone())).collect();
        let mut vmap = BTreeMap::new();
        for mut v in vertices {
            v.spin = canonical_rotation(&v.spin, &edge_names);
            vmap.insert(v.id, v);
        }
        let emap = edges.into_iter().map(|e| (e.id, e)).collect();
        DistinguishingGraph {
            vertices: vmap,
            edges: emap,
            vertex_perm,
            edge_perm,
            manifolds,
        }
    }

    pub fn vertices(&self) -> impl Iterator<Item = &Vertex> {
        self.vertices.values()
    }

    pub fn edges(&self) -> impl Iterator<Item = &Edge> {
        self.edges.values()
    }

    pub fn vertex(&self, id: VertexId) -> Option<&Vertex> {
        self.vertices.get(&id)
    }

    pub fn edge(&self, id: EdgeId) -> Option<&Edge> {
        self.edges.get(&id)
    }

    pub fn vertex_by_name(&self, name: &str) -> Option<&Vertex> {
        self.vertices.values().find(|v| v.name == name)
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn saddles(&self) -> impl Iterator<Item = &Vertex> {
        self.vertices
            .values()
            .filter(|v| v.kind == VertexKind::Saddle)
    }

    pub fn sf_vertex(&self, v: VertexId) -> VertexId {
        self.vertex_perm.get(&v).copied().unwrap_or(v)
    }

    pub fn sf_edge(&self, e: EdgeId) -> EdgeId {
        self.edge_perm.get(&e).copied().unwrap_or(e)
    }

    pub fn vertex_perm(&self) -> &BTreeMap<VertexId, VertexId> {
        &self.vertex_perm
    }

    pub fn edge_perm(&self) -> &BTreeMap<EdgeId, EdgeId> {
        &self.edge_perm
    }

    /// Free edges with their manifold labels.
    pub fn free_edges(&self) -> impl Iterator<Item = (&Edge, ManifoldId)> {
        self.edges.values().filter_map(|e| match e.outer {
            OuterEnd::Free(m) => Some((e, m)),
            OuterEnd::Vertex(_) => None,
        })
    }

    /// The free edge carrying a given manifold, if any.
    pub fn manifold_edge(&self, m: ManifoldId) -> Option<&Edge> {
        self.free_edges()
            .find(|(_, label)| *label == m)
            .map(|(e, _)| e)
    }

    /// `k`-fold application of `S_f` to a vertex; negative `k` applies the
    /// inverse permutation.
    pub fn apply_sf(&self, v: VertexId, k: i64) -> Result<VertexId, GraphError> {
        if !self.vertices.contains_key(&v) {
            return Err(GraphError::UnknownVertex(v));
        }
        // Walk the orbit once, then index into it modulo its length.
        let mut orbit = vec![v];
        let mut cur = self.sf_vertex(v);
        while cur != v {
            orbit.push(cur);
            cur = self.sf_vertex(cur);
        }
        let n = orbit.len() as i64;
        let idx = k.rem_euclid(n) as usize;
        Ok(orbit[idx])
    }

    /// Longest-chain depth of the heteroclinic partial order: the maximum
    /// length of a chain `y = y_n, ..., y_0 = x` in which consecutive saddles
    /// have intersecting unstable/stable manifolds; 0 when `y` does not sit
    /// above `x` at all.
    pub fn beh(
        &self,
        incidence: &BehIncidence,
        y: VertexId,
        x: VertexId,
    ) -> Result<u32, BehError> {
        for v in [y, x] {
            match self.vertices.get(&v) {
                Some(vert) if vert.kind == VertexKind::Saddle => {}
                _ => return Err(BehError::NotSaddle(v)),
            }
        }
        // Memoized longest path from each saddle to x; `None` marks on-stack
        // nodes for cycle detection.
        let mut memo: BTreeMap<VertexId, Option<u32>> = BTreeMap::new();
        fn longest(
            inc: &BehIncidence,
            memo: &mut BTreeMap<VertexId, Option<u32>>,
            from: VertexId,
            to: VertexId,
        ) -> Result<Option<u32>, BehError> {
            // Some(Some(d)): reaches `to` by a path of d arrows (d >= 0).
            if from == to {
                return Ok(Some(0));
            }
            if let Some(state) = memo.get(&from) {
                return match state {
                    Some(d) if *d == u32::MAX => Ok(None),
                    Some(d) => Ok(Some(*d)),
                    None => Err(BehError::Cycle(from)),
                };
            }
            memo.insert(from, None);
            let mut best: Option<u32> = None;
            for next in inc.successors(from).collect::<Vec<_>>() {
                if let Some(d) = longest(inc, memo, next, to)? {
                    best = Some(best.unwrap_or(0).max(d + 1));
                }
            }
            memo.insert(from, Some(best.unwrap_or(u32::MAX)));
            Ok(best)
        }
        Ok(longest(incidence, &mut memo, y, x)?.unwrap_or(0))
    }

    /// Checks the structural properties of a distinguishing graph and the
    /// consistency of `S_f`. An empty report means the graph is valid.
    pub fn validate(&self) -> ValidationReport {
        let mut report = ValidationReport::default();
        let mut names = BTreeSet::new();
        for v in self.vertices.values() {
            if !names.insert(v.name.clone()) {
                report.push("ids", format!("duplicate vertex name {:?}", v.name));
            }
        }
        let mut enames = BTreeSet::new();
        for e in self.edges.values() {
            if !enames.insert(e.name.clone()) {
                report.push("ids", format!("duplicate edge name {:?}", e.name));
            }
        }

        // Incident edge-ends per vertex, as implied by the edge list.
        let mut incident: BTreeMap<VertexId, Vec<SpinEntry>> = BTreeMap::new();
        for e in self.edges.values() {
            // At the saddle: stable edges point in, unstable edges point out.
            let end_at_saddle = match e.sigma {
                Sigma::S => EndKind::In,
                Sigma::U => EndKind::Out,
            };
            incident.entry(e.saddle).or_default().push(SpinEntry {
                edge: e.id,
                end: end_at_saddle,
            });
            match e.outer {
                OuterEnd::Vertex(v) => {
                    let end = match e.sigma {
                        Sigma::S => EndKind::Out, // leaves a source toward the saddle
                        Sigma::U => EndKind::In,  // arrives at a sink
                    };
                    incident
                        .entry(v)
                        .or_default()
                        .push(SpinEntry { edge: e.id, end });
                }
                OuterEnd::Free(m) => {
                    if m.saddle != e.saddle {
                        report.push(
                            "P5",
                            format!(
                                "free edge {} labeled with a manifold of a different saddle",
                                e.name
                            ),
                        );
                    }
                    let expect = e.sigma;
                    if m.sigma != expect {
                        report.push(
                            "P5",
                            format!("free edge {} label disagrees with its direction", e.name),
                        );
                    }
                    if !(1..=2).contains(&m.branch) {
                        report.push("P5", format!("free edge {} branch out of range", e.name));
                    }
                    if !self.manifolds.contains_key(&m) {
                        report.push(
                            "manifolds",
                            format!("free edge {} has no fundamental-domain entry", e.name),
                        );
                    }
                }
            }
            match self.vertices.get(&e.saddle) {
                None => report.push("P5", format!("edge {} hangs on a missing vertex", e.name)),
                Some(v) if v.kind != VertexKind::Saddle => report.push(
                    "P5",
                    format!("edge {} is not incident to a saddle by its saddle end", e.name),
                ),
                _ => {}
            }
            if let OuterEnd::Vertex(v) = e.outer {
                match self.vertices.get(&v) {
                    None => report.push("P5", format!("edge {} ends at a missing vertex", e.name)),
                    Some(other) if other.kind == VertexKind::Saddle => report.push(
                        "P5",
                        format!("edge {} connects two saddles; the far end must be a sink, a source, or free", e.name),
                    ),
                    _ => {}
                }
            }
        }

        // Manifold table entries must belong to free edges, be positive, and
        // agree with the edge's orbit length under the permutation.
        let free_labels: BTreeSet<ManifoldId> = self.free_edges().map(|(_, m)| m).collect();
        for (m, info) in &self.manifolds {
            if !free_labels.contains(m) {
                report.push(
                    "manifolds",
                    format!("table entry {:?} does not label any free edge", m),
                );
            }
            if info.n_fund < 1 {
                report.push("manifolds", format!("{:?} has n < 1", m));
            }
            if info.period < 1 {
                report.push("manifolds", format!("{:?} has period < 1", m));
            }
        }
        for (e, m) in self.free_edges() {
            let Some(info) = self.manifolds.get(&m) else {
                continue;
            };
            let mut orbit_len = 1i64;
            let mut cur = self.sf_edge(e.id);
            while cur != e.id && orbit_len <= self.edges.len() as i64 {
                orbit_len += 1;
                cur = self.sf_edge(cur);
            }
            if info.period != orbit_len {
                report.push(
                    "manifolds",
                    format!(
                        "{:?} declares period {} but its edge returns after {} steps",
                        m, info.period, orbit_len
                    ),
                );
            }
        }

        // Properties 1-4: vertex kinds against edge-end patterns and spins.
        for v in self.vertices.values() {
            let mut expect = incident.remove(&v.id).unwrap_or_default();
            let mut have = v.spin.clone();
            expect.sort();
            have.sort();
            if expect != have {
                report.push(
                    "spin",
                    format!(
                        "vertex {} spin does not list exactly its incident edge-ends",
                        v.name
                    ),
                );
                continue;
            }
            let ins = v.spin.iter().filter(|s| s.end == EndKind::In).count();
            let outs = v.spin.len() - ins;
            match v.kind {
                VertexKind::Sink => {
                    if outs > 0 {
                        report.push("P1", format!("sink {} has outgoing edge-ends", v.name));
                    }
                }
                VertexKind::Source => {
                    if ins > 0 {
                        report.push("P2", format!("source {} has incoming edge-ends", v.name));
                    }
                }
                VertexKind::Saddle => {
                    if ins != 2 || outs != 2 {
                        report.push(
                            "P4",
                            format!(
                                "saddle {} must have two incoming and two outgoing edge-ends, found {} in / {} out",
                                v.name, ins, outs
                            ),
                        );
                    } else {
                        let alternating = (0..4).all(|i| {
                            v.spin[i].end != v.spin[(i + 1) % 4].end
                        });
                        if !alternating {
                            report.push(
                                "P4",
                                format!(
                                    "saddle {} edge-ends are not located crosswise on its circle",
                                    v.name
                                ),
                            );
                        }
                    }
                }
            }
            // Property 3 in reverse: a vertex with mixed ends must be a saddle.
            if ins > 0 && outs > 0 && v.kind != VertexKind::Saddle {
                report.push(
                    "P3",
                    format!("vertex {} mixes edge directions but is not a saddle", v.name),
                );
            }
        }

        self.validate_sf(&mut report);
        report
    }

    fn validate_sf(&self, report: &mut ValidationReport) {
        let vkeys: BTreeSet<_> = self.vertices.keys().copied().collect();
        let vimage: BTreeSet<_> = vkeys.iter().map(|&v| self.sf_vertex(v)).collect();
        if vimage != vkeys {
            report.push("sf", "vertex permutation is not a bijection on the vertex set");
            return;
        }
        let ekeys: BTreeSet<_> = self.edges.keys().copied().collect();
        let eimage: BTreeSet<_> = ekeys.iter().map(|&e| self.sf_edge(e)).collect();
        if eimage != ekeys {
            report.push("sf", "edge permutation is not a bijection on the edge set");
            return;
        }
        for v in self.vertices.values() {
            let w = &self.vertices[&self.sf_vertex(v.id)];
            if v.kind != w.kind {
                report.push("sf", format!("S_f maps {} to {} of different kind", v.name, w.name));
            }
            if v.weight != w.weight {
                report.push(
                    "sf",
                    format!("S_f maps {} to {} of different weight", v.name, w.name),
                );
            }
            let mapped: Vec<SpinEntry> = v
                .spin
                .iter()
                .map(|s| SpinEntry {
                    edge: self.sf_edge(s.edge),
                    end: s.end,
                })
                .collect();
            if !cyclic_eq(&mapped, &w.spin) {
                report.push(
                    "sf",
                    format!("S_f does not preserve the spin of {} up to rotation", v.name),
                );
            }
        }
        for e in self.edges.values() {
            let f = &self.edges[&self.sf_edge(e.id)];
            if f.saddle != self.sf_vertex(e.saddle) {
                report.push("sf", format!("edge map breaks incidence at {}", e.name));
            }
            if f.sigma != e.sigma {
                report.push("sf", format!("edge map flips the direction of {}", e.name));
            }
            match (e.outer, f.outer) {
                (OuterEnd::Vertex(a), OuterEnd::Vertex(b)) => {
                    if b != self.sf_vertex(a) {
                        report.push("sf", format!("edge map breaks the far end of {}", e.name));
                    }
                }
                (OuterEnd::Free(a), OuterEnd::Free(b)) => {
                    // Free labels must stay on the same sigma and follow the
                    // saddle map; branch renumbering is legitimate.
                    if b.sigma != a.sigma || b.saddle != self.sf_vertex(a.saddle) {
                        report.push("sf", format!("edge map breaks the free label of {}", e.name));
                    }
                }
                _ => {
                    report.push(
                        "sf",
                        format!("edge map does not preserve freeness of {}", e.name),
                    );
                }
            }
        }
    }
}

/// Lexicographically minimal rotation, comparing entries by edge name and
/// end kind so the choice is stable across reparses.
fn canonical_rotation(spin: &[SpinEntry], names: &BTreeMap<EdgeId, String>) -> Vec<SpinEntry> {
    if spin.len() <= 1 {
        return spin.to_vec();
    }
    let key = |s: &SpinEntry| (names.get(&s.edge).cloned().unwrap_or_default(), s.end);
    let mut best = 0;
    for start in 1..spin.len() {
        for i in 0..spin.len() {
            let a = key(&spin[(start + i) % spin.len()]);
            let b = key(&spin[(best + i) % spin.len()]);
            match a.cmp(&b) {
                std::cmp::Ordering::Less => {
                    best = start;
                    break;
                }
                std::cmp::Ordering::Greater => break,
                std::cmp::Ordering::Equal => continue,
            }
        }
    }
    (0..spin.len())
        .map(|i| spin[(best + i) % spin.len()])
        .collect()
}

/// Equality of cyclic sequences up to rotation.
pub fn cyclic_eq<T: PartialEq>(a: &[T], b: &[T]) -> bool {
    if a.len() != b.len() {
        return false;
    }
    if a.is_empty() {
        return true;
    }
    (0..a.len()).any(|shift| (0..a.len()).all(|i| a[i] == b[(i + shift) % b.len()]))
}

/// Equality of cyclic sequences up to rotation after reversing the second.
pub fn cyclic_eq_reversed<T: PartialEq + Clone>(a: &[T], b: &[T]) -> bool {
    let mut rev: Vec<T> = b.to_vec();
    rev.reverse();
    cyclic_eq(a, &rev)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn sphere_graph_is_valid() {
        let doc = fixtures::sphere();
        let report = doc.graph.validate();
        assert!(report.is_valid(), "unexpected violations:\n{report}");
    }

    #[test]
    fn revalidation_is_stable() {
        let doc = fixtures::sphere();
        assert_eq!(doc.graph.validate(), doc.graph.validate());
    }

    #[test]
    fn saddle_with_three_incoming_ends_violates_p4() {
        // One saddle, three stable edges in, one unstable out.
        let saddle = VertexId(0);
        let src = VertexId(1);
        let sink = VertexId(2);
        let edges: Vec<Edge> = (0..4)
            .map(|i| Edge {
                id: EdgeId(i),
                name: format!("e{i}"),
                saddle,
                sigma: if i < 3 { Sigma::S } else { Sigma::U },
                outer: OuterEnd::Vertex(if i < 3 { src } else { sink }),
            })
            .collect();
        let spin_of = |ids: &[(u32, EndKind)]| {
            ids.iter()
                .map(|&(e, end)| SpinEntry {
                    edge: EdgeId(e),
                    end,
                })
                .collect::<Vec<_>>()
        };
        let vertices = vec![
            Vertex {
                id: saddle,
                name: "x1".into(),
                kind: VertexKind::Saddle,
                weight: Sign::Plus,
                spin: spin_of(&[
                    (0, EndKind::In),
                    (1, EndKind::In),
                    (2, EndKind::In),
                    (3, EndKind::Out),
                ]),
            },
            Vertex {
                id: src,
                name: "a1".into(),
                kind: VertexKind::Source,
                weight: Sign::Plus,
                spin: spin_of(&[(0, EndKind::Out), (1, EndKind::Out), (2, EndKind::Out)]),
            },
            Vertex {
                id: sink,
                name: "b1".into(),
                kind: VertexKind::Sink,
                weight: Sign::Plus,
                spin: spin_of(&[(3, EndKind::In)]),
            },
        ];
        let g = DistinguishingGraph::new(
            vertices,
            edges,
            BTreeMap::new(),
            BTreeMap::new(),
            ManifoldTable::new(),
        );
        let report = g.validate();
        assert!(report.violations.iter().any(|v| v.rule == "P4"));
    }

    #[test]
    fn edge_between_source_and_sink_violates_p5() {
        let src = VertexId(0);
        let sink = VertexId(1);
        let e = Edge {
            id: EdgeId(0),
            name: "e0".into(),
            saddle: src, // not a saddle: property 5 violation
            sigma: Sigma::U,
            outer: OuterEnd::Vertex(sink),
        };
        let vertices = vec![
            Vertex {
                id: src,
                name: "a1".into(),
                kind: VertexKind::Source,
                weight: Sign::Plus,
                spin: vec![SpinEntry {
                    edge: EdgeId(0),
                    end: EndKind::Out,
                }],
            },
            Vertex {
                id: sink,
                name: "b1".into(),
                kind: VertexKind::Sink,
                weight: Sign::Plus,
                spin: vec![SpinEntry {
                    edge: EdgeId(0),
                    end: EndKind::In,
                }],
            },
        ];
        let g = DistinguishingGraph::new(
            vertices,
            vec![e],
            BTreeMap::new(),
            BTreeMap::new(),
            ManifoldTable::new(),
        );
        let report = g.validate();
        assert!(report.violations.iter().any(|v| v.rule == "P5"));
    }

    #[test]
    fn beh_zero_without_path() {
        let doc = fixtures::sphere();
        let inc = BehIncidence::from_coding_set(&doc.basic);
        let x1 = doc.graph.vertex_by_name("x1").unwrap().id;
        let x3 = doc.graph.vertex_by_name("x3").unwrap().id;
        assert_eq!(doc.graph.beh(&inc, x3, x1).unwrap(), 0);
    }

    #[test]
    fn beh_on_sphere_incidence_is_two() {
        let doc = fixtures::sphere();
        let inc = BehIncidence::from_coding_set(&doc.basic);
        let x1 = doc.graph.vertex_by_name("x1").unwrap().id;
        let x2 = doc.graph.vertex_by_name("x2").unwrap().id;
        let x3 = doc.graph.vertex_by_name("x3").unwrap().id;
        assert_eq!(doc.graph.beh(&inc, x1, x3).unwrap(), 2);
        assert_eq!(doc.graph.beh(&inc, x1, x2).unwrap(), 1);
        assert_eq!(doc.graph.beh(&inc, x2, x3).unwrap(), 1);
    }

    #[test]
    fn beh_linear_chain_of_four() {
        let doc = fixtures::four_saddle_chain();
        let inc = BehIncidence::from_coding_set(&doc.basic);
        let first = doc.graph.vertex_by_name("x0").unwrap().id;
        let last = doc.graph.vertex_by_name("x3").unwrap().id;
        assert_eq!(doc.graph.beh(&inc, first, last).unwrap(), 3);
    }

    #[test]
    fn beh_rejects_non_saddles() {
        let doc = fixtures::sphere();
        let inc = BehIncidence::from_coding_set(&doc.basic);
        let sink = doc.graph.vertex_by_name("b1").unwrap().id;
        let x1 = doc.graph.vertex_by_name("x1").unwrap().id;
        assert!(matches!(
            doc.graph.beh(&inc, sink, x1),
            Err(BehError::NotSaddle(_))
        ));
    }

    #[test]
    fn apply_sf_trivial_permutation_is_identity() {
        let doc = fixtures::sphere();
        for v in doc.graph.vertices() {
            for k in [-3, -1, 0, 1, 5] {
                assert_eq!(doc.graph.apply_sf(v.id, k).unwrap(), v.id);
            }
        }
    }

    #[test]
    fn apply_sf_two_cycle() {
        let a = VertexId(0);
        let b = VertexId(1);
        let vertices = vec![
            Vertex {
                id: a,
                name: "p".into(),
                kind: VertexKind::Sink,
                weight: Sign::Plus,
                spin: vec![],
            },
            Vertex {
                id: b,
                name: "q".into(),
                kind: VertexKind::Sink,
                weight: Sign::Plus,
                spin: vec![],
            },
        ];
        let mut perm = BTreeMap::new();
        perm.insert(a, b);
        perm.insert(b, a);
        let g = DistinguishingGraph::new(
            vertices,
            vec![],
            perm,
            BTreeMap::new(),
            ManifoldTable::new(),
        );
        assert_eq!(g.apply_sf(a, 1).unwrap(), b);
        assert_eq!(g.apply_sf(a, -3).unwrap(), b);
        assert_eq!(g.apply_sf(a, 2).unwrap(), a);
    }

    #[test]
    fn beh_is_sf_conjugation_invariant_on_fixtures() {
        for doc in [fixtures::sphere(), fixtures::four_saddle_chain()] {
            let inc = BehIncidence::from_coding_set(&doc.basic);
            let saddles: Vec<VertexId> = doc.graph.saddles().map(|v| v.id).collect();
            for &a in &saddles {
                for &b in &saddles {
                    let lhs = doc.graph.beh(&inc, a, b).unwrap();
                    let rhs = doc
                        .graph
                        .beh(&inc, doc.graph.sf_vertex(a), doc.graph.sf_vertex(b))
                        .unwrap();
                    assert_eq!(lhs, rhs);
                }
            }
        }
    }
}
