//! Decides topological conjugacy of two represented diffeomorphisms by
//! exhaustive structured search: enumerate isomorphisms of the
//! distinguishing graphs (vertex bijections preserving kind, weight, spin up
//! to rotation, and conjugating the permutations), then try to match the
//! basic coding sets by renumbering shifts. The extended sets are determined
//! by the basic data, so matching the basic sets suffices;
//! [`crosscheck_extended`] offers independent confirmation on windows.
//!
//! The renumbering of periodic points is identified with the graph
//! isomorphism's vertex map and the renumbering of separatrices with its
//! edge map: a match of the coding sets under maps incompatible with the
//! graph structure would not certify conjugacy, so free-standing
//! renumberings are never searched.

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::coding::{flip_orientation, CodingSet, ParamFormula};
use crate::graph::{
    cyclic_eq, cyclic_eq_reversed, DistinguishingGraph, Edge, EdgeId, ManifoldId, OuterEnd, Sign,
    SpinEntry, VertexId,
};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ConjugacyError {
    #[error("input rejected by validation:\n{0}")]
    InvalidInput(String),
}

/// A graph isomorphism: compatible vertex and edge bijections.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GraphIso {
    pub phi: BTreeMap<VertexId, VertexId>,
    pub edge_map: BTreeMap<EdgeId, EdgeId>,
}

impl GraphIso {
    /// The induced bijection of free-edge manifolds.
    pub fn psi(&self, gf: &DistinguishingGraph, gg: &DistinguishingGraph) -> BTreeMap<ManifoldId, ManifoldId> {
        let mut psi = BTreeMap::new();
        for (ef, mf) in gf.free_edges() {
            if let Some(&eg) = self.edge_map.get(&ef.id) {
                if let Some(OuterEnd::Free(mg)) = gg.edge(eg).map(|e| e.outer) {
                    psi.insert(mf, mg);
                }
            }
        }
        psi
    }
}

/// A full conjugacy witness: orientation change, graph isomorphism, manifold
/// bijection, and the numeration shifts aligning the basic coding sets.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IsoWitness {
    pub r: Sign,
    pub phi: BTreeMap<VertexId, VertexId>,
    pub edge_map: BTreeMap<EdgeId, EdgeId>,
    pub psi: BTreeMap<ManifoldId, ManifoldId>,
    pub shifts: BTreeMap<ManifoldId, i64>,
}

impl IsoWitness {
    /// The same witness read in the opposite direction.
    pub fn invert(&self) -> IsoWitness {
        let phi = self.phi.iter().map(|(&a, &b)| (b, a)).collect();
        let edge_map = self.edge_map.iter().map(|(&a, &b)| (b, a)).collect();
        let psi: BTreeMap<ManifoldId, ManifoldId> =
            self.psi.iter().map(|(&a, &b)| (b, a)).collect();
        let shifts = self
            .psi
            .iter()
            .map(|(&a, &b)| (b, -self.shifts.get(&a).copied().unwrap_or(0)))
            .collect();
        IsoWitness {
            r: self.r,
            phi,
            edge_map,
            psi,
            shifts,
        }
    }
}

/// Enumerates every isomorphism from `gf` to `gg` for the given orientation
/// change, in lexicographic order of the vertex map. With `r = -1` the spins
/// must match with reversed cyclic order.
pub fn graph_isomorphisms(
    gf: &DistinguishingGraph,
    gg: &DistinguishingGraph,
    r: Sign,
) -> Vec<GraphIso> {
    let mut out = Vec::new();
    for_each_graph_isomorphism(gf, gg, r, &mut |iso| {
        out.push(iso.clone());
        false
    });
    out
}

/// Visits isomorphisms in deterministic order until the callback returns
/// `true`.
pub fn for_each_graph_isomorphism(
    gf: &DistinguishingGraph,
    gg: &DistinguishingGraph,
    r: Sign,
    visit: &mut dyn FnMut(&GraphIso) -> bool,
) {
    if gf.vertex_count() != gg.vertex_count()
        || gf.edges().count() != gg.edges().count()
        || gf.saddles().count() != gg.saddles().count()
    {
        return;
    }
    // Saddles first: they carry the edges, so assigning them early lets the
    // outer-end pruning pin the sinks and sources almost uniquely.
    let mut fv: Vec<VertexId> = gf.vertices().map(|v| v.id).collect();
    fv.sort_by_key(|&v| {
        (
            gf.vertex(v).map(|x| x.kind) != Some(crate::graph::VertexKind::Saddle),
            v,
        )
    });
    let gverts: Vec<VertexId> = gg.vertices().map(|v| v.id).collect();
    let mut phi: BTreeMap<VertexId, VertexId> = BTreeMap::new();
    let mut used: BTreeSet<VertexId> = BTreeSet::new();
    assign_vertices(gf, gg, r, &fv, &gverts, 0, &mut phi, &mut used, visit);
}

/// Partial-assignment pruning: every edge arriving at `a` from an
/// already-mapped saddle must have a counterpart at `b` from the image
/// saddle, direction included.
fn outer_edges_compatible(
    gf: &DistinguishingGraph,
    gg: &DistinguishingGraph,
    a: VertexId,
    b: VertexId,
    phi: &BTreeMap<VertexId, VertexId>,
) -> bool {
    let mut known: Vec<(VertexId, crate::graph::Sigma)> = gf
        .edges()
        .filter(|e| e.outer == OuterEnd::Vertex(a))
        .filter_map(|e| phi.get(&e.saddle).map(|&s| (s, e.sigma)))
        .collect();
    known.sort();
    let mut have: Vec<(VertexId, crate::graph::Sigma)> = gg
        .edges()
        .filter(|e| e.outer == OuterEnd::Vertex(b))
        .map(|e| (e.saddle, e.sigma))
        .collect();
    have.sort();
    // Every known requirement must be available (multiset inclusion).
    let mut i = 0;
    for need in known {
        loop {
            if i >= have.len() {
                return false;
            }
            if have[i] == need {
                i += 1;
                break;
            }
            if have[i] > need {
                return false;
            }
            i += 1;
        }
    }
    true
}

#[allow(clippy::too_many_arguments)]
fn assign_vertices(
    gf: &DistinguishingGraph,
    gg: &DistinguishingGraph,
    r: Sign,
    fv: &[VertexId],
    gverts: &[VertexId],
    depth: usize,
    phi: &mut BTreeMap<VertexId, VertexId>,
    used: &mut BTreeSet<VertexId>,
    visit: &mut dyn FnMut(&GraphIso) -> bool,
) -> bool {
    if depth == fv.len() {
        // The vertex permutations must be conjugate.
        for &v in fv {
            if phi[&gf.sf_vertex(v)] != gg.sf_vertex(phi[&v]) {
                return false;
            }
        }
        let mut edge_map = BTreeMap::new();
        return assign_edges(gf, gg, r, phi, &mut edge_map, visit);
    }
    let v = fv[depth];
    let vf = gf.vertex(v).expect("listed vertex");
    for &w in gverts {
        if used.contains(&w) {
            continue;
        }
        let vg = gg.vertex(w).expect("listed vertex");
        if vf.kind != vg.kind || vf.weight != vg.weight || vf.spin.len() != vg.spin.len() {
            continue;
        }
        if !edge_profile_matches(gf, gg, vf.id, vg.id) {
            continue;
        }
        if !outer_edges_compatible(gf, gg, vf.id, vg.id, phi) {
            continue;
        }
        phi.insert(v, w);
        used.insert(w);
        if assign_vertices(gf, gg, r, fv, gverts, depth + 1, phi, used, visit) {
            return true;
        }
        phi.remove(&v);
        used.remove(&w);
    }
    false
}

/// Multiset of incident edge shapes, a cheap pruning invariant.
fn edge_profile_matches(
    gf: &DistinguishingGraph,
    gg: &DistinguishingGraph,
    a: VertexId,
    b: VertexId,
) -> bool {
    fn profile(g: &DistinguishingGraph, v: VertexId) -> Vec<(crate::graph::Sigma, u8)> {
        let mut p: Vec<(crate::graph::Sigma, u8)> = g
            .edges()
            .filter(|e| e.saddle == v || e.outer == OuterEnd::Vertex(v))
            .map(|e| {
                let shape = match e.outer {
                    OuterEnd::Free(_) => 2u8,
                    OuterEnd::Vertex(o) if o == v && e.saddle != v => 1,
                    OuterEnd::Vertex(_) => 0,
                };
                (e.sigma, shape)
            })
            .collect();
        p.sort();
        p
    }
    profile(gf, a) == profile(gg, b)
}

fn edge_candidates(gg: &DistinguishingGraph, ef: &Edge, phi: &BTreeMap<VertexId, VertexId>) -> Vec<EdgeId> {
    gg.edges()
        .filter(|eg| {
            eg.sigma == ef.sigma
                && eg.saddle == phi[&ef.saddle]
                && match (ef.outer, eg.outer) {
                    (OuterEnd::Vertex(a), OuterEnd::Vertex(b)) => phi[&a] == b,
                    (OuterEnd::Free(ma), OuterEnd::Free(mb)) => {
                        mb.sigma == ma.sigma && mb.saddle == phi[&ma.saddle]
                    }
                    _ => false,
                }
        })
        .map(|e| e.id)
        .collect()
}

fn assign_edges(
    gf: &DistinguishingGraph,
    gg: &DistinguishingGraph,
    r: Sign,
    phi: &BTreeMap<VertexId, VertexId>,
    edge_map: &mut BTreeMap<EdgeId, EdgeId>,
    visit: &mut dyn FnMut(&GraphIso) -> bool,
) -> bool {
    let fe: Vec<EdgeId> = gf.edges().map(|e| e.id).collect();
    #[allow(clippy::too_many_arguments)]
    fn rec(
        gf: &DistinguishingGraph,
        gg: &DistinguishingGraph,
        r: Sign,
        phi: &BTreeMap<VertexId, VertexId>,
        fe: &[EdgeId],
        depth: usize,
        edge_map: &mut BTreeMap<EdgeId, EdgeId>,
        used: &mut BTreeSet<EdgeId>,
        visit: &mut dyn FnMut(&GraphIso) -> bool,
    ) -> bool {
        if depth == fe.len() {
            // Edge permutations conjugate, spins rotation-compatible.
            for &e in fe {
                if edge_map[&gf.sf_edge(e)] != gg.sf_edge(edge_map[&e]) {
                    return false;
                }
            }
            for v in gf.vertices() {
                let mapped: Vec<SpinEntry> = v
                    .spin
                    .iter()
                    .map(|s| SpinEntry {
                        edge: edge_map[&s.edge],
                        end: s.end,
                    })
                    .collect();
                let target = &gg.vertex(phi[&v.id]).expect("mapped vertex").spin;
                let ok = match r {
                    Sign::Plus => cyclic_eq(&mapped, target),
                    Sign::Minus => cyclic_eq_reversed(&mapped, target),
                };
                if !ok {
                    return false;
                }
            }
            let iso = GraphIso {
                phi: phi.clone(),
                edge_map: edge_map.clone(),
            };
            return visit(&iso);
        }
        let ef = gf.edge(fe[depth]).expect("listed edge");
        for eg in edge_candidates(gg, ef, phi) {
            if used.contains(&eg) {
                continue;
            }
            edge_map.insert(ef.id, eg);
            used.insert(eg);
            if rec(gf, gg, r, phi, fe, depth + 1, edge_map, used, visit) {
                return true;
            }
            edge_map.remove(&ef.id);
            used.remove(&eg);
        }
        false
    }
    let mut used = BTreeSet::new();
    rec(gf, gg, r, phi, &fe, 0, edge_map, &mut used, visit)
}

/// A trajectory formula after renaming its manifolds and flipping its
/// orientation; kept with its original for diagnostics.
fn remap_formula(
    f: &ParamFormula,
    psi: &BTreeMap<ManifoldId, ManifoldId>,
    r: Sign,
) -> Option<ParamFormula> {
    let mut g = f.clone();
    g.u.manifold = *psi.get(&f.u.manifold)?;
    g.s.manifold = *psi.get(&f.s.manifold)?;
    if r == Sign::Minus {
        g.d = g.d.flip();
    }
    Some(g)
}

/// Structural equality of two trajectory formulas up to a translation of the
/// trajectory parameter and first-component offsets `(du, ds)`; returns the
/// translation when they match.
fn matches_with_offsets(
    f: &ParamFormula,
    g: &ParamFormula,
    du: i64,
    ds: i64,
    nu: i64,
    ns: i64,
) -> Option<i64> {
    if f.u.manifold != g.u.manifold || f.s.manifold != g.s.manifold || f.d != g.d {
        return None;
    }
    if f.u.components.len() != g.u.components.len() {
        return None;
    }
    // Deeper components and all step coefficients are invariants.
    if f.u.components[0].base.coeffs != g.u.components[0].base.coeffs
        || f.s.components[0].base.coeffs != g.s.components[0].base.coeffs
        || f.u.components[1..] != g.u.components[1..]
        || f.s.components[1..] != g.s.components[1..]
        || f.domain != g.domain
    {
        return None;
    }
    let diff_u = g.u.components[0].base.constant - (f.u.components[0].base.constant + du);
    let diff_s = g.s.components[0].base.constant - (f.s.components[0].base.constant + ds);
    if nu == 0 || diff_u % nu != 0 {
        return None;
    }
    let delta = diff_u / nu;
    (diff_s == ns * delta).then_some(delta)
}

/// Searches for per-manifold numeration shifts under which the first basic
/// set, relabeled along the isomorphism and orientation change, coincides
/// with the second as a set of trajectory formulas. Requires the
/// fundamental-domain tables to agree under the manifold bijection.
pub fn coding_sets_match(
    bf: &CodingSet,
    bg: &CodingSet,
    gf: &DistinguishingGraph,
    gg: &DistinguishingGraph,
    iso: &GraphIso,
    r: Sign,
) -> Option<BTreeMap<ManifoldId, i64>> {
    let psi = iso.psi(gf, gg);
    // Tables must correspond exactly.
    if gf.manifolds.len() != gg.manifolds.len() {
        return None;
    }
    for (m, info) in &gf.manifolds {
        let mg = psi.get(m)?;
        let target = gg.manifolds.get(mg)?;
        if info != target {
            return None;
        }
    }
    if bf.formulas.len() != bg.formulas.len() {
        return None;
    }
    let mapped: Option<Vec<ParamFormula>> = bf
        .formulas
        .iter()
        .map(|f| remap_formula(f, &psi, r))
        .collect();
    let mapped = mapped?;

    // Shifts are solved on the relabeled manifolds, then pulled back to the
    // original names at the end.
    let mut shifts_g: BTreeMap<ManifoldId, i64> = BTreeMap::new();
    let mut used = vec![false; bg.formulas.len()];
    let mut matched = vec![false; mapped.len()];
    if !match_rec(&mapped, bg, gg, &mut matched, &mut used, &mut shifts_g) {
        return None;
    }
    let mut shifts = BTreeMap::new();
    for (mf, mg) in &psi {
        shifts.insert(*mf, shifts_g.get(mg).copied().unwrap_or(0));
    }
    Some(shifts)
}

fn match_rec(
    mapped: &[ParamFormula],
    bg: &CodingSet,
    gg: &DistinguishingGraph,
    matched: &mut Vec<bool>,
    used: &mut Vec<bool>,
    shifts: &mut BTreeMap<ManifoldId, i64>,
) -> bool {
    // Prefer a formula touching an already-resolved manifold, so that every
    // connected component of the manifold-coupling graph is anchored exactly
    // once: the gauge freedom of trajectory translations is global per
    // component, which makes the fresh-anchor convention below complete.
    let next = (0..mapped.len())
        .filter(|&i| !matched[i])
        .min_by_key(|&i| {
            let f = &mapped[i];
            let touched = shifts.contains_key(&f.u.manifold) || shifts.contains_key(&f.s.manifold);
            (if touched { 0usize } else { 1 }, i)
        });
    let Some(idx) = next else {
        return true;
    };
    let f = &mapped[idx];
    let nu = gg.manifolds.get(&f.u.manifold).map_or(0, |i| i.n_fund);
    let ns = gg.manifolds.get(&f.s.manifold).map_or(0, |i| i.n_fund);
    for (gi, g) in bg.formulas.iter().enumerate() {
        if used[gi] {
            continue;
        }
        let su = shifts.get(&f.u.manifold).copied();
        let ss = shifts.get(&f.s.manifold).copied();
        // Candidate offsets: resolved shifts are fixed; a fresh pair is
        // gauged so this formula needs no extra translation.
        let candidates: Vec<(i64, i64)> = match (su, ss) {
            (Some(a), Some(b)) => vec![(a, b)],
            (Some(a), None) => {
                // Translation forced by the unstable side.
                let diff_u = g.u.components[0].base.constant - (f.u.components[0].base.constant + a);
                if nu == 0 || diff_u % nu != 0 {
                    continue;
                }
                let delta = diff_u / nu;
                let b = g.s.components[0].base.constant
                    - f.s.components[0].base.constant
                    - ns * delta;
                vec![(a, b)]
            }
            (None, Some(b)) => {
                let diff_s = g.s.components[0].base.constant - (f.s.components[0].base.constant + b);
                if ns == 0 || diff_s % ns != 0 {
                    continue;
                }
                let delta = diff_s / ns;
                let a = g.u.components[0].base.constant
                    - f.u.components[0].base.constant
                    - nu * delta;
                vec![(a, b)]
            }
            (None, None) => {
                let a = g.u.components[0].base.constant - f.u.components[0].base.constant;
                let b = g.s.components[0].base.constant - f.s.components[0].base.constant;
                vec![(a, b)]
            }
        };
        for (a, b) in candidates {
            if matches_with_offsets(f, g, a, b, nu, ns).is_none() {
                continue;
            }
            let had_u = shifts.contains_key(&f.u.manifold);
            let had_s = shifts.contains_key(&f.s.manifold);
            shifts.insert(f.u.manifold, a);
            shifts.insert(f.s.manifold, b);
            used[gi] = true;
            matched[idx] = true;
            if match_rec(mapped, bg, gg, matched, used, shifts) {
                return true;
            }
            matched[idx] = false;
            used[gi] = false;
            if !had_u {
                shifts.remove(&f.u.manifold);
            }
            if !had_s {
                shifts.remove(&f.s.manifold);
            }
        }
    }
    false
}

/// Decides topological conjugacy of two represented diffeomorphisms. Returns
/// the lexicographically least witness found by the deterministic search, or
/// `None` when the representations are not conjugate.
pub fn decide_conjugacy(
    gf: &DistinguishingGraph,
    bf: &CodingSet,
    gg: &DistinguishingGraph,
    bg: &CodingSet,
) -> Result<Option<IsoWitness>, ConjugacyError> {
    for (g, name) in [(gf, "first"), (gg, "second")] {
        let report = g.validate();
        if !report.is_valid() {
            return Err(ConjugacyError::InvalidInput(format!(
                "{name} graph:\n{report}"
            )));
        }
    }
    // Coding-set shape problems are hard errors; numeric mismatches such as
    // residue gaps are left to the matcher, which simply finds no witness.
    for (cs, g, name) in [(bf, gf, "first"), (bg, gg, "second")] {
        let report = crate::coding::validate_basic(cs, g);
        let hard: Vec<_> = report
            .violations
            .iter()
            .filter(|v| v.rule == "B-c" || v.rule == "B-d" || v.rule == "B-kind")
            .collect();
        if !hard.is_empty() {
            let text: Vec<String> = hard.iter().map(|v| v.to_string()).collect();
            return Err(ConjugacyError::InvalidInput(format!(
                "{name} coding set:\n{}",
                text.join("\n")
            )));
        }
    }

    let mut result: Option<IsoWitness> = None;
    for r in [Sign::Plus, Sign::Minus] {
        let bf_oriented = if r == Sign::Minus {
            flip_orientation(bf)
        } else {
            bf.clone()
        };
        // The orientation flip is applied to the formulas inside
        // `coding_sets_match` via `remap_formula`; `bf_oriented` is only used
        // to keep the candidate order deterministic.
        let _ = bf_oriented;
        for_each_graph_isomorphism(gf, gg, r, &mut |iso| {
            if let Some(shifts) = coding_sets_match(bf, bg, gf, gg, iso, r) {
                result = Some(IsoWitness {
                    r,
                    phi: iso.phi.clone(),
                    edge_map: iso.edge_map.clone(),
                    psi: iso.psi(gf, gg),
                    shifts,
                });
                true
            } else {
                false
            }
        });
        if result.is_some() {
            break;
        }
    }
    Ok(result)
}

/// Optional deeper verification of a witness: expands both basic sets and
/// checks that the witness maps the first windowed cloud into the second
/// (enumerated over a widened window to absorb parameter translations), and
/// conversely. The extended sets are determined by the basic data, so this
/// adds no decision power, only independent confirmation.
pub fn crosscheck_extended(
    gf: &DistinguishingGraph,
    bf: &CodingSet,
    gg: &DistinguishingGraph,
    bg: &CodingSet,
    witness: &IsoWitness,
    w: crate::enumeration::Window,
) -> Result<bool, crate::expansion::ExpandError> {
    use crate::enumeration::{enumerate_window, Window};
    let ef = crate::expansion::build_extended(bf, gf)?.extended;
    let eg = crate::expansion::build_extended(bg, gg)?.extended;
    let max_shift = witness.shifts.values().map(|s| s.abs()).max().unwrap_or(0);
    let margin = max_shift + w.k_max + 2;
    let wide = Window::new(w.t_min - margin, w.t_max + margin, w.k_max);

    let map_point = |p: &crate::coding::SimpleFormula| {
        let mut q = p.clone();
        if let Some(&s) = witness.shifts.get(&q.u.manifold) {
            q.u.components[0] += s;
        }
        if let Some(&s) = witness.shifts.get(&q.s.manifold) {
            q.s.components[0] += s;
        }
        q.u.manifold = *witness.psi.get(&q.u.manifold).unwrap_or(&q.u.manifold);
        q.s.manifold = *witness.psi.get(&q.s.manifold).unwrap_or(&q.s.manifold);
        if witness.r == Sign::Minus {
            q.d = q.d.flip();
        }
        q
    };

    let forward_target = enumerate_window(&eg, wide).point_set();
    for inst in &enumerate_window(&ef, w).instances {
        if !forward_target.contains(&map_point(&inst.point)) {
            return Ok(false);
        }
    }
    let inverse = witness.invert();
    let map_back = |p: &crate::coding::SimpleFormula| {
        let mut q = p.clone();
        q.u.manifold = *inverse.psi.get(&q.u.manifold).unwrap_or(&q.u.manifold);
        q.s.manifold = *inverse.psi.get(&q.s.manifold).unwrap_or(&q.s.manifold);
        if let Some(&s) = inverse.shifts.get(&q.u.manifold) {
            q.u.components[0] += s;
        }
        if let Some(&s) = inverse.shifts.get(&q.s.manifold) {
            q.s.components[0] += s;
        }
        if witness.r == Sign::Minus {
            q.d = q.d.flip();
        }
        q
    };
    let backward_target = enumerate_window(&ef, wide).point_set();
    for inst in &enumerate_window(&eg, w).instances {
        if !backward_target.contains(&map_back(&inst.point)) {
            return Ok(false);
        }
    }
    Ok(true)
}
