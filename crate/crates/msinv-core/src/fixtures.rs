//! Bundled example data: a Morse-Smale diffeomorphism of the sphere with two
//! fixed sources, three fixed sinks, three fixed saddles, and heteroclinic
//! trajectories of local types 1 and 2, plus small synthetic saddle chains of
//! maximal local types 1, 2, and 3 used by the test suite.

use crate::coding::{flip_orientation, CodingKind, CodingSet};
use crate::format::{parse, parse_formula, Document};
use crate::graph::DistinguishingGraph;

/// The sphere demo document. The depth-2 formula on the odd trajectories'
/// back/front pair is marked reconstructed: it completes the extreme-seed
/// pattern of the other three but is redundant for the expansion itself.
pub const SPHERE_TEXT: &str = "\
graph {
  vertex a1 source +1 spin [s1x1:out, s2x2:out]
  vertex a2 source +1 spin [s2x1:out, s2x3:out]
  vertex b1 sink +1 spin [u2x1:in]
  vertex b2 sink +1 spin [u1x3:in, u2x2:in]
  vertex b3 sink +1 spin [u2x3:in]
  vertex x1 saddle +1 spin [s1x1:in, u2x1:out, s2x1:in, u1x1:out]
  vertex x2 saddle +1 spin [s1x2:in, u2x2:out, s2x2:in, u1x2:out]
  vertex x3 saddle +1 spin [s1x3:in, u2x3:out, s2x3:in, u1x3:out]
  edge s1x1 stable x1 a1
  edge s1x2 stable x2 free s.1.x2
  edge s1x3 stable x3 free s.1.x3
  edge s2x1 stable x1 a2
  edge s2x2 stable x2 a1
  edge s2x3 stable x3 a2
  edge u1x1 unstable x1 free u.1.x1
  edge u1x2 unstable x2 free u.1.x2
  edge u1x3 unstable x3 b2
  edge u2x1 unstable x1 b1
  edge u2x2 unstable x2 b2
  edge u2x3 unstable x3 b3
}
manifolds {
  s.1.x2 n=2 period=1
  s.1.x3 n=2 period=1
  u.1.x1 n=2 period=1
  u.1.x2 n=2 period=1
}
basic {
  (u.1.x1[2n], s.1.x2[2n], +1)
  (u.1.x1[2n+1], s.1.x2[2n+1], -1)
  (u.1.x1[2n, -2], s.1.x3[2n+1, -1], +1)
  (u.1.x1[2n, -1], s.1.x3[2n+2, 1], +1)
  (u.1.x1[2n+1, 1], s.1.x3[2n+2, 2], -1)
  # reconstructed seed completing the extreme pattern; redundant for expansion
  (u.1.x1[2n+1, 2], s.1.x3[2n+1, -2], -1)
  (u.1.x2[2n], s.1.x3[2n], +1)
  (u.1.x2[2n+1], s.1.x3[2n+1], -1)
}
";

const TWO_SADDLE_TEXT: &str = "\
graph {
  vertex a1 source +1 spin [s1x0:out, s2x0:out]
  vertex a2 source +1 spin [s2x1:out]
  vertex b1 sink +1 spin [u2x0:in]
  vertex b2 sink +1 spin [u1x1:in, u2x1:in]
  vertex x0 saddle +1 spin [s1x0:in, u1x0:out, s2x0:in, u2x0:out]
  vertex x1 saddle +1 spin [s1x1:in, u1x1:out, s2x1:in, u2x1:out]
  edge s1x0 stable x0 a1
  edge s1x1 stable x1 free s.1.x1
  edge s2x0 stable x0 a1
  edge s2x1 stable x1 a2
  edge u1x0 unstable x0 free u.1.x0
  edge u1x1 unstable x1 b2
  edge u2x0 unstable x0 b1
  edge u2x1 unstable x1 b2
}
manifolds {
  s.1.x1 n=1 period=1
  u.1.x0 n=1 period=1
}
basic {
  (u.1.x0[n], s.1.x1[n], +1)
}
";

const THREE_SADDLE_TEXT: &str = "\
graph {
  vertex a1 source +1 spin [s1x0:out, s2x0:out]
  vertex a2 source +1 spin [s2x1:out, s2x2:out]
  vertex b1 sink +1 spin [u2x0:in]
  vertex b2 sink +1 spin [u1x2:in, u2x1:in]
  vertex b3 sink +1 spin [u2x2:in]
  vertex x0 saddle +1 spin [s1x0:in, u1x0:out, s2x0:in, u2x0:out]
  vertex x1 saddle -1 spin [s1x1:in, u1x1:out, s2x1:in, u2x1:out]
  vertex x2 saddle +1 spin [s1x2:in, u1x2:out, s2x2:in, u2x2:out]
  edge s1x0 stable x0 a1
  edge s1x1 stable x1 free s.1.x1
  edge s1x2 stable x2 free s.1.x2
  edge s2x0 stable x0 a1
  edge s2x1 stable x1 a2
  edge s2x2 stable x2 a2
  edge u1x0 unstable x0 free u.1.x0
  edge u1x1 unstable x1 free u.1.x1
  edge u1x2 unstable x2 b2
  edge u2x0 unstable x0 b1
  edge u2x1 unstable x1 b2
  edge u2x2 unstable x2 b3
}
manifolds {
  s.1.x1 n=1 period=1
  s.1.x2 n=1 period=1
  u.1.x0 n=1 period=1
  u.1.x1 n=1 period=1
}
basic {
  (u.1.x0[n], s.1.x1[n], -1)
  (u.1.x0[n, 1], s.1.x2[n+1, 1], -1)
  (u.1.x1[n], s.1.x2[n], +1)
}
";

const FOUR_SADDLE_TEXT: &str = "\
graph {
  vertex a1 source +1 spin [s1x0:out, s2x0:out]
  vertex a2 source +1 spin [s2x1:out, s2x2:out]
  vertex a3 source +1 spin [s2x3:out]
  vertex b1 sink +1 spin [u2x0:in]
  vertex b2 sink +1 spin [u2x1:in]
  vertex b3 sink +1 spin [u1x3:in, u2x2:in]
  vertex b4 sink +1 spin [u2x3:in]
  vertex x0 saddle +1 spin [s1x0:in, u1x0:out, s2x0:in, u2x0:out]
  vertex x1 saddle +1 spin [s1x1:in, u1x1:out, s2x1:in, u2x1:out]
  vertex x2 saddle +1 spin [s1x2:in, u1x2:out, s2x2:in, u2x2:out]
  vertex x3 saddle +1 spin [s1x3:in, u1x3:out, s2x3:in, u2x3:out]
  edge s1x0 stable x0 a1
  edge s1x1 stable x1 free s.1.x1
  edge s1x2 stable x2 free s.1.x2
  edge s1x3 stable x3 free s.1.x3
  edge s2x0 stable x0 a1
  edge s2x1 stable x1 a2
  edge s2x2 stable x2 a2
  edge s2x3 stable x3 a3
  edge u1x0 unstable x0 free u.1.x0
  edge u1x1 unstable x1 free u.1.x1
  edge u1x2 unstable x2 free u.1.x2
  edge u1x3 unstable x3 b3
  edge u2x0 unstable x0 b1
  edge u2x1 unstable x1 b2
  edge u2x2 unstable x2 b3
  edge u2x3 unstable x3 b4
}
manifolds {
  s.1.x1 n=1 period=1
  s.1.x2 n=1 period=1
  s.1.x3 n=1 period=1
  u.1.x0 n=1 period=1
  u.1.x1 n=1 period=1
  u.1.x2 n=1 period=1
}
basic {
  (u.1.x0[n], s.1.x1[n], +1)
  (u.1.x0[n, 1], s.1.x2[n+1, 1], +1)
  (u.1.x0[n, 1, -1], s.1.x3[n+2, 1, 1], +1)
  (u.1.x1[n], s.1.x2[n], +1)
  (u.1.x1[n, 1], s.1.x3[n+1, 1], +1)
  (u.1.x2[n], s.1.x3[n], +1)
}
";

const DOUBLE_FEEDER_TEXT: &str = "\
graph {
  vertex a1 source +1 spin [s1x0:out, s2x0:out]
  vertex a2 source +1 spin [s2x1:out, s2x2:out]
  vertex a3 source +1 spin [s1xa:out, s2xa:out]
  vertex b1 sink +1 spin [u2x0:in]
  vertex b2 sink +1 spin [u2x1:in]
  vertex b3 sink +1 spin [u1x2:in]
  vertex b4 sink +1 spin [u2x2:in]
  vertex b5 sink +1 spin [u2xa:in]
  vertex x0 saddle +1 spin [s1x0:in, u1x0:out, s2x0:in, u2x0:out]
  vertex x1 saddle +1 spin [s1x1:in, u1x1:out, s2x1:in, u2x1:out]
  vertex x2 saddle +1 spin [s1x2:in, u1x2:out, s2x2:in, u2x2:out]
  vertex xa saddle +1 spin [s1xa:in, u1xa:out, s2xa:in, u2xa:out]
  edge s1x0 stable x0 a1
  edge s1x1 stable x1 free s.1.x1
  edge s1x2 stable x2 free s.1.x2
  edge s1xa stable xa a3
  edge s2x0 stable x0 a1
  edge s2x1 stable x1 a2
  edge s2x2 stable x2 a2
  edge s2xa stable xa a3
  edge u1x0 unstable x0 free u.1.x0
  edge u1x1 unstable x1 free u.1.x1
  edge u1x2 unstable x2 b3
  edge u1xa unstable xa free u.1.xa
  edge u2x0 unstable x0 b1
  edge u2x1 unstable x1 b2
  edge u2x2 unstable x2 b4
  edge u2xa unstable xa b5
}
manifolds {
  s.1.x1 n=2 period=1
  s.1.x2 n=1 period=1
  u.1.x0 n=1 period=1
  u.1.x1 n=1 period=1
  u.1.xa n=1 period=1
}
basic {
  (u.1.x0[n], s.1.x1[2n], +1)
  (u.1.x0[n, 1], s.1.x2[n+1, 1], +1)
  (u.1.x1[n], s.1.x2[n], +1)
  (u.1.xa[n], s.1.x1[2n+1], +1)
  (u.1.xa[n, 1], s.1.x2[n+1, 2], +1)
}
";

const BRANCHED_TOWER_TEXT: &str = "\
graph {
  vertex a1 source +1 spin [s1x0:out, s2x0:out]
  vertex a2 source +1 spin [s2x1:out, s2x2:out, s2x3:out]
  vertex a3 source +1 spin [s1xa:out, s2xa:out]
  vertex b1 sink +1 spin [u2x0:in]
  vertex b2 sink +1 spin [u2x1:in]
  vertex b3 sink +1 spin [u1x3:in]
  vertex b4 sink +1 spin [u2x2:in]
  vertex b5 sink +1 spin [u2xa:in]
  vertex b6 sink +1 spin [u2x3:in]
  vertex x0 saddle +1 spin [s1x0:in, u1x0:out, s2x0:in, u2x0:out]
  vertex x1 saddle +1 spin [s1x1:in, u1x1:out, s2x1:in, u2x1:out]
  vertex x2 saddle +1 spin [s1x2:in, u1x2:out, s2x2:in, u2x2:out]
  vertex x3 saddle +1 spin [s1x3:in, u1x3:out, s2x3:in, u2x3:out]
  vertex xa saddle +1 spin [s1xa:in, u1xa:out, s2xa:in, u2xa:out]
  edge s1x0 stable x0 a1
  edge s1x1 stable x1 free s.1.x1
  edge s1x2 stable x2 free s.1.x2
  edge s1x3 stable x3 free s.1.x3
  edge s1xa stable xa a3
  edge s2x0 stable x0 a1
  edge s2x1 stable x1 a2
  edge s2x2 stable x2 a2
  edge s2x3 stable x3 a2
  edge s2xa stable xa a3
  edge u1x0 unstable x0 free u.1.x0
  edge u1x1 unstable x1 free u.1.x1
  edge u1x2 unstable x2 free u.1.x2
  edge u1x3 unstable x3 b3
  edge u1xa unstable xa free u.1.xa
  edge u2x0 unstable x0 b1
  edge u2x1 unstable x1 b2
  edge u2x2 unstable x2 b4
  edge u2x3 unstable x3 b6
  edge u2xa unstable xa b5
}
manifolds {
  s.1.x1 n=2 period=1
  s.1.x2 n=1 period=1
  s.1.x3 n=1 period=1
  u.1.x0 n=1 period=1
  u.1.x1 n=1 period=1
  u.1.x2 n=1 period=1
  u.1.xa n=1 period=1
}
basic {
  (u.1.x0[n], s.1.x1[2n], +1)
  (u.1.x0[n, 1], s.1.x2[n+1, 1], +1)
  (u.1.x0[n, 1, -1], s.1.x3[n+2, 1, 1], +1)
  (u.1.x1[n], s.1.x2[n], +1)
  (u.1.x1[n, 1], s.1.x3[n+1, 1], +1)
  (u.1.x2[n], s.1.x3[n], +1)
  (u.1.xa[n], s.1.x1[2n+1], +1)
  (u.1.xa[n, 1], s.1.x2[n+1, 2], +1)
  (u.1.xa[n, 1, -1], s.1.x3[n+2, 1, 2], +1)
}
";

/// Drops comments and blank lines; what the canonical serializer emits for
/// the same document.
pub fn strip_comments(text: &str) -> String {
    let mut out = String::new();
    for line in text.lines() {
        let body = match line.find('#') {
            Some(p) => &line[..p],
            None => line,
        };
        if body.trim().is_empty() {
            continue;
        }
        out.push_str(body.trim_end());
        out.push('\n');
    }
    out
}

/// The sphere demo: 2 sources, 3 sinks, 3 saddles, heteroclinic points of
/// local types 1 and 2, trivial permutation.
pub fn sphere() -> Document {
    parse(SPHERE_TEXT).expect("bundled sphere fixture must parse")
}

pub fn two_saddle_chain() -> Document {
    parse(TWO_SADDLE_TEXT).expect("bundled fixture must parse")
}

pub fn three_saddle_chain() -> Document {
    parse(THREE_SADDLE_TEXT).expect("bundled fixture must parse")
}

pub fn four_saddle_chain() -> Document {
    parse(FOUR_SADDLE_TEXT).expect("bundled fixture must parse")
}

/// Two saddles feeding the stable manifold of a third: the manifold carries
/// two local-type-1 trajectories per fundamental domain while each feeder
/// carries one, so the neighborhoods interleave with unequal counts.
pub fn double_feeder_chain() -> Document {
    parse(DOUBLE_FEEDER_TEXT).expect("bundled fixture must parse")
}

/// The double-feeder configuration extended one saddle deeper: the feeders'
/// points reach local type 3, and their families must interleave on the
/// deepest stable manifold as well.
pub fn branched_tower() -> Document {
    parse(BRANCHED_TOWER_TEXT).expect("bundled fixture must parse")
}

fn formulas(g: &DistinguishingGraph, lines: &[&str]) -> Vec<crate::coding::ParamFormula> {
    lines
        .iter()
        .map(|l| parse_formula(l, g).expect("fixture formula must parse"))
        .collect()
}

/// The full extended coding set of the sphere demo, written out by hand in
/// the anchored parametrization. The last family carries the
/// consistency-restoring second unstable component `2k1+2`: paired with the
/// sixth family it fills the back sets of the odd trajectories without
/// claiming any unstable address twice (compare
/// [`sphere_extended_with_duplicate_u_parts`]).
pub fn sphere_extended_reference() -> CodingSet {
    let doc = sphere();
    CodingSet::new(
        CodingKind::Extended,
        formulas(
            &doc.graph,
            &[
                "(u.1.x1[2n], s.1.x2[2n], +1)",
                "(u.1.x1[2n+1], s.1.x2[2n+1], -1)",
                "(u.1.x2[2n], s.1.x3[2n], +1)",
                "(u.1.x2[2n+1], s.1.x3[2n+1], -1)",
                "(u.1.x1[2n+2k1, -2k1-1], s.1.x3[2n+2, 2k1+1], +1; k1>=0)",
                "(u.1.x1[2n+2k1+1, 2k1+1], s.1.x3[2n+2, 2k1+2], -1; k1>=0)",
                "(u.1.x1[2n+2k1, -2k1-2], s.1.x3[2n+1, -2k1-1], +1; k1>=0)",
                "(u.1.x1[2n+2k1+1, 2k1+2], s.1.x3[2n+1, -2k1-2], -1; k1>=0)",
            ],
        ),
    )
}

/// A variant of the extended set in which the last family repeats the sixth
/// family's unstable addresses `(2n+2k1+1, 2k1+1)`: two distinct points per
/// address. The injectivity check pinpoints exactly this overlap.
pub fn sphere_extended_with_duplicate_u_parts() -> CodingSet {
    let doc = sphere();
    CodingSet::new(
        CodingKind::Extended,
        formulas(
            &doc.graph,
            &[
                "(u.1.x1[2n], s.1.x2[2n], +1)",
                "(u.1.x1[2n+1], s.1.x2[2n+1], -1)",
                "(u.1.x2[2n], s.1.x3[2n], +1)",
                "(u.1.x2[2n+1], s.1.x3[2n+1], -1)",
                "(u.1.x1[2n+2k1, -2k1-1], s.1.x3[2n+2, 2k1+1], +1; k1>=0)",
                "(u.1.x1[2n+2k1+1, 2k1+1], s.1.x3[2n+2, 2k1+2], -1; k1>=0)",
                "(u.1.x1[2n+2k1, -2k1-2], s.1.x3[2n+1, -2k1-1], +1; k1>=0)",
                "(u.1.x1[2n+2k1+1, 2k1+1], s.1.x3[2n+1, -2k1-2], -1; k1>=0)",
            ],
        ),
    )
}

/// The sphere demo with the surface orientation reversed: every vertex spin
/// read backwards and every orientation component negated.
pub fn sphere_fully_flipped() -> Document {
    let doc = sphere();
    let vertices = doc
        .graph
        .vertices()
        .cloned()
        .map(|mut v| {
            v.spin.reverse();
            v
        })
        .collect();
    let edges = doc.graph.edges().cloned().collect();
    let graph = DistinguishingGraph::new(
        vertices,
        edges,
        doc.graph.vertex_perm().clone(),
        doc.graph.edge_perm().clone(),
        doc.graph.manifolds.clone(),
    );
    Document {
        graph,
        basic: flip_orientation(&doc.basic),
        extended: None,
    }
}
