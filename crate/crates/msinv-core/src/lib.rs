//! Symbolic machinery for two-dimensional Morse-Smale diffeomorphisms.
//!
//! A diffeomorphism with finitely many periodic points is represented here by
//! a finite combinatorial object: an oriented graph with spin (every vertex is
//! an oriented circle of edge-ends) together with a basic coding set of
//! integer formulas describing the heteroclinic trajectories of low local
//! type. From that seed the crate
//!
//! * expands the basic coding set into the extended coding set describing
//!   *all* heteroclinic trajectories ([`expansion`]),
//! * instantiates coding sets over finite parameter windows and checks the
//!   structural laws they must obey ([`enumeration`]),
//! * decides whether two represented diffeomorphisms are topologically
//!   conjugate by searching for an isomorphism of their distinguishing
//!   graphs ([`conjugacy`]),
//! * reads and writes a line-oriented text format for all of the above
//!   ([`mod@format`]).
//!
//! [`fixtures`] bundles a worked sphere example (two sources, three sinks,
//! three saddles, heteroclinic points of local types 1 and 2) plus small
//! synthetic chains used throughout the test suite.

pub mod coding;
pub mod conjugacy;
pub mod enumeration;
pub mod expansion;
pub mod fixtures;
pub mod format;
pub mod graph;

pub use coding::{
    compare_positions, flip_orientation, local_type, orbit_shift, position_key, shift_numeration,
    validate_basic, AffineFn, CodingError, CodingKind, CodingSet, ComponentFn, FormulaSide,
    IntDomain, LinearConstraint, ManifoldInfo, ManifoldTable, ParamFormula, PointVector,
    PositionKey, SimpleFormula,
};
pub use conjugacy::{
    coding_sets_match, crosscheck_extended, decide_conjugacy, graph_isomorphisms, ConjugacyError,
    GraphIso, IsoWitness,
};
pub use enumeration::{
    check_accumulation, check_additivity, check_equivariance, check_injectivity,
    check_type1_finiteness, enumerate_window, Instance, PointCloud, Window,
};
pub use expansion::{
    build_extended, expand_general, expand_type2, seed_type1, AssocKind, AssociatedFormula,
    ExpandError, ExpansionState,
};
pub use format::{parse, serialize, to_dot, Document, ParseError};
pub use graph::{
    BehError, BehIncidence, DistinguishingGraph, Edge, EdgeId, EndKind, GraphError, ManifoldId,
    OuterEnd, Sigma, Sign, SpinEntry, ValidationReport, Vertex, VertexId, VertexKind, Violation,
};
