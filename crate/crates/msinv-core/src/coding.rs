//! Coding of heteroclinic points and trajectories: numbered position vectors
//! on separatrices, integer-affine formula families over linear-inequality
//! domains, and the basic/extended coding sets built from them.
//!
//! A point on a separatrix is addressed by a vector `(l_0, l_1, ..., l_n)`:
//! `l_0` numbers the local-type-1 points along the manifold, and each deeper
//! component numbers a point inside the lattice neighborhood of its parent,
//! positive in the back set and negative in the front set, counting from the
//! extreme point toward the parent. Truncating the last component yields the
//! parent of one smaller local type.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::graph::{DistinguishingGraph, ManifoldId, Sign, ValidationReport};

/// Fundamental-domain data of one separatrix manifold: the number of
/// local-type-1 points per half-open fundamental domain, and the minimal
/// power of the diffeomorphism leaving the manifold invariant.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct ManifoldInfo {
    pub n_fund: i64,
    pub period: i64,
}

pub type ManifoldTable = BTreeMap<ManifoldId, ManifoldInfo>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CodingError {
    #[error("cannot compare positions on different manifolds")]
    PrefixMismatch,
    #[error("stable and unstable parts have different lengths ({u} vs {s})")]
    LengthMismatch { u: usize, s: usize },
    #[error("parameters lie outside the formula domain")]
    OutOfDomain,
    #[error("manifold {0:?} is not registered")]
    UnknownManifold(ManifoldId),
    #[error("malformed point vector: {0}")]
    MalformedVector(String),
    #[error("formula is malformed: {0}")]
    MalformedFormula(String),
}

/// The address of a heteroclinic point on one manifold.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PointVector {
    pub manifold: ManifoldId,
    pub components: Vec<i64>,
}

impl PointVector {
    pub fn new(manifold: ManifoldId, components: Vec<i64>) -> PointVector {
        PointVector {
            manifold,
            components,
        }
    }

    /// Vector length, which equals the local type of the point.
    pub fn local_type(&self) -> usize {
        self.components.len()
    }

    /// Drops the last component, yielding the parent point of one smaller
    /// local type; `None` for local type 1.
    pub fn parent(&self) -> Option<PointVector> {
        if self.components.len() <= 1 {
            None
        } else {
            Some(PointVector {
                manifold: self.manifold,
                components: self.components[..self.components.len() - 1].to_vec(),
            })
        }
    }

    pub fn check(&self) -> Result<(), CodingError> {
        if self.components.is_empty() {
            return Err(CodingError::MalformedVector("empty component list".into()));
        }
        if self.components[1..].contains(&0) {
            return Err(CodingError::MalformedVector(
                "zero component after the first".into(),
            ));
        }
        Ok(())
    }
}

/// Totally ordered key of a position vector on its manifold.
///
/// The first component is compared as a plain integer. Each deeper component
/// `c` contributes the rational `-1/c` for `c > 0` and `+1/|c|` for `c < 0`,
/// and a missing component counts as `0`, so back-set children precede their
/// parent and front-set children follow it, in both cases approaching the
/// parent as `|c|` grows.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PositionKey {
    first: i64,
    /// Rationals `num/den` with `num` in `{-1, 0, 1}` and `den >= 1`.
    tail: Vec<(i8, i64)>,
}

impl PositionKey {
    fn tail_entry(&self, i: usize) -> (i8, i64) {
        self.tail.get(i).copied().unwrap_or((0, 1))
    }
}

impl PartialOrd for PositionKey {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for PositionKey {
    fn cmp(&self, other: &Self) -> Ordering {
        self.first.cmp(&other.first).then_with(|| {
            let len = self.tail.len().max(other.tail.len());
            for i in 0..len {
                let (an, ad) = self.tail_entry(i);
                let (bn, bd) = other.tail_entry(i);
                let lhs = (an as i128) * (bd as i128);
                let rhs = (bn as i128) * (ad as i128);
                match lhs.cmp(&rhs) {
                    Ordering::Equal => continue,
                    ord => return ord,
                }
            }
            Ordering::Equal
        })
    }
}

/// The manifold-order key of a point vector.
pub fn position_key(v: &PointVector) -> PositionKey {
    let tail = v.components[1..]
        .iter()
        .map(|&c| if c > 0 { (-1i8, c) } else { (1i8, -c) })
        .collect();
    PositionKey {
        first: *v.components.first().unwrap_or(&0),
        tail,
    }
}

/// Orders two positions along their common manifold.
pub fn compare_positions(a: &PointVector, b: &PointVector) -> Result<Ordering, CodingError> {
    if a.manifold != b.manifold {
        return Err(CodingError::PrefixMismatch);
    }
    Ok(position_key(a).cmp(&position_key(b)))
}

/// An integer-affine function of the parameters `p_0, ..., p_r` (`p_0` is the
/// trajectory parameter, the rest are local parameters).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct AffineFn {
    /// One coefficient per parameter.
    pub coeffs: Vec<i64>,
    pub constant: i64,
}

impl AffineFn {
    pub fn constant(arity: usize, c: i64) -> AffineFn {
        AffineFn {
            coeffs: vec![0; arity],
            constant: c,
        }
    }

    pub fn var(arity: usize, idx: usize) -> AffineFn {
        let mut coeffs = vec![0; arity];
        coeffs[idx] = 1;
        AffineFn { coeffs, constant: 0 }
    }

    pub fn arity(&self) -> usize {
        self.coeffs.len()
    }

    pub fn eval(&self, params: &[i64]) -> i64 {
        let mut acc = self.constant;
        for (c, p) in self.coeffs.iter().zip(params) {
            acc += c * p;
        }
        acc
    }

    pub fn is_const(&self) -> bool {
        self.coeffs.iter().all(|&c| c == 0)
    }

    pub fn plus_const(&self, d: i64) -> AffineFn {
        AffineFn {
            coeffs: self.coeffs.clone(),
            constant: self.constant + d,
        }
    }

    pub fn negated(&self) -> AffineFn {
        AffineFn {
            coeffs: self.coeffs.iter().map(|c| -c).collect(),
            constant: -self.constant,
        }
    }

    pub fn add(&self, other: &AffineFn) -> AffineFn {
        let arity = self.arity().max(other.arity());
        let mut coeffs = vec![0; arity];
        for (i, c) in coeffs.iter_mut().enumerate() {
            *c = self.coeffs.get(i).copied().unwrap_or(0) + other.coeffs.get(i).copied().unwrap_or(0);
        }
        AffineFn {
            coeffs,
            constant: self.constant + other.constant,
        }
    }

    pub fn sub(&self, other: &AffineFn) -> AffineFn {
        self.add(&other.negated())
    }

    /// Substitutes `p_i := subs[i]`; all `subs` share the new arity.
    pub fn substitute(&self, subs: &[AffineFn], new_arity: usize) -> AffineFn {
        let mut acc = AffineFn::constant(new_arity, self.constant);
        for (i, &c) in self.coeffs.iter().enumerate() {
            if c == 0 {
                continue;
            }
            let sub = &subs[i];
            for (j, &sc) in sub.coeffs.iter().enumerate() {
                acc.coeffs[j] += c * sc;
            }
            acc.constant += c * sub.constant;
        }
        acc
    }

    /// Coefficient of `p_0`.
    pub fn p0_coeff(&self) -> i64 {
        self.coeffs.first().copied().unwrap_or(0)
    }
}

/// A vector component: an affine function, optionally plus a single
/// absolute-value wrapper `base + scale * |inner|`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ComponentFn {
    pub base: AffineFn,
    pub abs: Option<(i64, AffineFn)>,
}

impl ComponentFn {
    pub fn affine(base: AffineFn) -> ComponentFn {
        ComponentFn { base, abs: None }
    }

    pub fn constant(arity: usize, c: i64) -> ComponentFn {
        ComponentFn::affine(AffineFn::constant(arity, c))
    }

    pub fn eval(&self, params: &[i64]) -> i64 {
        let mut v = self.base.eval(params);
        if let Some((scale, inner)) = &self.abs {
            v += scale * inner.eval(params).abs();
        }
        v
    }

    pub fn is_const(&self) -> bool {
        self.base.is_const() && self.abs.as_ref().is_none_or(|(_, f)| f.is_const())
    }

    pub fn negated(&self) -> ComponentFn {
        ComponentFn {
            base: self.base.negated(),
            abs: self.abs.as_ref().map(|(s, f)| (-s, f.clone())),
        }
    }

    pub fn plus_const(&self, d: i64) -> ComponentFn {
        ComponentFn {
            base: self.base.plus_const(d),
            abs: self.abs.clone(),
        }
    }

    pub fn substitute(&self, subs: &[AffineFn], new_arity: usize) -> ComponentFn {
        ComponentFn {
            base: self.base.substitute(subs, new_arity),
            abs: self
                .abs
                .as_ref()
                .map(|(s, f)| (*s, f.substitute(subs, new_arity))),
        }
    }
}

/// A linear inequality `coeffs . p >= min` over all parameters. The
/// trajectory parameter `p_0` must stay unconstrained, so its coefficient is
/// required to be zero.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct LinearConstraint {
    pub coeffs: Vec<i64>,
    pub min: i64,
}

impl LinearConstraint {
    pub fn holds(&self, params: &[i64]) -> bool {
        let mut acc = 0;
        for (c, p) in self.coeffs.iter().zip(params) {
            acc += c * p;
        }
        acc >= self.min
    }
}

/// Domain of the local parameters `p_1, ..., p_r`: a finite conjunction of
/// linear inequalities. `p_0` ranges over all integers.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct IntDomain {
    pub rank: usize,
    pub constraints: Vec<LinearConstraint>,
}

impl IntDomain {
    pub fn unconstrained(rank: usize) -> IntDomain {
        IntDomain {
            rank,
            constraints: Vec::new(),
        }
    }

    /// Adds `p_idx >= min`.
    pub fn with_lower_bound(mut self, idx: usize, min: i64) -> IntDomain {
        let mut coeffs = vec![0; self.rank + 1];
        coeffs[idx] = 1;
        self.constraints.push(LinearConstraint { coeffs, min });
        self
    }

    pub fn contains(&self, params: &[i64]) -> bool {
        self.constraints.iter().all(|c| c.holds(params))
    }
}

/// One side (stable or unstable) of a parametric formula.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FormulaSide {
    pub manifold: ManifoldId,
    pub components: Vec<ComponentFn>,
}

impl FormulaSide {
    pub fn eval(&self, params: &[i64]) -> PointVector {
        PointVector {
            manifold: self.manifold,
            components: self.components.iter().map(|c| c.eval(params)).collect(),
        }
    }
}

/// A single heteroclinic point: positions on its unstable and stable
/// manifolds plus the orientation of the crossing.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SimpleFormula {
    pub u: PointVector,
    pub s: PointVector,
    pub d: Sign,
}

impl SimpleFormula {
    pub fn local_type(&self) -> Result<usize, CodingError> {
        if self.u.components.len() != self.s.components.len() {
            return Err(CodingError::LengthMismatch {
                u: self.u.components.len(),
                s: self.s.components.len(),
            });
        }
        Ok(self.u.components.len())
    }
}

/// A family of heteroclinic points: integer-affine component functions over
/// the trajectory parameter `p_0` and local parameters restricted to an
/// integer domain. A family of rank 0 is the simple formula of a trajectory.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ParamFormula {
    pub u: FormulaSide,
    pub s: FormulaSide,
    pub d: Sign,
    pub domain: IntDomain,
}

impl ParamFormula {
    /// Total parameter count, `1 + rank`.
    pub fn arity(&self) -> usize {
        self.domain.rank + 1
    }

    pub fn local_type(&self) -> Result<usize, CodingError> {
        if self.u.components.len() != self.s.components.len() {
            return Err(CodingError::LengthMismatch {
                u: self.u.components.len(),
                s: self.s.components.len(),
            });
        }
        Ok(self.u.components.len())
    }

    /// Evaluates the family at a parameter tuple inside its domain.
    pub fn instantiate(&self, params: &[i64]) -> Result<SimpleFormula, CodingError> {
        if params.len() != self.arity() {
            return Err(CodingError::MalformedFormula(format!(
                "expected {} parameters, got {}",
                self.arity(),
                params.len()
            )));
        }
        if !self.domain.contains(params) {
            return Err(CodingError::OutOfDomain);
        }
        let simple = SimpleFormula {
            u: self.u.eval(params),
            s: self.s.eval(params),
            d: self.d,
        };
        simple.u.check()?;
        simple.s.check()?;
        simple.local_type()?;
        Ok(simple)
    }

    /// Reparametrizes the trajectory parameter, `p_0 := p_0 + delta`.
    pub fn translated(&self, delta: i64) -> ParamFormula {
        let arity = self.arity();
        let mut subs: Vec<AffineFn> = (0..arity).map(|i| AffineFn::var(arity, i)).collect();
        subs[0] = subs[0].plus_const(delta);
        self.substituted(&subs, self.domain.rank)
    }

    /// Applies a parameter substitution to every component; the domain
    /// constraints are substituted as well.
    pub fn substituted(&self, subs: &[AffineFn], new_rank: usize) -> ParamFormula {
        let new_arity = new_rank + 1;
        let map_side = |side: &FormulaSide| FormulaSide {
            manifold: side.manifold,
            components: side
                .components
                .iter()
                .map(|c| c.substitute(subs, new_arity))
                .collect(),
        };
        let constraints = self
            .domain
            .constraints
            .iter()
            .map(|c| {
                let f = AffineFn {
                    coeffs: c.coeffs.clone(),
                    constant: 0,
                };
                let g = f.substitute(subs, new_arity);
                LinearConstraint {
                    coeffs: g.coeffs,
                    min: c.min - g.constant,
                }
            })
            .collect();
        ParamFormula {
            u: map_side(&self.u),
            s: map_side(&self.s),
            d: self.d,
            domain: IntDomain {
                rank: new_rank,
                constraints,
            },
        }
    }

    /// Checks arities and the vector shape of the formula itself.
    pub fn check_shape(&self) -> Result<(), CodingError> {
        let arity = self.arity();
        for side in [&self.u, &self.s] {
            if side.components.is_empty() {
                return Err(CodingError::MalformedFormula("empty component list".into()));
            }
            for c in &side.components {
                if c.base.arity() != arity {
                    return Err(CodingError::MalformedFormula(
                        "component arity disagrees with the domain rank".into(),
                    ));
                }
                if let Some((_, inner)) = &c.abs {
                    if inner.arity() != arity {
                        return Err(CodingError::MalformedFormula(
                            "absolute-value arity disagrees with the domain rank".into(),
                        ));
                    }
                }
            }
        }
        for c in &self.domain.constraints {
            if c.coeffs.len() != arity {
                return Err(CodingError::MalformedFormula(
                    "constraint arity disagrees with the domain rank".into(),
                ));
            }
            if c.coeffs.first().copied().unwrap_or(0) != 0 {
                return Err(CodingError::MalformedFormula(
                    "the trajectory parameter must stay unconstrained".into(),
                ));
            }
        }
        self.local_type()?;
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum CodingKind {
    Basic,
    Extended,
    Auxiliary,
}

/// A finite collection of trajectory formulas.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CodingSet {
    pub kind: CodingKind,
    pub formulas: Vec<ParamFormula>,
}

impl CodingSet {
    pub fn new(kind: CodingKind, formulas: Vec<ParamFormula>) -> CodingSet {
        CodingSet { kind, formulas }
    }

    pub fn is_empty(&self) -> bool {
        self.formulas.is_empty()
    }

    pub fn len(&self) -> usize {
        self.formulas.len()
    }

    /// The deepest vector length occurring in the set.
    pub fn max_type(&self) -> usize {
        self.formulas
            .iter()
            .map(|f| f.u.components.len())
            .max()
            .unwrap_or(0)
    }
}

/// Local type of a single heteroclinic point.
pub fn local_type(x: &SimpleFormula) -> Result<usize, CodingError> {
    x.local_type()
}

/// Moves a point `k` fundamental domains along both of its manifolds, the
/// displacement of `k` applications of the first-return map.
pub fn orbit_shift(
    x: &SimpleFormula,
    k: i64,
    manifolds: &ManifoldTable,
) -> Result<SimpleFormula, CodingError> {
    let nu = manifolds
        .get(&x.u.manifold)
        .ok_or(CodingError::UnknownManifold(x.u.manifold))?
        .n_fund;
    let ns = manifolds
        .get(&x.s.manifold)
        .ok_or(CodingError::UnknownManifold(x.s.manifold))?
        .n_fund;
    let mut out = x.clone();
    out.u.components[0] += k * nu;
    out.s.components[0] += k * ns;
    Ok(out)
}

/// Renumbers the start points: adds `shifts[m]` to the first component of
/// every formula part with prefix `m`.
pub fn shift_numeration(cs: &CodingSet, shifts: &BTreeMap<ManifoldId, i64>) -> CodingSet {
    let mapped = cs
        .formulas
        .iter()
        .map(|f| {
            let mut g = f.clone();
            if let Some(&d) = shifts.get(&g.u.manifold) {
                g.u.components[0] = g.u.components[0].plus_const(d);
            }
            if let Some(&d) = shifts.get(&g.s.manifold) {
                g.s.components[0] = g.s.components[0].plus_const(d);
            }
            g
        })
        .collect();
    CodingSet {
        kind: cs.kind,
        formulas: mapped,
    }
}

/// Reverses the surface orientation: negates the orientation component of
/// every formula and leaves everything else unchanged.
pub fn flip_orientation(cs: &CodingSet) -> CodingSet {
    CodingSet {
        kind: cs.kind,
        formulas: cs
            .formulas
            .iter()
            .map(|f| {
                let mut g = f.clone();
                g.d = g.d.flip();
                g
            })
            .collect(),
    }
}

/// True when the part of `f` on `side` is an extreme address there: every
/// component after the first is a constant `+1` or `-1`.
pub fn is_extreme_on(f: &ParamFormula, side: crate::graph::Sigma) -> bool {
    let comps = match side {
        crate::graph::Sigma::U => &f.u.components,
        crate::graph::Sigma::S => &f.s.components,
    };
    comps.len() >= 2
        && comps[1..]
            .iter()
            .all(|c| c.is_const() && matches!(c.eval(&vec![0; f.arity()]).abs(), 1))
}

/// Validates a basic coding set against a distinguishing graph:
/// every prefix must label a free edge with fundamental-domain data, the
/// local-type-1 trajectories on each manifold must step by its count and
/// cover each residue exactly once, and each lattice-neighborhood side may
/// carry at most one extreme formula per local type.
pub fn validate_basic(cs: &CodingSet, g: &DistinguishingGraph) -> ValidationReport {
    let mut report = ValidationReport::default();
    if cs.kind != CodingKind::Basic {
        report.push("B-kind", "coding set is not marked basic");
    }
    let manifolds = &g.manifolds;

    for (idx, f) in cs.formulas.iter().enumerate() {
        let tag = format!("formula #{idx}");
        if let Err(e) = f.check_shape() {
            report.push("B-d", format!("{tag}: {e}"));
            continue;
        }
        if f.domain.rank != 0 {
            report.push(
                "B-d",
                format!("{tag}: basic formulas carry no local parameters"),
            );
        }
        if f.u.manifold.sigma != crate::graph::Sigma::U {
            report.push("B-c", format!("{tag}: first part is not on an unstable manifold"));
        }
        if f.s.manifold.sigma != crate::graph::Sigma::S {
            report.push("B-c", format!("{tag}: second part is not on a stable manifold"));
        }
        for side in [&f.u, &f.s] {
            if g.manifold_edge(side.manifold).is_none() {
                report.push(
                    "B-c",
                    format!("{tag}: prefix {:?} does not label a free edge", side.manifold),
                );
                continue;
            }
            let Some(info) = manifolds.get(&side.manifold) else {
                report.push(
                    "B-c",
                    format!("{tag}: manifold {:?} has no fundamental-domain entry", side.manifold),
                );
                continue;
            };
            if side.components[0].p0_coeff_checked() != Some(info.n_fund) {
                report.push(
                    "B-a",
                    format!(
                        "{tag}: first component must step by {} on {:?}",
                        info.n_fund, side.manifold
                    ),
                );
            }
            for c in &side.components[1..] {
                if !c.is_const() {
                    report.push(
                        "B-d",
                        format!("{tag}: components after the first must be constant"),
                    );
                } else if c.eval(&vec![0; f.arity()]) == 0 {
                    report.push("B-d", format!("{tag}: zero component after the first"));
                }
            }
        }
    }

    // Residue census of the local-type-1 trajectories per manifold.
    let mut residues: BTreeMap<ManifoldId, Vec<i64>> = BTreeMap::new();
    for f in cs.formulas.iter().filter(|f| f.u.components.len() == 1) {
        for side in [&f.u, &f.s] {
            if let Some(info) = manifolds.get(&side.manifold) {
                residues
                    .entry(side.manifold)
                    .or_default()
                    .push(side.components[0].base.constant.rem_euclid(info.n_fund));
            }
        }
    }
    for (m, info) in manifolds {
        let mut found = residues.remove(m).unwrap_or_default();
        found.sort_unstable();
        let expect: Vec<i64> = (0..info.n_fund).collect();
        if found != expect {
            report.push(
                "B-a",
                format!(
                    "manifold {:?}: local-type-1 residues {:?} do not cover 0..{} exactly once",
                    m,
                    found,
                    info.n_fund - 1
                ),
            );
        }
    }

    // At most one extreme formula per (manifold, parent residue class, side
    // sign, local type).
    let mut seen: BTreeSet<(ManifoldId, i64, i64, usize)> = BTreeSet::new();
    for f in cs.formulas.iter().filter(|f| f.u.components.len() >= 2) {
        let t = f.u.components.len();
        for (sigma, side) in [(crate::graph::Sigma::U, &f.u), (crate::graph::Sigma::S, &f.s)] {
            if !is_extreme_on(f, sigma) {
                continue;
            }
            let Some(info) = manifolds.get(&side.manifold) else {
                continue;
            };
            let class = side.components[0].base.constant.rem_euclid(info.n_fund);
            let sign = side.components[1].eval(&vec![0; f.arity()]).signum();
            if !seen.insert((side.manifold, class, sign, t)) {
                report.push(
                    "B-b",
                    format!(
                        "manifold {:?}: more than one extreme formula of type {} on the same side of the same trajectory",
                        side.manifold, t
                    ),
                );
            }
        }
        // Parent classes of deeper formulas must be covered by type-1 data.
        for side in [&f.u, &f.s] {
            if let Some(info) = manifolds.get(&side.manifold) {
                let class = side.components[0].base.constant.rem_euclid(info.n_fund);
                let covered = cs.formulas.iter().any(|t1| {
                    t1.u.components.len() == 1
                        && [&t1.u, &t1.s].into_iter().any(|s1| {
                            s1.manifold == side.manifold
                                && s1.components[0].base.constant.rem_euclid(info.n_fund) == class
                        })
                });
                if !covered {
                    report.push(
                        "B-a",
                        format!(
                            "manifold {:?}: extreme formula hangs on residue {} with no local-type-1 trajectory",
                            side.manifold, class
                        ),
                    );
                }
            }
        }
    }

    report
}

impl ComponentFn {
    /// The `p_0` coefficient, provided the component is plain affine.
    fn p0_coeff_checked(&self) -> Option<i64> {
        if self.abs.is_some() {
            return None;
        }
        Some(self.base.p0_coeff())
    }
}
