//! Construction of the extended coding set from a basic coding set and its
//! distinguishing graph, by induction on local type.
//!
//! Points of local type `n` inside the lattice neighborhood of a
//! local-type-1 trajectory correspond one-to-one with points of local type
//! `n - 1` near the saddle, reached by projecting along the invariant
//! fibers. The induction walks every type-1 trajectory and each nonempty
//! side (back/front) of its neighborhood on its unstable manifold, marches
//! the projections toward the saddle one fundamental domain at a time, and
//! emits one formula family per projection family. The auxiliary associated
//! formulas carry, alongside every family, the extreme formulas of deeper
//! local types and their type-1 projections, reparametrized in step with
//! the family itself; they supply the side signs and anchor instances used
//! by the next level.


use thiserror::Error;

use crate::coding::{
    AffineFn, CodingKind, CodingSet, ComponentFn, FormulaSide, IntDomain, LinearConstraint,
    ManifoldTable, ParamFormula,
};
use crate::graph::{DistinguishingGraph, ManifoldId, Sigma, Sign};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ExpandError {
    #[error("input rejected by validation:\n{0}")]
    InvalidInput(String),
    #[error("basic coding set is incomplete: {0}")]
    MissingExtremeFormula(String),
    #[error("projection branch cannot be resolved: {0}")]
    AmbiguousBranch(String),
    #[error("basic coding set is internally inconsistent: {0}")]
    InconsistentBasic(String),
}

/// Marks what an associated formula describes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AssocKind {
    /// Extreme points of the given deeper local type.
    ExtremeOfType(usize),
    /// The local-type-1 projections of those extreme points.
    Type1Projection,
}

/// A technical companion of one extended-set formula: it shares that
/// formula's parameters and domain, and evaluates to extreme points of a
/// deeper local type (or to their type-1 projections).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AssociatedFormula {
    /// Index of the owning formula in the extended set.
    pub base: usize,
    pub kind: AssocKind,
    pub payload: ParamFormula,
}

/// Result of the expansion: the extended coding set, the auxiliary
/// associated formulas, and per-level statistics.
#[derive(Debug, Clone)]
pub struct ExpansionState {
    pub extended: CodingSet,
    pub auxiliary: Vec<AssociatedFormula>,
    pub max_type: usize,
    /// `(local type, number of formulas emitted)`.
    pub level_counts: Vec<(usize, usize)>,
}

/// One formula family tracked during expansion, with its associated
/// deeper-type extremes.
#[derive(Debug, Clone)]
struct Rec {
    formula: ParamFormula,
    /// Side of the neighborhood this family lives in (sign of the second
    /// unstable component); `None` for local type 1.
    u_side: Option<Sign>,
    assoc: Vec<AssocRec>,
}

#[derive(Debug, Clone)]
struct AssocRec {
    level: usize,
    extreme: ParamFormula,
    proj: ParamFormula,
}

struct Engine<'a> {
    basic: &'a CodingSet,
    manifolds: &'a ManifoldTable,
    max_type: usize,
    levels: Vec<Vec<Rec>>,
}

fn exact_div(num: i64, den: i64, what: &str) -> Result<i64, ExpandError> {
    if den == 0 || num % den != 0 {
        return Err(ExpandError::InconsistentBasic(format!(
            "{what}: {num} is not a multiple of {den}"
        )));
    }
    Ok(num / den)
}

fn ceil_div(num: i64, den: i64) -> i64 {
    debug_assert!(den > 0);
    num.div_euclid(den) + i64::from(num.rem_euclid(den) != 0)
}

fn side_sign_of(c: &ComponentFn, arity: usize) -> Option<Sign> {
    Sign::of(c.eval(&vec![0; arity]).signum())
}

impl<'a> Engine<'a> {
    fn new(basic: &'a CodingSet, graph: &'a DistinguishingGraph) -> Result<Engine<'a>, ExpandError> {
        let max_type = basic.max_type();
        let mut engine = Engine {
            basic,
            manifolds: &graph.manifolds,
            max_type,
            levels: Vec::new(),
        };
        engine.levels.push(engine.seed_level1()?);
        Ok(engine)
    }

    fn n_of(&self, m: ManifoldId) -> Result<i64, ExpandError> {
        self.manifolds
            .get(&m)
            .map(|i| i.n_fund)
            .ok_or_else(|| ExpandError::InvalidInput(format!("manifold {m:?} has no entry")))
    }

    /// The basic local-type-1 trajectory with the given residue class on the
    /// given side of the given manifold, reparametrized so that the chosen
    /// side's first component equals `anchor` as a function of `p_0`.
    fn aligned_type1(
        &self,
        m: ManifoldId,
        sigma: Sigma,
        anchor: &AffineFn,
    ) -> Result<ParamFormula, ExpandError> {
        let n = self.n_of(m)?;
        let class = anchor.constant.rem_euclid(n);
        for f in self.basic.formulas.iter().filter(|f| f.u.components.len() == 1) {
            let side = match sigma {
                Sigma::U => &f.u,
                Sigma::S => &f.s,
            };
            if side.manifold != m || side.components[0].base.constant.rem_euclid(n) != class {
                continue;
            }
            let delta = exact_div(
                anchor.constant - side.components[0].base.constant,
                n,
                "trajectory alignment",
            )?;
            return Ok(f.translated(delta));
        }
        Err(ExpandError::MissingExtremeFormula(format!(
            "no local-type-1 trajectory covers residue {class} on {m:?}"
        )))
    }

    /// Local-type-1 records with their associated deeper-type extremes.
    fn seed_level1(&self) -> Result<Vec<Rec>, ExpandError> {
        let mut recs = Vec::new();
        for f in self.basic.formulas.iter().filter(|f| f.u.components.len() == 1) {
            let mut assoc = Vec::new();
            for level in 2..=self.max_type {
                for e in self
                    .basic
                    .formulas
                    .iter()
                    .filter(|e| e.u.components.len() == level)
                {
                    if !crate::coding::is_extreme_on(e, Sigma::S) {
                        continue;
                    }
                    if e.s.manifold != f.s.manifold {
                        continue;
                    }
                    let n_w = self.n_of(f.s.manifold)?;
                    let class_e = e.s.components[0].base.constant.rem_euclid(n_w);
                    let class_f = f.s.components[0].base.constant.rem_euclid(n_w);
                    if class_e != class_f {
                        continue;
                    }
                    let delta = exact_div(
                        f.s.components[0].base.constant - e.s.components[0].base.constant,
                        n_w,
                        "extreme alignment",
                    )?;
                    let extreme = e.translated(delta);
                    let proj = self.aligned_type1(
                        extreme.u.manifold,
                        Sigma::U,
                        &extreme.u.components[0].base,
                    )?;
                    assoc.push(AssocRec {
                        level,
                        extreme,
                        proj,
                    });
                }
            }
            recs.push(Rec {
                formula: f.clone(),
                u_side: None,
                assoc,
            });
        }
        Ok(recs)
    }

    /// The basic extreme formula of the given side of a type-1 trajectory's
    /// neighborhood on its unstable manifold, aligned to the trajectory.
    fn u_extreme(&self, t1: &ParamFormula, side: Sign) -> Result<Option<ParamFormula>, ExpandError> {
        let m = t1.u.manifold;
        let n_m = self.n_of(m)?;
        let class = t1.u.components[0].base.constant.rem_euclid(n_m);
        let mut found: Option<ParamFormula> = None;
        for e in self.basic.formulas.iter().filter(|e| e.u.components.len() == 2) {
            if !crate::coding::is_extreme_on(e, Sigma::U) {
                continue;
            }
            if e.u.manifold != m
                || e.u.components[0].base.constant.rem_euclid(n_m) != class
                || side_sign_of(&e.u.components[1], e.arity()) != Some(side)
            {
                continue;
            }
            let delta = exact_div(
                t1.u.components[0].base.constant - e.u.components[0].base.constant,
                n_m,
                "extreme alignment",
            )?;
            let aligned = e.translated(delta);
            if found.is_some() {
                return Err(ExpandError::InconsistentBasic(format!(
                    "two extreme formulas claim the same neighborhood side on {m:?}"
                )));
            }
            found = Some(aligned);
        }
        Ok(found)
    }

    /// The projection data of one neighborhood side: the target branch and
    /// the march start, read off the extreme formula's stable parent.
    fn resolve_target(
        &self,
        t1: &ParamFormula,
        e2: &ParamFormula,
    ) -> Result<(ManifoldId, AffineFn), ExpandError> {
        let tau0 = self.aligned_type1(e2.s.manifold, Sigma::S, &e2.s.components[0].base)?;
        let m_target = tau0.u.manifold;
        let w = t1.s.manifold;
        if m_target.saddle != w.saddle {
            return Err(ExpandError::AmbiguousBranch(format!(
                "the extreme formula projects onto {m_target:?}, which is not a branch of the saddle of {w:?}"
            )));
        }
        Ok((m_target, tau0.u.components[0].base.clone()))
    }

    /// Constructions feeding the same quadrant: for every type-1 trajectory
    /// on `w`, the side whose extreme projects onto `m_target`, yielding the
    /// march start on `m_target` and the trajectory's position on `w`.
    fn quadrant_feeders(
        &self,
        level1: &[Rec],
        w: ManifoldId,
        m_target: ManifoldId,
    ) -> Result<Vec<(AffineFn, AffineFn)>, ExpandError> {
        let mut feeders = Vec::new();
        for rec in level1 {
            let t1 = &rec.formula;
            if t1.s.manifold != w {
                continue;
            }
            for side in [Sign::Plus, Sign::Minus] {
                let Some(e2) = self.u_extreme(t1, side)? else {
                    continue;
                };
                let tau0 = self.aligned_type1(e2.s.manifold, Sigma::S, &e2.s.components[0].base)?;
                if tau0.u.manifold != m_target {
                    continue;
                }
                feeders.push((
                    tau0.u.components[0].base.clone(),
                    t1.s.components[0].base.clone(),
                ));
            }
        }
        Ok(feeders)
    }

    /// Runs one level of the induction, emitting all families of the given
    /// local type.
    fn expand_level(&mut self, level: usize) -> Result<(), ExpandError> {
        debug_assert!(level >= 2 && self.levels.len() == level - 1);
        let level1 = self.levels[0].clone();
        let prev = self.levels[level - 2].clone();
        let mut out: Vec<Rec> = Vec::new();

        for g1 in &level1 {
            let t1 = &g1.formula;
            let w = t1.s.manifold;
            let n_w = self.n_of(w)?;
            for side in [Sign::Plus, Sign::Minus] {
                let Some(e2) = self.u_extreme(t1, side)? else {
                    continue;
                };
                let (m_target, a0) = self.resolve_target(t1, &e2)?;
                let n_t = self.n_of(m_target)?;
                if a0.p0_coeff() != n_t {
                    return Err(ExpandError::InconsistentBasic(format!(
                        "march start on {m_target:?} does not step by {n_t}"
                    )));
                }
                let feeders = self.quadrant_feeders(&level1, w, m_target)?;

                for rp in prev.iter().filter(|r| r.formula.u.manifold == m_target) {
                    let rec = self.pull_back(
                        level, t1, side, &a0, m_target, n_w, n_t, rp, &feeders, w,
                    )?;
                    out.push(rec);
                }
            }
        }
        self.levels.push(out);
        Ok(())
    }

    /// Transforms one family of local type `level - 1` on the target branch
    /// into a family of local type `level` inside the chosen neighborhood
    /// side, together with its transported associated formulas.
    #[allow(clippy::too_many_arguments)]
    fn pull_back(
        &self,
        level: usize,
        t1: &ParamFormula,
        side: Sign,
        a0: &AffineFn,
        m_target: ManifoldId,
        n_w: i64,
        n_t: i64,
        rp: &Rec,
        feeders: &[(AffineFn, AffineFn)],
        w: ManifoldId,
    ) -> Result<Rec, ExpandError> {
        let rf = &rp.formula;
        let old_rank = rf.domain.rank;
        let new_rank = old_rank + 1;
        let new_arity = new_rank + 1;

        // The projection family's first unstable component: its trajectory
        // coefficient must be the target step, and every local coefficient a
        // multiple of it.
        let u0 = &rf.u.components[0];
        if u0.abs.is_some() {
            return Err(ExpandError::InconsistentBasic(
                "first component carries an absolute value".into(),
            ));
        }
        if u0.base.p0_coeff() != n_t {
            return Err(ExpandError::InconsistentBasic(format!(
                "projection family on {m_target:?} does not step by {n_t}"
            )));
        }
        let mu: Vec<i64> = (1..=old_rank)
            .map(|j| exact_div(u0.base.coeffs[j], n_t, "march reparametrization"))
            .collect::<Result<_, _>>()?;

        // Residue offset of the projection family below the march start.
        let i_off = (a0.constant - u0.base.constant).rem_euclid(n_t);
        let q0c = exact_div(a0.constant - i_off - u0.base.constant, n_t, "march start")?;

        // Substitution of the projection family's parameters: its trajectory
        // parameter becomes `q0c + p_0`, its local parameters shift up one
        // slot to make room for the new march parameter `k_1`.
        let mut subs: Vec<AffineFn> = Vec::with_capacity(old_rank + 1);
        let mut q_sub = AffineFn::var(new_arity, 0);
        q_sub.constant = q0c;
        subs.push(q_sub);
        for j in 1..=old_rank {
            subs.push(AffineFn::var(new_arity, j + 1));
        }

        // The parent trajectory's instant: `t = p_0 + k_1 + sum mu_j k_{j+1}`.
        let mut t_fn = AffineFn::var(new_arity, 0);
        t_fn.coeffs[1] = 1;
        for (j, &m_j) in mu.iter().enumerate() {
            t_fn.coeffs[j + 2] = m_j;
        }

        // Whether the march may start at the boundary instance.
        let k_lower = if level == 2 {
            0
        } else {
            let below = rp.u_side == Some(Sign::Minus);
            if i_off == 0 && below {
                1
            } else {
                0
            }
        };

        // Unstable side: parent prefix, the position inside the neighborhood
        // side, then the projection's deeper components with the side flip.
        let mut u_components = Vec::with_capacity(level);
        u_components.push(ComponentFn::affine(
            t1.u.components[0].base.substitute(&[t_fn.clone()], new_arity),
        ));
        let mut l1 = AffineFn::constant(new_arity, side.value() * (1 + i_off));
        l1.coeffs[1] = side.value() * n_t;
        u_components.push(ComponentFn::affine(l1));
        for c in &rf.u.components[1..] {
            let mapped = c.substitute(&subs, new_arity);
            u_components.push(if side == Sign::Plus {
                mapped.negated()
            } else {
                mapped
            });
        }

        // Stable side: the projection's address extended by the position in
        // its parent's set, counted from the quadrant's first feeder.
        let assoc = rp
            .assoc
            .iter()
            .find(|a| a.level == level && a.proj.s.manifold == w)
            .ok_or_else(|| {
                ExpandError::MissingExtremeFormula(format!(
                    "no extreme formula of type {level} over {:?} facing {w:?}",
                    m_target
                ))
            })?;
        let last_sign = side_sign_of(
            assoc.extreme.s.components.last().expect("nonempty"),
            assoc.extreme.arity(),
        )
        .ok_or_else(|| {
            ExpandError::InconsistentBasic("extreme formula has a zero last component".into())
        })?;

        // The value of the projection's first component in the new
        // parameters: `a0(t) - i - k_1 n_t`.
        let mut u0_val = a0.substitute(&[t_fn.clone()], new_arity);
        u0_val.constant -= i_off;
        u0_val.coeffs[1] -= n_t;

        let exclude_boundary = i64::from(level > 2 && rp.u_side == Some(Sign::Minus));
        if feeders.is_empty() {
            return Err(ExpandError::MissingExtremeFormula(format!(
                "no neighborhood on {w:?} projects onto {m_target:?}"
            )));
        }
        let mut candidates: Vec<AffineFn> = Vec::new();
        for (a0x, bx) in feeders {
            if a0x.p0_coeff() != n_t || bx.p0_coeff() != n_w {
                return Err(ExpandError::InconsistentBasic(
                    "feeder steps disagree with the manifold counts".into(),
                ));
            }
            // Smallest instant whose region reaches the projection family:
            // `n_t t' >= u0_val - a0x_const + exclude`.
            let c = ceil_div(
                u0_val.constant - a0x.constant + exclude_boundary,
                n_t,
            );
            let mut t_min = AffineFn::constant(new_arity, c);
            for j in 0..new_arity {
                t_min.coeffs[j] = exact_div(u0_val.coeffs[j], n_t, "staircase")?;
            }
            let mut e_x = AffineFn::constant(new_arity, bx.constant);
            for j in 0..new_arity {
                e_x.coeffs[j] = n_w * t_min.coeffs[j];
            }
            e_x.constant += n_w * t_min.constant;
            candidates.push(e_x);
        }
        candidates.sort_by_key(|f| f.constant);
        for pair in candidates.windows(2) {
            if pair[0].coeffs != pair[1].coeffs || pair[1].constant != pair[0].constant + 1 {
                return Err(ExpandError::InconsistentBasic(format!(
                    "the neighborhoods on {w:?} do not interleave into consecutive positions"
                )));
            }
        }
        if candidates.len() as i64 != n_w {
            return Err(ExpandError::InconsistentBasic(format!(
                "{} neighborhoods feed {w:?} where {n_w} are required",
                candidates.len()
            )));
        }
        let e_star = candidates.first().expect("nonempty").clone();

        let b_fn = t1.s.components[0].base.substitute(&[t_fn.clone()], new_arity);
        let mut last = b_fn.sub(&e_star);
        last.constant += 1;
        if last.p0_coeff() != 0 {
            return Err(ExpandError::InconsistentBasic(
                "position in the stable parent's set depends on the trajectory parameter".into(),
            ));
        }
        let last = if last_sign == Sign::Minus {
            last.negated()
        } else {
            last
        };

        let mut s_components: Vec<ComponentFn> = rf
            .s
            .components
            .iter()
            .map(|c| c.substitute(&subs, new_arity))
            .collect();
        s_components.push(ComponentFn::affine(last));

        // Domain: the projection family's constraints in the new parameters,
        // plus the march bound.
        let mut constraints: Vec<LinearConstraint> = rf
            .domain
            .constraints
            .iter()
            .map(|c| {
                let f = AffineFn {
                    coeffs: c.coeffs.clone(),
                    constant: 0,
                };
                let g = f.substitute(&subs, new_arity);
                LinearConstraint {
                    coeffs: g.coeffs,
                    min: c.min - g.constant,
                }
            })
            .collect();
        let mut march = vec![0i64; new_arity];
        march[1] = 1;
        constraints.push(LinearConstraint {
            coeffs: march,
            min: k_lower,
        });

        let formula = ParamFormula {
            u: FormulaSide {
                manifold: t1.u.manifold,
                components: u_components,
            },
            s: FormulaSide {
                manifold: rf.s.manifold,
                components: s_components,
            },
            d: t1.d,
            domain: IntDomain {
                rank: new_rank,
                constraints,
            },
        };
        debug_assert!(formula.check_shape().is_ok());

        // Transport the deeper associated formulas with the same
        // reparametrization; they are indexed by the new family's parameter
        // tuples, so they carry its domain.
        let assoc_next = rp
            .assoc
            .iter()
            .filter(|a| a.level > level)
            .map(|a| {
                let mut extreme = a.extreme.substituted(&subs, new_rank);
                extreme.domain = formula.domain.clone();
                let mut proj = a.proj.substituted(&subs, new_rank);
                proj.domain = formula.domain.clone();
                AssocRec {
                    level: a.level,
                    extreme,
                    proj,
                }
            })
            .collect();

        Ok(Rec {
            formula,
            u_side: Some(side),
            assoc: assoc_next,
        })
    }

    fn into_state(self) -> ExpansionState {
        let mut formulas = Vec::new();
        let mut auxiliary = Vec::new();
        let mut level_counts = Vec::new();
        for (li, recs) in self.levels.iter().enumerate() {
            level_counts.push((li + 1, recs.len()));
            for rec in recs {
                let base = formulas.len();
                formulas.push(rec.formula.clone());
                for a in &rec.assoc {
                    auxiliary.push(AssociatedFormula {
                        base,
                        kind: AssocKind::ExtremeOfType(a.level),
                        payload: a.extreme.clone(),
                    });
                    auxiliary.push(AssociatedFormula {
                        base,
                        kind: AssocKind::Type1Projection,
                        payload: a.proj.clone(),
                    });
                }
            }
        }
        ExpansionState {
            extended: CodingSet::new(CodingKind::Extended, formulas),
            auxiliary,
            max_type: self.max_type,
            level_counts,
        }
    }
}

/// Copies the local-type-1 trajectory formulas into an extended-set fragment.
pub fn seed_type1(basic: &CodingSet) -> CodingSet {
    CodingSet::new(
        CodingKind::Extended,
        basic
            .formulas
            .iter()
            .filter(|f| f.u.components.len() == 1)
            .cloned()
            .collect(),
    )
}

/// Emits the local-type-2 families of every nonempty neighborhood side.
pub fn expand_type2(
    basic: &CodingSet,
    graph: &DistinguishingGraph,
    type1: &CodingSet,
) -> Result<CodingSet, ExpandError> {
    debug_assert_eq!(type1.formulas, seed_type1(basic).formulas);
    expand_general(basic, graph, 2)
}

/// Emits the families of exactly the given local type; empty when the basic
/// set has no data that deep.
pub fn expand_general(
    basic: &CodingSet,
    graph: &DistinguishingGraph,
    level: usize,
) -> Result<CodingSet, ExpandError> {
    if level < 2 || level > basic.max_type() {
        return Ok(CodingSet::new(CodingKind::Extended, Vec::new()));
    }
    let mut engine = Engine::new(basic, graph)?;
    for l in 2..=level {
        engine.expand_level(l)?;
    }
    Ok(CodingSet::new(
        CodingKind::Extended,
        engine.levels[level - 1]
            .iter()
            .map(|r| r.formula.clone())
            .collect(),
    ))
}

/// The associated formulas carried by the families of the given local type.
pub fn build_auxiliary(
    basic: &CodingSet,
    graph: &DistinguishingGraph,
    level: usize,
) -> Result<Vec<AssociatedFormula>, ExpandError> {
    if level < 1 || level > basic.max_type() {
        return Ok(Vec::new());
    }
    let mut engine = Engine::new(basic, graph)?;
    for l in 2..=level {
        engine.expand_level(l)?;
    }
    let recs = engine.levels[level - 1].clone();
    let mut out = Vec::new();
    for (base, rec) in recs.iter().enumerate() {
        for a in &rec.assoc {
            out.push(AssociatedFormula {
                base,
                kind: AssocKind::ExtremeOfType(a.level),
                payload: a.extreme.clone(),
            });
            out.push(AssociatedFormula {
                base,
                kind: AssocKind::Type1Projection,
                payload: a.proj.clone(),
            });
        }
    }
    Ok(out)
}

/// Runs the whole induction: seeds the local-type-1 trajectories, then
/// builds every deeper level up to the maximal local type of the basic set.
/// Deterministic for a fixed input ordering.
pub fn build_extended(
    basic: &CodingSet,
    graph: &DistinguishingGraph,
) -> Result<ExpansionState, ExpandError> {
    let graph_report = graph.validate();
    if !graph_report.is_valid() {
        return Err(ExpandError::InvalidInput(graph_report.to_string()));
    }
    let basic_report = crate::coding::validate_basic(basic, graph);
    if !basic_report.is_valid() {
        return Err(ExpandError::InvalidInput(basic_report.to_string()));
    }
    let mut engine = Engine::new(basic, graph)?;
    for level in 2..=engine.max_type {
        engine.expand_level(level)?;
    }
    Ok(engine.into_state())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coding::SimpleFormula;
    use crate::enumeration::{enumerate_window, Window};
    use crate::fixtures;
    use std::collections::BTreeSet;

    fn cloud_points(cs: &CodingSet, w: Window) -> BTreeSet<SimpleFormula> {
        enumerate_window(cs, w).point_set()
    }

    #[test]
    fn seed_copies_the_four_sphere_families() {
        let doc = fixtures::sphere();
        let frag = seed_type1(&doc.basic);
        assert_eq!(frag.len(), 4);
        assert!(frag.formulas.iter().all(|f| f.u.components.len() == 1));
        // Idempotent.
        let again = seed_type1(&CodingSet::new(CodingKind::Basic, frag.formulas.clone()));
        assert_eq!(again.formulas, frag.formulas);
    }

    #[test]
    fn seed_of_gradient_like_set_is_empty() {
        let cs = CodingSet::new(CodingKind::Basic, vec![]);
        assert!(seed_type1(&cs).is_empty());
    }

    #[test]
    fn sphere_type2_families_match_reference() {
        let doc = fixtures::sphere();
        let type1 = seed_type1(&doc.basic);
        let frag = expand_type2(&doc.basic, &doc.graph, &type1).unwrap();
        assert_eq!(frag.len(), 4);
        let w = Window::new(-4, 4, 4);
        let reference: Vec<_> = fixtures::sphere_extended_reference()
            .formulas
            .into_iter()
            .filter(|f| f.u.components.len() == 2)
            .collect();
        assert_eq!(
            cloud_points(&frag, w),
            cloud_points(&CodingSet::new(CodingKind::Extended, reference), w)
        );
    }

    #[test]
    fn sphere_extended_matches_reference_cloud() {
        let doc = fixtures::sphere();
        let state = build_extended(&doc.basic, &doc.graph).unwrap();
        let w = Window::new(-4, 4, 4);
        assert_eq!(
            cloud_points(&state.extended, w),
            cloud_points(&fixtures::sphere_extended_reference(), w)
        );
    }

    #[test]
    fn sphere_expansion_golden_text() {
        // The serialized extended section, frozen after verification against
        // the reference cloud. Guards the emitted formula shapes themselves.
        let mut doc = fixtures::sphere();
        doc.extended = Some(build_extended(&doc.basic, &doc.graph).unwrap().extended);
        let text = crate::format::serialize(&doc);
        let extended_block = text
            .split("extended {\n")
            .nth(1)
            .expect("extended section present");
        let golden = concat!(
            "  (u.1.x1[2n], s.1.x2[2n], +1)\n",
            "  (u.1.x1[2n+1], s.1.x2[2n+1], -1)\n",
            "  (u.1.x1[2n+2k1, -2k1-2], s.1.x3[2n+1, -2k1-1], +1; k1>=0)\n",
            "  (u.1.x1[2n+2k1, -2k1-1], s.1.x3[2n+2, 2k1+1], +1; k1>=0)\n",
            "  (u.1.x1[2n+2k1+1, 2k1+1], s.1.x3[2n+2, 2k1+2], -1; k1>=0)\n",
            "  (u.1.x1[2n+2k1+1, 2k1+2], s.1.x3[2n+1, -2k1-2], -1; k1>=0)\n",
            "  (u.1.x2[2n], s.1.x3[2n], +1)\n",
            "  (u.1.x2[2n+1], s.1.x3[2n+1], -1)\n",
            "}\n",
        );
        assert_eq!(extended_block, golden);
    }

    #[test]
    fn expansion_is_deterministic() {
        let doc = fixtures::sphere();
        let a = build_extended(&doc.basic, &doc.graph).unwrap();
        let b = build_extended(&doc.basic, &doc.graph).unwrap();
        assert_eq!(a.extended, b.extended);
    }

    #[test]
    fn empty_basic_set_expands_to_nothing() {
        let doc = fixtures::sphere();
        let empty = CodingSet::new(CodingKind::Basic, vec![]);
        // Bypass validation (an empty set fails residue coverage) and drive
        // the levels directly.
        assert!(expand_general(&empty, &doc.graph, 2).unwrap().is_empty());
        assert!(seed_type1(&empty).is_empty());
    }

    #[test]
    fn level_past_max_type_is_empty() {
        let doc = fixtures::sphere();
        let frag = expand_general(&doc.basic, &doc.graph, 3).unwrap();
        assert!(frag.is_empty());
    }

    #[test]
    fn emitted_formulas_have_level_arity() {
        for doc in [
            fixtures::sphere(),
            fixtures::three_saddle_chain(),
            fixtures::four_saddle_chain(),
        ] {
            let state = build_extended(&doc.basic, &doc.graph).unwrap();
            for f in &state.extended.formulas {
                let n = f.u.components.len();
                assert_eq!(f.s.components.len(), n);
                assert_eq!(f.domain.rank, n - 1, "type-{n} family must carry {} local parameters", n - 1);
            }
        }
    }

    #[test]
    fn boundary_instances_anchor_on_basic_extremes() {
        // The march-origin instance of every emitted family (all local
        // parameters at their smallest admissible values) is an instance of
        // a basic extreme formula.
        for doc in [
            fixtures::sphere(),
            fixtures::three_saddle_chain(),
            fixtures::four_saddle_chain(),
            fixtures::double_feeder_chain(),
            fixtures::branched_tower(),
        ] {
            let state = build_extended(&doc.basic, &doc.graph).unwrap();
            let basic_points = cloud_points(&doc.basic, Window::new(-8, 8, 0));
            for f in state
                .extended
                .formulas
                .iter()
                .filter(|f| f.u.components.len() >= 2)
            {
                let mut params = vec![0i64; f.arity()];
                for idx in 1..f.arity() {
                    let mut k = 0;
                    while !f.domain.contains(&params) && k < 4 {
                        k += 1;
                        params[idx] = k;
                    }
                }
                let anchor = f.instantiate(&params).unwrap();
                assert!(
                    basic_points.contains(&anchor),
                    "anchor {anchor:?} is not a basic instance"
                );
            }
        }
    }

    #[test]
    fn three_saddle_chain_expands_to_one_type2_family() {
        let doc = fixtures::three_saddle_chain();
        let state = build_extended(&doc.basic, &doc.graph).unwrap();
        assert_eq!(state.max_type, 2);
        let deep: Vec<_> = state
            .extended
            .formulas
            .iter()
            .filter(|f| f.u.components.len() == 2)
            .collect();
        assert_eq!(deep.len(), 1);
        let f = deep[0];
        // (x0-side: [n+k1, k1+1], x2-side: [n+1, k1+1], d of the type-1
        // ancestor on the unstable side).
        let inst = f.instantiate(&[0, 2]).unwrap();
        assert_eq!(inst.u.components, vec![2, 3]);
        assert_eq!(inst.s.components, vec![1, 3]);
        assert_eq!(inst.d, doc.basic.formulas[0].d);
    }

    #[test]
    fn four_saddle_chain_reaches_type3() {
        let doc = fixtures::four_saddle_chain();
        let state = build_extended(&doc.basic, &doc.graph).unwrap();
        assert_eq!(state.max_type, 3);
        let by_level: Vec<usize> = state.level_counts.iter().map(|&(_, c)| c).collect();
        assert_eq!(by_level, vec![3, 2, 1]);
        let f3 = state
            .extended
            .formulas
            .iter()
            .find(|f| f.u.components.len() == 3)
            .unwrap();
        // Ground truth worked out by hand from the correspondence:
        // (u.1.x0[p+k1+k2, 1+k1, -(1+k2)], s.1.x3[p+2, 1+k2, 1+k1], +1).
        for (p, k1, k2) in [(0, 0, 0), (1, 2, 0), (-2, 1, 3), (0, 3, 2)] {
            let inst = f3.instantiate(&[p, k1, k2]).unwrap();
            assert_eq!(inst.u.components, vec![p + k1 + k2, 1 + k1, -(1 + k2)]);
            assert_eq!(inst.s.components, vec![p + 2, 1 + k2, 1 + k1]);
        }
    }

    #[test]
    fn auxiliary_anchors_reproduce_basic_extremes() {
        // Every associated extreme evaluated at the domain origin is an
        // instance of a basic extreme formula.
        let doc = fixtures::four_saddle_chain();
        let aux = build_auxiliary(&doc.basic, &doc.graph, 2).unwrap();
        assert!(!aux.is_empty());
        let basic_points = cloud_points(&doc.basic, Window::new(-8, 8, 0));
        for a in aux.iter().filter(|a| matches!(a.kind, AssocKind::ExtremeOfType(_))) {
            let arity = a.payload.arity();
            let origin = vec![0i64; arity];
            if a.payload.domain.contains(&origin) {
                let inst = a.payload.instantiate(&origin).unwrap();
                assert!(
                    basic_points.contains(&inst),
                    "associated extreme anchor {inst:?} is not a basic instance"
                );
            }
        }
    }

    #[test]
    fn max_type_one_has_no_auxiliary() {
        let doc = fixtures::two_saddle_chain();
        let aux = build_auxiliary(&doc.basic, &doc.graph, 1).unwrap();
        assert!(aux.is_empty());
        let state = build_extended(&doc.basic, &doc.graph).unwrap();
        assert_eq!(state.extended.formulas, seed_type1(&doc.basic).formulas);
    }

    #[test]
    fn double_feeder_chain_interleaves_positions() {
        // Two unstable manifolds feed one stable manifold with two
        // trajectories per fundamental domain: the emitted families must
        // interleave their stable positions, odd from one feeder and even
        // from the other.
        let doc = fixtures::double_feeder_chain();
        let state = build_extended(&doc.basic, &doc.graph).unwrap();
        let deep: Vec<_> = state
            .extended
            .formulas
            .iter()
            .filter(|f| f.u.components.len() == 2)
            .collect();
        assert_eq!(deep.len(), 2);
        let from_x0 = deep
            .iter()
            .find(|f| f.u.manifold == doc.manifold("u.1.x0"))
            .unwrap();
        let from_xa = deep
            .iter()
            .find(|f| f.u.manifold == doc.manifold("u.1.xa"))
            .unwrap();
        for k in 0..4 {
            let a = from_x0.instantiate(&[0, k]).unwrap();
            assert_eq!(a.u.components, vec![k, k + 1]);
            assert_eq!(a.s.components, vec![1, 2 * k + 1]);
            let b = from_xa.instantiate(&[0, k]).unwrap();
            assert_eq!(b.u.components, vec![k, k + 1]);
            assert_eq!(b.s.components, vec![1, 2 * k + 2]);
        }
        // Laws hold on the result.
        let w = crate::enumeration::Window::new(-3, 3, 3);
        assert!(crate::enumeration::check_injectivity(&enumerate_window(
            &state.extended,
            w
        ))
        .is_clean());
        assert!(crate::enumeration::check_additivity(&state.extended, w).is_clean());
    }

    #[test]
    fn branched_tower_interleaves_at_level_three() {
        // Hand-derived targets: the two feeders' type-3 families share their
        // unstable shape but interleave the positions in the deepest stable
        // sets, odd from x0 and even from xa.
        let doc = fixtures::branched_tower();
        let state = build_extended(&doc.basic, &doc.graph).unwrap();
        assert_eq!(state.max_type, 3);
        let by_level: Vec<usize> = state.level_counts.iter().map(|&(_, c)| c).collect();
        assert_eq!(by_level, vec![4, 3, 2]);
        let f3_x0 = state
            .extended
            .formulas
            .iter()
            .find(|f| f.u.components.len() == 3 && f.u.manifold == doc.manifold("u.1.x0"))
            .unwrap();
        let f3_xa = state
            .extended
            .formulas
            .iter()
            .find(|f| f.u.components.len() == 3 && f.u.manifold == doc.manifold("u.1.xa"))
            .unwrap();
        for (p, k1, k2) in [(0, 0, 0), (1, 2, 0), (-2, 1, 3)] {
            let a = f3_x0.instantiate(&[p, k1, k2]).unwrap();
            assert_eq!(a.u.components, vec![p + k1 + k2, 1 + k1, -(1 + k2)]);
            assert_eq!(a.s.components, vec![p + 2, 1 + k2, 1 + 2 * k1]);
            let b = f3_xa.instantiate(&[p, k1, k2]).unwrap();
            assert_eq!(b.u.components, vec![p + k1 + k2, 1 + k1, -(1 + k2)]);
            assert_eq!(b.s.components, vec![p + 2, 1 + k2, 2 + 2 * k1]);
        }
        let w = Window::new(-3, 3, 3);
        assert!(crate::enumeration::check_injectivity(&enumerate_window(
            &state.extended,
            w
        ))
        .is_clean());
        assert!(crate::enumeration::check_additivity(&state.extended, w).is_clean());
    }

    #[test]
    fn incomplete_basic_set_is_reported() {
        // Dropping the extreme formula that one neighborhood needs leaves
        // the interleaving short on its stable manifold.
        let doc = fixtures::sphere();
        let mut basic = doc.basic.clone();
        // Remove (u.1.x1[2n, -1], s.1.x3[2n+2, 1], +1).
        let pos = basic
            .formulas
            .iter()
            .position(|f| {
                f.u.components.len() == 2 && f.u.components[1].base.constant == -1
            })
            .unwrap();
        basic.formulas.remove(pos);
        let err = build_extended(&basic, &doc.graph).unwrap_err();
        assert!(
            matches!(
                err,
                ExpandError::InconsistentBasic(_) | ExpandError::MissingExtremeFormula(_)
            ),
            "unexpected error {err:?}"
        );
    }

    #[test]
    fn expansion_commutes_with_numeration_shifts() {
        // Renumbering the start points first and expanding equals expanding
        // first and renumbering the result.
        let doc = fixtures::sphere();
        let mut shifts = std::collections::BTreeMap::new();
        shifts.insert(doc.manifold("u.1.x1"), 3);
        shifts.insert(doc.manifold("s.1.x3"), -2);
        let shifted_basic = crate::coding::shift_numeration(&doc.basic, &shifts);
        let expanded_then_shifted = crate::coding::shift_numeration(
            &build_extended(&doc.basic, &doc.graph).unwrap().extended,
            &shifts,
        );
        let shifted_then_expanded = build_extended(&shifted_basic, &doc.graph)
            .unwrap()
            .extended;
        let w = Window::new(-4, 4, 4);
        assert_eq!(
            cloud_points(&shifted_then_expanded, w),
            cloud_points(&expanded_then_shifted, w)
        );
    }

    #[test]
    fn deepest_level_needs_no_auxiliary() {
        // With maximal local type 2, the level-2 families carry nothing for
        // later levels.
        let doc = fixtures::sphere();
        let aux = build_auxiliary(&doc.basic, &doc.graph, 2).unwrap();
        assert!(aux.is_empty());
        // The level-1 records do carry the extreme formulas of type 2.
        let aux1 = build_auxiliary(&doc.basic, &doc.graph, 1).unwrap();
        assert!(aux1
            .iter()
            .any(|a| matches!(a.kind, AssocKind::ExtremeOfType(2))));
        assert!(aux1.iter().any(|a| matches!(a.kind, AssocKind::Type1Projection)));
    }
}
