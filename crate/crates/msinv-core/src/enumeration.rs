//! Instantiates coding sets over finite parameter windows and checks the
//! structural laws the resulting point clouds must obey: injectivity of
//! manifold positions, equivariance under the first-return displacement,
//! additivity of local type under truncation, residue coverage of the
//! local-type-1 trajectories, and monotone accumulation of families toward
//! their parents.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use crate::coding::{
    orbit_shift, position_key, CodingSet, ManifoldTable, ParamFormula, PointVector, PositionKey,
    SimpleFormula,
};
use crate::graph::{ManifoldId, Sigma};

/// Finite enumeration window: the trajectory parameter ranges over
/// `[t_min, t_max]`, and every local parameter is capped at `k_max` above
/// its derived lower bound.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Window {
    pub t_min: i64,
    pub t_max: i64,
    pub k_max: i64,
}

impl Window {
    pub fn new(t_min: i64, t_max: i64, k_max: i64) -> Window {
        assert!(t_min <= t_max, "window with t_min > t_max");
        assert!(k_max >= 0, "window with negative k_max");
        Window {
            t_min,
            t_max,
            k_max,
        }
    }

    fn shifted(self, d: i64) -> Window {
        Window {
            t_min: self.t_min + d,
            t_max: self.t_max + d,
            k_max: self.k_max,
        }
    }

    fn widened(self, d: i64) -> Window {
        Window {
            t_min: self.t_min - d,
            t_max: self.t_max + d,
            k_max: self.k_max + d,
        }
    }
}

/// One instantiated point, remembering which formula and parameters made it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Instance {
    pub formula: usize,
    pub params: Vec<i64>,
    pub point: SimpleFormula,
}

/// An entry of the per-manifold sorted position list.
#[derive(Debug, Clone)]
pub struct ManifoldEntry {
    pub key: PositionKey,
    pub vector: Vec<i64>,
    pub instance: usize,
    pub side: Sigma,
}

/// All points of a coding set within a window, with per-manifold sorted
/// position lists.
#[derive(Debug, Clone, Default)]
pub struct PointCloud {
    pub instances: Vec<Instance>,
    pub by_manifold: BTreeMap<ManifoldId, Vec<ManifoldEntry>>,
}

impl PointCloud {
    pub fn len(&self) -> usize {
        self.instances.len()
    }

    pub fn is_empty(&self) -> bool {
        self.instances.is_empty()
    }

    /// The set of realized points, ignoring which formula produced them.
    pub fn point_set(&self) -> BTreeSet<SimpleFormula> {
        self.instances.iter().map(|i| i.point.clone()).collect()
    }

    pub fn contains_point(&self, p: &SimpleFormula) -> bool {
        self.instances.iter().any(|i| &i.point == p)
    }

    fn position_index(&self) -> HashMap<(ManifoldId, &[i64]), usize> {
        let mut idx = HashMap::new();
        for (m, entries) in &self.by_manifold {
            for e in entries {
                idx.insert((*m, e.vector.as_slice()), e.instance);
            }
        }
        idx
    }
}

/// Integer range of one local parameter inside a window: lower bounds are
/// read off single-variable constraints, the cap bounds it above.
fn local_range(f: &ParamFormula, idx: usize, w: Window) -> (i64, i64) {
    let mut lo: Option<i64> = None;
    let mut hi = w.k_max;
    for c in &f.domain.constraints {
        let nonzero: Vec<usize> = (0..c.coeffs.len()).filter(|&i| c.coeffs[i] != 0).collect();
        if nonzero != [idx] {
            continue;
        }
        let a = c.coeffs[idx];
        if a > 0 {
            // a * k >= min  =>  k >= ceil(min / a)
            let b = c.min.div_euclid(a) + i64::from(c.min.rem_euclid(a) != 0);
            lo = Some(lo.map_or(b, |x: i64| x.max(b)));
        } else {
            // a * k >= min  =>  k <= floor(min / a)
            let b = c.min.div_euclid(a);
            hi = hi.min(b);
        }
    }
    let lo = lo.unwrap_or(-w.k_max);
    (lo, hi.max(lo - 1))
}

/// Every instantiation of every formula with parameters inside the window.
pub fn enumerate_window(cs: &CodingSet, w: Window) -> PointCloud {
    let mut cloud = PointCloud::default();
    for (fi, f) in cs.formulas.iter().enumerate() {
        let rank = f.domain.rank;
        let ranges: Vec<(i64, i64)> = (1..=rank).map(|i| local_range(f, i, w)).collect();
        let mut params = vec![0i64; rank + 1];
        for t in w.t_min..=w.t_max {
            params[0] = t;
            enumerate_locals(f, fi, &ranges, &mut params, 1, w, &mut cloud);
        }
    }
    for entries in cloud.by_manifold.values_mut() {
        entries.sort_by(|a, b| a.key.cmp(&b.key).then_with(|| a.vector.cmp(&b.vector)));
    }
    cloud
}

fn enumerate_locals(
    f: &ParamFormula,
    fi: usize,
    ranges: &[(i64, i64)],
    params: &mut Vec<i64>,
    depth: usize,
    w: Window,
    cloud: &mut PointCloud,
) {
    if depth > ranges.len() {
        if !f.domain.contains(params) {
            return;
        }
        let Ok(point) = f.instantiate(params) else {
            return;
        };
        let idx = cloud.instances.len();
        for (side, v) in [(Sigma::U, &point.u), (Sigma::S, &point.s)] {
            cloud
                .by_manifold
                .entry(v.manifold)
                .or_default()
                .push(ManifoldEntry {
                    key: position_key(v),
                    vector: v.components.clone(),
                    instance: idx,
                    side,
                });
        }
        cloud.instances.push(Instance {
            formula: fi,
            params: params.clone(),
            point,
        });
        return;
    }
    let (lo, hi) = ranges[depth - 1];
    for k in lo..=hi {
        params[depth] = k;
        enumerate_locals(f, fi, ranges, params, depth + 1, w, cloud);
    }
    let _ = w;
}

/// Two instances claiming the same manifold position.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PositionCollision {
    pub manifold: ManifoldId,
    pub vector: Vec<i64>,
    pub first: usize,
    pub second: usize,
}

#[derive(Debug, Clone, Default)]
pub struct InjectivityReport {
    pub collisions: Vec<PositionCollision>,
}

impl InjectivityReport {
    pub fn is_clean(&self) -> bool {
        self.collisions.is_empty()
    }
}

/// Flags any two instances sharing a `(manifold, vector)` address on either
/// of their sides.
pub fn check_injectivity(pc: &PointCloud) -> InjectivityReport {
    let mut report = InjectivityReport::default();
    for (m, entries) in &pc.by_manifold {
        let mut seen: HashMap<&[i64], usize> = HashMap::new();
        for e in entries {
            match seen.entry(e.vector.as_slice()) {
                std::collections::hash_map::Entry::Occupied(prev) => {
                    if *prev.get() != e.instance {
                        report.collisions.push(PositionCollision {
                            manifold: *m,
                            vector: e.vector.clone(),
                            first: *prev.get(),
                            second: e.instance,
                        });
                    }
                }
                std::collections::hash_map::Entry::Vacant(slot) => {
                    slot.insert(e.instance);
                }
            }
        }
    }
    report
}

#[derive(Debug, Clone, Default)]
pub struct EquivarianceReport {
    /// Points whose image under the +/-1 displacement is missing from the
    /// correspondingly shifted window.
    pub misses: Vec<(i64, SimpleFormula)>,
}

impl EquivarianceReport {
    pub fn is_clean(&self) -> bool {
        self.misses.is_empty()
    }
}

/// Verifies that the one-step displacement maps the windowed cloud onto the
/// cloud of the shifted window, point for point, in both directions.
pub fn check_equivariance(
    cs: &CodingSet,
    w: Window,
    manifolds: &ManifoldTable,
) -> EquivarianceReport {
    let mut report = EquivarianceReport::default();
    let base = enumerate_window(cs, w);
    for dir in [1i64, -1] {
        let shifted_cloud = enumerate_window(cs, w.shifted(dir));
        let target = shifted_cloud.point_set();
        for inst in &base.instances {
            match orbit_shift(&inst.point, dir, manifolds) {
                Ok(moved) => {
                    if !target.contains(&moved) {
                        report.misses.push((dir, inst.point.clone()));
                    }
                }
                Err(_) => report.misses.push((dir, inst.point.clone())),
            }
        }
    }
    report
}

#[derive(Debug, Clone, Default)]
pub struct AdditivityReport {
    /// Missing parents in the window interior, per side: hard violations.
    pub u_violations: Vec<SimpleFormula>,
    pub s_violations: Vec<SimpleFormula>,
    /// Parents that fall outside the finite window: tolerated.
    pub u_edge_warnings: usize,
    pub s_edge_warnings: usize,
}

impl AdditivityReport {
    pub fn is_clean(&self) -> bool {
        self.u_violations.is_empty() && self.s_violations.is_empty()
    }
}

/// For every point of local type `n >= 2`, its one-component truncation must
/// exist in the cloud as a point of local type `n - 1` on the same manifold.
/// A truncation that only exists beyond the window edge is reported as a
/// warning, not a violation; the interior is re-checked against a widened
/// window to tell the two apart.
pub fn check_additivity(cs: &CodingSet, w: Window) -> AdditivityReport {
    let pc = enumerate_window(cs, w);
    let mut report = AdditivityReport::default();
    let index = pc.position_index();
    // A parent's trajectory parameter can exceed the child's by any local
    // parameter value, so the disambiguating window widens by the cap.
    let wide = enumerate_window(cs, w.widened(w.k_max + 2));
    let wide_index = wide.position_index();

    let check_side = |get: fn(&SimpleFormula) -> &PointVector,
                          violations: &mut Vec<SimpleFormula>,
                          warnings: &mut usize| {
        for inst in &pc.instances {
            let v = get(&inst.point);
            let Some(parent) = v.parent() else { continue };
            if index.contains_key(&(parent.manifold, parent.components.as_slice())) {
                continue;
            }
            if wide_index.contains_key(&(parent.manifold, parent.components.as_slice())) {
                *warnings += 1;
            } else {
                violations.push(inst.point.clone());
            }
        }
    };
    check_side(
        |p| &p.u,
        &mut report.u_violations,
        &mut report.u_edge_warnings,
    );
    check_side(
        |p| &p.s,
        &mut report.s_violations,
        &mut report.s_edge_warnings,
    );
    report
}

#[derive(Debug, Clone, Default)]
pub struct FinitenessReport {
    pub violations: Vec<String>,
}

impl FinitenessReport {
    pub fn is_clean(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Per manifold: the local-type-1 trajectory formulas are finitely many,
/// step by the fundamental-domain count, and cover each residue exactly once.
pub fn check_type1_finiteness(cs: &CodingSet, manifolds: &ManifoldTable) -> FinitenessReport {
    let mut report = FinitenessReport::default();
    let mut residues: BTreeMap<ManifoldId, Vec<i64>> = BTreeMap::new();
    for f in cs.formulas.iter().filter(|f| f.u.components.len() == 1) {
        for side in [&f.u, &f.s] {
            let Some(info) = manifolds.get(&side.manifold) else {
                report
                    .violations
                    .push(format!("unregistered manifold {:?}", side.manifold));
                continue;
            };
            if side.components[0].base.p0_coeff() != info.n_fund {
                report.violations.push(format!(
                    "type-1 formula does not step by {} on {:?}",
                    info.n_fund, side.manifold
                ));
            }
            residues
                .entry(side.manifold)
                .or_default()
                .push(side.components[0].base.constant.rem_euclid(info.n_fund));
        }
    }
    for (m, info) in manifolds {
        let mut found = residues.remove(m).unwrap_or_default();
        found.sort_unstable();
        let expect: Vec<i64> = (0..info.n_fund).collect();
        if found != expect {
            report.violations.push(format!(
                "manifold {:?}: residues {:?} do not cover 0..{}",
                m,
                found,
                info.n_fund - 1
            ));
        }
    }
    report
}

#[derive(Debug, Clone, Default)]
pub struct AccumulationReport {
    pub violations: Vec<String>,
}

impl AccumulationReport {
    pub fn is_clean(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Monotone accumulation: within one family, growing a local parameter that
/// leaves a side's truncated address fixed must move that side's position
/// strictly monotonically toward the parent's position.
pub fn check_accumulation(cs: &CodingSet, w: Window) -> AccumulationReport {
    let mut report = AccumulationReport::default();
    for (fi, f) in cs.formulas.iter().enumerate() {
        let rank = f.domain.rank;
        if rank == 0 || f.u.components.len() < 2 {
            continue;
        }
        for (sigma, side) in [(Sigma::U, &f.u), (Sigma::S, &f.s)] {
            let n = side.components.len();
            // Parameters appearing in the last component only.
            'param: for idx in 1..=rank {
                let in_last = side.components[n - 1].base.coeffs[idx] != 0
                    || side.components[n - 1]
                        .abs
                        .as_ref()
                        .is_some_and(|(_, g)| g.coeffs[idx] != 0);
                if !in_last {
                    continue;
                }
                for c in &side.components[..n - 1] {
                    if c.base.coeffs[idx] != 0
                        || c.abs.as_ref().is_some_and(|(_, g)| g.coeffs[idx] != 0)
                    {
                        continue 'param;
                    }
                }
                // March this parameter, holding the others at admissible
                // values found by scanning a small box.
                let Some(base_params) = first_admissible(f, w) else {
                    continue;
                };
                let mut prev: Option<PositionKey> = None;
                let mut parent_key: Option<PositionKey> = None;
                for step in 0..=w.k_max {
                    let mut params = base_params.clone();
                    params[idx] += step;
                    if !f.domain.contains(&params) {
                        continue;
                    }
                    let Ok(point) = f.instantiate(&params) else {
                        continue;
                    };
                    let v = match sigma {
                        Sigma::U => &point.u,
                        Sigma::S => &point.s,
                    };
                    let key = position_key(v);
                    let pk = parent_key
                        .get_or_insert_with(|| position_key(&v.parent().expect("depth >= 2")));
                    if let Some(prev_key) = &prev {
                        let towards = distance_decreases(prev_key, &key, pk);
                        if !towards {
                            report.violations.push(format!(
                                "formula #{fi}: marching parameter {idx} does not approach the parent on {:?}",
                                v.manifold
                            ));
                            break;
                        }
                    }
                    prev = Some(key);
                }
            }
        }
    }
    report
}

/// Strictly closer to `parent` in the key order.
fn distance_decreases(prev: &PositionKey, cur: &PositionKey, parent: &PositionKey) -> bool {
    use std::cmp::Ordering::*;
    match (prev.cmp(parent), cur.cmp(parent)) {
        (Less, Less) => cur > prev,
        (Greater, Greater) => cur < prev,
        // Crossing or landing on the parent is not an approach.
        _ => false,
    }
}

fn first_admissible(f: &ParamFormula, w: Window) -> Option<Vec<i64>> {
    let rank = f.domain.rank;
    let ranges: Vec<(i64, i64)> = (1..=rank).map(|i| local_range(f, i, w)).collect();
    let mut params = vec![0i64; rank + 1];
    fn rec(
        f: &ParamFormula,
        ranges: &[(i64, i64)],
        params: &mut Vec<i64>,
        depth: usize,
    ) -> bool {
        if depth > ranges.len() {
            return f.domain.contains(params) && f.instantiate(params).is_ok();
        }
        let (lo, hi) = ranges[depth - 1];
        for k in lo..=hi {
            params[depth] = k;
            if rec(f, ranges, params, depth + 1) {
                return true;
            }
        }
        false
    }
    rec(f, &ranges, &mut params, 1).then_some(params)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coding::{CodingKind, CodingSet};
    use crate::fixtures;
    use crate::graph::Sign;

    #[test]
    fn enumerate_reference_family_small_window() {
        let doc = fixtures::sphere();
        let ext = fixtures::sphere_extended_reference();
        let w = Window::new(0, 0, 2);
        let cloud = enumerate_window(&ext, w);
        let u1x1 = doc.manifold("u.1.x1");
        let s1x3 = doc.manifold("s.1.x3");
        for (ucomps, scomps) in [
            (vec![0, -1], vec![2, 1]),
            (vec![2, -3], vec![2, 3]),
            (vec![4, -5], vec![2, 5]),
        ] {
            let expect = SimpleFormula {
                u: PointVector::new(u1x1, ucomps),
                s: PointVector::new(s1x3, scomps),
                d: Sign::Plus,
            };
            assert!(cloud.contains_point(&expect), "missing {expect:?}");
        }
    }

    #[test]
    fn enumerate_empty_set_is_empty() {
        let cs = CodingSet::new(CodingKind::Extended, vec![]);
        assert!(enumerate_window(&cs, Window::new(-3, 3, 3)).is_empty());
    }

    #[test]
    fn cloud_size_counts_domain_points() {
        let ext = fixtures::sphere_extended_reference();
        let w = Window::new(-1, 1, 2);
        let cloud = enumerate_window(&ext, w);
        // 4 type-1 families contribute 3 instances each; 4 two-parameter
        // families contribute 3 * 3 each.
        assert_eq!(cloud.len(), 4 * 3 + 4 * 9);
    }

    #[test]
    fn injectivity_clean_on_reference_set() {
        let ext = fixtures::sphere_extended_reference();
        let cloud = enumerate_window(&ext, Window::new(-4, 4, 4));
        assert!(check_injectivity(&cloud).is_clean());
    }

    #[test]
    fn injectivity_flags_duplicate_u_parts() {
        let ext = fixtures::sphere_extended_with_duplicate_u_parts();
        let cloud = enumerate_window(&ext, Window::new(-4, 4, 4));
        let report = check_injectivity(&cloud);
        assert!(!report.is_clean());
        // All collisions sit on the unstable manifold shared by the two
        // families that claim the same addresses.
        let doc = fixtures::sphere();
        let u1x1 = doc.manifold("u.1.x1");
        assert!(report.collisions.iter().all(|c| c.manifold == u1x1));
    }

    #[test]
    fn injectivity_single_point_clean() {
        let ext = fixtures::sphere_extended_reference();
        let cloud = enumerate_window(&ext, Window::new(0, 0, 0));
        assert!(check_injectivity(&cloud).is_clean());
    }

    #[test]
    fn equivariance_on_reference_set() {
        let doc = fixtures::sphere();
        let ext = fixtures::sphere_extended_reference();
        let report = check_equivariance(&ext, Window::new(-2, 2, 2), &doc.graph.manifolds);
        assert!(report.is_clean());
    }

    #[test]
    fn equivariance_fails_on_corrupted_step() {
        let doc = fixtures::sphere();
        let mut ext = fixtures::sphere_extended_reference();
        // Break the step of the first family's unstable part: 3 instead of 2.
        ext.formulas[0].u.components[0].base.coeffs[0] = 3;
        let report = check_equivariance(&ext, Window::new(-2, 2, 2), &doc.graph.manifolds);
        assert!(!report.is_clean());
    }

    #[test]
    fn equivariance_empty_set_passes() {
        let doc = fixtures::sphere();
        let cs = CodingSet::new(CodingKind::Extended, vec![]);
        assert!(check_equivariance(&cs, Window::new(-2, 2, 2), &doc.graph.manifolds).is_clean());
    }

    #[test]
    fn additivity_on_reference_set() {
        let ext = fixtures::sphere_extended_reference();
        let report = check_additivity(&ext, Window::new(-4, 4, 3));
        assert!(
            report.is_clean(),
            "interior truncation misses: {:?} / {:?}",
            report.u_violations,
            report.s_violations
        );
    }

    #[test]
    fn additivity_detects_forced_miss() {
        // Keep only a depth-2 family: every parent is missing everywhere.
        let ext = fixtures::sphere_extended_reference();
        let deep: Vec<_> = ext
            .formulas
            .iter()
            .filter(|f| f.u.components.len() == 2)
            .cloned()
            .collect();
        let cs = CodingSet::new(CodingKind::Extended, deep);
        let report = check_additivity(&cs, Window::new(-2, 2, 2));
        assert!(!report.is_clean());
    }

    #[test]
    fn additivity_vacuous_on_type1_cloud() {
        let ext = fixtures::sphere_extended_reference();
        let shallow: Vec<_> = ext
            .formulas
            .iter()
            .filter(|f| f.u.components.len() == 1)
            .cloned()
            .collect();
        let cs = CodingSet::new(CodingKind::Extended, shallow);
        let report = check_additivity(&cs, Window::new(-2, 2, 2));
        assert!(report.is_clean());
        assert_eq!(report.u_edge_warnings + report.s_edge_warnings, 0);
    }

    #[test]
    fn type1_finiteness_on_sphere() {
        let doc = fixtures::sphere();
        let report = check_type1_finiteness(&doc.basic, &doc.graph.manifolds);
        assert!(report.is_clean(), "{:?}", report.violations);
    }

    #[test]
    fn type1_finiteness_flags_duplicate_residue() {
        let doc = fixtures::sphere();
        let mut cs = doc.basic.clone();
        cs.formulas[1].u.components[0].base.constant = 0;
        cs.formulas[1].s.components[0].base.constant = 0;
        let report = check_type1_finiteness(&cs, &doc.graph.manifolds);
        assert!(!report.is_clean());
    }

    #[test]
    fn type1_finiteness_flags_manifold_without_formulas() {
        let doc = fixtures::sphere();
        let cs = CodingSet::new(
            CodingKind::Basic,
            doc.basic
                .formulas
                .iter()
                .skip(2) // drop the two families on u.1.x1 / s.1.x2
                .cloned()
                .collect(),
        );
        let report = check_type1_finiteness(&cs, &doc.graph.manifolds);
        assert!(!report.is_clean());
    }

    #[test]
    fn accumulation_on_reference_set() {
        let ext = fixtures::sphere_extended_reference();
        let report = check_accumulation(&ext, Window::new(-2, 2, 4));
        assert!(report.is_clean(), "{:?}", report.violations);
    }

    #[test]
    fn windows_compose() {
        let ext = fixtures::sphere_extended_reference();
        let w1 = Window::new(-2, 0, 2);
        let w2 = Window::new(0, 2, 2);
        let whole = Window::new(-2, 2, 2);
        let mut union = enumerate_window(&ext, w1).point_set();
        union.extend(enumerate_window(&ext, w2).point_set());
        assert_eq!(union, enumerate_window(&ext, whole).point_set());
    }
}
