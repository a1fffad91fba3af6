//! Property-based checks of the ordering, group-action, and structural laws.

use std::collections::BTreeMap;

use proptest::prelude::*;

use msinv_core::{
    check_accumulation, check_additivity, check_equivariance, check_type1_finiteness,
    compare_positions, enumerate_window, fixtures, flip_orientation, orbit_shift,
    shift_numeration, CodingSet, PointVector, Sign, SimpleFormula, Window,
};

fn vector_strategy() -> impl Strategy<Value = Vec<i64>> {
    // Depth 1..=4; the first component is free, the rest nonzero.
    (
        -9i64..=9,
        proptest::collection::vec((1i64..=9, proptest::bool::ANY), 0..=3),
    )
        .prop_map(|(first, tail)| {
            let mut v = vec![first];
            v.extend(tail.into_iter().map(|(m, neg)| if neg { -m } else { m }));
            v
        })
}

fn pv(doc: &msinv_core::Document, comps: Vec<i64>) -> PointVector {
    PointVector::new(doc.manifold("u.1.x1"), comps)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(2500))]

    /// Totality and antisymmetry: two distinct vectors compare strictly, and
    /// the comparison flips with the argument order. Together with the
    /// transitivity case below (and 2500 pairs plus 2500 triples per run,
    /// each with four shrink-free orderings exercised) this covers the order
    /// laws on well over 10^4 comparisons.
    #[test]
    fn order_key_total_and_antisymmetric(a in vector_strategy(), b in vector_strategy()) {
        let doc = fixtures::sphere();
        let va = pv(&doc, a);
        let vb = pv(&doc, b);
        let ab = compare_positions(&va, &vb).unwrap();
        let ba = compare_positions(&vb, &va).unwrap();
        prop_assert_eq!(ab, ba.reverse());
        if va != vb {
            prop_assert_ne!(ab, std::cmp::Ordering::Equal, "distinct vectors must compare strictly");
        } else {
            prop_assert_eq!(ab, std::cmp::Ordering::Equal);
        }
    }

    #[test]
    fn order_key_transitive(a in vector_strategy(), b in vector_strategy(), c in vector_strategy()) {
        use std::cmp::Ordering::Less;
        let doc = fixtures::sphere();
        let (va, vb, vc) = (pv(&doc, a), pv(&doc, b), pv(&doc, c));
        let ab = compare_positions(&va, &vb).unwrap();
        let bc = compare_positions(&vb, &vc).unwrap();
        let ac = compare_positions(&va, &vc).unwrap();
        if ab == Less && bc == Less {
            prop_assert_eq!(ac, Less);
        }
    }

    /// The displacement is a group action: shifting by `a` then `b` equals
    /// shifting by `a + b`.
    #[test]
    fn orbit_shift_is_a_group_action(
        first_u in -9i64..=9,
        first_s in -9i64..=9,
        tail in proptest::collection::vec((1i64..=9, proptest::bool::ANY), 0..=2),
        a in -5i64..=5,
        b in -5i64..=5,
    ) {
        let doc = fixtures::sphere();
        let tail: Vec<i64> = tail.into_iter().map(|(m, neg)| if neg { -m } else { m }).collect();
        let mut ucomps = vec![first_u];
        ucomps.extend(tail.iter().copied());
        let mut scomps = vec![first_s];
        scomps.extend(tail.iter().copied());
        let x = SimpleFormula {
            u: PointVector::new(doc.manifold("u.1.x1"), ucomps),
            s: PointVector::new(doc.manifold("s.1.x3"), scomps),
            d: Sign::Plus,
        };
        let table = &doc.graph.manifolds;
        let two_steps = orbit_shift(&orbit_shift(&x, a, table).unwrap(), b, table).unwrap();
        let one_step = orbit_shift(&x, a + b, table).unwrap();
        prop_assert_eq!(two_steps, one_step);
    }

    /// Numeration shifts commute with the orientation flip, and both invert.
    #[test]
    fn shift_and_flip_commute_and_invert(
        s1 in -4i64..=4,
        s2 in -4i64..=4,
        s3 in -4i64..=4,
        s4 in -4i64..=4,
    ) {
        let doc = fixtures::sphere();
        let mut shifts = BTreeMap::new();
        for (m, s) in [("u.1.x1", s1), ("s.1.x2", s2), ("u.1.x2", s3), ("s.1.x3", s4)] {
            shifts.insert(doc.manifold(m), s);
        }
        let a = flip_orientation(&shift_numeration(&doc.basic, &shifts));
        let b = shift_numeration(&flip_orientation(&doc.basic), &shifts);
        prop_assert_eq!(&a, &b);
        let undo: BTreeMap<_, _> = shifts.iter().map(|(&m, &s)| (m, -s)).collect();
        prop_assert_eq!(shift_numeration(&shift_numeration(&doc.basic, &shifts), &undo), doc.basic.clone());
        prop_assert_eq!(flip_orientation(&flip_orientation(&doc.basic)), doc.basic.clone());
    }
}

fn fixture_extended_sets() -> Vec<(String, msinv_core::Document, CodingSet)> {
    [
        ("sphere", fixtures::sphere()),
        ("two_saddle_chain", fixtures::two_saddle_chain()),
        ("three_saddle_chain", fixtures::three_saddle_chain()),
        ("four_saddle_chain", fixtures::four_saddle_chain()),
        ("double_feeder_chain", fixtures::double_feeder_chain()),
        ("branched_tower", fixtures::branched_tower()),
    ]
    .into_iter()
    .map(|(name, doc)| {
        let ext = msinv_core::build_extended(&doc.basic, &doc.graph)
            .expect("fixtures expand")
            .extended;
        (name.to_string(), doc, ext)
    })
    .collect()
}

#[test]
fn instantiation_length_equals_family_depth() {
    let w = Window::new(-3, 3, 3);
    for (name, _, ext) in fixture_extended_sets() {
        for inst in enumerate_window(&ext, w).instances {
            let depth = ext.formulas[inst.formula].u.components.len();
            assert_eq!(
                inst.point.local_type().unwrap(),
                depth,
                "{name}: instance of wrong local type"
            );
        }
    }
}

#[test]
fn structural_laws_hold_on_all_fixture_expansions() {
    let w = Window::new(-3, 3, 3);
    for (name, doc, ext) in fixture_extended_sets() {
        let cloud = enumerate_window(&ext, w);
        let inj = msinv_core::check_injectivity(&cloud);
        assert!(inj.is_clean(), "{name}: collisions {:?}", inj.collisions);

        let eq = check_equivariance(&ext, w, &doc.graph.manifolds);
        assert!(eq.is_clean(), "{name}: equivariance misses {:?}", eq.misses);

        let add = check_additivity(&ext, w);
        assert!(
            add.is_clean(),
            "{name}: interior truncation misses {:?} / {:?}",
            add.u_violations,
            add.s_violations
        );

        let fin = check_type1_finiteness(&ext, &doc.graph.manifolds);
        assert!(fin.is_clean(), "{name}: {:?}", fin.violations);

        let acc = check_accumulation(&ext, w);
        assert!(acc.is_clean(), "{name}: {:?}", acc.violations);
    }
}

#[test]
fn per_manifold_lists_are_strictly_increasing_where_injective() {
    let w = Window::new(-2, 2, 2);
    for (name, _, ext) in fixture_extended_sets() {
        let cloud = enumerate_window(&ext, w);
        assert!(msinv_core::check_injectivity(&cloud).is_clean());
        for (m, entries) in &cloud.by_manifold {
            for pair in entries.windows(2) {
                assert!(
                    pair[0].key < pair[1].key || pair[0].vector == pair[1].vector,
                    "{name}: ties in the sorted list of {m:?}"
                );
            }
        }
    }
}
