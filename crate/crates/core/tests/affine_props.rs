use proptest::prelude::*;
use quasifold_core::affine::{AffineGroup, AffineMap, GroupKind};
use quasifold_core::model::{Atlas, ModelQuasifold, OpenBoxSet};
use quasifold_core::{Field, Scalar, Sign, Verdict};

fn exact() -> impl Strategy<Value = Scalar> {
    (-20i64..20, 1i64..8, -20i64..20, 1i64..8)
        .prop_map(|(a, b, c, d)| Scalar::ratio(a, b) + Scalar::ratio(c, d) * Scalar::sqrt(2))
}

fn line() -> impl Strategy<Value = AffineMap<Scalar>> {
    (exact(), exact())
        .prop_filter("invertible", |(a, _)| a.sign() != Sign::Zero)
        .prop_map(|(a, b)| AffineMap::line(a, b).unwrap())
}

fn lattice_point() -> impl Strategy<Value = Scalar> {
    (-6i64..6, -6i64..6).prop_map(|(m, n)| Scalar::int(m) + Scalar::int(n) * Scalar::sqrt(2))
}

fn lattice() -> AffineGroup<Scalar> {
    AffineGroup::translations_1d(vec![Scalar::int(1), Scalar::sqrt(2)]).unwrap()
}

fn dyadic() -> AffineGroup<Scalar> {
    let double = AffineMap::line(Scalar::int(2), Scalar::int(0)).unwrap();
    AffineGroup::new(1, vec![double, AffineMap::translation(vec![Scalar::int(1)])]).unwrap()
}

fn maps(g: &AffineGroup<Scalar>, k: usize) -> Vec<AffineMap<Scalar>> {
    g.enumerate(k).into_iter().map(|e| e.map).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    // germ equality at a single point forces equality of affine maps
    #[test]
    fn affine_rigidity(f in line(), g in line(), x in exact()) {
        prop_assume!(f != g);
        let same_value = f.apply(&[x.clone()]).unwrap() == g.apply(&[x]).unwrap();
        prop_assert!(!same_value || f.linear() != g.linear());
    }

    #[test]
    fn orbit_equal_reflexive_and_symmetric(x in exact(), t in lattice_point(), off in -5i64..5) {
        let g = lattice();
        let y = x.clone() + t + Scalar::ratio(off, 7);
        prop_assert!(g.orbit_equal(&[x.clone()], &[x.clone()], 0).unwrap().is_yes());
        let there = g.orbit_equal(&[x.clone()], &[y.clone()], 2).unwrap();
        let back = g.orbit_equal(&[y.clone()], &[x.clone()], 2).unwrap();
        prop_assert_eq!(there.decided(), back.decided());
        prop_assert!(!there.is_unknown());
        if let (Verdict::Yes(e), Verdict::Yes(f)) = (there, back) {
            prop_assert_eq!(e.map.apply(&[x.clone()]).unwrap(), vec![y.clone()]);
            prop_assert_eq!(f.map.apply(&[y]).unwrap(), vec![x]);
            prop_assert_eq!(f.map, e.map.invert().unwrap());
        }
    }

    #[test]
    fn dyadic_witnesses_verify(x in -8i64..8, y in -8i64..8) {
        let g = dyadic();
        let (x, y) = (vec![Scalar::int(x)], vec![Scalar::int(y)]);
        let v = g.orbit_equal(&x, &y, 4).unwrap();
        prop_assert!(!v.is_no(), "a general group never certifies a negative");
        if let Verdict::Yes(e) = v {
            prop_assert_eq!(e.map.apply(&x).unwrap(), y);
        }
    }

    #[test]
    fn quotient_points_form_an_equivalence(x in exact(), s in lattice_point(), t in lattice_point()) {
        let m = ModelQuasifold::new(OpenBoxSet::full(1), lattice()).unwrap();
        let y = x.clone() + s;
        let z = y.clone() + t;
        let (hx, hy, hz) = (
            m.quotient_point(vec![x.clone()]).unwrap(),
            m.quotient_point(vec![y.clone()]).unwrap(),
            m.quotient_point(vec![z.clone()]).unwrap(),
        );
        let xy = hx.compare(&hy, 2).unwrap().yes().unwrap();
        let yx = hy.compare(&hx, 2).unwrap().yes().unwrap();
        let yz = hy.compare(&hz, 2).unwrap().yes().unwrap();
        let xz = hx.compare(&hz, 2).unwrap().yes().unwrap();
        prop_assert_eq!(yx.map, xy.map.invert().unwrap());
        prop_assert_eq!(yz.map.compose(&xy.map).unwrap(), xz.map.clone());
        prop_assert_eq!(xz.map.apply(&[x]).unwrap(), vec![z]);
    }

    #[test]
    fn single_chart_atlas_agrees_with_model(x in exact(), t in lattice_point(), off in 0i64..3) {
        let m = ModelQuasifold::new(OpenBoxSet::full(1), lattice()).unwrap();
        let atlas = Atlas::single(m.clone());
        let y = x.clone() + t + Scalar::ratio(off, 3);
        let via_model = m.quotient_point(vec![x.clone()]).unwrap().compare(&m.quotient_point(vec![y.clone()]).unwrap(), 2).unwrap();
        let via_atlas = atlas.atlas_pi(0, vec![x]).unwrap().compare(&atlas.atlas_pi(0, vec![y]).unwrap(), 2).unwrap();
        prop_assert_eq!(via_model.decided(), via_atlas.decided());
    }

    // orbit comparison in the model restricted to U matches the full model
    #[test]
    fn restriction_keeps_orbit_relation(a in -10i64..10, p in 0i64..40, q in 0i64..40, t in lattice_point()) {
        let m = ModelQuasifold::new(OpenBoxSet::full(1), lattice()).unwrap();
        let u = OpenBoxSet::interval(Scalar::int(a), Scalar::int(a + 4)).unwrap();
        let mu = m.restrict(&u).unwrap();
        let x = Scalar::int(a) + Scalar::ratio(p + 1, 11);
        let y = x.clone() + t + Scalar::ratio(q, 10) - Scalar::int(2);
        prop_assume!(u.contains(&[y.clone()]).unwrap());
        let full = m.quotient_point(vec![x.clone()]).unwrap().compare(&m.quotient_point(vec![y.clone()]).unwrap(), 2).unwrap();
        let part = mu.quotient_point(vec![x]).unwrap().compare(&mu.quotient_point(vec![y]).unwrap(), 2).unwrap();
        prop_assert_eq!(full.decided(), part.decided());
    }
}

#[test]
fn enumeration_is_monotone_in_the_bound() {
    for g in [lattice(), dyadic()] {
        for k in 0..3 {
            let small = maps(&g, k);
            let big = maps(&g, k + 1);
            assert!(small.iter().all(|m| big.contains(m)), "level {k}");
        }
    }
}

#[test]
fn words_evaluate_to_their_maps() {
    for g in [lattice(), dyadic()] {
        for e in g.enumerate(3) {
            assert_eq!(g.evaluate(&e.word).unwrap(), e.map);
        }
    }
}

#[test]
fn lattice_kind_and_counts() {
    assert_eq!(lattice().kind(), GroupKind::TranslationLattice);
    assert_eq!(lattice().enumerate(1).len(), 5);
    assert_eq!(lattice().enumerate(2).len(), 13);
}
