use proptest::prelude::*;
use quasifold_core::affine::{AffineGroup, AffineMap};
use quasifold_core::bibundle::{BibundleClass, Lift, LiftFamily};
use quasifold_core::groupoid::EtaleGroupoid;
use quasifold_core::lift::{lift_local_diffeo, recover_affine, OrbitData, RecoveryResult, SampledMap};
use quasifold_core::model::{Atlas, ModelQuasifold, OpenBoxSet};
use quasifold_core::sampling::Sampler;
use quasifold_core::search::SearchBudget;
use quasifold_core::{Field, Scalar, Sign};

fn lattice() -> AffineGroup<Scalar> {
    AffineGroup::translations_1d(vec![Scalar::int(1), Scalar::sqrt(2)]).unwrap()
}

fn dyadic() -> AffineGroup<Scalar> {
    let double = AffineMap::line(Scalar::int(2), Scalar::int(0)).unwrap();
    AffineGroup::new(1, vec![double, AffineMap::translation(vec![Scalar::int(1)])]).unwrap()
}

fn shift() -> impl Strategy<Value = Scalar> {
    (-20i64..20, 1i64..6, -20i64..20, 1i64..6)
        .prop_map(|(a, b, c, d)| Scalar::ratio(a, b) + Scalar::ratio(c, d) * Scalar::sqrt(2))
}

fn round_trip(g: &AffineGroup<Scalar>, lo: i64, seed: u64) -> Result<(), TestCaseError> {
    let dom = OpenBoxSet::interval(Scalar::int(lo), Scalar::int(lo + 3)).unwrap();
    let pts = Sampler::new(seed).points_in_set(&dom, 4).unwrap();
    for e in g.enumerate(3) {
        let h = SampledMap::from_fn(dom.clone(), pts.clone(), |x| e.map.apply(x).unwrap()).unwrap();
        match recover_affine(&h, g, 3, 0.0).unwrap() {
            RecoveryResult::Match { element, residual } => {
                prop_assert_eq!(&element.map, &e.map);
                prop_assert_eq!(residual, 0.0);
            }
            other => return Err(TestCaseError::fail(format!("{other:?} for {}", e.map))),
        }
    }
    Ok(())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn exact_samples_recover_the_same_map(lo in -10i64..10, seed in 0u64..1000) {
        round_trip(&lattice(), lo, seed)?;
        round_trip(&dyadic(), lo, seed)?;
    }

    #[test]
    fn local_lift_hits_prescribed_point(t in shift(), p in -50i64..50, m in -3i64..3, n in -3i64..3, seed in 0u64..1000) {
        let atlas = Atlas::single(ModelQuasifold::new(OpenBoxSet::full(1), lattice()).unwrap());
        let g = EtaleGroupoid::action(lattice(), OpenBoxSet::full(1)).unwrap();
        let fam = LiftFamily::new(
            g.clone(),
            g.clone(),
            vec![Lift::new(OpenBoxSet::full(1), AffineMap::translation(vec![t.clone()]))],
            BibundleClass::Invertible,
        )
        .unwrap();
        let r = vec![Scalar::ratio(p, 7)];
        let r2 = vec![r[0].clone() + t + Scalar::int(m) + Scalar::int(n) * Scalar::sqrt(2)];
        let l = lift_local_diffeo(&atlas, &atlas, OrbitData::Family(&fam), (0, &r), (0, &r2), 4).unwrap();
        prop_assert_eq!(l.map.apply(&r).unwrap(), r2);
        // ψ is compatible with the orbit map near r
        let near = OpenBoxSet::interval(r[0].clone() - Scalar::int(1), r[0].clone() + Scalar::int(1)).unwrap();
        let om = fam.orbit_map();
        for x in Sampler::new(seed).points_in_set(&near, 20).unwrap() {
            let y = om.evaluate(0, &x, 2).unwrap().yes().unwrap();
            let v = g.orbit_equal((0, &l.map.apply(&x).unwrap()), (y.0, &y.1), SearchBudget::from_bound(2)).unwrap();
            prop_assert!(v.is_yes());
        }
    }

    // orbit-preserving but two group elements on one connected box: the fit fails
    #[test]
    fn piecewise_orbit_map_has_no_affine_fit(c in -4i64..4, m in 1i64..3, seed in 0u64..1000) {
        let dom = OpenBoxSet::interval(Scalar::int(c - 1), Scalar::int(c + 1)).unwrap();
        let jump = Scalar::int(m) * Scalar::sqrt(2);
        let pts = Sampler::new(seed).points_in_set(&dom, 12).unwrap();
        let cut = Scalar::int(c);
        let has_both = pts.iter().any(|x| x[0].compare(&cut).unwrap() == Sign::Negative)
            && pts.iter().any(|x| x[0].compare(&cut).unwrap() == Sign::Positive);
        prop_assume!(has_both);
        let h = SampledMap::from_fn(dom, pts, |x| {
            if x[0].compare(&cut).unwrap() == Sign::Positive {
                vec![x[0].clone() + jump.clone()]
            } else {
                x.to_vec()
            }
        })
        .unwrap();
        let r = recover_affine(&h, &lattice(), 3, 0.0).unwrap();
        prop_assert!(matches!(r, RecoveryResult::NoMatch { decided: true, .. }), "{:?}", r);
    }
}
