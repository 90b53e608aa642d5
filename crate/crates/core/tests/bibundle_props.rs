use proptest::prelude::*;
use quasifold_core::affine::AffineMap;
use quasifold_core::bibundle::{self, BibundleClass, CheckConfig, Classification, IsoOutcome, Lift, LiftFamily};
use quasifold_core::groupoid::EtaleGroupoid;
use quasifold_core::model::{Endpoint, Interval, OpenBox, OpenBoxSet};
use quasifold_core::search::SearchBudget;
use quasifold_core::torus::{self, QuadraticIrrational};
use quasifold_core::{Scalar, Verdict};

fn torus() -> EtaleGroupoid<Scalar> {
    torus::groupoids_for(&QuadraticIrrational::parse("sqrt(2)").unwrap()).unwrap()
}

fn cfg(samples: usize, seed: u64) -> CheckConfig {
    CheckConfig { bound: 2, samples, seed }
}

fn shift() -> impl Strategy<Value = Scalar> {
    (-20i64..20, 1i64..6, -20i64..20, 1i64..6)
        .prop_map(|(a, b, c, d)| Scalar::ratio(a, b) + Scalar::ratio(c, d) * Scalar::sqrt(2))
}

fn lattice_point() -> impl Strategy<Value = Scalar> {
    (-3i64..3, -3i64..3).prop_map(|(m, n)| Scalar::int(m) + Scalar::int(n) * Scalar::sqrt(2))
}

fn global(g: &EtaleGroupoid<Scalar>, map: AffineMap<Scalar>, class: BibundleClass) -> LiftFamily<Scalar> {
    LiftFamily::new(g.clone(), g.clone(), vec![Lift::new(OpenBoxSet::full(1), map)], class).unwrap()
}

fn ray(lo: Endpoint<Scalar>, hi: Endpoint<Scalar>) -> OpenBoxSet<Scalar> {
    OpenBoxSet::from_box(OpenBox::new(vec![Interval::new(lo, hi).unwrap()]))
}

/// `x ↦ x + t` left of 1 and `x ↦ x + t + λ` right of 0.
fn two_piece(g: &EtaleGroupoid<Scalar>, t: Scalar, lambda: Scalar) -> LiftFamily<Scalar> {
    let lifts = vec![
        Lift::new(ray(Endpoint::NegInf, Endpoint::Finite(Scalar::int(1))), AffineMap::translation(vec![t.clone()])),
        Lift::new(ray(Endpoint::Finite(Scalar::int(0)), Endpoint::PosInf), AffineMap::translation(vec![t + lambda])),
    ];
    LiftFamily::new(g.clone(), g.clone(), lifts, BibundleClass::LocallyInvertible).unwrap()
}

// multiplication by the unit 1 + √2 preserves ℤ + √2ℤ
fn unit_scaling(t: Scalar) -> AffineMap<Scalar> {
    AffineMap::line(Scalar::int(1) + Scalar::sqrt(2), t).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn identity_bibundle_is_identity_on_orbits(num in -100i64..100, den in 1i64..30) {
        let g = torus();
        let id = bibundle::identity_bibundle(&g);
        let x = vec![Scalar::ratio(num, den)];
        let Verdict::Yes((chart, y)) = id.orbit_map().evaluate(0, &x, 2).unwrap() else {
            panic!("identity undecided");
        };
        prop_assert!(g.orbit_equal((0, &x), (chart, &y), SearchBudget::from_bound(2)).unwrap().is_yes());
    }

    #[test]
    fn composition_is_functorial(t in shift(), l in lattice_point(), s in shift(), seed in 0u64..100) {
        let g = torus();
        let p = two_piece(&g, t, l);
        let q = global(&g, unit_scaling(s), BibundleClass::Invertible);
        for (a, b) in [(&p, &q), (&q, &p)] {
            let ab = bibundle::compose(a, b, 2).unwrap();
            let agree = bibundle::functoriality_check(a, b, &ab, &cfg(30, seed)).unwrap();
            prop_assert_eq!(agree.disagreed, 0);
            prop_assert!(agree.decided > 0);
        }
        let id = bibundle::identity_bibundle(&g);
        let ip = bibundle::compose(&id, &p, 2).unwrap();
        prop_assert_eq!(bibundle::functoriality_check(&id, &p, &ip, &cfg(30, seed)).unwrap().disagreed, 0);
    }

    // ⟨F ∘ G⟩ ≅ ⟨F⟩ ∘ ⟨G⟩
    #[test]
    fn functor_bibundles_respect_composition(t in shift(), s in shift()) {
        let g = torus();
        let c = cfg(10, 0);
        let f_map = unit_scaling(t);
        let g_map = AffineMap::translation(vec![s]);
        let f = bibundle::from_functor(g.clone(), g.clone(), vec![Lift::new(OpenBoxSet::full(1), f_map.clone())], &c).unwrap();
        let gg = bibundle::from_functor(g.clone(), g.clone(), vec![Lift::new(OpenBoxSet::full(1), g_map.clone())], &c).unwrap();
        let fg = bibundle::from_functor(g.clone(), g.clone(), vec![Lift::new(OpenBoxSet::full(1), f_map.compose(&g_map).unwrap())], &c).unwrap();
        let composed = bibundle::compose(&gg, &f, 2).unwrap();
        prop_assert_eq!(bibundle::isomorphic(&fg, &composed, &c).unwrap(), IsoOutcome::Yes);
    }

    // restrict-then-include agrees with include-then-restrict
    #[test]
    fn restriction_round_trip(t in shift(), l in lattice_point(), a in -10i64..10, w in 1i64..6, slack in 0i64..4, seed in 0u64..100) {
        let g = torus();
        let p = two_piece(&g, t.clone(), l.clone());
        let lo = Scalar::int(a);
        let hi = Scalar::int(a + w);
        let u = OpenBoxSet::interval(lo.clone(), hi.clone()).unwrap();
        // wide enough to hold P(U) on both pieces
        let reach = Scalar::int(4) + Scalar::int(3) * Scalar::sqrt(2) + Scalar::int(slack);
        let v = OpenBoxSet::interval(lo + t.clone() - reach.clone(), hi + t + reach).unwrap();
        let sq = bibundle::restriction_square(&p, &u, &v, &cfg(20, seed)).unwrap();
        prop_assert_eq!(sq.disagreed, 0);
        prop_assert!(sq.decided > 0);
    }
}

#[test]
fn composites_of_locally_invertible_stay_locally_invertible() {
    let g = torus();
    let c = cfg(10, 3);
    let cases = [
        (Scalar::ratio(1, 3), Scalar::sqrt(2), Scalar::ratio(-2, 5), Scalar::int(1)),
        (Scalar::sqrt(2), Scalar::int(-1), Scalar::ratio(7, 2), Scalar::int(0)),
    ];
    for (t1, l1, t2, l2) in cases {
        let p = two_piece(&g, t1, l1);
        let q = two_piece(&g, t2, l2);
        let qp = bibundle::compose(&p, &q, 2).unwrap();
        let report = bibundle::classify(&qp, &c).unwrap();
        assert!(
            matches!(report.class, Classification::LocallyInvertible | Classification::Invertible | Classification::Unknown),
            "{report:?}"
        );
        assert_ne!(report.class, Classification::Plain);
    }
}

#[test]
fn non_lattice_shift_is_not_isomorphic() {
    let g = torus();
    let p = global(&g, AffineMap::translation(vec![Scalar::ratio(1, 3)]), BibundleClass::Invertible);
    let q = global(&g, AffineMap::translation(vec![Scalar::ratio(1, 2)]), BibundleClass::Invertible);
    match bibundle::isomorphic(&p, &q, &cfg(10, 0)).unwrap() {
        IsoOutcome::No(w) => assert_eq!(w.point.0, 0),
        other => panic!("expected No, got {}", other.label()),
    }
}
