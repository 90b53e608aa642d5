use proptest::prelude::*;
use quasifold_core::affine::{AffineGroup, AffineMap};
use quasifold_core::groupoid::{germ_groupoid_of_atlas, EtaleGroupoid, GermArrow, Pseudogroup};
use quasifold_core::model::{Atlas, ModelQuasifold, OpenBoxSet};
use quasifold_core::sampling::Sampler;
use quasifold_core::search::{PathStep, SearchBudget};
use quasifold_core::torus::{self, QuadraticIrrational};
use quasifold_core::Scalar;

const BUDGET: SearchBudget = SearchBudget { word_bound: 2, max_hops: 2, max_nodes: 4096 };

fn torus_atlas() -> Atlas<Scalar> {
    torus::two_chart_atlas(&QuadraticIrrational::parse("sqrt(2)").unwrap()).unwrap()
}

fn lattice() -> AffineGroup<Scalar> {
    AffineGroup::translations_1d(vec![Scalar::int(1), Scalar::sqrt(2)]).unwrap()
}

fn in_chart() -> impl Strategy<Value = (usize, Scalar)> {
    (0usize..2, 1i64..200).prop_map(|(c, k)| (c, Scalar::ratio(k, 100)))
}

fn step_map(p: &Pseudogroup<Scalar>, s: &PathStep<Scalar>) -> AffineMap<Scalar> {
    match s {
        PathStep::Group { element, .. } => element.map.clone(),
        PathStep::Transition { index, inverse } => {
            let m = &p.transitions()[*index].map;
            if *inverse {
                m.invert().unwrap()
            } else {
                m.clone()
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn source_target_and_inverse_laws((chart, x) in in_chart(), pick in any::<prop::sample::Index>(), pick2 in any::<prop::sample::Index>()) {
        let g = germ_groupoid_of_atlas(&torus_atlas());
        let set = g.arrows_at(chart, &[x.clone()], BUDGET).unwrap();
        let h = g.effect(&pick.get(&set.arrows).arrow);
        let y = h.target().unwrap();
        let next = g.arrows_at(h.tgt_chart, &y, BUDGET).unwrap();
        let k = g.effect(&pick2.get(&next.arrows).arrow);
        let kh = k.compose(&h).unwrap();
        prop_assert_eq!(kh.source(), h.source());
        prop_assert_eq!(kh.target().unwrap(), k.target().unwrap());
        prop_assert_eq!(kh.src_chart, h.src_chart);
        prop_assert_eq!(kh.tgt_chart, k.tgt_chart);
        let inv = k.inverse().unwrap();
        prop_assert_eq!(k.compose(&inv).unwrap(), GermArrow::identity(k.tgt_chart, k.target().unwrap()));
    }

    // every realized arrow is the composite of its generator word
    #[test]
    fn realized_arrows_decompose_into_generators((chart, x) in in_chart()) {
        let atlas = torus_atlas();
        let p = Pseudogroup::from_atlas(&atlas);
        let g = germ_groupoid_of_atlas(&atlas);
        let set = g.arrows_at(chart, &[x.clone()], BUDGET).unwrap();
        prop_assert!(!set.arrows.is_empty());
        for r in &set.arrows {
            let mut m = AffineMap::identity(1);
            for s in &r.steps {
                m = step_map(&p, s).compose(&m).unwrap();
            }
            prop_assert_eq!(&m, r.arrow.map());
            prop_assert!(g.contains_germ((chart, &[x.clone()]), r.arrow.tgt_chart(), r.arrow.map(), BUDGET).unwrap().is_yes());
        }
    }

    // orbits of an action groupoid and of its germ groupoid coincide
    #[test]
    fn action_and_germ_groupoid_share_orbits(p in -30i64..30, m in -3i64..3, n in -3i64..3, off in 0i64..3) {
        let g = EtaleGroupoid::action(lattice(), OpenBoxSet::full(1)).unwrap();
        let gg = g.germ_groupoid();
        let x = vec![Scalar::ratio(p, 7)];
        let y = vec![x[0].clone() + Scalar::int(m) + Scalar::int(n) * Scalar::sqrt(2) + Scalar::ratio(off, 5)];
        let a = g.orbit_equal((0, &x), (0, &y), BUDGET).unwrap();
        let b = gg.orbit_equal((0, &x), (0, &y), BUDGET).unwrap();
        prop_assert_eq!(a.decided(), b.decided());
        prop_assert!(!a.is_unknown());
    }

    // within one chart the germ groupoid sees exactly the model orbits
    #[test]
    fn chart_orbits_match_model(p in 1i64..40, m in -2i64..2, n in -2i64..2, off in 0i64..2) {
        let v = OpenBoxSet::interval(Scalar::int(-5), Scalar::int(5)).unwrap();
        let model = ModelQuasifold::new(v, lattice()).unwrap();
        let g = germ_groupoid_of_atlas(&Atlas::single(model.clone()));
        let x = vec![Scalar::ratio(p, 10)];
        let y = vec![x[0].clone() + Scalar::int(m) + Scalar::int(n) * Scalar::sqrt(2) + Scalar::ratio(off, 3)];
        prop_assume!(model.domain().contains(&y).unwrap());
        let a = model.quotient_point(x.clone()).unwrap().compare(&model.quotient_point(y.clone()).unwrap(), 2).unwrap();
        let b = g.orbit_equal((0, &x), (0, &y), BUDGET).unwrap();
        prop_assert_eq!(a.decided(), b.decided());
    }
}

#[test]
fn every_generator_germ_is_realizable() {
    let atlas = torus_atlas();
    let p = Pseudogroup::from_atlas(&atlas);
    let g = germ_groupoid_of_atlas(&atlas);
    let mut rng = Sampler::new(9);
    for t in p.generators() {
        for x in rng.points_in_set(&t.domain, 10).unwrap() {
            let y = t.map.apply(&x).unwrap();
            if !p.charts()[t.to].contains(&y).unwrap() {
                continue;
            }
            assert!(g.contains_germ((t.from, &x), t.to, &t.map, BUDGET).unwrap().is_yes(), "{} at {:?}", t.map, x);
        }
    }
}

#[test]
fn action_groupoids_are_effective_by_rigidity() {
    let g = EtaleGroupoid::action(lattice(), OpenBoxSet::full(1)).unwrap();
    let e = g.is_effective(3);
    assert!(e.effective);
    assert!(germ_groupoid_of_atlas(&torus_atlas()).is_effective(3).effective);
}
