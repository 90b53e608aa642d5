use num_rational::BigRational;
use quasifold_core::bibundle::CheckConfig;
use quasifold_core::sampling::Sampler;
use quasifold_core::search::SearchBudget;
use quasifold_core::torus::{self, QuadraticIrrational, WitnessMatrix};
use quasifold_core::{Field, Scalar, Sign, Verdict};

const SET: [&str; 12] = [
    "sqrt(2)",
    "1+sqrt(2)",
    "1/sqrt(2)",
    "3-2*sqrt(2)",
    "(1+sqrt(2))/(2+sqrt(2))",
    "sqrt(3)",
    "2+sqrt(3)",
    "1/(1+sqrt(3))",
    "(1+sqrt(5))/2",
    "sqrt(5)",
    "-1/sqrt(5)",
    "sqrt(7)",
];

fn qi(s: &str) -> QuadraticIrrational {
    QuadraticIrrational::parse(s).unwrap()
}

fn decide(a: &QuadraticIrrational, b: &QuadraticIrrational) -> Option<WitnessMatrix> {
    match torus::morita_equivalent(a, b).unwrap() {
        Verdict::Yes(w) => Some(w),
        Verdict::No => None,
        Verdict::Unknown => panic!("undecided for {a} and {b}"),
    }
}

fn verifies(w: &WitnessMatrix, a: &QuadraticIrrational, b: &QuadraticIrrational) -> bool {
    let det = w.det();
    (det == 1.into() || det == (-1).into()) && w.apply(&a.value().unwrap()).unwrap() == b.value().unwrap()
}

#[test]
fn morita_equivalence_is_an_equivalence_relation() {
    let xs: Vec<_> = SET.iter().map(|s| qi(s)).collect();
    let n = xs.len();
    let mut table = vec![vec![None; n]; n];
    for i in 0..n {
        for j in 0..n {
            table[i][j] = decide(&xs[i], &xs[j]);
            if let Some(w) = &table[i][j] {
                assert!(verifies(w, &xs[i], &xs[j]), "{} -> {}", xs[i], xs[j]);
            }
        }
    }
    for i in 0..n {
        assert!(table[i][i].is_some(), "{} not reflexive", xs[i]);
        for j in 0..n {
            assert_eq!(table[i][j].is_some(), table[j][i].is_some(), "{} {}", xs[i], xs[j]);
            if let Some(w) = &table[i][j] {
                assert!(verifies(&w.inverse().unwrap(), &xs[j], &xs[i]));
            }
            for k in 0..n {
                if let (Some(a), Some(b)) = (&table[i][j], &table[j][k]) {
                    assert!(table[i][k].is_some(), "{} {} {}", xs[i], xs[j], xs[k]);
                    assert!(verifies(&b.mul(a), &xs[i], &xs[k]));
                }
            }
        }
    }
    // the set is not one class: fields differ
    assert!(table[0][5].is_none());
    assert!(table[8][9].is_none());
}

#[test]
fn witness_bibundle_is_bijective_on_orbits() {
    let pairs = [("sqrt(2)", "1+sqrt(2)"), ("sqrt(2)", "1/sqrt(2)"), ("sqrt(3)", "1/(1+sqrt(3))")];
    for (a, b) in pairs {
        let (a, b) = (qi(a), qi(b));
        let w = decide(&a, &b).unwrap();
        let fam = torus::lift_witness_to_bibundle(&a, &b, &w).unwrap();
        let inv = fam.inverse().unwrap();
        let (f, g) = (fam.orbit_map(), inv.orbit_map());
        let cfg = CheckConfig { bound: 2, samples: 100, seed: 1 };
        let mut rng = Sampler::new(cfg.seed);
        let mut decided = 0;
        for _ in 0..cfg.samples {
            let x = vec![Scalar::ratio(rng.int(-500, 500), rng.int(1, 40))];
            let Verdict::Yes(y) = f.evaluate(0, &x, cfg.bound).unwrap() else {
                continue;
            };
            let Verdict::Yes(back) = g.evaluate(y.0, &y.1, cfg.bound).unwrap() else {
                continue;
            };
            // |P⁻¹| ∘ |P| is the identity on orbits
            let src = torus::groupoids_for(&a).unwrap();
            assert!(src.orbit_equal((0, &x), (back.0, &back.1), SearchBudget::from_bound(2)).unwrap().is_yes());
            // distinct orbits stay distinct
            let other = vec![x[0].clone() + Scalar::ratio(1, 3)];
            assert!(f.same_image(&(0, x.clone()), &(0, other), cfg.bound).unwrap().is_no());
            decided += 1;
        }
        assert_eq!(decided, 100, "{a} -> {b}");
    }
}

#[test]
fn convergents_approximate_within_one_over_q_squared() {
    for s in SET {
        let a = qi(s);
        let value = a.value().unwrap();
        let cf = torus::continued_fraction(&a);
        for (p, q) in cf.convergents(21) {
            let approx = Scalar::rational(BigRational::new(p, q.clone()));
            let gap = (value.clone() - approx).abs_val();
            let bound = Scalar::rational(BigRational::new(1.into(), q.clone() * q));
            assert_eq!(gap.compare(&bound).unwrap(), Sign::Negative, "{s}");
        }
    }
}
